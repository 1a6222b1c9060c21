import json
import math

import numpy as np
import pytest

from korovkin_lab.funcspace import Grid
from korovkin_lab.korovkin import (
    ContinuityBudget,
    KorovkinTestSet,
    STATUS_FAIL,
    STATUS_HYPOTHESIS,
    STATUS_PASS,
    a_strong_rows_generic,
    bound_ratio_curve,
    check_pointwise_bound,
    counterexample_run,
    estimate_budget,
    korovkin_probe,
    projection_control,
    squeeze_trial_norm,
    squeeze_trial_order,
    _squeeze_norm_sequences,
)
from korovkin_lab.operators import named_operator
from korovkin_lab.summability import (
    IdealSpec,
    MethodSpec,
    SHIPPED_MODULI,
    VERDICT_CONSISTENT,
    VERDICT_INCONSISTENT,
    cesaro_matrix,
    identity_matrix,
)

GRID = Grid.unit(200)
ALGEBRAIC = KorovkinTestSet.algebraic()


def t3(t):
    return np.asarray(t, dtype=float) ** 3


def expt(t):
    return np.exp(np.asarray(t, dtype=float))


class TestTestSets:
    def test_flavor_grid_matching(self):
        with pytest.raises(ValueError):
            KorovkinTestSet.trigonometric().check_grid(GRID)
        with pytest.raises(ValueError):
            KorovkinTestSet.algebraic().check_grid(Grid.circle())

    def test_for_grid_picks_flavor(self):
        assert KorovkinTestSet.for_grid(GRID).flavor == "algebraic"
        assert KorovkinTestSet.for_grid(Grid.circle()).flavor == "trigonometric"

    def test_sampled_triple(self):
        e0, e1, e2 = ALGEBRAIC.sampled(GRID)
        assert np.all(e0.values == 1.0)
        assert np.allclose(e2.values, e1.values ** 2)


class TestContinuityBudget:
    def test_constant_uses_full_span(self):
        b = estimate_budget(lambda t: np.ones_like(np.asarray(t, float)), GRID, 0.1)
        assert b.M == 1.0
        assert b.delta == pytest.approx(1.0)
        assert b.C == pytest.approx(max(0.1 + 1.0, 2.0 / b.delta ** 2))

    def test_lipschitz_one(self):
        b = estimate_budget(lambda t: np.asarray(t, float), GRID, 0.1)
        assert b.delta == pytest.approx(0.1, abs=2 * GRID.spacing)

    def test_lipschitz_two(self):
        # |t^2 - x^2| <= 2|t - x| on [0,1]; exhaustive pair scan oracle
        b = estimate_budget(lambda t: np.asarray(t, float) ** 2, GRID, 0.1)
        v = GRID.nodes ** 2
        gap = np.abs(v[:, None] - v[None, :])
        dist = np.abs(GRID.nodes[:, None] - GRID.nodes[None, :])
        assert np.max(gap[dist <= b.delta + 1e-15]) <= 0.1
        assert b.delta == pytest.approx(0.05, abs=2 * GRID.spacing)

    def test_oscillation_rejected(self):
        wild = lambda t: np.cos(1000.0 * np.asarray(t, float))
        with pytest.raises(ValueError, match="delta"):
            estimate_budget(wild, GRID, 0.01)


class TestPointwiseBound:
    def test_constant_slack_is_epsilon(self):
        f = lambda t: np.ones_like(np.asarray(t, float))
        b = estimate_budget(f, GRID, 0.1)
        r = check_pointwise_bound(f, b, GRID)
        assert r.passed and r.min_slack == pytest.approx(0.1)

    def test_estimated_budget_always_passes(self):
        for f in (t3, expt, lambda t: np.abs(np.asarray(t, float) - 0.5)):
            b = estimate_budget(f, GRID, 0.1)
            assert check_pointwise_bound(f, b, GRID).passed

    def test_tampered_budget_fails_with_witness(self):
        f = lambda t: np.asarray(t, float) ** 2
        bad = ContinuityBudget(epsilon=0.1, delta=1.0, M=0.01, C=0.11)
        r = check_pointwise_bound(f, bad, GRID)
        assert not r.passed
        t, x = r.worst_pair
        assert abs(f(np.array(t)) - f(np.array(x))) > \
            bad.epsilon + 2 * bad.M / bad.delta ** 2 * (t - x) ** 2


class TestBoundRatios:
    def test_probe_in_test_set_stays_below_one(self):
        ops = named_operator("bernstein", GRID)
        pts = bound_ratio_curve(ops, ALGEBRAIC.evals[2], ALGEBRAIC, [5, 10, 20])
        assert all(v <= 1.0 + 1e-12 for _, v in pts)

    def test_cubic_ratios_bounded(self):
        ops = named_operator("bernstein", GRID)
        pts = bound_ratio_curve(ops, t3, ALGEBRAIC, list(range(5, 51)))
        vals = [v for _, v in pts]
        assert all(not math.isnan(v) for v in vals)
        assert max(vals) < 2.0
        # oracle at n=10: both sides computed directly
        from korovkin_lab.operators import bernstein_apply
        from korovkin_lab.funcspace import sample, sup_norm
        num = sup_norm(bernstein_apply(10, t3, GRID) - sample(t3, GRID))
        e2 = ALGEBRAIC.evals[2]
        den = sup_norm(bernstein_apply(10, e2, GRID) - sample(e2, GRID))
        got = dict(pts)[10]
        assert got == pytest.approx(num / den, rel=1e-9)

    def test_exact_operator_gives_undefined_ratio(self):
        from korovkin_lab.operators import CustomOperators
        from korovkin_lab.funcspace import sample
        exact = CustomOperators(GRID, lambda n, f, g: sample(f, g), "exact")
        pts = bound_ratio_curve(exact, t3, ALGEBRAIC, [5, 6])
        assert all(math.isnan(v) for _, v in pts)


class TestKorovkinProbe:
    def test_bernstein_norm_all_consistent(self):
        ops = named_operator("bernstein", GRID)
        rep = korovkin_probe(ops, MethodSpec("norm"), ALGEBRAIC,
                             [("t3", t3), ("expt", expt)], N=200, tau=0.02)
        assert all(c.verdict == VERDICT_CONSISTENT
                   for c in rep.test_curves.values())
        assert all(c.verdict == VERDICT_CONSISTENT
                   for c in rep.probe_curves.values())
        assert rep.verdict_equivalence

    def test_modulated_norm_vacuous_equivalence(self):
        ops = named_operator("modulated-squares", GRID)
        rep = korovkin_probe(ops, MethodSpec("norm"), ALGEBRAIC,
                             [("e0_again", ALGEBRAIC.evals[0])], N=2000, tau=0.05)
        assert all(c.verdict == VERDICT_INCONSISTENT
                   for c in rep.test_curves.values())
        assert rep.verdict_equivalence  # both sides fail together

    def test_modulated_statistical_consistent(self):
        ops = named_operator("modulated-squares", GRID)
        rep = korovkin_probe(ops, MethodSpec("statistical", epsilon=0.1),
                             ALGEBRAIC, [("t3", t3)], N=2000, tau=0.05)
        assert all(c.verdict == VERDICT_CONSISTENT
                   for c in rep.test_curves.values())
        assert rep.verdict_equivalence

    def test_json_and_csv_bundle(self):
        ops = named_operator("bernstein", GRID)
        rep = korovkin_probe(ops, MethodSpec("norm"), ALGEBRAIC,
                             [("t3", t3)], N=200, tau=0.02)
        d = json.loads(rep.to_json())
        assert d["verdict_equivalence"] is True
        assert set(d["test_curves"]) == {"e0", "e1", "e2"}
        bundle = rep.to_csv_bundle()
        assert {"test_0.csv", "test_1.csv", "test_2.csv",
                "probe_t3.csv", "ratios.csv"} <= set(bundle)
        assert bundle["ratios.csv"].startswith("n,ratio\n")


NORM_METHODS = [
    MethodSpec("statistical", epsilon=0.5),
    MethodSpec("ideal", epsilon=0.5, ideal=IdealSpec("zero_density")),
    MethodSpec("strong_wp", p=1.5),
    MethodSpec("a_strong", matrix=cesaro_matrix()),
    MethodSpec("a_statistical", epsilon=0.5, matrix=identity_matrix()),
    MethodSpec("f_statistical", epsilon=0.5, modulus=SHIPPED_MODULI["sqrt"]),
    MethodSpec("f_strong", modulus=SHIPPED_MODULI["log1p"]),
]


class TestSqueezeNorm:
    @pytest.mark.parametrize("method", NORM_METHODS, ids=lambda m: m.kind)
    def test_hundred_seeds_pass(self, method):
        for seed in range(100):
            assert squeeze_trial_norm(method, 2.0, seed, N=500).status == STATUS_PASS

    @pytest.mark.parametrize("C", [1.0, 2.0, 10.0])
    def test_statistical_inclusion_across_constants(self, C):
        m = MethodSpec("statistical", epsilon=0.5)
        for seed in range(50):
            assert squeeze_trial_norm(m, C, seed, N=500).status == STATUS_PASS

    def test_tamper_reports_hypothesis_violation(self):
        m = MethodSpec("statistical", epsilon=0.5)
        r = squeeze_trial_norm(m, 2.0, 3, N=500, tamper=True)
        assert r.status == STATUS_HYPOTHESIS
        assert "index" in r.detail

    def test_unsupported_kind_named(self):
        with pytest.raises(ValueError, match="norm"):
            squeeze_trial_norm(MethodSpec("norm"), 1.0, 0)

    def test_a_strong_fast_paths_match_generic(self):
        a, b, c, d = _squeeze_norm_sequences(2.0, 11, 300)
        d[37] *= 100.0  # force some violations so both paths must agree on them
        for A in (cesaro_matrix(), identity_matrix()):
            from korovkin_lab.korovkin import _a_strong_row_violations
            fast = _a_strong_row_violations(A, a, b, c, d, 2.0, 300)
            ref = a_strong_rows_generic(A, a, b, c, d, 2.0, 300)
            assert np.array_equal(fast, ref)


class TestSqueezeOrder:
    @pytest.mark.parametrize("m", [10, 50, 200])
    def test_almost_windows(self, m):
        spec = MethodSpec("almost", almost_m=m, almost_n_max=50)
        for seed in range(20):
            assert squeeze_trial_order(spec, 2.0, seed, N=400).status == STATUS_PASS

    @pytest.mark.parametrize("A", [cesaro_matrix(), identity_matrix()],
                             ids=lambda a: a.name)
    def test_matrices(self, A):
        spec = MethodSpec("matrix", matrix=A)
        for seed in range(20):
            assert squeeze_trial_order(spec, 2.0, seed, N=300).status == STATUS_PASS

    def test_degenerate_C_zero(self):
        spec = MethodSpec("matrix", matrix=cesaro_matrix())
        assert squeeze_trial_order(spec, 0.0, 5, N=300).status == STATUS_PASS

    def test_unsupported_kind_named(self):
        with pytest.raises(ValueError, match="statistical"):
            squeeze_trial_order(MethodSpec("statistical", epsilon=0.5), 1.0, 0)


class TestProjectionControl:
    def test_preservation_fails(self):
        r = projection_control()
        assert r.domination_holds
        assert r.xyz_projection_residual <= 1e-12
        assert r.w_projection_residual > 0.01
        assert r.preservation_fails


class TestCounterexample:
    def test_small_run_separates(self):
        rep = counterexample_run(2000, 0.5)
        assert rep.separates
        # exceedance density is exactly the square count over N
        for nm in ("e0", "e1", "e2"):
            assert rep.statistical_residuals[nm] == math.isqrt(2000) / 2000
        # classical residual is exactly 1 at every square index
        for nm, pairs in rep.square_residuals.items():
            assert len(pairs) == math.isqrt(2000)
            for n, v in pairs:
                assert math.isqrt(n) ** 2 == n
                assert v == pytest.approx(1.0, abs=1e-12)

    def test_large_epsilon_sees_nothing(self):
        # the exceedances have magnitude exactly 1, so a 1.5 threshold counts
        # none of them; the report flags the blindness instead of erroring
        rep = counterexample_run(500, 1.5)
        assert rep.statistical_residuals["e0"] == 0.0
        assert rep.epsilon_blind
        assert not counterexample_run(500, 0.5).epsilon_blind

    def test_validation(self):
        with pytest.raises(ValueError):
            counterexample_run(50, 0.5)
        with pytest.raises(ValueError):
            counterexample_run(200, -0.5)
        with pytest.raises(ValueError):
            counterexample_run(200, 0.5, grid_m=201)
