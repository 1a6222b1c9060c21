"""Positive linear operator sequences.

Shipped kinds: Bernstein polynomials on [0, 1], Fejer means on the periodic
grid, and the modulated sequence (1 + z_n) * B_n used as the Korovkin
counterexample.  Every operator consumes a function *evaluator* (a callable on
reals) so that Bernstein can read values off the grid; Fejer samples the
evaluator onto its grid and then works purely with quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from .funcspace import Grid, SampledFunction, sample, sup_norm

MAX_BERNSTEIN_INDEX = 10_000

# index below which the full (n+1) x (m+1) weight matrix is used; above it the
# binomial weights are windowed around the mode (tail mass < 1e-12)
_FULL_MATRIX_LIMIT = 300
_WINDOW_SIGMAS = 6.0
_WINDOW_PAD = 16

_lgamma_table = np.array([0.0])


def _lgamma(n_max: int) -> np.ndarray:
    """Cached table of log(k!) for k = 0..n_max."""
    global _lgamma_table
    if len(_lgamma_table) <= n_max:
        _lgamma_table = gammaln(np.arange(1, n_max + 2, dtype=float))
    return _lgamma_table


def _eval_on(f_eval: Callable, x: np.ndarray) -> np.ndarray:
    try:
        v = np.asarray(f_eval(x), dtype=float)
        if v.shape != x.shape:
            raise TypeError
    except Exception:
        v = np.array([float(f_eval(float(t))) for t in x])
    if not np.all(np.isfinite(v)):
        bad = int(np.flatnonzero(~np.isfinite(v))[0])
        raise ValueError(f"non-finite evaluation at t={x[bad]!r}")
    return v


def _bernstein_batch_values(n: int, f_node_values: Sequence[np.ndarray],
                            x: np.ndarray) -> list[np.ndarray]:
    """Apply B_n to several functions given their values at the nodes k/n.

    The binomial weights are shared across the batch.  Each output value is
    computed as f(anchor) + sum_k w_k * (f_k - f(anchor)) with the anchor at
    the distribution's mode, which makes constants exactly invariant and
    keeps cancellation error proportional to the local variation of f.

    Weights come from the ratio recurrence pmf(k)/pmf(k-1) accumulated in log
    space and anchored at the mode, where the single lgamma evaluation per
    column happens; this avoids large gathers into a factorial table.  For
    n above the full-matrix limit only a window of ~7.5 standard deviations
    around the mode is kept (truncated tail mass below 1e-12).
    """
    lg = _lgamma(n)
    interior = (x > 0.0) & (x < 1.0)
    xi = x[interior]
    mode = np.rint(n * xi).astype(np.int64)

    logx = np.log(xi)
    log1mx = np.log1p(-xi)
    logw_mode = (lg[n] - lg[mode] - lg[n - mode]) + mode * logx + (n - mode) * log1mx

    if n <= _FULL_MATRIX_LIMIT:
        # exact full weight matrix, shape (columns, k)
        k = np.arange(n + 1)[None, :]
        logw = (lg[n] - lg[k] - lg[n - k]) + k * logx[:, None] + (n - k) * log1mx[:, None]
        w = np.exp(logw)
        anchors = [fv[mode] for fv in f_node_values]
        g = np.stack([fv[None, :] - a[:, None] for fv, a in zip(f_node_values, anchors)])
    else:
        half = int(_WINDOW_SIGMAS * math.sqrt(0.25 * n)) + _WINDOW_PAD
        width = 2 * half + 1
        swv = np.lib.stride_tricks.sliding_window_view
        # pmf ratio table r[k] = pmf(k)/pmf(k-1) / (x/(1-x)), padded with ones
        # outside 1..n so that out-of-range rows stay finite (zeroed below)
        rt = np.ones(n + 2 * half + 1)
        ks = np.arange(1, n + 1, dtype=float)
        rt[half + 1: half + n + 1] = (n + 1.0 - ks) / ks
        lr = swv(rt, width)[mode]
        np.multiply(lr, (xi / (1.0 - xi))[:, None], out=lr)
        np.log(lr, out=lr)
        # flatten the log-ratio outside 0..n so the cumsum plateaus there
        left = np.flatnonzero(mode < half)
        right = np.flatnonzero(mode > n - half)
        for i in left:
            lr[i, : half - mode[i]] = 0.0
        for i in right:
            lr[i, half + (n - mode[i]) + 1:] = 0.0
        w = np.cumsum(lr, axis=1)
        # column `half` of each window is the mode itself
        np.subtract(w, (w[:, half] - logw_mode)[:, None], out=w)
        np.exp(w, out=w)
        for i in left:
            w[i, : half - mode[i]] = 0.0
        for i in right:
            w[i, half + (n - mode[i]) + 1:] = 0.0
        anchors = [fv[mode] for fv in f_node_values]
        g = np.empty((len(f_node_values), len(xi), width))
        pad = np.empty(n + 1 + 2 * half)
        for p, (fv, a) in enumerate(zip(f_node_values, anchors)):
            pad[:half] = fv[0]
            pad[half: half + n + 1] = fv
            pad[half + n + 1:] = fv[-1]
            g[p] = swv(pad, width)[mode]
            g[p] -= a[:, None]

    dots = np.einsum("iw,piw->pi", w, g)

    outs = []
    for a, dot, fv in zip(anchors, dots, f_node_values):
        res = np.empty_like(x)
        res[interior] = a + dot
        if x[0] <= 0.0:
            res[x <= 0.0] = fv[0]
        if x[-1] >= 1.0:
            res[x >= 1.0] = fv[-1]
        outs.append(res)
    return outs


def bernstein_apply_batch(n: int, f_evals: Sequence[Callable],
                          grid: Grid) -> list[SampledFunction]:
    """B_n f for several f at once, sharing the weight computation."""
    if n < 1:
        raise ValueError("Bernstein index must be >= 1")
    if n > MAX_BERNSTEIN_INDEX:
        raise ValueError(f"Bernstein index capped at {MAX_BERNSTEIN_INDEX}")
    if grid.periodic or grid.a != 0.0 or grid.b != 1.0:
        raise ValueError("Bernstein operators require a non-periodic grid on [0, 1]")
    kn = np.arange(n + 1) / n
    fvals = [_eval_on(f, kn) for f in f_evals]
    outs = _bernstein_batch_values(n, fvals, grid.nodes)
    return [SampledFunction(grid, v) for v in outs]


def bernstein_apply(n: int, f_eval: Callable, grid: Grid) -> SampledFunction:
    """Classical Bernstein polynomial B_n f sampled on the grid.

    B_n f(x) = sum_k f(k/n) C(n,k) x^k (1-x)^(n-k); f is evaluated at the
    Bernstein nodes k/n, not at the grid nodes.
    """
    return bernstein_apply_batch(n, [f_eval], grid)[0]


def fejer_kernel(n: int, u: np.ndarray) -> np.ndarray:
    """Fejer kernel F_n(u) = (1/(n+1)) (sin((n+1)u/2) / sin(u/2))^2."""
    half = 0.5 * np.asarray(u, dtype=float)
    s = np.sin(half)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (np.sin((n + 1) * half) / s) ** 2 / (n + 1)
    return np.where(np.abs(s) < 1e-12, float(n + 1), val)


def fejer_apply(n: int, f: SampledFunction) -> SampledFunction:
    """Fejer mean sigma_n f via trapezoidal quadrature of the kernel
    convolution on the periodic grid."""
    if n < 0:
        raise ValueError("Fejer index must be >= 0")
    grid = f.grid
    if not grid.periodic:
        raise ValueError("Fejer means require a periodic grid")
    t = grid.nodes[:-1]
    # circulant kernel matrix; (1/2pi) integral becomes a plain mean on the
    # uniform periodic grid
    K = fejer_kernel(n, t[:, None] - t[None, :])
    out = K @ f.values[:-1] / grid.m
    return SampledFunction(grid, np.append(out, out[0]))


@dataclass(frozen=True)
class BinarySequence:
    """A deterministic 0/1-valued sequence over the positive integers."""

    membership: Callable[[int], int]
    description: str

    def __call__(self, n: int) -> int:
        z = int(self.membership(n))
        if z not in (0, 1):
            raise ValueError(f"binary sequence produced {z!r} at n={n}")
        return z


def perfect_squares() -> BinarySequence:
    return BinarySequence(lambda n: int(math.isqrt(n) ** 2 == n), "perfect squares")


class OperatorSequence:
    """Indexed family n -> positive linear operator on sampled functions."""

    kind = "custom"
    min_index = 1

    def __init__(self, grid: Grid):
        self.grid = grid

    def apply(self, n: int, f_eval: Callable) -> SampledFunction:
        raise NotImplementedError

    def apply_batch(self, n: int, f_evals: Sequence[Callable]) -> list[SampledFunction]:
        return [self.apply(n, f) for f in f_evals]


class BernsteinOperators(OperatorSequence):
    kind = "bernstein"

    def apply(self, n, f_eval):
        return bernstein_apply(n, f_eval, self.grid)

    def apply_batch(self, n, f_evals):
        return bernstein_apply_batch(n, f_evals, self.grid)


class FejerOperators(OperatorSequence):
    kind = "fejer"
    min_index = 0

    def apply(self, n, f_eval):
        return fejer_apply(n, sample(f_eval, self.grid))


class ModulatedOperators(OperatorSequence):
    """(1 + z_n) * base_n, the counterexample construction."""

    kind = "modulated"

    def __init__(self, base: OperatorSequence, z: BinarySequence):
        super().__init__(base.grid)
        self.base = base
        self.z = z
        self.min_index = base.min_index

    def apply(self, n, f_eval):
        return (1 + self.z(n)) * self.base.apply(n, f_eval)

    def apply_batch(self, n, f_evals):
        c = 1 + self.z(n)
        return [c * g for g in self.base.apply_batch(n, f_evals)]


class CustomOperators(OperatorSequence):
    """Wrap an arbitrary (n, f_eval, grid) -> SampledFunction rule."""

    def __init__(self, grid: Grid, fn: Callable, name: str = "custom"):
        super().__init__(grid)
        self.fn = fn
        self.name = name

    def apply(self, n, f_eval):
        return self.fn(n, f_eval, self.grid)


def modulated_apply(base: OperatorSequence, z: BinarySequence, n: int,
                    f_eval: Callable) -> SampledFunction:
    return (1 + z(n)) * base.apply(n, f_eval)


def named_operator(name: str, grid: Grid | None = None) -> OperatorSequence:
    """Operator scenarios addressable by name in the CLI config."""
    if name == "bernstein":
        return BernsteinOperators(grid or Grid.unit())
    if name == "fejer":
        return FejerOperators(grid or Grid.circle())
    if name == "modulated-squares":
        return ModulatedOperators(BernsteinOperators(grid or Grid.unit()),
                                  perfect_squares())
    raise ValueError(f"unknown operator {name!r}; choose from "
                     "bernstein, fejer, modulated-squares")


@dataclass
class PositivityReport:
    indices: list[int]
    min_values: list[float]
    passed: bool
    witness: tuple[int, int, float] | None = None  # (index, trial, value)


def positivity_audit(ops: OperatorSequence, indices: Sequence[int],
                     trials: int, seed: int) -> PositivityReport:
    """Apply each operator to random nonnegative piecewise-linear functions
    and report the minimum output value; pass iff >= -1e-12."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    grid = ops.grid
    mins, witness = [], None
    for n in indices:
        worst = math.inf
        for trial in range(trials):
            nb = int(rng.integers(4, 10))
            xs = np.sort(rng.uniform(grid.a, grid.b, nb))
            xs = np.concatenate(([grid.a], xs, [grid.b]))
            ys = rng.uniform(0.0, 1.0, len(xs))
            if grid.periodic:
                ys[-1] = ys[0]
            probe = lambda t, xs=xs, ys=ys: np.interp(t, xs, ys)
            low = float(np.min(ops.apply(n, probe).values))
            if low < worst:
                worst = low
                if low < -1e-12 and witness is None:
                    witness = (n, trial, low)
        mins.append(worst)
    passed = all(v >= -1e-12 for v in mins)
    return PositivityReport(list(indices), mins, passed, witness)


class ResidualTable:
    """Per-index outputs of an operator sequence against fixed probes.

    ``norms[name][i]`` is sup|L_n f - limit| at n = i + 1; ``values`` holds
    the raw node values when requested (needed by the matrix / almost
    summability kinds).  Built incrementally and cached on the operator.
    """

    def __init__(self, start: int = 1):
        self.start = start
        self.norms: dict[str, np.ndarray] = {}
        self.values: dict[str, np.ndarray] = {}


def residual_table(ops: OperatorSequence, probes: Sequence[tuple[str, Callable]],
                   limits: Sequence[SampledFunction], n_max: int,
                   keep_values: bool = False) -> ResidualTable:
    """Norm residuals (and optionally node values) for n = 1..n_max.

    Results are cached on the operator instance and extended on demand, so
    repeated probes at growing truncations only pay for the new indices.
    """
    cache = getattr(ops, "_residual_table", None)
    if cache is None:
        cache = ResidualTable()
        ops._residual_table = cache
    names = [name for name, _ in probes]
    done = min(len(cache.norms.get(nm, ())) for nm in names) if names else 0
    if keep_values:
        done = min([done] + [len(cache.values.get(nm, ())) for nm in names])
    if done < n_max:
        new_norms: dict[str, list] = {nm: [] for nm in names}
        new_vals: dict[str, list] = {nm: [] for nm in names}
        evals = [f for _, f in probes]
        for n in range(done + 1, n_max + 1):
            outs = ops.apply_batch(n, evals)
            for (nm, _), out, lim in zip(probes, outs, limits):
                new_norms[nm].append(sup_norm(out - lim))
                if keep_values:
                    new_vals[nm].append(out.values)
        for nm in names:
            old = cache.norms.get(nm, np.empty(0))[:done]
            cache.norms[nm] = np.concatenate([old, np.array(new_norms[nm])])
            if keep_values:
                oldv = cache.values.get(nm, np.empty((0, 0)))[:done]
                block = np.array(new_vals[nm])
                cache.values[nm] = block if done == 0 else np.concatenate([oldv, block])
    return cache
