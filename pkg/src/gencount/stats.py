"""Estimators and numerical-analysis utilities shared by the verification paths.

Empirical pmfs, total-variation distance, correlation with jackknife errors,
log-log power-law fitting, the L1 discretization of the Caputo derivative,
and adaptive Gauss-Legendre quadrature on the half line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DegenerateColumn, DomainError, NonConvergence


@dataclass(frozen=True)
class PmfTable:
    """Finite piece of a pmf with its truncation window and mass deficit."""

    n_lo: int
    n_hi: int
    prob: Mapping[int, float]
    mass_deficit: float = field(init=False)

    def __post_init__(self) -> None:
        total = float(sum(self.prob.values()))
        if any(p < -1e-12 or p > 1.0 + 1e-12 for p in self.prob.values()):
            raise DomainError("probabilities must lie in [0, 1]")
        deficit = 1.0 - total
        if deficit < -1e-12:
            raise DomainError(f"pmf mass exceeds 1 by {-deficit:.3e}")
        object.__setattr__(self, "mass_deficit", deficit)

    def __getitem__(self, n: int) -> float:
        return self.prob.get(n, 0.0)

    @property
    def support(self) -> tuple[int, int]:
        return (self.n_lo, self.n_hi)


@dataclass(frozen=True)
class SampleEnsemble:
    """Process values indexed by (path, observation time) plus provenance."""

    values: np.ndarray  # shape (paths, len(times)), integer
    times: tuple[float, ...]
    seed: int
    meta: str = ""

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.ndim != 2 or values.shape[1] != len(self.times):
            raise DomainError("values must be a (paths x times) matrix")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise DomainError("times must be strictly increasing")
        object.__setattr__(self, "values", values)

    @property
    def n_paths(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    stderr: float
    r_squared: float

    def __post_init__(self) -> None:
        if self.stderr < 0.0:
            raise DomainError("stderr must be nonnegative")
        if not -1e-12 <= self.r_squared <= 1.0 + 1e-12:
            raise DomainError("r_squared must lie in [0, 1]")


def empirical_pmf(ensemble: SampleEnsemble, time_index: int) -> PmfTable:
    """Relative frequencies of the ensemble column at ``time_index``."""
    column = ensemble.values[:, time_index]
    states, counts = np.unique(column, return_counts=True)
    probs = counts / column.size
    table = {int(s): float(p) for s, p in zip(states, probs)}
    return PmfTable(int(states.min()), int(states.max()), table)


def tv_distance(p: PmfTable, q: PmfTable) -> float:
    """Half the l1 distance over the union support (missing states are 0)."""
    states = set(p.prob) | set(q.prob)
    return 0.5 * sum(abs(p[n] - q[n]) for n in states)


def corr_estimate(ensemble: SampleEnsemble, i: int, j: int) -> tuple[float, float]:
    """Pearson correlation of columns i and j with a jackknife standard error.

    The leave-one-out replicates are computed from downdated sufficient
    statistics, so the jackknife is O(paths).
    """
    if ensemble.n_paths < 1000:
        raise DomainError("corr_estimate needs at least 1000 paths")
    if i > j:
        raise DomainError("require i <= j")
    x = ensemble.values[:, i].astype(float)
    y = ensemble.values[:, j].astype(float)
    n = x.size
    if np.var(x) == 0.0 or np.var(y) == 0.0:
        raise DegenerateColumn("a column has zero variance")
    if i == j:
        return 1.0, 0.0
    sx, sy = x.sum(), y.sum()
    sxx, syy, sxy = (x * x).sum(), (y * y).sum(), (x * y).sum()

    def corr_from(n_, sx_, sy_, sxx_, syy_, sxy_):
        num = n_ * sxy_ - sx_ * sy_
        den = np.sqrt((n_ * sxx_ - sx_**2) * (n_ * syy_ - sy_**2))
        return num / den

    corr = float(corr_from(n, sx, sy, sxx, syy, sxy))
    reps = corr_from(n - 1, sx - x, sy - y, sxx - x * x, syy - y * y, sxy - x * y)
    stderr = math.sqrt((n - 1) / n * float(((reps - reps.mean()) ** 2).sum()))
    return corr, stderr


def lrd_fit(corr_values: Sequence[tuple[float, float]]) -> FitResult:
    """Least-squares fit of log corr against log t; slope estimates -gamma."""
    if len(corr_values) < 5:
        raise DomainError("lrd_fit needs at least 5 points")
    ts = np.array([t for t, _ in corr_values], float)
    cs = np.array([c for _, c in corr_values], float)
    if np.any(cs <= 0.0):
        raise DomainError("correlations must be positive for a log-log fit")
    if np.any(np.diff(ts) <= 0.0):
        raise DomainError("t values must be increasing")
    lx, ly = np.log(ts), np.log(cs)
    n = lx.size
    mx, my = lx.mean(), ly.mean()
    sxx = float(((lx - mx) ** 2).sum())
    slope = float(((lx - mx) * (ly - my)).sum() / sxx)
    intercept = my - slope * mx
    resid = ly - (intercept + slope * lx)
    ss_res = float((resid**2).sum())
    ss_tot = float(((ly - my) ** 2).sum())
    stderr = math.sqrt(ss_res / (n - 2) / sxx) if n > 2 else 0.0
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return FitResult(slope, intercept, stderr, min(max(r_squared, 0.0), 1.0))


def caputo_l1(samples: Sequence[tuple[float, float]], alpha: float) -> float:
    """L1 discretization of the Caputo derivative at the last grid point.

    ``samples`` is (t_i, f_i) on a uniform grid starting at 0.  The scheme is
    the standard piecewise-linear one with error O(h^{2-alpha}).
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("caputo_l1 requires 0 < alpha < 1")
    if len(samples) < 100:
        raise DomainError("caputo_l1 needs at least 100 grid points")
    ts = np.array([t for t, _ in samples], float)
    fs = np.array([f for _, f in samples], float)
    if abs(ts[0]) > 1e-12:
        raise DomainError("grid must start at t = 0")
    h = ts[1] - ts[0]
    if h <= 0.0 or np.max(np.abs(np.diff(ts) - h)) > 1e-9 * max(h, 1.0):
        raise DomainError("grid must be uniform and increasing")
    t_end = ts[-1]
    # sum_i (f_{i+1}-f_i)/h * [(t-t_i)^{1-a} - (t-t_{i+1})^{1-a}] / Gamma(2-a)
    left = (t_end - ts[:-1]) ** (1.0 - alpha)
    right = (t_end - ts[1:]) ** (1.0 - alpha)
    weights = left - right
    return float((np.diff(fs) / h * weights).sum() / math.gamma(2.0 - alpha))


# 12-point Gauss-Legendre nodes/weights on [-1, 1]
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


def _fixed_quad(f: Callable[[np.ndarray], np.ndarray],
                a: float, b: float, panels: int) -> float:
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    xs = (mid[:, None] + half * _GL_NODES[None, :]).ravel()
    vals = np.asarray(f(xs), float).reshape(panels, _GL_NODES.size)
    return float(half * (vals * _GL_WEIGHTS).sum())


def quad_refine(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                tol: float, max_levels: int = 20) -> float:
    """Composite Gauss-Legendre with panel doubling until successive
    estimates differ by < tol relative."""
    prev = _fixed_quad(f, a, b, 1)
    for level in range(1, max_levels + 1):
        cur = _fixed_quad(f, a, b, 2**level)
        if abs(cur - prev) <= tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise NonConvergence(f"quadrature not converged after {max_levels} refinement levels")


def quad_halfline(integrand: Callable[[np.ndarray], np.ndarray], tol: float,
                  upper: float | None = None) -> float:
    """Integral of ``integrand`` over [0, inf) (or [0, upper)).

    Substitutes u = v/(1-v) to map onto [0, 1), then refines a composite
    Gauss-Legendre rule until successive estimates agree to ``tol`` relative.
    The integrand must accept numpy arrays.
    """

    def g(v: np.ndarray) -> np.ndarray:
        u = v / (1.0 - v)
        return np.asarray(integrand(u), float) / (1.0 - v) ** 2

    v_max = 1.0 if upper is None else upper / (1.0 + upper)
    return quad_refine(g, 0.0, v_max, tol)
