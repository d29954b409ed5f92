"""Generalized counting process (GCP) and its fractional version (GFCP).

The GCP makes jumps of size 1..k with per-size rates lambda_1..lambda_k.
Its pmf is a sum over the weighted compositions Omega(k, n) of
e^{-Lambda t} prod_j (lambda_j t)^{x_j} / x_j!; everything here evaluates
that sum in log space through the composition polynomial
p(n, t) = e^{-Lambda t} sum_s C_s(n) t^s with
C_s(n) = sum over compositions with x_1+...+x_k = s of prod lambda_j^{x_j}/x_j!.

The GFCP is the GCP run on an independent inverse-stable clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._backend import logpoly_eval_vec
from . import subordinators as subs
from .errors import DomainError, StabilityError
from .specfun import wright_m, wright_stability_bound
from .stats import quad_halfline


@dataclass(frozen=True)
class RateVector:
    """Jump rates lambda_1..lambda_k (index = jump amplitude)."""

    lam: tuple[float, ...]

    def __post_init__(self) -> None:
        lam = tuple(float(v) for v in self.lam)
        if len(lam) < 1:
            raise DomainError("need at least one rate")
        if any(v <= 0.0 for v in lam):
            raise DomainError("all rates must be positive")
        object.__setattr__(self, "lam", lam)

    @property
    def k(self) -> int:
        return len(self.lam)

    @property
    def total(self) -> float:
        """Lambda = sum of the rates."""
        return sum(self.lam)

    @property
    def r1(self) -> float:
        """Mean jump intensity sum_j j*lambda_j."""
        return sum(j * v for j, v in enumerate(self.lam, start=1))

    @property
    def r2(self) -> float:
        """Second jump moment sum_j j^2*lambda_j."""
        return sum(j * j * v for j, v in enumerate(self.lam, start=1))


def rates_order_k(lam: float, k: int) -> RateVector:
    """Equal rates lambda_j = lam (counting process of order k)."""
    if lam <= 0.0 or k < 1:
        raise DomainError("need lam > 0 and k >= 1")
    return RateVector((lam,) * k)


def rates_polya_aeppli(lam: float, rho: float, k: int) -> RateVector:
    """Geometric rates lambda_j = lam (1-rho) rho^(j-1) / (1 - rho^k)."""
    if lam <= 0.0 or k < 1:
        raise DomainError("need lam > 0 and k >= 1")
    if not 0.0 <= rho < 1.0:
        raise DomainError("need 0 <= rho < 1")
    if rho == 0.0:
        if k != 1:
            raise DomainError("rho = 0 zeroes every rate beyond j = 1; use k = 1")
        return RateVector((lam,))
    scale = lam * (1.0 - rho) / (1.0 - rho**k)
    return RateVector(tuple(scale * rho ** (j - 1) for j in range(1, k + 1)))


def enumerate_compositions(k: int, n: int) -> list[tuple[int, ...]]:
    """All (x_1..x_k) >= 0 with x_1 + 2 x_2 + ... + k x_k = n, in
    lexicographic order."""
    if k < 1:
        raise DomainError("k must be >= 1")
    if n < 0:
        raise DomainError("n must be >= 0")
    out: list[tuple[int, ...]] = []
    x = [0] * k

    def fill(j: int, remaining: int) -> None:
        if j == k:
            if remaining % k == 0:
                x[k - 1] = remaining // k
                out.append(tuple(x))
            return
        for xj in range(remaining // j + 1):
            x[j - 1] = xj
            fill(j + 1, remaining - j * xj)
        x[j - 1] = 0

    fill(1, n)
    return out


@lru_cache(maxsize=4096)
def _log_comp_coeffs(lam: tuple[float, ...], n: int) -> np.ndarray:
    """log C_s(n) for s = 0..n (base-e; -inf where no composition exists).

    Dynamic program over jump sizes; treat the result as read-only.
    """
    size = n + 1
    cur = np.full((size, size), -np.inf)
    cur[0, 0] = 0.0
    for j, lam_j in enumerate(lam, start=1):
        if j > n:
            break
        nxt = np.full((size, size), -np.inf)
        log_lam = math.log(lam_j)
        for x in range(n // j + 1):
            w = x * log_lam - math.lgamma(x + 1.0)
            tgt = nxt[j * x:, x:]
            np.logaddexp(tgt, cur[: size - j * x, : size - x] + w, out=tgt)
        cur = nxt
    return cur[n, :]


def gcp_logpmf_at_times(rates: RateVector, n: int, ts: np.ndarray) -> np.ndarray:
    """log p(n, t) over an array of times t >= 0 (t = 0 gives log delta_{n0})."""
    ts = np.asarray(ts, float)
    out = np.full(ts.shape, -np.inf)
    zero = ts == 0.0
    if n == 0:
        out[zero] = 0.0
    pos = ~zero
    if np.any(pos):
        logc = _log_comp_coeffs(rates.lam, n)
        out[pos] = logpoly_eval_vec(logc, ts[pos]) - rates.total * ts[pos]
    return out


def gcp_pmf(rates: RateVector, n: int, t: float) -> float:
    """Exact pmf P(M(t) = n); reduces to Poisson for k = 1."""
    if n < 0:
        raise DomainError("the counting process is nonnegative (n >= 0)")
    if not t > 0.0:
        raise DomainError("gcp_pmf requires t > 0")
    return float(np.exp(gcp_logpmf_at_times(rates, n, np.array([t]))[0]))


def gcp_pgf(rates: RateVector, u: float, t: float) -> float:
    """Probability generating function E u^M(t) for |u| <= 1."""
    if abs(u) > 1.0:
        raise DomainError("gcp_pgf requires |u| <= 1")
    expo = sum(lam_j * (1.0 - u**j) for j, lam_j in enumerate(rates.lam, start=1))
    return math.exp(-expo * t)


def gcp_cf(rates: RateVector, xi: float, t: float) -> complex:
    """Characteristic function E exp(i xi M(t))."""
    acc = sum(lam_j * np.exp(1j * xi * j) for j, lam_j in enumerate(rates.lam, start=1))
    return complex(np.exp(-t * (rates.total - acc)))


def gcp_moments(rates: RateVector, t: float) -> tuple[float, float]:
    """(mean, variance) = (r1 t, r2 t)."""
    return rates.r1 * t, rates.r2 * t


def gfcp_moments(rates: RateVector, alpha: float, s: float, t: float) -> tuple[float, float]:
    """(mean at t, Cov(M^alpha(s), M^alpha(t))) for 0 < s <= t."""
    if not 0.0 < s <= t:
        raise DomainError("gfcp_moments requires 0 < s <= t")
    mean_t, _, cov_y = subs.inverse_stable_moments(alpha, s, t)
    mean_s = subs.inverse_stable_moments(alpha, s, s)[0]
    if alpha == 1.0:
        return rates.r1 * t, rates.r2 * s
    return rates.r1 * mean_t, rates.r2 * mean_s + rates.r1**2 * cov_y


def sample_gcp(rates: RateVector, t: float, rng: np.random.Generator, size=None):
    """Marginal draw(s) via M(t) = sum_j j * Poisson(lambda_j t)."""
    if not t > 0.0:
        raise DomainError("sample_gcp requires t > 0")
    n = 1 if size is None else int(size)
    out = np.zeros(n, dtype=np.int64)
    for j, lam_j in enumerate(rates.lam, start=1):
        out += j * rng.poisson(lam_j * t, n)
    return int(out[0]) if size is None else out


def sample_gcp_increments(rates: RateVector, dts: np.ndarray,
                          rng: np.random.Generator, n_paths: int) -> np.ndarray:
    """Independent GCP increments over interval lengths ``dts`` (may vary
    per path when ``dts`` is (n_paths, m)); returns int64 (n_paths, m)."""
    dts = np.asarray(dts, float)
    if dts.ndim == 1:
        dts = np.broadcast_to(dts, (n_paths, dts.size))
    out = np.zeros(dts.shape, dtype=np.int64)
    for j, lam_j in enumerate(rates.lam, start=1):
        out += j * rng.poisson(lam_j * np.maximum(dts, 0.0))
    return out


@dataclass(frozen=True)
class SamplePath:
    """Jump times and sizes of one GCP trajectory on [0, horizon]."""

    times: np.ndarray
    sizes: np.ndarray
    horizon: float

    def value_at(self, t: float) -> int:
        return int(self.sizes[self.times <= t].sum())


def sample_gcp_path(rates: RateVector, horizon: float,
                    rng: np.random.Generator) -> SamplePath:
    """One trajectory: superposed Poisson streams, one per jump size."""
    if not horizon > 0.0:
        raise DomainError("horizon must be positive")
    times_parts = []
    sizes_parts = []
    for j, lam_j in enumerate(rates.lam, start=1):
        count = rng.poisson(lam_j * horizon)
        times_parts.append(rng.uniform(0.0, horizon, count))
        sizes_parts.append(np.full(count, j, dtype=np.int64))
    times = np.concatenate(times_parts)
    sizes = np.concatenate(sizes_parts)
    order = np.argsort(times, kind="stable")
    return SamplePath(times[order], sizes[order], horizon)


def gcp_lln_check(rates: RateVector, t_large: float, rng: np.random.Generator) -> float:
    """M(t)/t from one draw at a large t (converges to r1 in probability).

    Var(M(t)/t) = r2/t, so by Chebyshev the probability of missing r1 by
    more than eps is at most r2 / (t eps^2); at t = 1e4, eps = 0.01 r1 the
    exact normal tail is ~9% per draw, hence the majority-of-seeds test.
    """
    if t_large < 1e3:
        raise DomainError("gcp_lln_check requires t_large >= 1e3")
    return sample_gcp(rates, t_large, rng) / t_large


def _log_inverse_stable_pdf(alpha: float, us: np.ndarray, t: float) -> np.ndarray:
    if alpha == 0.5:
        return -(us**2) / (4.0 * t) - 0.5 * math.log(math.pi * t)
    scale = t ** (-alpha)
    vals = np.array([wright_m(alpha, float(u) * scale) for u in us])
    out = np.full(us.shape, -np.inf)
    pos = vals > 0.0
    out[pos] = np.log(vals[pos]) - alpha * math.log(t)
    return out


def _check_wright_domain(alpha: float, t: float, upper: float) -> None:
    if alpha == 0.5:
        return
    bound = wright_stability_bound(alpha)
    if upper * t ** (-alpha) > bound:
        raise StabilityError(
            f"quadrature needs M_alpha out to x={upper * t**(-alpha):.2f}, beyond "
            f"the stable domain x<={bound:.2f} at alpha={alpha}; use method='mc'")


def mixture_pmf_quad(logpmf_at_times, alpha: float, t: float,
                     tol: float = 1e-10, tail_eps: float = 1e-12) -> float:
    """Quadrature of integral p(n, u) h_alpha(u, t) du for any pmf evaluator.

    ``logpmf_at_times(us) -> log pmf array``.  The domain is truncated where
    the inverse-stable tail drops below ``tail_eps``.
    """
    upper = subs.inverse_stable_tail_cutoff(alpha, t, tail_eps)
    _check_wright_domain(alpha, t, upper)

    def integrand(us: np.ndarray) -> np.ndarray:
        return np.exp(logpmf_at_times(us) + _log_inverse_stable_pdf(alpha, us, t))

    return quad_halfline(integrand, tol, upper=upper)


def mixture_pmf_grid(logpmf_at_times, alpha: float, ts: np.ndarray,
                     panels: int = 64, tail_eps: float = 1e-13) -> np.ndarray:
    """Mixed pmf on a whole time grid via the scaled representation
    q(t) = integral of p(n, t^alpha w) M_alpha(w) dw with fixed w-nodes.

    The w-grid is shared across all times, so the integrand is one
    vectorized pmf call per time point.  Used by the Caputo residual checks.
    """
    w_max = subs.inverse_stable_tail_cutoff(alpha, 1.0, tail_eps)
    _check_wright_domain(alpha, 1.0, w_max)
    nodes, weights = np.polynomial.legendre.leggauss(12)
    edges = np.linspace(0.0, w_max, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    ws = (mid[:, None] + half * nodes[None, :]).ravel()
    wts = half * np.broadcast_to(weights, (panels, weights.size)).ravel()
    m_vals = np.exp(_log_inverse_stable_pdf(alpha, ws, 1.0))  # M_alpha(w)
    ts = np.asarray(ts, float)
    out = np.empty(ts.shape)
    for i, t in enumerate(ts.ravel()):
        if t == 0.0:
            out.ravel()[i] = np.exp(logpmf_at_times(np.array([0.0])))[0]
            continue
        vals = np.exp(logpmf_at_times(t**alpha * ws))
        out.ravel()[i] = float((vals * m_vals * wts).sum())
    return out


def gfcp_pmf(rates: RateVector, alpha: float, n: int, t: float,
             method: str = "quadrature", *, rng: np.random.Generator | None = None,
             paths: int = 1_000_000, tol: float = 1e-10) -> float:
    """pmf of the GFCP M^alpha(t) = M(Y_alpha(t)).

    quadrature: integral of gcp_pmf(n, u) h_alpha(u, t) du on a truncated
    domain (tail below 1e-12); raises StabilityError where the Wright series
    cannot cover the domain (alpha != 1/2).  mc: mixing over ``paths``
    inverse-stable draws.  alpha = 1 returns the GCP pmf exactly.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    if not 0.0 < alpha <= 1.0:
        raise DomainError("requires 0 < alpha <= 1")
    if not t > 0.0:
        raise DomainError("requires t > 0")
    if alpha == 1.0:
        return gcp_pmf(rates, n, t)
    if method == "quadrature":
        return mixture_pmf_quad(
            lambda us: gcp_logpmf_at_times(rates, n, us), alpha, t, tol)
    if method == "mc":
        if rng is None:
            raise DomainError("method='mc' requires rng")
        return gfcp_pmf_mc(rates, alpha, n, t, rng, paths)[0]
    raise DomainError(f"unknown method {method!r}")


def gfcp_pmf_mc(rates: RateVector, alpha: float, n: int, t: float,
                rng: np.random.Generator, paths: int = 1_000_000) -> tuple[float, float]:
    """Monte Carlo mixing estimate of the GFCP pmf, with standard error."""
    ys = subs.sample_inverse_stable(alpha, t, rng, size=paths)
    vals = np.exp(gcp_logpmf_at_times(rates, n, np.maximum(ys, 1e-300)))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(paths))


def sample_gfcp(rates: RateVector, alpha: float, t: float,
                rng: np.random.Generator, size=None):
    """Draw(s) of M^alpha(t): a GCP draw at an inverse-stable clock."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError("requires 0 < alpha <= 1")
    if alpha == 1.0:
        return sample_gcp(rates, t, rng, size)
    n = 1 if size is None else int(size)
    clocks = subs.sample_inverse_stable(alpha, t, rng, size=n)
    out = np.zeros(n, dtype=np.int64)
    for j, lam_j in enumerate(rates.lam, start=1):
        out += j * rng.poisson(lam_j * clocks)
    return int(out[0]) if size is None else out
