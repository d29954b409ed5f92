"""Time-changed counting processes.

Forward direction: the counting process (or its fractional version) run on a
Levy subordinator clock D_f(t); the pmf is a composition sum against the
weighted Laplace moments E(e^{-Lambda D} D^s).  Inverse direction: the clock
is the first-passage time H_f(t), whose moments are Monte Carlo estimated
from grid first-passage paths.  Jump-rate and Levy-measure formulas are
implemented separately per subordinator family so their required equality is
a genuine cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import subordinators as subs
from ._backend import logpoly_eval_vec
from .errors import DomainError, Unsupported
from .gcp import RateVector, _log_comp_coeffs, gcp_logpmf_at_times
from .specfun import incomplete_beta, incomplete_beta_vec
from .stats import quad_halfline
from .subordinators import (
    FirstPassageConfig,
    Gamma,
    InverseGaussian,
    Stable,
    SubordinatorSpec,
    TemperedStable,
    bernstein,
)


class Direction(Enum):
    FORWARD = "forward"
    INVERSE = "inverse"


@dataclass(frozen=True)
class TimeChangedSpec:
    """A counting process with rate vector ``rates`` and fractional index
    ``alpha``, run on ``sub`` (forward) or its inverse (inverse)."""

    rates: RateVector
    sub: SubordinatorSpec
    direction: Direction
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError("alpha must lie in (0, 1]")
        if self.direction is Direction.FORWARD and isinstance(self.sub, Stable):
            # the forward construction needs all moments of the clock finite
            raise DomainError("forward time change rejects the stable subordinator "
                              "(its moments of order >= alpha are infinite)")


@dataclass(frozen=True)
class DerivedConstants:
    """Rate-derived constants l1, l2, d plus the clock-moment asymptotics
    E D^{i alpha}(t) ~ k_i t^{i theta_growth} used by the correlation decay."""

    l1: float
    l2: float
    d: float
    k1: float | None = None
    k2: float | None = None
    theta_growth: float | None = None

    def __post_init__(self) -> None:
        if not (self.l1 > 0.0 and self.l2 > 0.0 and self.d > 0.0):
            raise DomainError("l1, l2, d must be positive")
        if self.theta_growth is not None and not 0.0 < self.theta_growth < 1.0:
            raise DomainError("theta_growth must lie in (0, 1)")
        if self.k1 is not None and self.k1 <= 0.0:
            raise DomainError("k1 must be positive")


def derived_constants(rates: RateVector, alpha: float,
                      k1: float | None = None, k2: float | None = None,
                      theta_growth: float | None = None) -> DerivedConstants:
    """l1 = r1/Gamma(alpha+1), l2 = r2/Gamma(alpha+1), d = alpha l1^2 B(alpha, alpha+1)."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError("alpha must lie in (0, 1]")
    g1 = math.gamma(alpha + 1.0)
    l1 = rates.r1 / g1
    l2 = rates.r2 / g1
    d = alpha * l1**2 * incomplete_beta(alpha, alpha + 1.0, 1.0)
    return DerivedConstants(l1, l2, d, k1, k2, theta_growth)


def gamma_frac_moment(sub: Gamma, q: float, t: float) -> float:
    """E D^q(t) = Gamma(bt + q) / (Gamma(bt) a^q) for the gamma subordinator."""
    return math.exp(math.lgamma(sub.b * t + q) - math.lgamma(sub.b * t)
                    - q * math.log(sub.a))


def gamma_derived_constants(rates: RateVector, alpha: float, sub: Gamma) -> DerivedConstants:
    """Constants with the gamma clock's asymptotics k_i = (b/a)^{i alpha},
    theta_growth = alpha (from E D^q(t) ~ (bt/a)^q)."""
    return derived_constants(rates, alpha,
                             k1=(sub.b / sub.a) ** alpha,
                             k2=(sub.b / sub.a) ** (2.0 * alpha),
                             theta_growth=alpha)


class PmfEstimate(NamedTuple):
    value: float
    stderr: float


class TcMoments(NamedTuple):
    mean: float
    var: float
    cov: float
    mean_se: float
    var_se: float
    cov_se: float


def _require(spec: TimeChangedSpec, direction: Direction, alpha_one: bool) -> None:
    if spec.direction is not direction:
        raise DomainError(f"operation requires direction {direction.value}")
    if alpha_one and spec.alpha != 1.0:
        raise DomainError("operation is defined for alpha = 1")


# ---------------------------------------------------------------------------
# Laplace-weighted clock moments E(e^{-Lambda D(t)} D^s(t))

def _has_density(sub: SubordinatorSpec) -> bool:
    if isinstance(sub, Gamma) or isinstance(sub, InverseGaussian):
        return True
    if isinstance(sub, Stable):
        return sub.alpha == 0.5
    if isinstance(sub, TemperedStable):
        return sub.theta == 0.5
    return False


def _resolve_lap_method(sub: SubordinatorSpec, method: str) -> str:
    if method == "auto":
        if isinstance(sub, Gamma):
            return "closed"
        if _has_density(sub):
            return "quadrature"
        return "mc"
    return method


def _log_laplace_closed_gamma(sub: Gamma, lam: float, s: int, t: float) -> float:
    # (a/(a+lam))^{bt} Gamma(bt+s) / (Gamma(bt) (a+lam)^s)
    bt = sub.b * t
    return (bt * (math.log(sub.a) - math.log(sub.a + lam))
            + math.lgamma(bt + s) - math.lgamma(bt) - s * math.log(sub.a + lam))


@lru_cache(maxsize=65536)
def _log_laplace_moment(sub: SubordinatorSpec, lam: float, s: int, t: float,
                        method: str) -> float:
    if method == "closed":
        if not isinstance(sub, Gamma):
            raise Unsupported("closed-form Laplace moments exist for the gamma clock only")
        return _log_laplace_closed_gamma(sub, lam, s, t)
    if method == "quadrature":
        if not _has_density(sub):
            raise Unsupported(f"no density available for {sub!r}; use method='mc'")

        def integrand(xs: np.ndarray) -> np.ndarray:
            return np.exp(s * np.log(xs) - lam * xs + subs.log_density(sub, xs, t))

        return math.log(quad_halfline(integrand, 1e-12))
    raise DomainError(f"unknown laplace_moment method {method!r}")


def laplace_moment(sub: SubordinatorSpec, lam: float, s: int, t: float,
                   method: str = "auto", *, rng: np.random.Generator | None = None,
                   paths: int = 1_000_000) -> float:
    """E(e^{-lam D(t)} D^s(t)) by closed form (gamma), quadrature against the
    clock density, or Monte Carlo."""
    if s < 0:
        raise DomainError("s must be >= 0")
    if not t > 0.0:
        raise DomainError("t must be positive")
    if lam < 0.0:
        raise DomainError("lam must be >= 0")
    if lam == 0.0 and s == 0:
        return 1.0
    method = _resolve_lap_method(sub, method)
    if method == "mc":
        if rng is None:
            raise DomainError("method='mc' requires rng")
        return laplace_moment_mc(sub, lam, s, t, rng, paths)[0]
    return math.exp(_log_laplace_moment(sub, lam, int(s), t, method))


def laplace_moment_mc(sub: SubordinatorSpec, lam: float, s: int, t: float,
                      rng: np.random.Generator, paths: int = 1_000_000) -> PmfEstimate:
    draws = subs.sample_marginal(sub, t, rng, size=paths)
    vals = np.exp(s * np.log(draws) - lam * draws)
    return PmfEstimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(paths)))


# ---------------------------------------------------------------------------
# Forward direction at alpha = 1 (TCGCP-I)

def tcgcp1_pmf(spec: TimeChangedSpec, n: int, t: float, method: str = "auto") -> float:
    """pmf of the forward time-changed counting process: the composition sum
    sum_s C_s(n) E(e^{-Lambda D(t)} D^s(t))."""
    _require(spec, Direction.FORWARD, alpha_one=True)
    if n < 0:
        raise DomainError("n must be >= 0")
    if not t > 0.0:
        raise DomainError("t must be positive")
    lam_tot = spec.rates.total
    method = _resolve_lap_method(spec.sub, method)
    if method == "mc":
        raise DomainError("tcgcp1_pmf needs closed or quadrature Laplace moments; "
                          "use sample_tc for Monte Carlo")
    logc = _log_comp_coeffs(spec.rates.lam, n)
    total = -math.inf
    for s, lc in enumerate(logc):
        if lc == -math.inf:
            continue
        term = lc + _log_laplace_moment(spec.sub, lam_tot, s, t, method)
        total = np.logaddexp(total, term)
    return float(np.exp(total))


def tcgcp1_pgf(spec: TimeChangedSpec, u: float, t: float) -> float:
    """pgf exp(-t f(sum_j lambda_j (1 - u^j)))."""
    _require(spec, Direction.FORWARD, alpha_one=True)
    if abs(u) > 1.0:
        raise DomainError("pgf domain is |u| <= 1")
    arg = sum(lam_j * (1.0 - u**j)
              for j, lam_j in enumerate(spec.rates.lam, start=1))
    return math.exp(-t * bernstein(spec.sub, arg))


def _bernstein_derivative_log_abs(sub: SubordinatorSpec, m: int, s: float) -> float:
    """log |f^(m)(s)| for m >= 1; the sign is (-1)^{m-1} (f' is completely
    monotone for every family here)."""
    if m < 1:
        raise DomainError("m must be >= 1")
    if isinstance(sub, Gamma):
        return math.log(sub.b) + math.lgamma(m) - m * math.log(sub.a + s)
    if isinstance(sub, TemperedStable):
        th = sub.theta
        return (math.log(th) + math.lgamma(m - th) - math.lgamma(1.0 - th)
                + (th - m) * math.log(sub.eta + s))
    if isinstance(sub, InverseGaussian):
        return (math.log(sub.delta) + m * math.log(2.0) + math.log(0.5)
                + math.lgamma(m - 0.5) - math.lgamma(0.5)
                + (0.5 - m) * math.log(2.0 * s + sub.gamma**2))
    if isinstance(sub, Stable):
        raise Unsupported("stable clock is excluded from the forward direction")
    raise Unsupported(f"unknown subordinator spec {sub!r}")


def bernstein_derivative(sub: SubordinatorSpec, m: int, s: float) -> float:
    """m-th derivative f^(m)(s) of the Bernstein function (signed, m >= 1)."""
    sign = 1.0 if m % 2 == 1 else -1.0
    return sign * math.exp(_bernstein_derivative_log_abs(sub, m, s))


def jump_rate(spec: TimeChangedSpec, n: int) -> float:
    """O(h) jump coefficient of the forward process.

    n = 0: the total intensity f(Lambda).  n >= 1: the generic derivative
    form -sum over compositions of f^(s_k)(Lambda) prod (-lambda_j)^{x_j}/x_j!.
    The (-1)^{s_k} composition parity and the (-1)^{s_k-1} derivative sign
    are carried explicitly; each product is assembled in log magnitude so
    high orders cannot overflow.  The Levy-measure route is separate.
    """
    _require(spec, Direction.FORWARD, alpha_one=True)
    if n < 0:
        raise DomainError("n must be >= 0")
    lam_tot = spec.rates.total
    if n == 0:
        return float(bernstein(spec.sub, lam_tot))
    logc = _log_comp_coeffs(spec.rates.lam, n)
    total = 0.0
    for s, lc in enumerate(logc):
        if lc == -math.inf:
            continue
        parity = 1.0 if s % 2 == 0 else -1.0
        deriv_sign = 1.0 if s % 2 == 1 else -1.0
        magnitude = math.exp(lc + _bernstein_derivative_log_abs(spec.sub, s, lam_tot))
        total -= parity * deriv_sign * magnitude
    return total


def levy_weights(spec: TimeChangedSpec, n: int) -> float:
    """Levy-measure atom at n >= 1, per-family closed form."""
    _require(spec, Direction.FORWARD, alpha_one=True)
    if n < 1:
        raise DomainError("Levy atoms sit at n >= 1")
    sub = spec.sub
    lam_tot = spec.rates.total
    logc = _log_comp_coeffs(spec.rates.lam, n)
    total = -math.inf
    for s, lc in enumerate(logc):
        if lc == -math.inf:
            continue
        if isinstance(sub, Gamma):
            log_w = (math.log(sub.b) + math.lgamma(s)
                     - s * math.log(lam_tot + sub.a))
        elif isinstance(sub, TemperedStable):
            th = sub.theta
            log_w = (math.log(th) - math.lgamma(1.0 - th) + math.lgamma(s - th)
                     - (s - th) * math.log(lam_tot + sub.eta))
        elif isinstance(sub, InverseGaussian):
            log_w = (math.log(sub.delta) - 0.5 * math.log(2.0 * math.pi)
                     + math.lgamma(s - 0.5)
                     - (s - 0.5) * math.log(lam_tot + sub.gamma**2 / 2.0))
        else:
            raise Unsupported(f"no Levy-measure formula for {sub!r}")
        total = np.logaddexp(total, lc + log_w)
    return float(np.exp(total))


# ---------------------------------------------------------------------------
# Fractional moments (TCGFCP-I / TCGFCP-II)

def _tc_moments_from_draws(constants: DerivedConstants, alpha: float,
                           ds: np.ndarray, dt: np.ndarray,
                           n_blocks: int = 100) -> TcMoments:
    """Moment formulas evaluated on coupled clock draws (D(s), D(t)) with
    block-jackknife standard errors."""
    l1, l2, d = constants.l1, constants.l2, constants.d
    a = ds**alpha
    b = ds ** (2.0 * alpha)
    c = dt**alpha
    e = dt ** (2.0 * alpha)
    g = e * incomplete_beta_vec(alpha, alpha + 1.0, np.clip(ds / dt, 0.0, 1.0))
    comps = np.stack([a, b, c, e, g])
    n = ds.size
    n_blocks = min(n_blocks, n)
    edges = np.linspace(0, n, n_blocks + 1).astype(np.int64)
    block_sums = np.add.reduceat(comps, edges[:-1], axis=1)
    block_len = np.diff(edges)
    totals = comps.sum(axis=1)

    def formulas(means: np.ndarray) -> np.ndarray:
        ma, mb, mc, me, mg = means
        mean = l1 * mc
        var = mc * (l2 - l1**2 * mc) + 2.0 * d * me
        cov = l2 * ma + d * mb - l1**2 * ma * mc + alpha * l1**2 * mg
        return np.array([mean, var, cov])

    full = formulas(totals / n)
    reps = np.empty((n_blocks, 3))
    for i in range(n_blocks):
        reps[i] = formulas((totals - block_sums[:, i]) / (n - block_len[i]))
    se = np.sqrt((n_blocks - 1) / n_blocks
                 * ((reps - reps.mean(axis=0)) ** 2).sum(axis=0))
    return TcMoments(float(full[0]), float(full[1]), float(full[2]),
                     float(se[0]), float(se[1]), float(se[2]))


def tcgfcp1_moments(spec: TimeChangedSpec, constants: DerivedConstants,
                    s: float, t: float, n_paths: int,
                    rng: np.random.Generator) -> TcMoments:
    """(mean at t, var at t, Cov(s, t)) of the forward fractional process.

    The clock expectations (including the incomplete-beta coupling term) are
    Monte Carlo estimates over ``n_paths`` coupled draws: the increment over
    (s, t] is reused so D(s) <= D(t) pathwise.  Standard errors are block
    jackknife.
    """
    _require(spec, Direction.FORWARD, alpha_one=False)
    if not 0.0 < s <= t:
        raise DomainError("requires 0 < s <= t")
    ds = subs.sample_marginal(spec.sub, s, rng, size=n_paths)
    if t > s:
        dt = ds + subs.sample_marginal(spec.sub, t - s, rng, size=n_paths)
    else:
        dt = ds
    return _tc_moments_from_draws(constants, spec.alpha, ds, dt)


def tcgfcp1_corr_asymptote(spec: TimeChangedSpec, constants: DerivedConstants,
                           s: float, *, rng: np.random.Generator | None = None,
                           n_paths: int = 100_000) -> tuple[float, float]:
    """(c1(s), -theta) in Corr(Z(s), Z(t)) ~ c1(s) t^{-theta} for large t.

    Needs constants.k1, k2, theta_growth; E D^{i alpha}(s) comes from the
    gamma closed form when available, otherwise from Monte Carlo.
    """
    _require(spec, Direction.FORWARD, alpha_one=False)
    cst = constants
    if cst.k1 is None or cst.k2 is None or cst.theta_growth is None:
        raise DomainError("corr asymptote needs k1, k2, theta_growth")
    if cst.k2 < cst.k1**2:
        raise DomainError("LRD hypothesis requires k2 >= k1^2")
    alpha = spec.alpha
    if isinstance(spec.sub, Gamma):
        ed_a = gamma_frac_moment(spec.sub, alpha, s)
        ed_2a = gamma_frac_moment(spec.sub, 2.0 * alpha, s)
    else:
        if rng is None:
            raise DomainError("non-gamma clocks need rng for the moment estimates")
        draws = subs.sample_marginal(spec.sub, s, rng, size=n_paths)
        ed_a = float((draws**alpha).mean())
        ed_2a = float((draws ** (2.0 * alpha)).mean())
    var_s = ed_a * (cst.l2 - cst.l1**2 * ed_a) + 2.0 * cst.d * ed_2a
    scale = 2.0 * cst.d * cst.k2 - cst.k1**2 * cst.l1**2
    if scale <= 0.0 or var_s <= 0.0:
        raise DomainError("degenerate variance scale in the correlation asymptote")
    c1 = (cst.l2 * ed_a + cst.d * ed_2a) / math.sqrt(var_s * scale)
    return c1, -cst.theta_growth


# ---------------------------------------------------------------------------
# Samplers

def sample_tc(spec: TimeChangedSpec, t: float, rng: np.random.Generator,
              size=None, cfg: FirstPassageConfig = FirstPassageConfig()):
    """Draw(s) of the time-changed process at time t.

    Forward: exact clock marginal; inverse: grid first passage (O(grid_step)
    bias).  alpha < 1 inserts the inverse-stable layer via its exact marginal.
    """
    if not t > 0.0:
        raise DomainError("t must be positive")
    n = 1 if size is None else int(size)
    if spec.direction is Direction.FORWARD:
        clocks = subs.sample_marginal(spec.sub, t, rng, size=n)
    else:
        clocks = subs.first_passage_levels(spec.sub, np.array([t]), cfg, rng, n)[:, 0]
    if spec.alpha < 1.0:
        clocks = (clocks / subs.unit_stable(spec.alpha, rng, n)) ** spec.alpha
    out = np.zeros(n, dtype=np.int64)
    for j, lam_j in enumerate(spec.rates.lam, start=1):
        out += j * rng.poisson(lam_j * clocks)
    return int(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# Inverse direction (TCGCP-II / TCGFCP-II)

def _tcgcp2_values(spec: TimeChangedSpec, n: int, draws: np.ndarray) -> np.ndarray:
    logc = _log_comp_coeffs(spec.rates.lam, n)
    return np.exp(logpoly_eval_vec(logc, draws) - spec.rates.total * draws)


def tcgcp2_pmf(spec: TimeChangedSpec, n: int, t: float, n_draws: int,
               rng: np.random.Generator,
               cfg: FirstPassageConfig = FirstPassageConfig()) -> PmfEstimate:
    """pmf of the inverse time-changed process: the composition sum against
    E(e^{-Lambda H(t)} H^s(t)), estimated over ``n_draws`` first-passage
    draws.  Returns (value, stderr)."""
    _require(spec, Direction.INVERSE, alpha_one=True)
    if n < 0:
        raise DomainError("n must be >= 0")
    draws = subs.sample_first_passage(spec.sub, t, cfg, rng, size=n_draws)
    vals = _tcgcp2_values(spec, n, draws)
    return PmfEstimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_draws)))


def tcgcp2_pmf_table(spec: TimeChangedSpec, n_max: int, t: float, n_draws: int,
                     rng: np.random.Generator,
                     cfg: FirstPassageConfig = FirstPassageConfig(),
                     ) -> tuple[dict[int, float], dict[int, float]]:
    """pmf estimates for n = 0..n_max sharing one set of first-passage draws.

    Returns (values, standard errors)."""
    _require(spec, Direction.INVERSE, alpha_one=True)
    draws = subs.sample_first_passage(spec.sub, t, cfg, rng, size=n_draws)
    values: dict[int, float] = {}
    errors: dict[int, float] = {}
    for n in range(n_max + 1):
        vals = _tcgcp2_values(spec, n, draws)
        values[n] = float(vals.mean())
        errors[n] = float(vals.std(ddof=1) / math.sqrt(n_draws))
    return values, errors


def tcgfcp2_moments(spec: TimeChangedSpec, constants: DerivedConstants,
                    s: float, t: float, n_paths: int, rng: np.random.Generator,
                    cfg: FirstPassageConfig = FirstPassageConfig()) -> TcMoments:
    """(mean at t, var at t, Cov(s, t)) of the inverse-clock fractional
    process; clock expectations estimated from coupled first-passage paths."""
    _require(spec, Direction.INVERSE, alpha_one=False)
    if not 0.0 < s <= t:
        raise DomainError("requires 0 < s <= t")
    levels = np.array([s, t]) if t > s else np.array([s])
    hs_ht = subs.first_passage_levels(spec.sub, levels, cfg, rng, n_paths)
    hs = hs_ht[:, 0]
    ht = hs_ht[:, -1]
    return _tc_moments_from_draws(constants, spec.alpha, hs, ht)


# ---------------------------------------------------------------------------
# Special-case governing equations (integer-order residuals)

def _subordinated_pmf(rates: RateVector, sub: SubordinatorSpec, n: int,
                      tau: float, tol: float = 1e-12) -> float:
    if n < 0:
        return 0.0

    def integrand(xs: np.ndarray) -> np.ndarray:
        return np.exp(gcp_logpmf_at_times(rates, n, xs)
                      + subs.log_density(sub, xs, tau))

    return quad_halfline(integrand, tol)


def tss_ode_residual(rates: RateVector, eta: float, n: int, t: float,
                     h: float = 1e-3) -> float:
    """Residual of the integer-order (theta = 1/2) tempered-stable system

    p'' - 2 sqrt(eta) p' = Lambda p - sum_{j<=min(n,k)} lambda_j p(n-j, .)

    with the pmf by quadrature against the theta = 1/2 density and the
    t-derivatives by central differences."""
    if t < 0.2:
        raise DomainError("residual check restricted to t >= 0.2 "
                          "(the integrand concentrates at 0 for small t)")
    sub = TemperedStable(eta, 0.5)
    p_m = _subordinated_pmf(rates, sub, n, t - h)
    p_0 = _subordinated_pmf(rates, sub, n, t)
    p_p = _subordinated_pmf(rates, sub, n, t + h)
    d1 = (p_p - p_m) / (2.0 * h)
    d2 = (p_p - 2.0 * p_0 + p_m) / h**2
    rhs = rates.total * p_0 - sum(
        lam_j * _subordinated_pmf(rates, sub, n - j, t)
        for j, lam_j in enumerate(rates.lam, start=1) if j <= n)
    return abs(d2 - 2.0 * math.sqrt(eta) * d1 - rhs)


def igs_ode_residual(rates: RateVector, delta: float, gamma_p: float, n: int,
                     t: float, h: float = 1e-3) -> float:
    """Residual of the inverse-Gaussian second-order system

    p'' - 2 delta gamma p' = 2 delta^2 (Lambda p - sum_{j<=min(n,k)} lambda_j p(n-j, .))."""
    if t < 0.2:
        raise DomainError("residual check restricted to t >= 0.2")
    sub = InverseGaussian(delta, gamma_p)
    p_m = _subordinated_pmf(rates, sub, n, t - h)
    p_0 = _subordinated_pmf(rates, sub, n, t)
    p_p = _subordinated_pmf(rates, sub, n, t + h)
    d1 = (p_p - p_m) / (2.0 * h)
    d2 = (p_p - 2.0 * p_0 + p_m) / h**2
    rhs = 2.0 * delta**2 * (rates.total * p_0 - sum(
        lam_j * _subordinated_pmf(rates, sub, n - j, t)
        for j, lam_j in enumerate(rates.lam, start=1) if j <= n))
    return abs(d2 - 2.0 * delta * gamma_p * d1 - rhs)
