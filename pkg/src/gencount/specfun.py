"""Special functions backing the closed-form distributions.

Three-parameter Mittag-Leffler, modified Bessel I_n, the Wright M-function,
the unregularized incomplete beta, and integer falling/rising factorials.
Everything is plain float in, float out; series evaluation is delegated to
the kernel backend (compiled or pure numpy).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, betaln

from ._backend import (
    STATUS_OK,
    bessel_i_log as _bessel_i_log_kernel,
    bessel_i_log_vec as _bessel_i_log_vec_kernel,
    ml3_series,
    wright_m_series,
)
from .errors import DomainError, NonConvergence, StabilityError


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation policy for the series evaluations."""

    rel_tol: float = 1e-14
    max_terms: int = 10_000

    def __post_init__(self) -> None:
        if not self.rel_tol > 0.0:
            raise DomainError("rel_tol must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")


DEFAULT_POLICY = SeriesPolicy()

# Cancellation budget for the alternating Wright series: reject evaluations
# that would lose more than this many decimal digits.
_WRIGHT_CANCEL_DIGITS = 6.0
_WRIGHT_ALPHA_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))


def mittag_leffler(alpha: float, beta: float, gamma: float, x: float,
                   policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """Three-parameter Mittag-Leffler function E^gamma_{alpha,beta}(x)."""
    if not (alpha > 0.0 and beta > 0.0 and gamma > 0.0):
        raise DomainError("mittag_leffler requires alpha, beta, gamma > 0")
    value, status = ml3_series(alpha, beta, gamma, float(x),
                               policy.rel_tol, policy.max_terms)
    if status != STATUS_OK:
        raise NonConvergence(
            f"Mittag-Leffler series not converged after {policy.max_terms} terms "
            f"(alpha={alpha}, beta={beta}, gamma={gamma}, x={x})")
    return value


def mittag_leffler_derivative(n: int, beta: float, gamma: float, x: float,
                              policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """n-th derivative of the two-parameter function E_{beta,gamma} at x.

    Uses the reduction d^n/dx^n E_{beta,gamma}(x) = n! E^{n+1}_{beta, n*beta+gamma}(x).
    """
    if n < 0:
        raise DomainError("derivative order must be >= 0")
    if not (beta > 0.0 and gamma > 0.0):
        raise DomainError("beta and gamma must be positive")
    log_fact = math.lgamma(n + 1.0)
    return math.exp(log_fact) * mittag_leffler(beta, n * beta + gamma, n + 1.0,
                                               x, policy)


def bessel_i_log(n: int, x: float, policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """log I_|n|(x) for x >= 0 (used by the pmf evaluations)."""
    if x < 0.0:
        raise DomainError("bessel_i_log requires x >= 0; bessel_i handles signs")
    value, status = _bessel_i_log_kernel(abs(int(n)), float(x),
                                         policy.rel_tol, policy.max_terms)
    if status != STATUS_OK:
        raise NonConvergence(f"Bessel series not converged for n={n}, x={x}")
    return value


def bessel_i_log_vec(n: int, xs: np.ndarray,
                     policy: SeriesPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Vectorized log I_|n| over an array of x >= 0."""
    values, status = _bessel_i_log_vec_kernel(abs(int(n)), np.asarray(xs, float),
                                              policy.rel_tol, policy.max_terms)
    if status != STATUS_OK:
        raise NonConvergence(f"Bessel series not converged for n={n} "
                             f"(max x = {np.max(xs)})")
    return values


def bessel_i(n: int, x: float, policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """Modified Bessel function of the first kind, integer order.

    The series uses |n| (I_n = I_{-n}); negative x picks up the parity
    factor (-1)^|n|.
    """
    m = abs(int(n))
    sign = -1.0 if (x < 0.0 and m % 2 == 1) else 1.0
    return sign * math.exp(bessel_i_log(m, abs(x), policy))


def _wright_raw(alpha: float, x: float, policy: SeriesPolicy) -> tuple[float, float]:
    value, cancel, status = wright_m_series(alpha, float(x),
                                            policy.rel_tol, policy.max_terms)
    if status != STATUS_OK:
        raise NonConvergence(f"Wright series not converged (alpha={alpha}, x={x})")
    return value, cancel


def _stability_bound(alpha: float) -> float:
    # Largest x where the alternating series loses < _WRIGHT_CANCEL_DIGITS
    # decimal digits, by bisection on the observed cancellation.
    policy = DEFAULT_POLICY

    def stable(x: float) -> bool:
        try:
            value, cancel = _wright_raw(alpha, x, policy)
        except NonConvergence:
            return False
        return value > 0.0 and cancel < _WRIGHT_CANCEL_DIGITS

    lo, hi = 0.0, 1.0
    while stable(hi) and hi < 1e4:
        lo, hi = hi, 2.0 * hi
    if hi >= 1e4:
        return lo
    for _ in range(25):
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return lo


_WRIGHT_BOUND_TABLE: dict[float, float] = {
    a: _stability_bound(a) for a in _WRIGHT_ALPHA_GRID
}


def wright_stability_bound(alpha: float) -> float:
    """Largest x for which wright_m(alpha, x) is accepted.

    Tabulated at alpha in {0.1, ..., 0.9}; between grid points the more
    conservative neighbour applies, outside the grid the nearest entry.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("wright_m requires 0 < alpha < 1")
    grid = _WRIGHT_ALPHA_GRID
    if alpha <= grid[0]:
        return _WRIGHT_BOUND_TABLE[grid[0]]
    if alpha >= grid[-1]:
        return _WRIGHT_BOUND_TABLE[grid[-1]]
    for lo, hi in zip(grid, grid[1:]):
        if lo <= alpha <= hi:
            return min(_WRIGHT_BOUND_TABLE[lo], _WRIGHT_BOUND_TABLE[hi])
    raise AssertionError("unreachable")


def wright_m(alpha: float, x: float, policy: SeriesPolicy = DEFAULT_POLICY) -> float:
    """Wright M-function M_alpha(x) for x >= 0 within the stable domain.

    x < 0 is rejected: no in-scope formula evaluates the series there.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("wright_m requires 0 < alpha < 1")
    if x < 0.0:
        raise DomainError("wright_m requires x >= 0")
    bound = wright_stability_bound(alpha)
    if x > bound:
        raise StabilityError(
            f"wright_m(alpha={alpha}) unstable beyond x={bound:.3f} (got x={x}); "
            "use the alpha=1/2 closed form or Monte Carlo mixing")
    value, _ = _wright_raw(alpha, x, policy)
    return value


def incomplete_beta(a: float, b: float, x: float) -> float:
    """Unregularized incomplete beta integral over [0, x]."""
    if not (a > 0.0 and b > 0.0):
        raise DomainError("incomplete_beta requires a, b > 0")
    if not 0.0 <= x <= 1.0:
        raise DomainError("incomplete_beta requires 0 <= x <= 1")
    return float(betainc(a, b, x)) * math.exp(betaln(a, b))


def incomplete_beta_vec(a: float, b: float, x: np.ndarray) -> np.ndarray:
    """Vectorized unregularized incomplete beta in x."""
    x = np.asarray(x, float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise DomainError("incomplete_beta requires 0 <= x <= 1")
    return betainc(a, b, x) * math.exp(betaln(a, b))


def falling_factorial(j: int, m: int) -> int:
    """(j)_m = j (j-1) ... (j-m+1);  1 for m = 0."""
    if m < 0:
        raise DomainError("falling_factorial requires m >= 0")
    out = 1
    for i in range(m):
        out *= j - i
    return out


def rising_factorial(j: int, m: int) -> int:
    """j^(m) = j (j+1) ... (j+m-1);  1 for m = 0."""
    if m < 0:
        raise DomainError("rising_factorial requires m >= 0")
    out = 1
    for i in range(m):
        out *= j + i
    return out
