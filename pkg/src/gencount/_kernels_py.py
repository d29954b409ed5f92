"""Pure-Python (numpy) implementations of the hot numeric kernels.

``gencount._ckernels`` (Cython) exports the same callables with identical
semantics; ``gencount._backend`` picks whichever is importable.  Keep the two
files in sync -- the kernel test suite runs against both.

All kernels are exception-free: they report failure through an integer status
so the compiled and pure versions stay trivially interchangeable.  Wrappers in
``gencount.specfun`` translate statuses into exceptions.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

STATUS_OK = 0
STATUS_NO_CONVERGENCE = 1

# Run of consecutive below-tolerance terms required before a series stops.
# Guards against premature stops in alternating series.
_SMALL_RUN = 3


def ml3_series(alpha: float, beta: float, gam: float, x: float,
               rel_tol: float, max_terms: int) -> tuple[float, int]:
    """Three-parameter Mittag-Leffler series.

    Sum over j >= 0 of Gamma(j+gam) x^j / (Gamma(gam) j! Gamma(j*alpha+beta)),
    each term built from log-magnitudes with the sign carried separately.
    Returns ``(value, status)``.
    """
    if x == 0.0:
        return math.exp(-math.lgamma(beta)), STATUS_OK
    log_ax = math.log(abs(x))
    negative = x < 0.0
    lg_gam = math.lgamma(gam)
    total = 0.0
    comp = 0.0  # Kahan compensation
    small = 0
    for j in range(max_terms):
        log_mag = (math.lgamma(j + gam) - lg_gam - math.lgamma(j + 1.0)
                   - math.lgamma(j * alpha + beta) + j * log_ax)
        term = math.exp(log_mag)
        if negative and (j % 2 == 1):
            term = -term
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) <= rel_tol * abs(total):
            small += 1
            if small >= _SMALL_RUN:
                return total, STATUS_OK
        else:
            small = 0
    return total, STATUS_NO_CONVERGENCE


def bessel_i_log(n: int, x: float, rel_tol: float, max_terms: int) -> tuple[float, int]:
    """log I_n(x) for n >= 0, x >= 0, via the ascending series.

    Terms are all positive; the sum is accumulated as a running log-sum-exp
    so large x never overflows.  Returns ``(log_value, status)``;
    ``log_value`` is -inf for x == 0, n > 0.
    """
    if x == 0.0:
        return (0.0 if n == 0 else -math.inf), STATUS_OK
    log_half_x = math.log(x) - math.log(2.0)
    log_total = -math.inf
    small = 0
    for j in range(max_terms):
        log_term = ((2 * j + n) * log_half_x - math.lgamma(j + 1.0)
                    - math.lgamma(j + n + 1.0))
        if log_term > log_total:
            log_total = log_term + math.log1p(math.exp(log_total - log_term))
        else:
            log_total = log_total + math.log1p(math.exp(log_term - log_total))
        if log_term - log_total <= math.log(rel_tol):
            small += 1
            if small >= _SMALL_RUN:
                return log_total, STATUS_OK
        else:
            small = 0
    return log_total, STATUS_NO_CONVERGENCE


def _bessel_term_count(n: int, xmax: float, max_terms: int) -> int:
    # Terms peak near j* with j*(j*+n) = (x/2)^2; decay past the peak is
    # superexponential with Gaussian width ~sqrt(j*), so a fixed slack of a
    # few widths reaches machine precision.
    jpeak = 0.5 * (-n + math.hypot(n, xmax))
    count = int(jpeak + 40.0 + 6.0 * math.sqrt(jpeak + n + 10.0)) + 1
    return min(max(count, 8), max_terms)


def bessel_i_log_vec(n: int, xs: np.ndarray, rel_tol: float, max_terms: int) -> tuple[np.ndarray, int]:
    """Vectorized ``bessel_i_log`` over an array of x >= 0."""
    xs = np.asarray(xs, dtype=np.float64)
    out = np.full(xs.shape, -np.inf)
    if n == 0:
        out[xs == 0.0] = 0.0
    pos = xs > 0.0
    if not np.any(pos):
        return out, STATUS_OK
    x = xs[pos]
    count = _bessel_term_count(n, float(x.max()), max_terms)
    status = STATUS_OK
    if count >= max_terms:
        status = STATUS_NO_CONVERGENCE
    j = np.arange(count, dtype=np.float64)
    log_fact = gammaln(j + 1.0) + gammaln(j + n + 1.0)
    res = np.empty(x.shape)
    chunk = max(1, 8_000_000 // count)
    log_half = np.log(x) - math.log(2.0)
    for lo in range(0, x.size, chunk):
        sl = slice(lo, lo + chunk)
        log_terms = (2.0 * j + n) * log_half[sl, None] - log_fact
        m = log_terms.max(axis=1)
        res[sl] = m + np.log(np.exp(log_terms - m[:, None]).sum(axis=1))
    out[pos] = res
    return out, status


def _log_rgamma(z: float) -> tuple[float, float]:
    """(log |1/Gamma(z)|, sign); sign 0 at the poles.

    Reflection for z <= 0.5, with sin(pi z) taken from the fractional part
    so large negative z keeps full accuracy.
    """
    if z > 0.5:
        return -math.lgamma(z), 1.0
    m = math.floor(z)
    r = z - m
    s = math.sin(math.pi * r)
    if m % 2 != 0:
        s = -s
    if s == 0.0:
        return -math.inf, 0.0
    return math.lgamma(1.0 - z) + math.log(abs(s)) - math.log(math.pi), math.copysign(1.0, s)


def wright_m_series(alpha: float, x: float, rel_tol: float,
                    max_terms: int) -> tuple[float, float, int]:
    """Wright M-function series: sum of (-x)^j / (j! Gamma(1-(j+1)*alpha)).

    Returns ``(value, cancel_log10, status)`` where ``cancel_log10`` is
    log10(max |term| / |sum|), the number of decimal digits lost to
    cancellation (0 when nothing cancels, +inf if the sum is not positive).
    Each term is assembled from one combined exponent; a term magnitude
    beyond the double range aborts with the no-convergence status.
    """
    total = 0.0
    comp = 0.0
    max_abs = 0.0
    small = 0
    status = STATUS_NO_CONVERGENCE
    log_fact = 0.0
    for j in range(max_terms):
        if j > 0:
            log_fact += math.log(j)
        if x == 0.0 and j > 0:
            status = STATUS_OK
            break
        log_rg, sign = _log_rgamma(1.0 - (j + 1) * alpha)
        log_mag = log_rg if j == 0 else log_rg + j * math.log(x) - log_fact
        if log_mag > 700.0:
            return total, math.inf, STATUS_NO_CONVERGENCE
        term = sign * math.exp(log_mag)
        if j % 2:
            term = -term
        a = abs(term)
        if a > max_abs:
            max_abs = a
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if a <= rel_tol * abs(total):
            small += 1
            if small >= _SMALL_RUN:
                status = STATUS_OK
                break
        else:
            small = 0
    if total > 0.0:
        cancel = math.log10(max_abs / total) if max_abs > 0.0 else 0.0
    else:
        cancel = math.inf
    return total, max(cancel, 0.0), status


def logpoly_eval_vec(log_coeffs: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """log(sum_s exp(log_coeffs[s]) * t^s) for each t > 0 in ``ts``.

    ``log_coeffs`` may contain -inf entries for absent powers.
    """
    log_coeffs = np.asarray(log_coeffs, dtype=np.float64)
    ts = np.asarray(ts, dtype=np.float64)
    s = np.arange(log_coeffs.size, dtype=np.float64)
    out = np.empty(ts.shape)
    chunk = max(1, 8_000_000 // max(log_coeffs.size, 1))
    logts = np.log(ts)
    for lo in range(0, ts.size, chunk):
        sl = slice(lo, lo + chunk)
        terms = log_coeffs + logts[sl, None] * s
        m = terms.max(axis=1)
        good = np.isfinite(m)
        acc = np.full(m.shape, -np.inf)
        if np.any(good):
            acc[good] = m[good] + np.log(
                np.exp(terms[good] - m[good, None]).sum(axis=1))
        out[sl] = acc
    return out
