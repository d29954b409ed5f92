# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot numeric kernels.

Mirrors ``gencount._kernels_py`` (same callables, same semantics); the
kernel test suite runs against both backends.  Keep the two in sync.
"""

from libc.math cimport (INFINITY, M_PI, exp, fabs, floor, hypot, lgamma, log,
                        log10, log1p, sin, sqrt)

import numpy as np

STATUS_OK = 0
STATUS_NO_CONVERGENCE = 1

cdef int _SMALL_RUN = 3


def ml3_series(double alpha, double beta, double gam, double x,
               double rel_tol, long max_terms):
    cdef double log_ax, lg_gam, total, comp, term, y, t, log_mag
    cdef long j
    cdef int small = 0
    cdef bint negative
    if x == 0.0:
        return exp(-lgamma(beta)), STATUS_OK
    log_ax = log(fabs(x))
    negative = x < 0.0
    lg_gam = lgamma(gam)
    total = 0.0
    comp = 0.0
    for j in range(max_terms):
        log_mag = (lgamma(j + gam) - lg_gam - lgamma(j + 1.0)
                   - lgamma(j * alpha + beta) + j * log_ax)
        term = exp(log_mag)
        if negative and (j % 2 == 1):
            term = -term
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if fabs(term) <= rel_tol * fabs(total):
            small += 1
            if small >= _SMALL_RUN:
                return total, STATUS_OK
        else:
            small = 0
    return total, STATUS_NO_CONVERGENCE


def bessel_i_log(long n, double x, double rel_tol, long max_terms):
    cdef double log_half_x, log_total, log_term, log_rel
    cdef long j
    cdef int small = 0
    if x == 0.0:
        return (0.0 if n == 0 else -INFINITY), STATUS_OK
    log_half_x = log(x) - log(2.0)
    log_total = -INFINITY
    log_rel = log(rel_tol)
    for j in range(max_terms):
        log_term = ((2 * j + n) * log_half_x - lgamma(j + 1.0)
                    - lgamma(j + n + 1.0))
        if log_term > log_total:
            log_total = log_term + log1p(exp(log_total - log_term))
        else:
            log_total = log_total + log1p(exp(log_term - log_total))
        if log_term - log_total <= log_rel:
            small += 1
            if small >= _SMALL_RUN:
                return log_total, STATUS_OK
        else:
            small = 0
    return log_total, STATUS_NO_CONVERGENCE


cdef long _bessel_term_count(long n, double xmax, long max_terms):
    cdef double jpeak = 0.5 * (-n + hypot(n, xmax))
    cdef long count = <long>(jpeak + 40.0 + 6.0 * sqrt(jpeak + n + 10.0)) + 1
    if count < 8:
        count = 8
    if count > max_terms:
        count = max_terms
    return count


def bessel_i_log_vec(long n, xs, double rel_tol, long max_terms):
    xs_arr = np.ascontiguousarray(np.asarray(xs, dtype=np.float64).ravel())
    out_arr = np.empty(xs_arr.shape[0], dtype=np.float64)
    cdef double[::1] xv = xs_arr
    cdef double[::1] ov = out_arr
    cdef Py_ssize_t size = xv.shape[0]
    cdef double xmax = 0.0
    cdef Py_ssize_t i
    for i in range(size):
        if xv[i] > xmax:
            xmax = xv[i]
    cdef int status = STATUS_OK
    if xmax == 0.0:
        for i in range(size):
            ov[i] = 0.0 if n == 0 else -INFINITY
        return out_arr.reshape(np.asarray(xs).shape), status
    cdef long count = _bessel_term_count(n, xmax, max_terms)
    if count >= max_terms:
        status = STATUS_NO_CONVERGENCE
    log_fact_arr = np.empty(count, dtype=np.float64)
    cdef double[::1] log_fact = log_fact_arr
    cdef long j
    for j in range(count):
        log_fact[j] = lgamma(j + 1.0) + lgamma(j + n + 1.0)
    cdef double x, lhx, m, acc, lt
    for i in range(size):
        x = xv[i]
        if x == 0.0:
            ov[i] = 0.0 if n == 0 else -INFINITY
            continue
        lhx = log(x) - log(2.0)
        m = -INFINITY
        acc = 0.0
        for j in range(count):
            lt = (2 * j + n) * lhx - log_fact[j]
            if lt > m:
                if m == -INFINITY:
                    acc = 1.0
                else:
                    acc = acc * exp(m - lt) + 1.0
                m = lt
            else:
                acc += exp(lt - m)
                if m - lt > 37.0:
                    break
        ov[i] = m + log(acc)
    return out_arr.reshape(np.asarray(xs).shape), status


cdef (double, double) _log_rgamma(double z):
    # (log |1/Gamma(z)|, sign); sign 0 at the poles.  Reflection for
    # z <= 0.5 with sin(pi z) from the fractional part.
    cdef double m, r, s
    if z > 0.5:
        return -lgamma(z), 1.0
    m = floor(z)
    r = z - m
    s = sin(M_PI * r)
    if (<long>m) % 2 != 0:
        s = -s
    if s == 0.0:
        return -INFINITY, 0.0
    return lgamma(1.0 - z) + log(fabs(s)) - log(M_PI), (1.0 if s > 0.0 else -1.0)


def wright_m_series(double alpha, double x, double rel_tol, long max_terms):
    cdef double total = 0.0, comp = 0.0, max_abs = 0.0, log_fact = 0.0
    cdef double log_rg, sign, log_mag, term, a, y, t, cancel
    cdef long j
    cdef int small = 0
    cdef int status = STATUS_NO_CONVERGENCE
    for j in range(max_terms):
        if j > 0:
            log_fact += log(<double>j)
        if x == 0.0 and j > 0:
            status = STATUS_OK
            break
        log_rg, sign = _log_rgamma(1.0 - (j + 1) * alpha)
        log_mag = log_rg if j == 0 else log_rg + j * log(x) - log_fact
        if log_mag > 700.0:
            return total, INFINITY, STATUS_NO_CONVERGENCE
        term = sign * exp(log_mag)
        if j % 2:
            term = -term
        a = fabs(term)
        if a > max_abs:
            max_abs = a
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if a <= rel_tol * fabs(total):
            small += 1
            if small >= _SMALL_RUN:
                status = STATUS_OK
                break
        else:
            small = 0
    if total > 0.0:
        cancel = log10(max_abs / total) if max_abs > 0.0 else 0.0
        if cancel < 0.0:
            cancel = 0.0
    else:
        cancel = INFINITY
    return total, cancel, status


def logpoly_eval_vec(log_coeffs, ts):
    lc_arr = np.ascontiguousarray(np.asarray(log_coeffs, dtype=np.float64))
    ts_arr = np.ascontiguousarray(np.asarray(ts, dtype=np.float64).ravel())
    out_arr = np.empty(ts_arr.shape[0], dtype=np.float64)
    cdef double[::1] lc = lc_arr
    cdef double[::1] tv = ts_arr
    cdef double[::1] ov = out_arr
    cdef Py_ssize_t n_s = lc.shape[0]
    cdef Py_ssize_t size = tv.shape[0]
    cdef Py_ssize_t i, s
    cdef double logt, m, acc, term
    for i in range(size):
        logt = log(tv[i])
        m = -INFINITY
        acc = 0.0
        for s in range(n_s):
            if lc[s] == -INFINITY:
                continue
            term = lc[s] + logt * s
            if term > m:
                if m == -INFINITY:
                    acc = 1.0
                else:
                    acc = acc * exp(m - term) + 1.0
                m = term
            else:
                acc += exp(term - m)
        ov[i] = m + log(acc) if m != -INFINITY else -INFINITY
    return out_arr.reshape(np.asarray(ts).shape)
