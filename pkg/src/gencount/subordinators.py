"""Levy subordinators: Bernstein functions, exact marginal samplers,
densities, inverse-stable marginals and grid-based first-passage sampling.

Four families are supported, each identified by a frozen dataclass:
stable (index alpha), gamma (a, b), tempered stable (eta, theta) and
inverse Gaussian (delta, gamma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import specfun
from .errors import (
    BudgetExceeded,
    DomainError,
    RejectionBudgetExceeded,
    StabilityError,
    Unsupported,
)

_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class Stable:
    alpha: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("stable subordinator requires 0 < alpha < 1")


@dataclass(frozen=True)
class Gamma:
    a: float
    b: float

    def __post_init__(self) -> None:
        if not (self.a > 0.0 and self.b > 0.0):
            raise DomainError("gamma subordinator requires a, b > 0")


@dataclass(frozen=True)
class TemperedStable:
    eta: float
    theta: float

    def __post_init__(self) -> None:
        if not self.eta > 0.0:
            raise DomainError("tempered stable requires eta > 0")
        if not 0.0 < self.theta < 1.0:
            raise DomainError("tempered stable requires 0 < theta < 1")


@dataclass(frozen=True)
class InverseGaussian:
    delta: float
    gamma: float

    def __post_init__(self) -> None:
        if not (self.delta > 0.0 and self.gamma > 0.0):
            raise DomainError("inverse Gaussian requires delta, gamma > 0")


SubordinatorSpec = Union[Stable, Gamma, TemperedStable, InverseGaussian]


@dataclass(frozen=True)
class FirstPassageConfig:
    """Grid settings for first-passage (inverse subordinator) sampling."""

    grid_step: float = 1e-3
    refine: bool = True

    def __post_init__(self) -> None:
        if not self.grid_step > 0.0:
            raise DomainError("grid_step must be positive")


_MAX_GRID_STEPS = 10**8
_REJECTION_BUDGET = 10**6  # proposals per requested draw


def bernstein(spec: SubordinatorSpec, s) -> float | np.ndarray:
    """Bernstein function f(s) of the subordinator's Laplace exponent."""
    s_arr = np.asarray(s, float)
    if np.any(s_arr < 0.0):
        raise DomainError("bernstein requires s >= 0")
    if isinstance(spec, Stable):
        out = s_arr**spec.alpha
    elif isinstance(spec, Gamma):
        out = spec.b * np.log1p(s_arr / spec.a)
    elif isinstance(spec, TemperedStable):
        out = (spec.eta + s_arr) ** spec.theta - spec.eta**spec.theta
    elif isinstance(spec, InverseGaussian):
        out = spec.delta * (np.sqrt(2.0 * s_arr + spec.gamma**2) - spec.gamma)
    else:
        raise Unsupported(f"unknown subordinator spec {spec!r}")
    out = np.where(s_arr == 0.0, 0.0, out)  # f(0) = 0 exactly, by definition
    return float(out) if np.isscalar(s) else out


def unit_stable(alpha: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Positive stable draw with Laplace transform exp(-s^alpha).

    Kanter / Chambers-Mallows-Stuck construction:
    X = (A(U)/E)^((1-alpha)/alpha) with U ~ U(0, pi), E ~ Exp(1) and
    A(u) = [sin(alpha u)/sin u]^(alpha/(1-alpha)) * sin((1-alpha) u)/sin u.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("unit_stable requires 0 < alpha < 1")
    u = rng.uniform(0.0, math.pi, size)
    u = np.clip(u, 1e-12, math.pi * (1.0 - 1e-16))
    e = rng.standard_exponential(size)
    sin_u = np.sin(u)
    a = ((np.sin(alpha * u) / sin_u) ** (alpha / (1.0 - alpha))
         * np.sin((1.0 - alpha) * u) / sin_u)
    return (a / e) ** ((1.0 - alpha) / alpha)


def _sample_tempered_stable(spec: TemperedStable, t: float,
                            rng: np.random.Generator, n: int) -> np.ndarray:
    # Exponential-tilting rejection: propose Stable(theta) at time t, accept
    # with probability exp(-eta * x).  Mean acceptance exp(-t * eta^theta).
    out = np.empty(n)
    filled = 0
    acc_rate = math.exp(-t * spec.eta**spec.theta)
    budget = _REJECTION_BUDGET * n
    used = 0
    while filled < n:
        need = n - filled
        batch = int(min(max(need * 1.2 / max(acc_rate, 1e-6), need), 4_000_000))
        if used + batch > budget:
            batch = budget - used
            if batch <= 0:
                raise RejectionBudgetExceeded(
                    f"tempered-stable rejection exceeded {budget} proposals "
                    f"(eta={spec.eta}, theta={spec.theta}, t={t})")
        proposals = t ** (1.0 / spec.theta) * unit_stable(spec.theta, rng, batch)
        used += batch
        accepted = proposals[rng.random(batch) < np.exp(-spec.eta * proposals)]
        take = min(accepted.size, need)
        out[filled:filled + take] = accepted[:take]
        filled += take
    return out


def sample_marginal(spec: SubordinatorSpec, t: float,
                    rng: np.random.Generator, size=None):
    """One draw (or ``size`` draws) of the subordinator value at time t."""
    if not t > 0.0:
        raise DomainError("sample_marginal requires t > 0")
    n = 1 if size is None else int(size)
    if isinstance(spec, Stable):
        out = t ** (1.0 / spec.alpha) * unit_stable(spec.alpha, rng, n)
    elif isinstance(spec, Gamma):
        out = rng.gamma(spec.b * t, 1.0 / spec.a, n)
    elif isinstance(spec, TemperedStable):
        out = _sample_tempered_stable(spec, t, rng, n)
    elif isinstance(spec, InverseGaussian):
        out = rng.wald(spec.delta * t / spec.gamma, (spec.delta * t) ** 2, n)
    else:
        raise Unsupported(f"unknown subordinator spec {spec!r}")
    return float(out[0]) if size is None else out


def sample_inverse_stable(alpha: float, t: float,
                          rng: np.random.Generator, size=None):
    """Exact draw of the inverse stable subordinator Y_alpha(t).

    Uses the self-similarity identity Y_alpha(t) =d= (t / D_alpha(1))^alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("sample_inverse_stable requires 0 < alpha < 1")
    if not t > 0.0:
        raise DomainError("sample_inverse_stable requires t > 0")
    n = 1 if size is None else int(size)
    out = (t / unit_stable(alpha, rng, n)) ** alpha
    return float(out[0]) if size is None else out


def inverse_stable_pdf(alpha: float, u, t: float):
    """Density h_alpha(u, t) = t^{-alpha} M_alpha(u t^{-alpha}) of Y_alpha(t).

    alpha = 1/2 uses the closed form exp(-u^2/(4t)) / sqrt(pi t); other
    indices evaluate the Wright series and are subject to its stability
    bound.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("inverse_stable_pdf requires 0 < alpha < 1")
    if not t > 0.0:
        raise DomainError("inverse_stable_pdf requires t > 0")
    u_arr = np.asarray(u, float)
    if np.any(u_arr < 0.0):
        raise DomainError("inverse_stable_pdf requires u >= 0")
    if alpha == 0.5:
        out = np.exp(-(u_arr**2) / (4.0 * t)) / math.sqrt(math.pi * t)
    else:
        scale = t ** (-alpha)
        out = scale * np.array(
            [specfun.wright_m(alpha, float(x) * scale) for x in np.atleast_1d(u_arr)]
        ).reshape(u_arr.shape)
    return float(out) if np.isscalar(u) else out


def inverse_stable_mean(alpha: float, t) -> float | np.ndarray:
    return t**alpha / math.gamma(alpha + 1.0)


def inverse_stable_var(alpha: float, t) -> float | np.ndarray:
    c = 2.0 / math.gamma(2.0 * alpha + 1.0) - 1.0 / math.gamma(alpha + 1.0) ** 2
    return c * t ** (2.0 * alpha)


def inverse_stable_cov(alpha: float, s: float, t: float) -> float:
    if not 0.0 < s <= t:
        raise DomainError("inverse_stable_cov requires 0 < s <= t")
    g1 = math.gamma(alpha + 1.0)
    b_full = specfun.incomplete_beta(alpha, alpha + 1.0, 1.0)
    b_part = specfun.incomplete_beta(alpha, alpha + 1.0, s / t)
    f = alpha * t ** (2 * alpha) * b_part - (t * s) ** alpha
    return (alpha * s ** (2 * alpha) * b_full + f) / g1**2


def inverse_stable_cov_asymptote(alpha: float, s: float, t: float) -> float:
    """Large-t form of the covariance for fixed s (the LRD workhorse)."""
    g1 = math.gamma(alpha + 1.0)
    b_full = specfun.incomplete_beta(alpha, alpha + 1.0, 1.0)
    return (alpha * s ** (2 * alpha) * b_full
            - alpha**2 * s ** (alpha + 1.0) / ((alpha + 1.0) * t ** (1.0 - alpha))) / g1**2


def inverse_stable_moments(alpha: float, s: float, t: float) -> tuple[float, float, float]:
    """(mean, variance) of Y_alpha(t) and Cov(Y_alpha(s), Y_alpha(t)).

    alpha = 1 is the degenerate clock Y_1(t) = t.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError("requires 0 < alpha <= 1")
    if not 0.0 < s <= t:
        raise DomainError("requires 0 < s <= t")
    if alpha == 1.0:
        return t, 0.0, 0.0
    return (inverse_stable_mean(alpha, t), inverse_stable_var(alpha, t),
            inverse_stable_cov(alpha, s, t))


def first_passage_levels(spec: SubordinatorSpec, levels, cfg: FirstPassageConfig,
                         rng: np.random.Generator, n_paths: int) -> np.ndarray:
    """First-passage times of the subordinator across nondecreasing levels.

    ``levels`` is a vector shared by all paths or an (n_paths, m) matrix of
    per-path levels, nondecreasing along the last axis.  Each path advances
    on the grid {dt, 2dt, ...} by independent increments; the k-th output is
    the (grid, optionally linearly interpolated) time its running sum first
    exceeds ``levels[..., k]``.  Bias is O(grid_step).
    """
    levels = np.asarray(levels, float)
    if levels.ndim == 1:
        levels = np.broadcast_to(levels, (n_paths, levels.size))
    if levels.shape[0] != n_paths:
        raise DomainError("levels matrix must have n_paths rows")
    if np.any(levels <= 0.0) or np.any(np.diff(levels, axis=1) < 0.0):
        raise DomainError("levels must be positive and nondecreasing")
    m = levels.shape[1]
    dt = cfg.grid_step
    out = np.empty((n_paths, m))
    s_prev = np.zeros(n_paths)
    s_new = np.zeros(n_paths)
    idx = np.zeros(n_paths, dtype=np.int64)
    step = 0
    while True:
        active = np.flatnonzero(idx < m)
        if active.size == 0:
            break
        if step >= _MAX_GRID_STEPS:
            raise BudgetExceeded(
                f"first passage not reached within {_MAX_GRID_STEPS} grid steps")
        inc = sample_marginal(spec, dt, rng, size=active.size)
        s_prev[active] = s_new[active]
        s_new[active] += inc
        step += 1
        while True:
            pending = active[idx[active] < m]
            if pending.size == 0:
                break
            lev = levels[pending, idx[pending]]
            hit = s_new[pending] > lev
            if not np.any(hit):
                break
            p = pending[hit]
            if cfg.refine:
                frac = (lev[hit] - s_prev[p]) / (s_new[p] - s_prev[p])
                out[p, idx[p]] = ((step - 1) + frac) * dt
            else:
                out[p, idx[p]] = step * dt
            idx[p] += 1
    return out


def sample_first_passage(spec: SubordinatorSpec, t: float,
                         cfg: FirstPassageConfig = FirstPassageConfig(),
                         rng: np.random.Generator | None = None, size=None):
    """Draws of the inverse subordinator H_f(t) = inf{r : D_f(r) > t}."""
    if rng is None:
        raise DomainError("rng is required")
    if not t > 0.0:
        raise DomainError("sample_first_passage requires t > 0")
    n = 1 if size is None else int(size)
    out = first_passage_levels(spec, np.array([t]), cfg, rng, n)[:, 0]
    return float(out[0]) if size is None else out


def log_density(spec: SubordinatorSpec, x, t: float) -> np.ndarray:
    """log density of D_f(t) at x > 0 for the families with elementary forms.

    Stable and tempered stable are restricted to index 1/2, where the stable
    density is elementary; other indices raise ``Unsupported``.
    """
    if not t > 0.0:
        raise DomainError("log_density requires t > 0")
    x = np.asarray(x, float)
    if np.any(x <= 0.0):
        raise DomainError("log_density requires x > 0")
    if isinstance(spec, Gamma):
        a, b = spec.a, spec.b
        return (b * t * math.log(a) - math.lgamma(b * t)
                + (b * t - 1.0) * np.log(x) - a * x)
    if isinstance(spec, Stable):
        if spec.alpha != 0.5:
            raise Unsupported("stable density implemented for alpha = 1/2 only")
        return (math.log(t) - 1.5 * np.log(x) - t**2 / (4.0 * x)
                - math.log(2.0 * _SQRT_PI))
    if isinstance(spec, TemperedStable):
        if spec.theta != 0.5:
            raise Unsupported("tempered-stable density implemented for theta = 1/2 only")
        base = (math.log(t) - 1.5 * np.log(x) - t**2 / (4.0 * x)
                - math.log(2.0 * _SQRT_PI))
        return base - spec.eta * x + t * math.sqrt(spec.eta)
    if isinstance(spec, InverseGaussian):
        d, g = spec.delta, spec.gamma
        return (math.log(d * t) - 0.5 * math.log(2.0 * math.pi) - 1.5 * np.log(x)
                + d * g * t - 0.5 * (d**2 * t**2 / x + g**2 * x))
    raise Unsupported(f"unknown subordinator spec {spec!r}")


def density(spec: SubordinatorSpec, x, t: float):
    """Density of D_f(t); see ``log_density`` for the supported families."""
    out = np.exp(log_density(spec, x, t))
    return float(out) if np.isscalar(x) else out


def inverse_stable_tail_cutoff(alpha: float, t: float, eps: float = 1e-12) -> float:
    """U with P(Y_alpha(t) > U) <= eps, via a Chernoff bound.

    E exp(s Y_alpha(t)) = E_{alpha,1}(s t^alpha) is entire, so
    P(Y > U) <= min_s E_{alpha,1}(s t^alpha) exp(-s U) over a grid of s.
    """
    if alpha == 1.0:
        return t
    s_grid = [2.0**k for k in range(-3, 13)]
    log_mgf = []
    for s in s_grid:
        try:
            log_mgf.append(math.log(specfun.mittag_leffler(alpha, 1.0, 1.0, s * t**alpha)))
        except (OverflowError, ArithmeticError):
            log_mgf.append(math.inf)
    u = inverse_stable_mean(alpha, t)
    log_eps = math.log(eps)
    for _ in range(200):
        best = min(lm - s * u for s, lm in zip(s_grid, log_mgf))
        if best <= log_eps:
            return u
        u *= 1.5
    raise StabilityError("could not bound the inverse-stable tail")
