"""Reproducible experiment driver.

Subcommands: pmf, simulate, moments, lrd, residuals, oracle-compare.
A YAML config describes the process and job parameters; outputs are CSV/JSON
artifacts that are byte-identical for a fixed (config, seed) regardless of
worker count.  Exit codes: 0 success, 1 numerical failure, 2 usage/config
failure.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import click
import numpy as np
import yaml

from . import gcp as gcp_mod
from . import skellam as sk_mod
from . import stats as stats_mod
from . import subordinators as subs
from . import timechange as tc_mod
from .errors import DomainError
from .rngstreams import BLOCK_SIZE, block_slices, substream

PROCESSES = ("gcp", "gfcp", "gsp", "gfsp", "tcgcp1", "tcgfcp1", "tcgcp2", "tcgfcp2")
TWO_SIDED = ("gsp", "gfsp")
TIME_CHANGED = ("tcgcp1", "tcgfcp1", "tcgcp2", "tcgfcp2")
FRACTIONAL = ("gfcp", "gfsp", "tcgfcp1", "tcgfcp2")

DEFAULT_METHOD = {
    "gcp": "exact", "gsp": "exact", "tcgcp1": "exact",
    "gfcp": "quadrature", "gfsp": "quadrature",
    "tcgcp2": "mc", "tcgfcp1": "mc", "tcgfcp2": "mc",
}
PMF_METHODS = {
    "gcp": ("exact", "mc"), "gsp": ("exact", "mc"),
    "gfcp": ("quadrature", "mc"), "gfsp": ("quadrature", "mc"),
    "tcgcp1": ("exact", "mc"), "tcgcp2": ("mc",),
    "tcgfcp1": ("mc",), "tcgfcp2": ("mc",),
}

SUB_FAMILIES = {
    "stable": (subs.Stable, ("alpha",)),
    "gamma": (subs.Gamma, ("a", "b")),
    "tempered_stable": (subs.TemperedStable, ("eta", "theta")),
    "inverse_gaussian": (subs.InverseGaussian, ("delta", "gamma")),
}


class ConfigError(Exception):
    pass


@dataclass
class Experiment:
    process: str
    rates: gcp_mod.RateVector | sk_mod.SkellamRates
    alpha: float
    sub: subs.SubordinatorSpec | None
    times: tuple[float, ...]
    s_ref: float | None
    n_lo: int
    n_hi: int
    paths: int
    seed: int
    method: str
    grid_step: float
    output: str | None

    @property
    def fp_cfg(self) -> subs.FirstPassageConfig:
        return subs.FirstPassageConfig(grid_step=self.grid_step)

    @property
    def two_sided(self) -> bool:
        return self.process in TWO_SIDED


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def _positive_list(raw, name: str) -> tuple[float, ...]:
    _expect(isinstance(raw, (list, tuple)) and raw, f"{name} must be a nonempty list")
    out = []
    for v in raw:
        _expect(isinstance(v, (int, float)) and v > 0, f"{name} entries must be > 0")
        out.append(float(v))
    return tuple(out)


def parse_config(doc: dict) -> Experiment:
    """Validate a config document; raises ConfigError with a readable message."""
    _expect(isinstance(doc, dict), "config must be a mapping")
    known = {"config_version", "process", "rates", "alpha", "subordinator",
             "times", "s", "n_range", "paths", "seed", "method", "grid_step",
             "output"}
    unknown = set(doc) - known
    _expect(not unknown, f"unknown config keys: {sorted(unknown)}")
    _expect(doc.get("config_version") == 1, "config_version must be 1")
    process = doc.get("process")
    _expect(process in PROCESSES, f"process must be one of {PROCESSES}")

    raw_rates = doc.get("rates")
    _expect(raw_rates is not None, "rates is required")
    if process in TWO_SIDED:
        _expect(isinstance(raw_rates, dict) and set(raw_rates) == {"up", "down"},
                f"{process} needs rates: {{up: [...], down: [...]}}")
        up = gcp_mod.RateVector(_positive_list(raw_rates["up"], "rates.up"))
        down = gcp_mod.RateVector(_positive_list(raw_rates["down"], "rates.down"))
        _expect(up.k == down.k, "rates.up and rates.down must have equal length")
        rates: gcp_mod.RateVector | sk_mod.SkellamRates = sk_mod.SkellamRates(up, down)
    else:
        _expect(isinstance(raw_rates, (list, tuple)),
                f"{process} needs rates: [lambda_1, ...]")
        rates = gcp_mod.RateVector(_positive_list(raw_rates, "rates"))

    alpha = doc.get("alpha", 1.0)
    _expect(isinstance(alpha, (int, float)) and 0.0 < alpha <= 1.0,
            "alpha must lie in (0, 1]")
    alpha = float(alpha)
    if process in ("gcp", "gsp", "tcgcp1", "tcgcp2"):
        _expect(alpha == 1.0, f"{process} is the alpha = 1 process; "
                              f"use its fractional variant for alpha < 1")

    sub = None
    if process in TIME_CHANGED:
        raw_sub = doc.get("subordinator")
        _expect(isinstance(raw_sub, dict) and "family" in raw_sub,
                f"{process} needs subordinator: {{family: ..., <params>}}")
        family = raw_sub["family"]
        _expect(family in SUB_FAMILIES,
                f"subordinator.family must be one of {sorted(SUB_FAMILIES)}")
        cls, params = SUB_FAMILIES[family]
        extra = set(raw_sub) - {"family", *params}
        _expect(not extra, f"unknown subordinator keys: {sorted(extra)}")
        missing = [p for p in params if p not in raw_sub]
        _expect(not missing, f"subordinator.{family} needs parameters {params}")
        try:
            sub = cls(**{p: float(raw_sub[p]) for p in params})
        except DomainError as exc:
            raise ConfigError(f"subordinator: {exc}") from exc
        if process in ("tcgcp1", "tcgfcp1"):
            _expect(not isinstance(sub, subs.Stable),
                    "forward time change rejects the stable subordinator")
    else:
        _expect(doc.get("subordinator") is None,
                f"{process} takes no subordinator")

    times_raw = doc.get("times", [1.0])
    times = _positive_list(times_raw, "times")
    _expect(all(b > a for a, b in zip(times, times[1:])),
            "times must be strictly increasing")

    s_ref = doc.get("s")
    if s_ref is not None:
        _expect(isinstance(s_ref, (int, float)) and s_ref > 0, "s must be > 0")
        s_ref = float(s_ref)
        _expect(s_ref <= times[0], "s must not exceed the first time point")

    default_range = [-20, 20] if process in TWO_SIDED else [0, 40]
    n_range = doc.get("n_range", default_range)
    _expect(isinstance(n_range, (list, tuple)) and len(n_range) == 2
            and all(isinstance(v, int) for v in n_range) and n_range[0] <= n_range[1],
            "n_range must be [lo, hi] with integer lo <= hi")
    n_lo, n_hi = int(n_range[0]), int(n_range[1])
    if process not in TWO_SIDED:
        n_lo = max(n_lo, 0)

    paths = doc.get("paths", 100_000)
    _expect(isinstance(paths, int) and paths >= 1, "paths must be a positive integer")
    seed = doc.get("seed", 0)
    _expect(isinstance(seed, int) and seed >= 0, "seed must be a nonnegative integer")

    method = doc.get("method", DEFAULT_METHOD[process])
    _expect(method in ("exact", "quadrature", "mc"),
            "method must be exact, quadrature or mc")

    grid_step = doc.get("grid_step", 1e-3)
    _expect(isinstance(grid_step, (int, float)) and grid_step > 0,
            "grid_step must be > 0")

    output = doc.get("output")
    _expect(output is None or isinstance(output, str), "output must be a path")

    return Experiment(process, rates, alpha, sub, times, s_ref, n_lo, n_hi,
                      paths, seed, method, float(grid_step), output)


def load_config(path: str) -> Experiment:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    return parse_config(doc)


# ---------------------------------------------------------------------------
# Output helpers

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# pmf

def _clock_mixing_table(exp: Experiment, t: float, ns: list[int],
                        ) -> tuple[dict[int, float], dict[int, float]]:
    """Monte Carlo pmf by mixing the exact conditional pmf over clock draws."""
    rng = substream(exp.seed, 0)
    n_draws = exp.paths
    if exp.process in ("gfcp", "gfsp"):
        clocks = subs.sample_inverse_stable(exp.alpha, t, rng, size=n_draws)
    elif exp.process in ("tcgcp1", "tcgfcp1"):
        clocks = subs.sample_marginal(exp.sub, t, rng, size=n_draws)
    else:  # tcgcp2/tcgfcp2
        clocks = subs.sample_first_passage(exp.sub, t, exp.fp_cfg, rng, size=n_draws)
    if exp.process in ("tcgfcp1", "tcgfcp2"):
        clocks = (clocks / subs.unit_stable(exp.alpha, rng, n_draws)) ** exp.alpha
    clocks = np.maximum(clocks, 1e-300)
    values: dict[int, float] = {}
    errors: dict[int, float] = {}
    for n in ns:
        if exp.two_sided:
            logp = sk_mod.gsp_logpmf_at_times(exp.rates, n, clocks)
        else:
            logp = gcp_mod.gcp_logpmf_at_times(exp.rates, n, clocks)
        vals = np.exp(logp)
        values[n] = float(vals.mean())
        errors[n] = float(vals.std(ddof=1) / math.sqrt(n_draws))
    return values, errors


def _empirical_table(exp: Experiment, t: float, ns: list[int],
                     ) -> tuple[dict[int, float], dict[int, float]]:
    draws = _simulate_values(exp, (t,))[:, 0]
    n_draws = draws.size
    values, errors = {}, {}
    for n in ns:
        p = float((draws == n).mean())
        values[n] = p
        errors[n] = math.sqrt(p * (1.0 - p) / n_draws)
    return values, errors


def run_pmf(exp: Experiment) -> tuple[list[str], list[list]]:
    if exp.method not in PMF_METHODS[exp.process]:
        raise ConfigError(f"method={exp.method} is not available for "
                         f"{exp.process} pmf (choose from "
                         f"{PMF_METHODS[exp.process]})")
    t = exp.times[-1]
    ns = list(range(exp.n_lo, exp.n_hi + 1))
    rows: list[list] = []
    if exp.method in ("exact", "quadrature"):
        for n in ns:
            if exp.process == "gcp":
                p = gcp_mod.gcp_pmf(exp.rates, n, t)
            elif exp.process == "gsp":
                p = sk_mod.gsp_pmf(exp.rates, n, t)
            elif exp.process == "tcgcp1":
                spec = tc_mod.TimeChangedSpec(exp.rates, exp.sub,
                                              tc_mod.Direction.FORWARD, 1.0)
                p = tc_mod.tcgcp1_pmf(spec, n, t)
            elif exp.process == "gfcp":
                p = gcp_mod.gfcp_pmf(exp.rates, exp.alpha, n, t, "quadrature")
            else:  # gfsp
                p = sk_mod.gfsp_pmf(exp.rates, exp.alpha, n, t, "quadrature")
            rows.append([n, p, None, exp.method])
    else:
        if exp.process in ("gcp", "gsp"):
            values, errors = _empirical_table(exp, t, ns)
        else:
            values, errors = _clock_mixing_table(exp, t, ns)
        for n in ns:
            rows.append([n, values[n], errors[n], "mc"])
    return ["n", "probability", "stderr", "method"], rows


# ---------------------------------------------------------------------------
# simulate (joint paths, deterministic block substreams)

def _simulate_block(exp: Experiment, times: tuple[float, ...], n_paths: int,
                    block_index: int) -> np.ndarray:
    rng = substream(exp.seed, block_index)
    times_arr = np.asarray(times)
    dts = np.diff(np.concatenate(([0.0], times_arr)))
    proc = exp.process
    if proc == "gcp":
        inc = gcp_mod.sample_gcp_increments(exp.rates, dts, rng, n_paths)
        return np.cumsum(inc, axis=1)
    if proc == "gsp":
        up = gcp_mod.sample_gcp_increments(exp.rates.up, dts, rng, n_paths)
        down = gcp_mod.sample_gcp_increments(exp.rates.down, dts, rng, n_paths)
        return np.cumsum(up - down, axis=1)
    if proc in ("gfcp", "gfsp"):
        clocks = subs.first_passage_levels(subs.Stable(exp.alpha), times_arr,
                                           exp.fp_cfg, rng, n_paths)
    elif proc in ("tcgcp1", "tcgfcp1"):
        cols = [subs.sample_marginal(exp.sub, dt, rng, size=n_paths) for dt in dts]
        clocks = np.cumsum(np.column_stack(cols), axis=1)
        if exp.alpha < 1.0:
            clocks = subs.first_passage_levels(subs.Stable(exp.alpha), clocks,
                                               exp.fp_cfg, rng, n_paths)
    else:  # tcgcp2/tcgfcp2
        clocks = subs.first_passage_levels(exp.sub, times_arr, exp.fp_cfg,
                                           rng, n_paths)
        if exp.alpha < 1.0:
            clocks = subs.first_passage_levels(subs.Stable(exp.alpha), clocks,
                                               exp.fp_cfg, rng, n_paths)
    clock_dts = np.diff(np.concatenate(
        (np.zeros((n_paths, 1)), clocks), axis=1), axis=1)
    if exp.two_sided:
        up = gcp_mod.sample_gcp_increments(exp.rates.up, clock_dts, rng, n_paths)
        down = gcp_mod.sample_gcp_increments(exp.rates.down, clock_dts, rng, n_paths)
        return np.cumsum(up - down, axis=1)
    inc = gcp_mod.sample_gcp_increments(exp.rates, clock_dts, rng, n_paths)
    return np.cumsum(inc, axis=1)


def _simulate_values(exp: Experiment, times: tuple[float, ...],
                     threads: int = 1) -> np.ndarray:
    """(paths x times) value matrix; byte-identical for any thread count."""
    blocks = list(block_slices(exp.paths, BLOCK_SIZE))
    results: list[np.ndarray | None] = [None] * len(blocks)

    def work(item):
        b, sl = item
        return b, _simulate_block(exp, times, sl.stop - sl.start, b)

    if threads <= 1 or len(blocks) == 1:
        for item in blocks:
            b, vals = work(item)
            results[b] = vals
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            for b, vals in pool.map(work, blocks):
                results[b] = vals
    return np.concatenate(results, axis=0)


def run_simulate(exp: Experiment, threads: int) -> tuple[list[str], list[list]]:
    values = _simulate_values(exp, exp.times, threads)
    rows = []
    for p in range(values.shape[0]):
        for j, t in enumerate(exp.times):
            rows.append([p, t, int(values[p, j])])
    return ["path", "time", "value"], rows


# ---------------------------------------------------------------------------
# moments

def _tc_spec(exp: Experiment) -> tc_mod.TimeChangedSpec:
    direction = (tc_mod.Direction.FORWARD if exp.process in ("tcgcp1", "tcgfcp1")
                 else tc_mod.Direction.INVERSE)
    return tc_mod.TimeChangedSpec(exp.rates, exp.sub, direction, exp.alpha)


def run_moments(exp: Experiment) -> tuple[list[str], list[list]]:
    s_ref = exp.s_ref if exp.s_ref is not None else exp.times[0]
    header = ["time", "mean", "var", "cov", "mean_se", "var_se", "cov_se"]
    rows: list[list] = []
    if exp.process in ("gcp", "gfcp"):
        for t in exp.times:
            mean, cov = gcp_mod.gfcp_moments(exp.rates, exp.alpha, s_ref, t)
            var = gcp_mod.gfcp_moments(exp.rates, exp.alpha, t, t)[1]
            rows.append([t, mean, var, cov, None, None, None])
    elif exp.process in ("gsp", "gfsp"):
        for t in exp.times:
            mean, var, cov = sk_mod.gfsp_moments(exp.rates, exp.alpha, s_ref, t)
            rows.append([t, mean, var, cov, None, None, None])
    else:
        spec = _tc_spec(exp)
        cst = tc_mod.derived_constants(exp.rates, exp.alpha)
        for i, t in enumerate(exp.times):
            rng = substream(exp.seed, i)
            if exp.process in ("tcgcp1", "tcgfcp1"):
                m = tc_mod.tcgfcp1_moments(spec, cst, s_ref, t, exp.paths, rng)
            else:
                m = tc_mod.tcgfcp2_moments(spec, cst, s_ref, t, exp.paths, rng,
                                           exp.fp_cfg)
            rows.append([t, m.mean, m.var, m.cov, m.mean_se, m.var_se, m.cov_se])
    return header, rows


# ---------------------------------------------------------------------------
# lrd

def run_lrd(exp: Experiment) -> tuple[tuple[list[str], list[list]], dict]:
    if len(exp.times) < 5:
        raise ConfigError("lrd needs at least 5 time points")
    s_ref = exp.s_ref if exp.s_ref is not None else 5.0
    if s_ref > exp.times[0]:
        raise ConfigError("lrd needs s <= first time point")
    pts: list[tuple[float, float]] = []
    rows: list[list] = []
    if exp.process in ("gsp", "gfsp"):
        var_s = sk_mod.gfsp_moments(exp.rates, exp.alpha, s_ref, s_ref)[1]
        for t in exp.times:
            _, var_t, cov = sk_mod.gfsp_moments(exp.rates, exp.alpha, s_ref, t)
            corr = cov / math.sqrt(var_s * var_t)
            pts.append((t, corr))
            rows.append([t, corr, None])
    elif exp.process in ("gcp", "gfcp"):
        var_s = gcp_mod.gfcp_moments(exp.rates, exp.alpha, s_ref, s_ref)[1]
        for t in exp.times:
            cov = gcp_mod.gfcp_moments(exp.rates, exp.alpha, s_ref, t)[1]
            var_t = gcp_mod.gfcp_moments(exp.rates, exp.alpha, t, t)[1]
            corr = cov / math.sqrt(var_s * var_t)
            pts.append((t, corr))
            rows.append([t, corr, None])
    else:
        spec = _tc_spec(exp)
        cst = tc_mod.derived_constants(exp.rates, exp.alpha)
        for i, t in enumerate(exp.times):
            rng = substream(exp.seed, i)
            if exp.process in ("tcgcp1", "tcgfcp1"):
                m = tc_mod.tcgfcp1_moments(spec, cst, s_ref, t, exp.paths, rng)
                ms = tc_mod.tcgfcp1_moments(spec, cst, s_ref, s_ref, exp.paths, rng)
            else:
                m = tc_mod.tcgfcp2_moments(spec, cst, s_ref, t, exp.paths, rng,
                                           exp.fp_cfg)
                ms = tc_mod.tcgfcp2_moments(spec, cst, s_ref, s_ref, exp.paths,
                                            rng, exp.fp_cfg)
            corr = m.cov / math.sqrt(ms.var * m.var)
            # delta method, cross-correlations between the moment estimates
            # neglected
            corr_se = abs(corr) * math.sqrt(
                (m.cov_se / m.cov) ** 2 + (m.var_se / (2.0 * m.var)) ** 2
                + (ms.var_se / (2.0 * ms.var)) ** 2) if m.cov != 0.0 else 0.0
            pts.append((t, corr))
            rows.append([t, corr, corr_se])
    fit = stats_mod.lrd_fit(pts)
    fit_doc = {"slope": fit.slope, "intercept": fit.intercept,
               "stderr": fit.stderr, "r_squared": fit.r_squared}
    return (["time", "corr", "corr_se"], rows), fit_doc


# ---------------------------------------------------------------------------
# residuals

def run_residuals(exp: Experiment) -> tuple[list[str], list[list]]:
    header = ["equation", "n", "t", "residual", "tolerance", "pass"]
    rows: list[list] = []
    ns = range(exp.n_lo, exp.n_hi + 1)
    if exp.process == "gsp":
        for t in exp.times:
            for n in ns:
                res = sk_mod.gsp_ode_residual(exp.rates, n, t, 1e-4 * min(1.0, t))
                rows.append(["gsp_ode", n, t, res, 1e-6, res < 1e-6])
    elif exp.process == "gfsp":
        for t in exp.times:
            for n in ns:
                res = sk_mod.gfsp_fde_residual(exp.rates, exp.alpha, n, t)
                rows.append(["gfsp_fde", n, t, res, 1e-3, res < 1e-3])
    elif exp.process == "gcp":
        h = 1e-4
        for t in exp.times:
            for n in ns:
                dq = (gcp_mod.gcp_pmf(exp.rates, n, t + h)
                      - gcp_mod.gcp_pmf(exp.rates, n, t - h)) / (2 * h)
                rhs = -exp.rates.total * gcp_mod.gcp_pmf(exp.rates, n, t)
                for j, lam_j in enumerate(exp.rates.lam, start=1):
                    if j <= n:
                        rhs += lam_j * gcp_mod.gcp_pmf(exp.rates, n - j, t)
                res = abs(dq - rhs)
                rows.append(["gcp_ode", n, t, res, 1e-6, res < 1e-6])
    elif exp.process == "tcgcp1" and isinstance(exp.sub, subs.TemperedStable):
        if exp.sub.theta != 0.5:
            raise ConfigError("tempered-stable residuals need theta = 1/2")
        for t in exp.times:
            for n in ns:
                res = tc_mod.tss_ode_residual(exp.rates, exp.sub.eta, n, t)
                rows.append(["tss_ode", n, t, res, 1e-4, res < 1e-4])
    elif exp.process == "tcgcp1" and isinstance(exp.sub, subs.InverseGaussian):
        for t in exp.times:
            for n in ns:
                res = tc_mod.igs_ode_residual(exp.rates, exp.sub.delta,
                                              exp.sub.gamma, n, t)
                rows.append(["igs_ode", n, t, res, 1e-4, res < 1e-4])
    else:
        raise ConfigError(f"no residual suite for process={exp.process} "
                          "(supported: gcp, gsp, gfsp, tcgcp1 with "
                          "tempered_stable theta=1/2 or inverse_gaussian)")
    return header, rows


# ---------------------------------------------------------------------------
# oracle-compare

def run_oracle_compare() -> tuple[list[tuple[str, float, float, bool]], bool]:
    """Closed-form vs independent-oracle spot checks; returns rows and
    overall pass."""
    import scipy.special as sp

    from . import specfun as sf

    checks: list[tuple[str, float, float, bool]] = []

    def add(name: str, err: float, tol: float) -> None:
        checks.append((name, err, tol, bool(err < tol)))

    xs = np.linspace(-10, 10, 41)
    err = max(abs(sf.mittag_leffler(1, 1, 1, float(x)) - math.exp(x))
              * math.exp(-abs(x)) for x in xs)
    add("mittag_leffler_vs_exp", err, 1e-10)

    xs = np.linspace(0, 5, 26)
    err = max(abs(sf.wright_m(0.5, float(x))
                  - math.exp(-x * x / 4.0) / math.sqrt(math.pi)) for x in xs)
    add("wright_half_closed_form", err, 1e-10)

    err = max(abs(sf.bessel_i(n, x) - float(sp.iv(n, x)))
              / max(float(sp.iv(n, x)), 1e-300)
              for n in range(0, 8) for x in (0.3, 1.7, 4.0, 9.0))
    add("bessel_series_vs_scipy", err, 1e-12)

    rates = sk_mod.SkellamRates(gcp_mod.RateVector((1.0,)),
                                gcp_mod.RateVector((0.5,)))
    err = max(abs(sk_mod.gsp_pmf(rates, n, 1.0) - sk_mod.gsp_pmf_oracle(rates, n, 1.0))
              for n in range(-15, 16))
    add("gsp_bessel_vs_convolution", err, 1e-10)

    r2 = gcp_mod.RateVector((0.7, 0.3))
    series = sum(0.5**n * gcp_mod.gcp_pmf(r2, n, 1.0) for n in range(0, 60))
    add("gcp_pgf_duality", abs(gcp_mod.gcp_pgf(r2, 0.5, 1.0) - series), 1e-10)

    g = subs.Gamma(1.0, 1.0)
    err = max(abs(tc_mod.laplace_moment(g, 2.0, s, 1.0, "closed")
                  - tc_mod.laplace_moment(g, 2.0, s, 1.0, "quadrature"))
              for s in range(0, 6))
    add("laplace_moment_closed_vs_quadrature", err, 1e-10)

    spec = tc_mod.TimeChangedSpec(r2, g, tc_mod.Direction.FORWARD, 1.0)
    err = max(abs(tc_mod.jump_rate(spec, n) - tc_mod.levy_weights(spec, n))
              for n in range(1, 31))
    add("jump_rate_vs_levy_weights", err, 1e-10)

    rng = substream(2024, 0)
    draws = gcp_mod.sample_gcp(gcp_mod.RateVector((0.5, 0.3, 0.2)), 2.0, rng,
                               size=100_000)
    exact = {n: gcp_mod.gcp_pmf(gcp_mod.RateVector((0.5, 0.3, 0.2)), n, 2.0)
             for n in range(0, 30)}
    emp = np.bincount(draws, minlength=30) / draws.size
    tv = 0.5 * sum(abs(emp[n] - exact[n]) for n in range(30)) \
        + 0.5 * float((draws >= 30).mean())
    add("gcp_pmf_vs_mc_tv", tv, 1.5e-2)

    return checks, all(row[3] for row in checks)


# ---------------------------------------------------------------------------
# click wiring

def _threads_option(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("GENCOUNT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError("GENCOUNT_THREADS must be an integer") from exc
    return os.cpu_count() or 1


def _run_command(kind: str, config: str, seed: int | None, out: str | None,
                 threads: int | None) -> int:
    try:
        exp = load_config(config)
        if seed is not None:
            exp.seed = seed
        if out is not None:
            exp.output = out
        if exp.output is None:
            raise ConfigError("no output path: set output in the config or pass --out")
        n_threads = _threads_option(threads)
        if kind == "pmf":
            header, rows = run_pmf(exp)
            _write_atomic(exp.output, _csv_text(header, rows))
        elif kind == "simulate":
            header, rows = run_simulate(exp, n_threads)
            _write_atomic(exp.output, _csv_text(header, rows))
        elif kind == "moments":
            header, rows = run_moments(exp)
            _write_atomic(exp.output, _csv_text(header, rows))
        elif kind == "lrd":
            (header, rows), fit_doc = run_lrd(exp)
            _write_atomic(exp.output, _csv_text(header, rows))
            _write_atomic(exp.output + ".fit.json",
                          json.dumps(fit_doc, sort_keys=True, indent=2) + "\n")
        elif kind == "residuals":
            header, rows = run_residuals(exp)
            _write_atomic(exp.output, _csv_text(header, rows))
            if not all(row[5] for row in rows):
                click.echo("some residuals exceed tolerance", err=True)
                return 1
        return 0
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return 2
    except Exception as exc:  # numerical failure: machine-readable on stderr
        click.echo(json.dumps({"error": str(exc), "type": type(exc).__name__},
                              sort_keys=True), err=True)
        return 1


def _common_options(fn):
    fn = click.option("--threads", type=int, default=None,
                      help="worker threads (default: GENCOUNT_THREADS or all "
                           "cores; result-invariant)")(fn)
    fn = click.option("--out", type=str, default=None,
                      help="output path (overrides config)")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="seed (overrides config)")(fn)
    fn = click.option("--config", required=True, type=str,
                      help="YAML experiment config")(fn)
    return fn


@click.group()
def main() -> None:
    """Counting-process distributions, simulators and verification jobs."""


def _make_command(kind: str, doc: str):
    @main.command(name=kind, help=doc)
    @_common_options
    def _cmd(config: str, seed: int | None, out: str | None,
             threads: int | None) -> None:
        sys.exit(_run_command(kind, config, seed, out, threads))

    return _cmd


_make_command("pmf", "Tabulate a pmf over n_range (CSV: n,probability,stderr,method).")
_make_command("simulate", "Sample joint paths (CSV: path,time,value).")
_make_command("moments", "Mean/variance/covariance per time (CSV).")
_make_command("lrd", "Correlation decay table and log-log fit (CSV + JSON).")
_make_command("residuals", "Governing-equation residual suite (CSV).")


@main.command(name="oracle-compare",
              help="Run closed-form vs independent-oracle checks; "
                   "print a pass/fail table.")
def oracle_compare_cmd() -> None:
    checks, ok = run_oracle_compare()
    width = max(len(name) for name, *_ in checks)
    for name, err, tol, passed in checks:
        status = "PASS" if passed else "FAIL"
        click.echo(f"{name:<{width}}  err={err:.3e}  tol={tol:.1e}  {status}")
    click.echo(f"overall: {'PASS' if ok else 'FAIL'}")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
