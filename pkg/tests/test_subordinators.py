"""Subordinator samplers against their Laplace transforms, densities against
quadrature/CDF oracles, inverse-stable marginals against the moment formulas."""

import math

import numpy as np
import pytest
import scipy.special as sp

from conftest import assert_within_se
from gencount import stats
from gencount import subordinators as subs
from gencount.errors import DomainError, RejectionBudgetExceeded, StabilityError, Unsupported
from gencount.rngstreams import substream

ALL_SPECS = [
    subs.Stable(0.5),
    subs.Stable(0.7),
    subs.Gamma(1.0, 1.0),
    subs.Gamma(2.0, 0.7),
    subs.TemperedStable(1.0, 0.5),
    subs.TemperedStable(0.5, 0.3),
    subs.InverseGaussian(1.0, 1.0),
    subs.InverseGaussian(2.0, 1.5),
]


class TestBernstein:
    def test_zero_and_monotone_concave(self):
        grid = np.linspace(0.0, 10.0, 100)
        for spec in ALL_SPECS:
            vals = subs.bernstein(spec, grid)
            assert vals[0] == 0.0
            assert np.all(np.diff(vals) > 0.0)
            assert np.all(np.diff(vals, 2) < 1e-12)

    def test_gamma_log_value(self):
        assert subs.bernstein(subs.Gamma(1.0, 1.0), math.e - 1.0) == pytest.approx(1.0)

    def test_tempered_stable_at_zero(self):
        assert subs.bernstein(subs.TemperedStable(3.7, 0.4), 0.0) == 0.0

    def test_inverse_gaussian_value(self):
        assert subs.bernstein(subs.InverseGaussian(2.0, 1.0), 1.5) == pytest.approx(2.0)

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            subs.bernstein(subs.Gamma(1.0, 1.0), -0.1)


class TestMarginalSamplers:
    @pytest.mark.parametrize("spec", ALL_SPECS, ids=str)
    def test_empirical_laplace_transform(self, spec):
        # (1/N) sum e^{-s X} vs e^{-t f(s)} within 3 standard errors
        rng = substream(101, 0)
        t = 1.0
        draws = subs.sample_marginal(spec, t, rng, size=1_000_000)
        assert np.all(draws > 0.0)
        for s in (0.5, 1.0, 2.0):
            vals = np.exp(-s * draws)
            se = vals.std(ddof=1) / math.sqrt(vals.size)
            assert_within_se(vals.mean(), math.exp(-t * subs.bernstein(spec, s)), se)

    def test_gamma_mean(self):
        rng = substream(102, 0)
        draws = subs.sample_marginal(subs.Gamma(1.0, 1.0), 1.0, rng, size=1_000_000)
        assert abs(draws.mean() - 1.0) < 0.005

    def test_inverse_gaussian_mean(self):
        rng = substream(103, 0)
        draws = subs.sample_marginal(subs.InverseGaussian(1.0, 1.0), 1.0, rng,
                                     size=1_000_000)
        assert abs(draws.mean() - 1.0) < 0.005

    def test_scalar_mode(self, rng):
        x = subs.sample_marginal(subs.Gamma(1.0, 1.0), 1.0, rng)
        assert isinstance(x, float) and x > 0.0

    def test_tempered_stable_budget(self, rng):
        with pytest.raises(RejectionBudgetExceeded):
            subs.sample_marginal(subs.TemperedStable(50.0, 0.9), 50.0, rng, size=2)


class TestInverseStable:
    def test_moment_match(self):
        rng = substream(104, 0)
        ys = subs.sample_inverse_stable(0.5, 1.0, rng, size=1_000_000)
        assert np.all(ys >= 0.0)
        mean, var, _ = subs.inverse_stable_moments(0.5, 1.0, 1.0)
        assert abs(ys.mean() - mean) < 0.01
        assert abs(ys.var(ddof=1) - var) < 0.02

    def test_self_similar_scaling(self):
        rng = substream(105, 0)
        t = 2.5
        ys = subs.sample_inverse_stable(0.7, t, rng, size=400_000)
        se = ys.std(ddof=1) / math.sqrt(ys.size)
        assert_within_se(ys.mean(), subs.inverse_stable_mean(0.7, t), se)

    def test_moments_consistency_at_s_equals_t(self):
        for alpha in (0.3, 0.5, 0.8):
            mean, var, cov = subs.inverse_stable_moments(alpha, 2.0, 2.0)
            assert cov == pytest.approx(var, rel=1e-12)

    def test_degenerate_alpha_one(self):
        assert subs.inverse_stable_moments(1.0, 1.0, 2.0) == (2.0, 0.0, 0.0)

    def test_cov_asymptote(self):
        # exact covariance approaches the large-t form: 1% at t=1000, alpha=0.5
        exact = subs.inverse_stable_cov(0.5, 1.0, 1000.0)
        asym = subs.inverse_stable_cov_asymptote(0.5, 1.0, 1000.0)
        assert asym == pytest.approx(exact, rel=0.01)

    def test_pdf_closed_form_half(self):
        for u in (0.0, 0.5, 2.0):
            for t in (0.5, 2.0):
                expected = math.exp(-u * u / (4 * t)) / math.sqrt(math.pi * t)
                assert subs.inverse_stable_pdf(0.5, u, t) == pytest.approx(
                    expected, rel=1e-12)

    def test_pdf_at_zero_general_alpha(self):
        for alpha in (0.3, 0.6):
            assert subs.inverse_stable_pdf(alpha, 0.0, 2.0) == pytest.approx(
                2.0**-alpha / math.gamma(1 - alpha), rel=1e-12)

    def test_pdf_series_vs_closed_form(self):
        # the Wright series run at alpha=0.5 is an independent oracle for the
        # closed form used in production
        from gencount.specfun import wright_m

        for u in (0.3, 1.0, 2.0):
            series = wright_m(0.5, u) # t = 1
            assert subs.inverse_stable_pdf(0.5, u, 1.0) == pytest.approx(
                series, rel=1e-10)

    def test_pdf_normalizes_general_alpha(self):
        # the Wright series covers u <= bound only; the truncated integral
        # must account for all but the (Chernoff-bounded ~3e-4) tail
        from gencount.specfun import wright_stability_bound

        upper = wright_stability_bound(0.7)  # t = 1
        val = stats.quad_halfline(
            lambda u: subs.inverse_stable_pdf(0.7, u, 1.0), 1e-9, upper=upper)
        assert 0.999 < val < 1.0 + 1e-9

    def test_pdf_stability_error(self):
        with pytest.raises(StabilityError):
            subs.inverse_stable_pdf(0.7, 50.0, 1.0)


class TestDensities:
    @pytest.mark.parametrize("spec", [
        subs.Gamma(1.0, 1.0), subs.Gamma(2.0, 1.5),
        subs.TemperedStable(1.0, 0.5), subs.InverseGaussian(1.0, 1.0),
    ], ids=str)
    def test_normalization(self, spec):
        val = stats.quad_halfline(lambda x: subs.density(spec, x, 1.3), 1e-10)
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_gamma_shape_one_is_exponential(self):
        assert subs.density(subs.Gamma(1.0, 1.0), 0.7, 1.0) == pytest.approx(
            math.exp(-0.7), rel=1e-12)

    def test_stable_half_laplace_oracle(self):
        # integral e^{-sx} density dx = e^{-t sqrt(s)}
        spec = subs.Stable(0.5)
        for s in (0.5, 1.0, 2.0):
            val = stats.quad_halfline(
                lambda x: np.exp(-s * x) * subs.density(spec, x, 1.5), 1e-11)
            assert val == pytest.approx(math.exp(-1.5 * math.sqrt(s)), rel=1e-9)

    def test_stable_half_cdf_oracle(self):
        # integral_0^X density = erfc(t / (2 sqrt(X)))
        spec = subs.Stable(0.5)
        t = 1.0
        for upper in (0.5, 2.0, 10.0):
            val = stats.quad_refine(lambda x: subs.density(spec, x, t),
                                    0.0, upper, 1e-11)
            assert val == pytest.approx(sp.erfc(t / (2 * math.sqrt(upper))), rel=1e-8)

    def test_tempered_stable_tilting_laplace_oracle(self):
        spec = subs.TemperedStable(0.8, 0.5)
        for s in (0.5, 2.0):
            val = stats.quad_halfline(
                lambda x: np.exp(-s * x) * subs.density(spec, x, 1.0), 1e-11)
            assert val == pytest.approx(
                math.exp(-subs.bernstein(spec, s)), rel=1e-9)

    def test_unsupported_indices(self):
        with pytest.raises(Unsupported):
            subs.density(subs.Stable(0.7), 1.0, 1.0)
        with pytest.raises(Unsupported):
            subs.density(subs.TemperedStable(1.0, 0.3), 1.0, 1.0)


class TestFirstPassage:
    def test_stable_matches_exact_sampler(self):
        # TV < 0.02 on a 200-bin histogram, 1e5 grid draws (Delta=1e-3)
        # against 1e6 exact draws
        rng = substream(106, 0)
        cfg = subs.FirstPassageConfig()
        fp = subs.sample_first_passage(subs.Stable(0.5), 1.0, cfg, rng, size=100_000)
        exact = subs.sample_inverse_stable(0.5, 1.0, rng, size=1_000_000)
        bins = np.linspace(0.0, 8.0, 201)
        p, _ = np.histogram(fp, bins=bins)
        q, _ = np.histogram(exact, bins=bins)
        tv = 0.5 * np.abs(p / fp.size - q / exact.size).sum() \
            + 0.5 * abs((fp > 8.0).mean() - (exact > 8.0).mean())
        assert tv < 0.02
        assert np.all(fp >= 0.0)

    def test_gamma_mean_vs_fine_grid_reference(self):
        # coarse-grid mean within 2% of a fine-grid (Delta=1e-5) reference
        rng = substream(107, 0)
        coarse = subs.sample_first_passage(
            subs.Gamma(1.0, 1.0), 1.0, subs.FirstPassageConfig(1e-3), rng,
            size=100_000)
        fine = subs.sample_first_passage(
            subs.Gamma(1.0, 1.0), 1.0, subs.FirstPassageConfig(1e-5), rng,
            size=5_000)
        assert coarse.mean() == pytest.approx(fine.mean(), rel=0.02)

    def test_refine_reduces_value(self, rng):
        cfg_plain = subs.FirstPassageConfig(grid_step=0.05, refine=False)
        cfg_ref = subs.FirstPassageConfig(grid_step=0.05, refine=True)
        h_plain = subs.sample_first_passage(subs.Gamma(1.0, 1.0), 1.0, cfg_plain,
                                            substream(1, 0), size=2000)
        h_ref = subs.sample_first_passage(subs.Gamma(1.0, 1.0), 1.0, cfg_ref,
                                          substream(1, 0), size=2000)
        assert np.all(h_ref <= h_plain)
        assert np.all(h_ref > 0.0)

    def test_multi_level_monotone(self, rng):
        levels = np.array([0.5, 1.0, 2.0])
        out = subs.first_passage_levels(subs.Gamma(1.0, 1.0), levels,
                                        subs.FirstPassageConfig(), rng, 500)
        assert out.shape == (500, 3)
        assert np.all(np.diff(out, axis=1) >= 0.0)

    def test_per_path_levels(self, rng):
        levels = np.column_stack([np.full(300, 0.5), rng.uniform(1.0, 2.0, 300)])
        out = subs.first_passage_levels(subs.InverseGaussian(1.0, 1.0), levels,
                                        subs.FirstPassageConfig(), rng, 300)
        assert np.all(out[:, 1] >= out[:, 0])

    def test_level_validation(self, rng):
        with pytest.raises(DomainError):
            subs.first_passage_levels(subs.Gamma(1.0, 1.0), np.array([2.0, 1.0]),
                                      subs.FirstPassageConfig(), rng, 10)


def test_spec_validation():
    with pytest.raises(DomainError):
        subs.Stable(1.2)
    with pytest.raises(DomainError):
        subs.Gamma(-1.0, 1.0)
    with pytest.raises(DomainError):
        subs.TemperedStable(1.0, 1.0)
    with pytest.raises(DomainError):
        subs.InverseGaussian(1.0, 0.0)
    with pytest.raises(DomainError):
        subs.FirstPassageConfig(grid_step=0.0)
