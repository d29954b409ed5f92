"""Parity between the compiled kernels and the pure-numpy fallback."""

import math

import numpy as np
import pytest

from gencount import _kernels_py

impls = [pytest.param(_kernels_py, id="python")]
try:
    from gencount import _ckernels

    impls.append(pytest.param(_ckernels, id="compiled"))
except ImportError:
    _ckernels = None

REL_TOL = 1e-14
MAX_TERMS = 10_000


@pytest.fixture(params=impls)
def impl(request):
    return request.param


@pytest.mark.parametrize("args,expected", [
    ((1.0, 1.0, 1.0, 1.0), math.e),
    ((1.0, 2.0, 1.0, 0.0), 1.0),
    ((0.5, 1.0, 1.0, 0.0), 1.0),
])
def test_ml3_known_values(impl, args, expected):
    value, status = impl.ml3_series(*args, REL_TOL, MAX_TERMS)
    assert status == _kernels_py.STATUS_OK
    assert value == pytest.approx(expected, rel=1e-13)


def test_ml3_nonconvergence_status(impl):
    _, status = impl.ml3_series(0.5, 1.0, 1.0, -1.0, 1e-14, 3)
    assert status == _kernels_py.STATUS_NO_CONVERGENCE


def test_bessel_scalar_matches_scipy(impl):
    sp = pytest.importorskip("scipy.special")
    for n in (0, 1, 5):
        for x in (0.0, 0.4, 2.0, 15.0, 80.0):
            log_val, status = impl.bessel_i_log(n, x, REL_TOL, MAX_TERMS)
            assert status == _kernels_py.STATUS_OK
            expected = sp.ive(n, x) * np.exp(x) if x < 500 else None
            if x == 0.0:
                assert log_val == (0.0 if n == 0 else -math.inf)
            else:
                assert math.exp(log_val) == pytest.approx(expected, rel=1e-12)


def test_wright_status_and_value(impl):
    value, cancel, status = impl.wright_m_series(0.5, 1.0, REL_TOL, MAX_TERMS)
    assert status == _kernels_py.STATUS_OK
    assert value == pytest.approx(math.exp(-0.25) / math.sqrt(math.pi), rel=1e-12)
    assert cancel >= 0.0


@pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
def test_backends_agree():
    rng = np.random.default_rng(1)
    for alpha, beta, gam, x in [(0.5, 1.0, 1.0, -2.5), (0.7, 1.35, 3.0, 1.2),
                                (1.0, 1.0, 1.0, 8.0)]:
        a = _kernels_py.ml3_series(alpha, beta, gam, x, REL_TOL, MAX_TERMS)
        b = _ckernels.ml3_series(alpha, beta, gam, x, REL_TOL, MAX_TERMS)
        assert a[1] == b[1]
        assert a[0] == pytest.approx(b[0], rel=1e-13)

    xs = np.concatenate(([0.0], rng.exponential(3.0, 500)))
    for n in (0, 2, 7):
        va, sa = _kernels_py.bessel_i_log_vec(n, xs, REL_TOL, MAX_TERMS)
        vb, sb = _ckernels.bessel_i_log_vec(n, xs, REL_TOL, MAX_TERMS)
        assert sa == sb
        np.testing.assert_allclose(va, vb, rtol=1e-12, atol=1e-13)

    for alpha in (0.3, 0.5, 0.8):
        for x in (0.0, 0.5, 1.4):
            a = _kernels_py.wright_m_series(alpha, x, REL_TOL, MAX_TERMS)
            b = _ckernels.wright_m_series(alpha, x, REL_TOL, MAX_TERMS)
            assert a[2] == b[2]
            assert a[0] == pytest.approx(b[0], rel=1e-12, abs=1e-300)
            assert a[1] == pytest.approx(b[1], rel=1e-6, abs=1e-9)

    logc = np.log(rng.random(40))
    logc[rng.random(40) < 0.3] = -np.inf
    ts = rng.exponential(1.0, 300) + 1e-3
    np.testing.assert_allclose(_kernels_py.logpoly_eval_vec(logc, ts),
                               _ckernels.logpoly_eval_vec(logc, ts), rtol=1e-12)


def test_logpoly_eval_empty_coeffs(impl):
    logc = np.full(5, -np.inf)
    out = impl.logpoly_eval_vec(logc, np.array([1.0, 2.0]))
    assert np.all(np.isneginf(out))
