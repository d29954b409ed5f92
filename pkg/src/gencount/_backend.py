"""Kernel backend selection.

Prefers the compiled Cython kernels when the extension built; falls back to
the pure-numpy implementations otherwise.  ``GENCOUNT_BACKEND=python`` forces
the fallback (used by the benchmark and by CI to exercise both paths).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("GENCOUNT_BACKEND", "").lower() == "python":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

STATUS_OK = _kernels_py.STATUS_OK
STATUS_NO_CONVERGENCE = _kernels_py.STATUS_NO_CONVERGENCE

ml3_series = _impl.ml3_series
bessel_i_log = _impl.bessel_i_log
bessel_i_log_vec = _impl.bessel_i_log_vec
wright_m_series = _impl.wright_m_series
logpoly_eval_vec = _impl.logpoly_eval_vec
