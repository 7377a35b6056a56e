"""Detection kernel backend, chosen at import.

The compiled extension ``airbeam._detect`` is used when it imports; the
numpy module ``airbeam._detect_py`` otherwise. Setting
``AIRBEAM_PURE_PYTHON=1`` forces the fallback.

Both kernels take ``y`` of shape ``(F, R)`` and a hypothesis table of
shape ``(spatial, H, R)`` and return ``(r_hat, h_hat, hypotheses,
antenna_terms)``. For the greedy kernel the last count is the number of
magnitude comparisons.
"""
from __future__ import annotations

import os

import numpy as np

from . import _detect_py

if os.environ.get("AIRBEAM_PURE_PYTHON"):
    _impl = _detect_py
    BACKEND = "python"
else:
    try:
        from . import _detect as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _detect_py
        BACKEND = "python"


def _prep(y, table):
    y = np.ascontiguousarray(np.atleast_2d(y), dtype=np.complex128)
    table = np.ascontiguousarray(table, dtype=np.complex128)
    return y, table


def ml_detect_batch(y, table):
    return _impl.ml_detect_batch(*_prep(y, table))


def greedy_detect_batch(y, table):
    return _impl.greedy_detect_batch(*_prep(y, table))
