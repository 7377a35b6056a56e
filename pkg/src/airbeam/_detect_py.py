"""Numpy fallback for the compiled detection kernels in ``_detect.pyx``.

Same signatures, same tie-breaking (first hypothesis in ``(r, h)`` order)
and the same arithmetic order for the distance metric.
"""
from __future__ import annotations

import numpy as np

_CHUNK = 4096


def _sqabs(d: np.ndarray) -> np.ndarray:
    return d.real * d.real + d.imag * d.imag


def ml_detect_batch(y: np.ndarray, table: np.ndarray):
    nf, na = y.shape
    nr, nh, na2 = table.shape
    if na2 != na:
        raise ValueError("table antenna axis does not match y")
    r_out = np.empty(nf, dtype=np.intp)
    h_out = np.empty(nf, dtype=np.intp)
    for lo in range(0, nf, _CHUNK):
        blk = y[lo:lo + _CHUNK]
        d = _sqabs(blk[:, None, None, :] - table[None])
        # left-to-right accumulation over antennas, as in the compiled loop
        acc = d[..., 0].copy()
        for j in range(1, na):
            acc += d[..., j]
        flat = np.argmin(acc.reshape(blk.shape[0], -1), axis=1)
        r_out[lo:lo + _CHUNK], h_out[lo:lo + _CHUNK] = np.divmod(flat, nh)
    return r_out, h_out, nf * nr * nh, nf * nr * nh * na


def greedy_detect_batch(y: np.ndarray, table: np.ndarray):
    nf, na = y.shape
    nr, nh, na2 = table.shape
    if nr != na or na2 != na:
        raise ValueError("greedy detection needs one spatial hypothesis per antenna")
    r_out = np.argmax(_sqabs(y), axis=1).astype(np.intp)
    own = table[r_out, :, r_out]  # (F, H)
    d = _sqabs(y[np.arange(nf), r_out][:, None] - own)
    h_out = np.argmin(d, axis=1).astype(np.intp)
    return r_out, h_out, nf * nh, nf * na
