"""Gray-labelled M-PSK."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .config import ConfigError, is_power_of_two


def gray(i):
    return i ^ (i >> 1)


def gray_inverse(g: int) -> int:
    """Position whose Gray label is ``g``."""
    i = 0
    while g:
        i ^= g
        g >>= 1
    return i


def _check_order(m: int) -> None:
    if not is_power_of_two(m):
        raise ConfigError(f"modulation order must be a power of two, got {m}")


@lru_cache(maxsize=None)
def constellation(m: int) -> np.ndarray:
    """Points indexed by bit label ``i``.

    The point at angular position ``p`` carries the label ``gray(p)``, so
    neighbouring points differ in one bit.
    """
    _check_order(m)
    pos = np.array([gray_inverse(i) for i in range(m)])
    pts = np.exp(2j * np.pi * pos / m)
    pts.setflags(write=False)
    return pts


def psk_modulate(index, m: int):
    """Map symbol index (scalar or array) in ``[0, m)`` to unit-modulus points."""
    pts = constellation(m)
    idx = np.asarray(index)
    if np.any(idx < 0) or np.any(idx >= m):
        raise ConfigError(f"symbol index out of range for M={m}: {index!r}")
    out = pts[idx]
    return complex(out) if out.ndim == 0 else out


def psk_demodulate(y, m: int):
    """Hard decision: index whose point maximizes ``Re(y * conj(point))``.

    Ties go to the smaller index, so ``y = 0`` decodes to index 0.
    """
    pts = constellation(m)
    yy = np.asarray(y, dtype=complex)
    metric = (yy[..., None] * pts.conj()).real
    out = np.argmax(metric, axis=-1)
    return int(out) if out.ndim == 0 else out
