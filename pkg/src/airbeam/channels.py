"""Rayleigh channel generation and per-trial random substreams."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ConfigError, SystemConfig

# Substream tags under one trial. Every consumer gets its own stream so the
# draws of one stage never shift those of another.
STREAM_CHANNEL = 0
STREAM_ROUNDING = 1
STREAM_BITS = 2
STREAM_NOISE = 3


def substream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for ``(seed, *key)``.

    The stream depends only on the seed and the key, never on how many other
    streams were created before it, so trials can run in any order or in
    parallel and still draw the same numbers.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def sample_rayleigh(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. CN(0, 1) entries: real and imaginary parts each of variance 1/2."""
    if rows < 1 or cols < 1:
        raise ConfigError(f"matrix shape must be positive, got ({rows}, {cols})")
    x = rng.standard_normal((rows, cols, 2))
    return (x[..., 0] + 1j * x[..., 1]) * np.sqrt(0.5)


@dataclass(frozen=True)
class ChannelSet:
    """Channel matrices of one realization, path loss included.

    Attributes
    ----------
    h : (N, T_x) complex
        Transmitter to RIS.
    g : (R, N) complex
        RIS to receivers; one row per user (downlink) or receive antenna
        (uplink).
    f : (R, T_x) complex
        Direct transmitter to receiver links, used only by the baselines.
    """

    h: np.ndarray
    g: np.ndarray
    f: np.ndarray

    def __post_init__(self) -> None:
        n, t = self.h.shape
        r, n2 = self.g.shape
        if n2 != n or self.f.shape != (r, t):
            raise ConfigError(
                f"inconsistent channel shapes h{self.h.shape} g{self.g.shape} f{self.f.shape}"
            )
        for name in ("h", "g", "f"):
            a = getattr(self, name)
            if not np.all(np.isfinite(a)):
                raise ConfigError(f"channel {name} has non-finite entries")
            a.setflags(write=False)

    @property
    def n_ris(self) -> int:
        return self.h.shape[0]

    @property
    def tx_antennas(self) -> int:
        return self.h.shape[1]

    @property
    def receivers(self) -> int:
        return self.g.shape[0]


def generate_channels(
    config: SystemConfig, rng: np.random.Generator, receivers: int | None = None
) -> ChannelSet:
    """Draw one block-fading realization.

    ``receivers`` is the row count of ``g`` and ``f``; it defaults to the
    number of users. Pass ``config.rx_antennas`` for the uplink IM link.
    Draw order is fixed (h, then g, then f) so a seed pins every matrix.
    """
    r = config.users if receivers is None else receivers
    n, t = config.n_ris, config.tx_antennas
    h = np.sqrt(config.l_t) * sample_rayleigh(n, t, rng)
    g = np.sqrt(config.l_k) * sample_rayleigh(r, n, rng)
    f = np.sqrt(config.l_d) * sample_rayleigh(r, t, rng)
    return ChannelSet(h=h, g=g, f=f)


@dataclass(frozen=True)
class ReflectionVector:
    """Active-RIS coefficients ``z``; the reflection matrix is ``diag(z)^H``.

    Amplitudes may exceed one (active elements amplify).
    """

    z: np.ndarray

    def __post_init__(self) -> None:
        z = np.array(self.z, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(z)):
            raise ConfigError("reflection vector has non-finite entries")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.z)

    @property
    def phases(self) -> np.ndarray:
        return -np.angle(self.z)

    @property
    def psi(self) -> np.ndarray:
        return np.diag(self.z.conj())

    @property
    def power(self) -> float:
        return float(np.vdot(self.z, self.z).real)
