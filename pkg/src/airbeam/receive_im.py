"""Over-the-air receive index modulation.

A frame carries ``log2(R_x)`` spatial bits, which pick the receive antenna
``r`` the RIS should focus on, and ``T_x log2(M)`` symbol bits sent as one
PSK symbol per transmit antenna. For each ``r`` the RIS uses a dedicated
reflection vector ``z_r`` designed so that antenna ``r`` sees much more
power than the others.

Hypotheses are indexed as ``frame_index = r * M**T_x + h`` where ``h`` is
the symbol-vector index with the first transmit antenna most significant.
With natural-binary bit order this index is exactly the frame's bit
pattern read as an integer, so bit errors are the popcount of
``sent ^ detected``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .beamforming import zf_precoder
from .channels import ChannelSet, ReflectionVector, generate_channels
from .config import ConfigError, SystemConfig, is_power_of_two
from .modulation import constellation
from .sdp import GE, LE, OPTIMAL, Constraint, SdpProblem, gaussian_randomization, solve_sdp
from .stats import wilson_interval

log = logging.getLogger(__name__)

MAX_HYPOTHESES = 2**20
DOMINANCE_TOL = 1e-6
DELTA_HALVINGS = 5
# relaxed optimum below this fraction of the unconstrained one counts as empty
EMPTY_VALUE = 1e-8


class ImInfeasibleError(ConfigError):
    """Dominance could not be met for some receive antennas."""

    def __init__(self, antennas):
        self.antennas = tuple(antennas)
        super().__init__(f"dominance infeasible for receive antenna(s) {list(self.antennas)}")


def im_spectral_efficiency(t_x: int, m: int, r_x: int) -> int:
    """Bits per channel use: ``T_x log2(M) + log2(R_x)``."""
    if not isinstance(t_x, int) or t_x < 1:
        raise ConfigError(f"transmit antennas must be a positive integer, got {t_x!r}")
    for name, v in (("modulation order", m), ("receive antennas", r_x)):
        if not is_power_of_two(v):
            raise ConfigError(f"{name} must be a power of two, got {v!r}")
    return t_x * (m.bit_length() - 1) + (r_x.bit_length() - 1)


@dataclass(frozen=True)
class ImFrame:
    """One IM channel use. ``x`` has unit total power."""

    spatial_bits: np.ndarray
    symbol_bits: np.ndarray
    r: int
    symbols: np.ndarray
    x: np.ndarray

    @property
    def bits(self) -> np.ndarray:
        return np.concatenate([self.spatial_bits, self.symbol_bits])


def _bits_to_int(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def _int_to_bits(v: int, width: int) -> np.ndarray:
    return np.array([(v >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def map_bits(bits, t_x: int, m: int, r_x: int) -> ImFrame:
    """Split ``bits`` into an antenna index (MSB first) and Gray-PSK symbols."""
    eta = im_spectral_efficiency(t_x, m, r_x)
    b = np.asarray(bits).reshape(-1)
    if b.size != eta or not np.all((b == 0) | (b == 1)):
        raise ConfigError(f"expected {eta} bits (0/1), got {b.size} values")
    b = b.astype(np.uint8)
    nr = r_x.bit_length() - 1
    nm = m.bit_length() - 1
    r = _bits_to_int(b[:nr])
    syms = np.array([_bits_to_int(b[nr + i * nm:nr + (i + 1) * nm]) for i in range(t_x)],
                    dtype=np.intp)
    x = constellation(m)[syms] / math.sqrt(t_x)
    return ImFrame(b[:nr].copy(), b[nr:].copy(), r, syms, x)


def unmap_frame(r: int, x, t_x: int, m: int, r_x: int) -> np.ndarray:
    """Inverse of :func:`map_bits`; ``x`` is hard-decided per antenna."""
    nr = r_x.bit_length() - 1
    nm = m.bit_length() - 1
    if not 0 <= r < r_x:
        raise ConfigError(f"antenna index {r} out of range for R_x={r_x}")
    xx = np.asarray(x, dtype=complex).reshape(-1)
    if xx.size != t_x:
        raise ConfigError(f"expected {t_x} symbols, got {xx.size}")
    pts = constellation(m)
    syms = np.argmax((xx[:, None] * math.sqrt(t_x) * pts.conj()).real, axis=1)
    parts = [_int_to_bits(r, nr)] + [_int_to_bits(int(s), nm) for s in syms]
    return np.concatenate(parts).astype(np.uint8)


def symbol_vectors(t_x: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """All ``M**T_x`` symbol-index vectors (lexicographic) and their unit-power ``x``."""
    idx = np.array(np.unravel_index(np.arange(m**t_x), (m,) * t_x)).T
    return idx, constellation(m)[idx] / math.sqrt(t_x)


# ---------------------------------------------------------------------------
# Codebook
# ---------------------------------------------------------------------------


def theta_gram(channels: ChannelSet) -> np.ndarray:
    """``Delta_r = Theta_r Theta_r^H`` with ``Theta_r = diag(g_r) H``; shape ``(R, N, N)``."""
    theta = channels.g[:, :, None] * channels.h[None, :, :]
    return theta @ theta.conj().transpose(0, 2, 1)


def im_trace_cap(h: np.ndarray, p_bs: float, sigma2: float, p_a: float) -> float:
    """Reflection power budget; zero reflection power gives a zero cap."""
    if p_a < 0 or p_bs < 0:
        raise ConfigError("powers must be nonnegative")
    return p_a / (p_bs * float(np.sum(np.abs(h) ** 2)) + sigma2)


@dataclass(frozen=True)
class ImCodebook:
    """Per-antenna reflection vectors.

    ``unit`` holds the designs at unit trace cap; ``reflections`` are the
    same vectors rescaled to ``trace_cap``. The design is homogeneous in the
    power, so one solve serves every power level (see :meth:`rescaled`).
    ``delta_r`` is the dominance factor finally used for each antenna and
    ``dominance_ok`` whether the rounded vector met it.
    """

    unit: np.ndarray
    trace_cap: float
    delta_r: np.ndarray
    dominance_ok: np.ndarray
    config: SystemConfig
    statuses: tuple = ()
    reflections: tuple = field(init=False)

    def __post_init__(self) -> None:
        z = np.sqrt(self.trace_cap) * self.unit
        object.__setattr__(self, "reflections", tuple(ReflectionVector(v) for v in z))

    @property
    def z(self) -> np.ndarray:
        return np.array([r.z for r in self.reflections])

    @property
    def infeasible(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(~self.dominance_ok))

    def rescaled(self, trace_cap: float, config: SystemConfig | None = None) -> "ImCodebook":
        return ImCodebook(self.unit, trace_cap, self.delta_r, self.dominance_ok,
                          self.config if config is None else config, self.statuses)


def _design_antenna(delta: np.ndarray, r: int, d: float, candidates: int,
                    rng: np.random.Generator):
    n = delta.shape[1]
    own = delta[r]
    others = delta.sum(axis=0) - own
    scale = float(np.linalg.norm(own))
    cons = []
    if delta.shape[0] > 1:
        cons.append(Constraint((own - d * others) / scale, GE, 0.0))
    cons.append(Constraint(np.eye(n), LE, 1.0))
    sol = solve_sdp(SdpProblem(own / scale, cons))
    lam_max = float(np.linalg.eigvalsh(own / scale)[-1])
    empty = sol.status == OPTIMAL and sol.objective_value <= EMPTY_VALUE * lam_max
    if sol.status != OPTIMAL or empty:
        return None, sol.status if not empty else "empty"

    def score(c):
        return np.einsum("gi,ij,gj->g", c.conj(), own, c).real

    def violation(c):
        p_own = score(c)
        p_oth = np.einsum("gi,ij,gj->g", c.conj(), others, c).real
        rel = (d * p_oth - p_own) / np.maximum(d * p_oth + p_own, 1e-300)
        return np.maximum(0.0, rel - DOMINANCE_TOL)

    rr = gaussian_randomization(sol.z_matrix, 1.0, score, violation, candidates, rng)
    return rr, sol.status


def build_im_codebook(channels: ChannelSet, config: SystemConfig,
                      rng: np.random.Generator, *, strict: bool = False) -> ImCodebook:
    """Design one reflection vector per receive antenna.

    For antenna ``r``: maximize ``Tr(Delta_r Z)`` subject to
    ``Tr(Delta_r Z) >= delta_r sum_{i != r} Tr(Delta_i Z)`` and the trace
    cap, then round. When the relaxation is empty or no rounded candidate
    meets dominance, ``delta_r`` is halved and the antenna redesigned, at
    most five times. Antennas still failing keep their least-violating
    vector and are listed in ``infeasible``; ``strict=True`` raises
    :class:`ImInfeasibleError` instead.
    """
    r_x = config.rx_antennas
    if channels.receivers != r_x or channels.n_ris != config.n_ris \
            or channels.tx_antennas != config.tx_antennas:
        raise ConfigError("channel dimensions do not match the configuration")
    delta = theta_gram(channels)
    n = config.n_ris
    unit = np.zeros((r_x, n), dtype=complex)
    deltas = np.zeros(r_x)
    ok = np.zeros(r_x, dtype=bool)
    statuses = []
    for r in range(r_x):
        d = float(config.delta_r)
        fallback = None
        for attempt in range(DELTA_HALVINGS + 1):
            rr, status = _design_antenna(delta, r, d, config.sdr_candidates, rng)
            if rr is not None:
                if fallback is None or rr.violation < fallback[0].violation:
                    fallback = (rr, d)
                if rr.feasible:
                    break
            if attempt < DELTA_HALVINGS and d / 2 > 1.0:
                d /= 2
            else:
                break
        if fallback is None:
            # nothing usable at any delta: focus on antenna r alone
            _, vecs = np.linalg.eigh(delta[r])
            unit[r] = vecs[:, -1]
            deltas[r] = d
        else:
            unit[r] = fallback[0].z
            deltas[r] = fallback[1]
            ok[r] = fallback[0].feasible
        statuses.append(status)
        if not ok[r]:
            log.warning("receive antenna %d: dominance not met (delta_r=%g)", r, deltas[r])
    if strict and not ok.all():
        raise ImInfeasibleError(np.flatnonzero(~ok))
    cap = im_trace_cap(channels.h, config.p_bs_w, config.budget_sigma2, config.p_a_w)
    return ImCodebook(unit, cap, deltas, ok, config, tuple(statuses))


# ---------------------------------------------------------------------------
# Signal model and detection
# ---------------------------------------------------------------------------


def _cascade(channels: ChannelSet, z: np.ndarray) -> np.ndarray:
    """``c[r, j, :] = g_j diag(z_r)^H H``, shape ``(R_hyp, R, T_x)``."""
    return (channels.g[None, :, :] * z.conj()[:, None, :]) @ channels.h


def hypothesis_table(channels: ChannelSet, codebook: ImCodebook, p_bs_watts: float) -> np.ndarray:
    """Noiseless samples ``table[r, h, j] = sqrt(P) g_j Psi_r H x_h``."""
    cfg = codebook.config
    total = cfg.rx_antennas * cfg.mod_order**cfg.tx_antennas
    if total > MAX_HYPOTHESES:
        raise ConfigError(f"{total} hypotheses exceed the enumeration guard of {MAX_HYPOTHESES}")
    _, xs = symbol_vectors(cfg.tx_antennas, cfg.mod_order)
    casc = _cascade(channels, codebook.z)
    return math.sqrt(p_bs_watts) * np.einsum("rjt,ht->rhj", casc, xs)


def received_signal_im(channels: ChannelSet, codebook: ImCodebook, frame: ImFrame,
                       rng: np.random.Generator, p_bs_watts: float) -> np.ndarray:
    """``y_j = sqrt(P) g_j Psi_r H x + g_j Psi_r v + n_j`` with fresh noise."""
    cfg = codebook.config
    x = np.asarray(frame.x, dtype=complex)
    if x.shape != (channels.tx_antennas,) or not 0 <= frame.r < channels.receivers:
        raise ConfigError("frame does not match the channel dimensions")
    v = math.sqrt(cfg.sigma_v2) * _cn(rng, channels.n_ris)
    n = math.sqrt(cfg.sigma_s2) * _cn(rng, channels.receivers)
    gz = channels.g * codebook.z[frame.r].conj()
    return math.sqrt(p_bs_watts) * (gz @ (channels.h @ x)) + gz @ v + n


def _cn(rng: np.random.Generator, *shape) -> np.ndarray:
    w = rng.standard_normal((*shape, 2))
    return (w[..., 0] + 1j * w[..., 1]) * math.sqrt(0.5)


@dataclass(frozen=True)
class Detection:
    """Detector decision plus operation counts.

    For ML, ``hypotheses`` is ``R_x M**T_x`` and ``antenna_terms`` the number
    of per-antenna residuals evaluated. For greedy, ``antenna_terms`` counts
    magnitude comparisons.
    """

    r: int
    symbols: np.ndarray
    x: np.ndarray
    hypotheses: int
    antenna_terms: int


def _decision(r, h, nh, na, cfg) -> Detection:
    idx, xs = symbol_vectors(cfg.tx_antennas, cfg.mod_order)
    return Detection(int(r[0]), idx[h[0]], xs[h[0]], nh, na)


def ml_detect(y, channels: ChannelSet, codebook: ImCodebook, p_bs_watts: float) -> Detection:
    """Joint search over antenna index and symbol vector (residual over all antennas)."""
    table = hypothesis_table(channels, codebook, p_bs_watts)
    r, h, nh, na = kernels.ml_detect_batch(np.asarray(y)[None], table)
    return _decision(r, h, nh, na, codebook.config)


def greedy_detect(y, channels: ChannelSet, codebook: ImCodebook, p_bs_watts: float) -> Detection:
    """Strongest antenna first, then symbol search on that antenna only."""
    table = hypothesis_table(channels, codebook, p_bs_watts)
    r, h, nh, na = kernels.greedy_detect_batch(np.asarray(y)[None], table)
    return _decision(r, h, nh, na, codebook.config)


DETECTORS = {"ml": kernels.ml_detect_batch, "greedy": kernels.greedy_detect_batch}


def popcount(v) -> np.ndarray:
    return np.bitwise_count(np.asarray(v, dtype=np.uint64)).astype(np.int64)


# ---------------------------------------------------------------------------
# BER
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialDraws:
    """Power-independent randomness of one block: payload and unit-variance noise."""

    frames: np.ndarray  # (F,) frame indices
    v: np.ndarray  # (F, N)
    n: np.ndarray  # (F, R)


def draw_trial(config: SystemConfig, frames: int, bits_rng: np.random.Generator,
               noise_rng: np.random.Generator) -> TrialDraws:
    eta = im_spectral_efficiency(config.tx_antennas, config.mod_order, config.rx_antennas)
    idx = bits_rng.integers(0, 2**eta, size=frames)
    v = _cn(noise_rng, frames, config.n_ris)
    n = _cn(noise_rng, frames, config.rx_antennas)
    return TrialDraws(idx, v, n)


def im_bit_errors(channels: ChannelSet, unit_codebook: ImCodebook, draws: TrialDraws,
                  p_bs_watts: float, p_a_watts: float, detectors=("greedy",)) -> np.ndarray:
    """Bit errors per detector for one channel block at one power point."""
    cfg = unit_codebook.config
    cap = im_trace_cap(channels.h, p_bs_watts, cfg.budget_sigma2, p_a_watts)
    cb = unit_codebook.rescaled(cap)
    nh = cfg.mod_order**cfg.tx_antennas
    r = draws.frames // nh
    h = draws.frames % nh
    _, xs = symbol_vectors(cfg.tx_antennas, cfg.mod_order)
    gz = channels.g[None, :, :] * cb.z.conj()[:, None, :]  # (R_hyp, R, N)
    table = hypothesis_table(channels, cb, p_bs_watts)
    y = table[r, h] + math.sqrt(cfg.sigma_v2) * np.einsum("fjn,fn->fj", gz[r], draws.v) \
        + math.sqrt(cfg.sigma_s2) * draws.n
    out = np.zeros(len(detectors), dtype=np.int64)
    for i, name in enumerate(detectors):
        rh, hh, _, _ = DETECTORS[name](y, table)
        out[i] = int(popcount(draws.frames ^ (rh * nh + hh)).sum())
    return out


def rsm_bit_errors(channels: ChannelSet, config: SystemConfig, draws: TrialDraws,
                   p_total_watts: float) -> int:
    """ML bit errors of ZF-precoded receive spatial modulation.

    The transmitter steers one PSK symbol to antenna ``r`` through column
    ``r`` of a right-inverse ZF precoder. The PSK order is chosen so the
    rate matches the IM scheme, ``2**(T_x log2 M)``.
    """
    r_x = config.rx_antennas
    m_rsm = config.mod_order**config.tx_antennas
    w = zf_precoder(channels.f, r_x * p_total_watts).w
    eff = channels.f @ w  # (R, R); column r is what steering to r produces
    table = eff.T[:, None, :] * constellation(m_rsm)[None, :, None]
    r = draws.frames // m_rsm
    s = draws.frames % m_rsm
    y = table[r, s] + math.sqrt(config.sigma_s2) * draws.n
    rh, sh, _, _ = kernels.ml_detect_batch(y, table)
    return int(popcount(draws.frames ^ (rh * m_rsm + sh)).sum())


@dataclass(frozen=True)
class BerResult:
    ber: float
    errors: int
    bits: int
    ci_low: float
    ci_high: float
    infeasible_antennas: int = 0


def ber_experiment(config: SystemConfig, rng: np.random.Generator, *,
                   detector: str = "greedy", frames_per_channel: int = 1) -> BerResult:
    """Receive-IM BER over ``config.trials`` block-fading realizations.

    Each trial draws channels, designs a fresh codebook, then sends
    ``frames_per_channel`` frames. All randomness comes from ``rng`` in a
    fixed order.
    """
    if detector not in DETECTORS:
        raise ConfigError(f"unknown detector {detector!r}")
    eta = im_spectral_efficiency(config.tx_antennas, config.mod_order, config.rx_antennas)
    errors = bits = bad = 0
    for _ in range(config.trials):
        ch = generate_channels(config, rng, receivers=config.rx_antennas)
        cb = build_im_codebook(ch, config, rng)
        bad += len(cb.infeasible)
        draws = draw_trial(config, frames_per_channel, rng, rng)
        errors += int(im_bit_errors(ch, cb, draws, config.p_bs_w, config.p_a_w, (detector,))[0])
        bits += eta * frames_per_channel
    lo, hi = wilson_interval(errors, bits)
    return BerResult(errors / bits, errors, bits, lo, hi, bad)
