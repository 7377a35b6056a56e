"""Multi-user downlink: ZF precoding baseline and over-the-air RIS beamforming.

Conventions
-----------
The RIS applies ``Psi = diag(z)^H``. With that choice the per-link gain
``||g_k Psi H_i||^2`` equals ``z^H Q z`` for
``Q = diag(g_k) H_i H_i^H diag(g_k)^H``, i.e. the Hadamard product of
``A_i = H_i H_i^H`` with ``g_k^T conj(g_k)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .channels import ChannelSet, ReflectionVector
from .config import ConfigError, SystemConfig, db_to_linear
from .sdp import (
    GE,
    INFEASIBLE,
    LE,
    OPTIMAL,
    Constraint,
    RoundingResult,
    SdpSolution,
    gaussian_randomization,
    solve_feasibility,
)

log = logging.getLogger(__name__)

ROUNDING_TOL = 1e-6
ZF_MAX_COND = 1e12


class SingularChannelError(ConfigError):
    """Direct channel is (numerically) rank deficient."""


# ---------------------------------------------------------------------------
# ZF baseline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZfPrecoder:
    """``w`` is ``T_x x K`` (column k serves user k); ``F w = sqrt(zeta) I``."""

    w: np.ndarray
    zeta: float


def zf_precoder(f: np.ndarray, p_total: float) -> ZfPrecoder:
    """Right pseudo-inverse ZF precoder scaled to ``Tr(W W^H) = p_total``."""
    f = np.asarray(f, dtype=complex)
    k, t = f.shape
    if k > t:
        raise ConfigError(f"ZF needs users <= tx antennas, got K={k}, T_x={t}")
    gram = f @ f.conj().T
    if not np.all(np.isfinite(gram)) or np.linalg.cond(gram) > ZF_MAX_COND:
        raise SingularChannelError("direct channel is rank deficient")
    pinv = f.conj().T @ np.linalg.inv(gram)
    zeta = p_total / float(np.sum(np.abs(pinv) ** 2))
    return ZfPrecoder(w=math.sqrt(zeta) * pinv, zeta=zeta)


def zf_sinr(f: np.ndarray, precoder: ZfPrecoder, sigma_s2: float) -> np.ndarray:
    """Per-user SINR ``|f_k w_k|^2 / (sum_{i!=k} |f_k w_i|^2 + sigma^2)``."""
    e = np.abs(np.asarray(f) @ precoder.w) ** 2
    if e.shape[0] != e.shape[1]:
        raise ConfigError(f"precoder has {e.shape[1]} columns for {e.shape[0]} users")
    sig = np.diag(e)
    return sig / (e.sum(axis=1) - sig + sigma_s2)


def sum_rate(sinrs) -> float:
    """Sum of ``log2(1 + gamma_k)`` in bits/s/Hz."""
    s = np.asarray(sinrs, dtype=float)
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise ConfigError("SINR values must be finite and nonnegative")
    return float(np.sum(np.log2(1.0 + s)))


# ---------------------------------------------------------------------------
# Over-the-air beamforming
# ---------------------------------------------------------------------------


def power_budget(h: np.ndarray, p_bs: float, sigma2: float, p_a: float) -> float:
    """Largest ``||z||^2`` allowed by the reflection power ``p_a``."""
    if not p_a > 0:
        raise ConfigError(f"reflection power must be positive, got {p_a!r}")
    tr = float(np.sum(np.abs(h) ** 2))
    return p_a / (p_bs * tr + sigma2)


@dataclass(frozen=True)
class MuSdrMatrices:
    """Quadratic forms of the relaxed downlink problem.

    ``q_cross[k, i]`` maps ``z`` to the power user ``k`` receives from the
    antenna block of user ``i``; ``q_k`` is its diagonal ``q_cross[k, k]``.
    ``q_m[k]`` is the expected RIS-amplifier noise at user ``k``.
    """

    q_k: np.ndarray
    q_cross: np.ndarray
    q_m: np.ndarray
    trace_cap: float


def _blocks(h: np.ndarray, k: int) -> np.ndarray:
    n, t = h.shape
    if t % k:
        raise ConfigError(f"users ({k}) must divide tx antennas ({t})")
    return h.reshape(n, k, t // k).transpose(1, 0, 2)  # (K, N, T_bar)


def build_mu_sdr(channels: ChannelSet, config: SystemConfig) -> MuSdrMatrices:
    h, g = channels.h, channels.g
    k = g.shape[0]
    if k != config.users or h.shape != (config.n_ris, config.tx_antennas):
        raise ConfigError("channel dimensions do not match the configuration")
    hb = _blocks(h, k)
    a = hb @ hb.conj().transpose(0, 2, 1)  # A_i = H_i H_i^H, (K, N, N)
    b = g[:, :, None] * g.conj()[:, None, :]  # g_k^T conj(g_k), (K, N, N)
    q_cross = a[None, :, :, :] * b[:, None, :, :]
    q_k = q_cross[np.arange(k), np.arange(k)]
    q_m = config.sigma_v2 * np.einsum("ij,kij->kij", np.eye(h.shape[0]), b)
    cap = power_budget(h, config.p_bs_w, config.budget_sigma2, config.p_a_w)
    return MuSdrMatrices(q_k=q_k, q_cross=q_cross, q_m=q_m.real.astype(complex), trace_cap=cap)


def link_gains(channels: ChannelSet, z: np.ndarray) -> np.ndarray:
    """``||g_k Psi H_i||^2`` for every (user k, block i); batched over ``z``.

    ``z`` may be ``(N,)`` or ``(G, N)``; the result is ``(K, K)`` or
    ``(G, K, K)``.
    """
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    zz = z[None] if single else z
    g, h = channels.g, channels.h
    k = g.shape[0]
    y = (g[None, :, :] * zz.conj()[:, None, :]) @ h  # (G, K, T_x)
    p = (np.abs(y) ** 2).reshape(zz.shape[0], k, k, -1).sum(axis=-1)
    return p[0] if single else p


def sinr_mu(channels: ChannelSet, z, config: SystemConfig) -> np.ndarray:
    """Per-user SINR of the over-the-air downlink, RIS noise in expectation.

    Accepts a single ``z`` (returns ``(K,)``) or a ``(G, N)`` stack.
    """
    if isinstance(z, ReflectionVector):
        z = z.z
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != channels.n_ris:
        raise ConfigError(f"reflection vector has length {z.shape[-1]}, expected {channels.n_ris}")
    k = channels.g.shape[0]
    pk = config.p_bs_w / k
    p = link_gains(channels, z)
    sig = np.diagonal(p, axis1=-2, axis2=-1)
    interf = p.sum(axis=-1) - sig
    ris_noise = config.sigma_v2 * (np.abs(z)[..., None, :] ** 2 * np.abs(channels.g) ** 2).sum(axis=-1)
    return pk * sig / (pk * interf + ris_noise + config.sigma_s2)


def sinr_trace_form(mats: MuSdrMatrices, z_mat: np.ndarray, config: SystemConfig) -> np.ndarray:
    """The same SINR evaluated on a lifted ``Z`` through the trace forms."""
    k = mats.q_k.shape[0]
    pk = config.p_bs_w / k
    tr = np.einsum("kiab,ba->ki", mats.q_cross, z_mat).real
    sig = np.diagonal(tr).copy()
    interf = tr.sum(axis=1) - sig
    noise = np.einsum("kab,ba->k", mats.q_m, z_mat).real
    return pk * sig / (pk * interf + noise + config.sigma_s2)


def sinr_constraints(mats: MuSdrMatrices, gammas, config: SystemConfig) -> list[Constraint]:
    """Constraints on the normalized variable ``Z / trace_cap``.

    Working in units of the cap keeps the trace row at unit scale whatever
    the reflection power.
    """
    k = mats.q_k.shape[0]
    pk = config.p_bs_w / k
    cap = mats.trace_cap
    cons = []
    for j in range(k):
        interf = mats.q_cross[j].sum(axis=0) - mats.q_k[j]
        a = cap * (pk * mats.q_k[j] - gammas[j] * (pk * interf + mats.q_m[j]))
        cons.append(Constraint(a, GE, gammas[j] * config.sigma_s2))
    cons.append(Constraint(np.eye(mats.q_k.shape[1]), LE, 1.0))
    return cons


@dataclass
class OtaResult:
    """Outcome of one over-the-air reflection design.

    ``z`` is None when the relaxation was infeasible and no rounding was
    requested.
    """

    z: ReflectionVector | None
    solution: SdpSolution
    rounding: RoundingResult | None
    mats: MuSdrMatrices

    @property
    def feasible(self) -> bool:
        return self.solution.status == OPTIMAL


def _round_mu(channels, config, mats, z_mat, gammas, rng) -> RoundingResult:
    gammas = np.asarray(gammas, dtype=float)
    active = gammas > 0

    def ratio(cand):
        s = sinr_mu(channels, cand, config)
        if not np.any(active):
            return s.min(axis=-1)
        return (s[:, active] / gammas[active]).min(axis=-1)

    def violation(cand):
        if not np.any(active):
            return np.zeros(cand.shape[0])
        return np.maximum(0.0, (1.0 - ROUNDING_TOL) - ratio(cand))

    return gaussian_randomization(
        z_mat, mats.trace_cap, ratio, violation, config.sdr_candidates, rng
    )


def optimize_reflection_mu(
    channels: ChannelSet,
    config: SystemConfig,
    gamma_targets,
    rng: np.random.Generator | None = None,
    *,
    mats: MuSdrMatrices | None = None,
    round_solution: bool = True,
) -> OtaResult:
    """Relaxed feasibility design for SINR targets, then Gaussian rounding.

    The returned ``z`` always sits exactly on the power budget. Rounding
    needs ``rng``; it is skipped when ``round_solution`` is False or when
    the targets are infeasible.
    """
    gammas = np.broadcast_to(np.asarray(gamma_targets, dtype=float), (channels.g.shape[0],))
    if np.any(gammas < 0):
        raise ConfigError("SINR targets must be nonnegative")
    mats = build_mu_sdr(channels, config) if mats is None else mats
    sol = solve_feasibility(sinr_constraints(mats, gammas, config))
    sol.z_matrix = sol.z_matrix * mats.trace_cap
    if sol.status != OPTIMAL or not round_solution:
        return OtaResult(None, sol, None, mats)
    if rng is None:
        raise ConfigError("rounding needs a random generator")
    rr = _round_mu(channels, config, mats, sol.z_matrix, gammas, rng)
    return OtaResult(ReflectionVector(rr.z), sol, rr, mats)


@dataclass
class MaxMinResult:
    """Common-target bisection outcome.

    ``gamma_star`` is the largest target (linear) found feasible and
    ``gamma_upper`` the smallest one found infeasible (``inf`` when the top
    of the bracket was feasible). ``status`` is ``infeasible`` when even
    the bottom of the bracket failed; ``z`` is then a best-effort rounding.
    """

    status: str
    gamma_star: float
    gamma_upper: float
    z: ReflectionVector
    solution: SdpSolution
    rounding: RoundingResult
    steps: int


def max_min_sinr(channels: ChannelSet, config: SystemConfig,
                 rng: np.random.Generator) -> MaxMinResult:
    """Bisect a common SINR target (in dB) and round the last feasible design."""
    bis = config.bisection
    if bis.gamma_hi_db < bis.gamma_lo_db:
        raise ConfigError("gamma_hi must not be below gamma_lo")
    mats = build_mu_sdr(channels, config)

    def attempt(gamma_db):
        return optimize_reflection_mu(
            channels, config, db_to_linear(gamma_db), mats=mats, round_solution=False
        )

    lo, hi = bis.gamma_lo_db, bis.gamma_hi_db
    best = attempt(lo)
    steps = 1
    if not best.feasible:
        if best.solution.status != INFEASIBLE:
            log.warning("bisection floor solve ended with %s", best.solution.status)
        rr = _round_mu(channels, config, mats, best.solution.z_matrix,
                       np.full(config.users, db_to_linear(lo)), rng)
        return MaxMinResult(INFEASIBLE, 0.0, db_to_linear(lo), ReflectionVector(rr.z),
                            best.solution, rr, steps)
    top = attempt(hi)
    steps += 1
    if top.feasible:
        best, lo, upper = top, hi, math.inf
    else:
        while hi - lo > bis.tol_db and steps < bis.max_iter:
            mid = 0.5 * (lo + hi)
            res = attempt(mid)
            steps += 1
            if res.feasible:
                best, lo = res, mid
            else:
                hi = mid
        upper = db_to_linear(hi)
    rr = _round_mu(channels, config, mats, best.solution.z_matrix,
                   np.full(config.users, db_to_linear(lo)), rng)
    return MaxMinResult(OPTIMAL, db_to_linear(lo), upper, ReflectionVector(rr.z),
                        best.solution, rr, steps)
