"""Rank-one extraction from a relaxed PSD solution."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .solver import HERMITIAN_TOL, SdpError

BatchFn = Callable[[np.ndarray], np.ndarray]


def hermitian_eig(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``Z = U diag(lam) U^H`` with ``lam`` descending."""
    z = np.asarray(z, dtype=complex)
    nrm = np.linalg.norm(z)
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise SdpError(f"expected a square matrix, got shape {z.shape}")
    if nrm > 0 and np.linalg.norm(z - z.conj().T) > HERMITIAN_TOL * nrm:
        raise SdpError("matrix is not Hermitian within tolerance")
    lam, u = np.linalg.eigh(0.5 * (z + z.conj().T))
    return u[:, ::-1], lam[::-1]


@dataclass
class RoundingResult:
    """Selected candidate of a Gaussian randomization.

    ``feasible`` is False when no candidate met the constraints, in which
    case ``z`` is the least-violating one.
    """

    z: np.ndarray
    score: float
    violation: float
    feasible: bool
    index: int
    candidates: np.ndarray


def draw_candidates(z_mat: np.ndarray, power_budget: float, num_candidates: int,
                    rng: np.random.Generator) -> np.ndarray:
    """``(G, N)`` candidates ``U Sigma^{1/2} e_g^H`` rescaled to ``||z||^2 = power_budget``."""
    if num_candidates < 1:
        raise SdpError("need at least one randomization candidate")
    if not power_budget > 0:
        raise SdpError(f"power budget must be positive, got {power_budget!r}")
    u, lam = hermitian_eig(z_mat)
    if lam[0] <= 1e-300 or np.linalg.norm(z_mat) <= 1e-300:
        raise SdpError("relaxed solution is numerically zero")
    n = lam.size
    root = u * np.sqrt(np.clip(lam, 0.0, None))
    e = (rng.standard_normal((num_candidates, n)) + 1j * rng.standard_normal((num_candidates, n))) * np.sqrt(0.5)
    cand = e.conj() @ root.T
    norms = np.linalg.norm(cand, axis=1)
    # a zero draw is measure-zero; fall back to the principal eigenvector
    bad = norms <= 0
    if np.any(bad):
        cand[bad] = u[:, 0]
        norms[bad] = 1.0
    return cand * (np.sqrt(power_budget) / norms)[:, None]


def gaussian_randomization(
    z_mat: np.ndarray,
    power_budget: float,
    score: BatchFn,
    violation: BatchFn,
    num_candidates: int,
    rng: np.random.Generator,
) -> RoundingResult:
    """Pick the best of ``num_candidates`` Gaussian draws shaped by ``z_mat``.

    ``score`` and ``violation`` map a ``(G, N)`` candidate stack to ``(G,)``
    arrays; a candidate is feasible when its violation is ``<= 0``. The
    highest-scoring feasible candidate wins, first index on ties; if none
    is feasible the smallest violation wins.
    """
    cand = draw_candidates(z_mat, power_budget, num_candidates, rng)
    sc = np.asarray(score(cand), dtype=float)
    vi = np.asarray(violation(cand), dtype=float)
    ok = vi <= 0.0
    if np.any(ok):
        masked = np.where(ok, sc, -np.inf)
        i = int(np.argmax(masked))
    else:
        i = int(np.argmin(vi))
    return RoundingResult(cand[i].copy(), float(sc[i]), float(vi[i]), bool(ok[i]), i, cand)
