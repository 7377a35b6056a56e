"""Primal-dual interior-point engine for small dense complex SDPs.

Standard form over the cone ``H_+^N x R_+^n``::

    minimize    <C, X> + c . x
    subject to  <A_k, X> + a_k . x = b_k,   k = 1..m
                X Hermitian PSD, x >= 0

with ``<A, X> = Re Tr(A X)``. Dual::

    maximize    b . y
    subject to  C - sum_k y_k A_k = S  (PSD),  c - a^T y = s >= 0

Search directions use Nesterov-Todd scaling with a Mehrotra
predictor-corrector. Everything is dense; intended for N of a few dozen
and m of a few dozen.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

OPTIMAL = "optimal"
PRIMAL_INFEASIBLE = "primal-infeasible"
DUAL_INFEASIBLE = "dual-infeasible"
MAX_ITER = "max-iterations"
STALLED = "stalled"

_STEP = 0.98
_DIVERGE = 1e9
# residual level accepted when progress stalls short of the requested tol
_LOOSE_TOL = 1e-7


@dataclass
class IpmResult:
    X: np.ndarray
    x: np.ndarray
    y: np.ndarray
    S: np.ndarray
    s: np.ndarray
    status: str
    iterations: int
    pobj: float
    dobj: float
    pinf: float
    dinf: float
    history: list = field(default_factory=list)


def _herm(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().swapaxes(-1, -2))


def _max_step(chol: np.ndarray, d: np.ndarray) -> float:
    """Largest ``a`` with ``LL^H + a d`` PSD, given the Cholesky factor ``L``."""
    li = sla.solve_triangular(chol, np.eye(chol.shape[0]), lower=True)
    lam = np.linalg.eigvalsh(_herm(li @ d @ li.conj().T))
    lo = lam[0]
    return np.inf if lo >= 0 else -1.0 / lo


def _max_step_lp(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _chol(a: np.ndarray) -> np.ndarray | None:
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None


def solve_standard_form(
    C: np.ndarray,
    c: np.ndarray,
    A: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    *,
    tol: float = 1e-9,
    max_iter: int = 100,
) -> IpmResult:
    """Run the interior-point method on one standard-form problem.

    Parameters
    ----------
    C : (N, N) Hermitian
    c : (n,) real
    A : (m, N, N) Hermitian stack
    a : (m, n) real
    b : (m,) real
    """
    N = C.shape[0]
    n = c.shape[0]
    m = b.shape[0]
    nu = N + n
    Af = A.reshape(m, N * N)
    Afc = Af.conj()

    def op(X, x):
        return (Afc @ X.reshape(-1)).real + a @ x

    def adj(y):
        return np.tensordot(y, A, axes=1)

    norm_a = np.sqrt(np.sum(np.abs(Af) ** 2, axis=1) + np.sum(a**2, axis=1))
    norm_b = np.linalg.norm(b)
    norm_c = np.sqrt(np.linalg.norm(C) ** 2 + np.linalg.norm(c) ** 2)

    xi = max(10.0, np.sqrt(nu), nu * float(np.max((1.0 + np.abs(b)) / (1.0 + norm_a), initial=0.0)))
    eta = max(10.0, np.sqrt(nu), norm_c, float(np.max(norm_a, initial=0.0)))
    X = xi * np.eye(N, dtype=complex)
    x = np.full(n, xi)
    S = eta * np.eye(N, dtype=complex)
    s = np.full(n, eta)
    y = np.zeros(m)
    eye = np.eye(N)

    history = []
    status = MAX_ITER
    small_steps = 0
    it = 0
    pobj = dobj = pinf = dinf = np.nan
    for it in range(max_iter + 1):
        rp = b - op(X, x)
        Rd = C - S - adj(y)
        rd = c - s - a.T @ y
        pobj = float(np.vdot(C, X).real + c @ x)
        dobj = float(b @ y)
        mu = float((np.vdot(X, S).real + x @ s) / nu)
        pinf = float(np.linalg.norm(rp) / (1.0 + norm_b))
        dinf = float(np.sqrt(np.linalg.norm(Rd) ** 2 + np.linalg.norm(rd) ** 2) / (1.0 + norm_c))
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        history.append(
            {
                "pobj": pobj,
                "dobj": dobj,
                "pinf": pinf,
                "dinf": dinf,
                "mu": mu,
                "xs": float(np.vdot(X, S).real + x @ s),
                "rd_dot_x": float(np.vdot(Rd, X).real + rd @ x),
                "y_dot_rp": float(y @ rp),
            }
        )
        if max(pinf, dinf, gap) < tol:
            status = OPTIMAL
            break
        if dobj > _DIVERGE * (1.0 + norm_c) and _farkas_primal(S, s, C, c, Rd, rd, dobj):
            status = PRIMAL_INFEASIBLE
            break
        if -pobj > _DIVERGE * (1.0 + norm_b) and _farkas_dual(op, X, x, pobj, norm_a):
            status = DUAL_INFEASIBLE
            break
        if it == max_iter or small_steps >= 3:
            status = MAX_ITER if it == max_iter else STALLED
            if max(pinf, dinf, gap) < _LOOSE_TOL:
                status = OPTIMAL
            break

        Lx = _chol(X)
        Ls = _chol(S)
        if Lx is None or Ls is None:
            status = OPTIMAL if max(pinf, dinf, gap) < _LOOSE_TOL else STALLED
            break
        U, lam, Vh = np.linalg.svd(Ls.conj().T @ Lx)
        if lam[-1] <= 0:
            status = STALLED
            break
        Q = Vh.conj().T
        G = Lx @ Q / np.sqrt(lam)
        Ginv = (np.sqrt(lam)[:, None] * Q.conj().T) @ sla.solve_triangular(Lx, eye, lower=True)
        W = _herm(G @ G.conj().T)
        wl = x / s

        WAW = W @ A @ W
        M = (Afc @ WAW.reshape(m, -1).T).real + (a * wl) @ a.T
        M = 0.5 * (M + M.T)
        try:
            cf = sla.cho_factor(M + 1e-14 * np.trace(M) / max(m, 1) * np.eye(m))
            solve_m = lambda r: sla.cho_solve(cf, r)  # noqa: E731
        except (np.linalg.LinAlgError, ValueError):
            solve_m = lambda r: np.linalg.lstsq(M, r, rcond=None)[0]  # noqa: E731

        WRdW = W @ Rd @ W

        def direction(RcX, rcx):
            rhs = rp - op(RcX - WRdW, rcx - wl * rd)
            dy = solve_m(rhs)
            dS = _herm(Rd - adj(dy))
            ds = rd - a.T @ dy
            dX = _herm(RcX - W @ dS @ W)
            dx = rcx - wl * ds
            return dX, dx, dy, dS, ds

        def steps(dX, dx, dS, ds):
            ap = min(_max_step(Lx, dX), _max_step_lp(x, dx))
            ad = min(_max_step(Ls, dS), _max_step_lp(s, ds))
            return ap, ad

        # predictor
        dX, dx, dy, dS, ds = direction(-X, -x)
        ap, ad = steps(dX, dx, dS, ds)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = (np.vdot(X + ap * dX, S + ad * dS).real + (x + ap * dx) @ (s + ad * ds)) / nu
        sigma = min(1.0, max(0.0, mu_aff / mu) ** 3)

        # corrector in the scaled space, where X and S both map to diag(lam)
        dXt = Ginv @ dX @ Ginv.conj().T
        dSt = G.conj().T @ dS @ G
        R = sigma * mu * np.eye(N) - np.diag(lam**2) - 0.5 * (dXt @ dSt + dSt @ dXt)
        K = R / (0.5 * (lam[:, None] + lam[None, :]))
        RcX = _herm(G @ K @ G.conj().T)
        rcx = (sigma * mu - x * s - dx * ds) / s
        dX, dx, dy, dS, ds = direction(RcX, rcx)
        ap, ad = steps(dX, dx, dS, ds)
        ap, ad = min(1.0, _STEP * ap), min(1.0, _STEP * ad)
        small_steps = small_steps + 1 if max(ap, ad) < 1e-3 and mu < tol else 0

        X = _herm(X + ap * dX)
        x = x + ap * dx
        y = y + ad * dy
        S = _herm(S + ad * dS)
        s = s + ad * ds

    return IpmResult(X, x, y, S, s, status, it, pobj, dobj, pinf, dinf, history)


def _farkas_primal(S, s, C, c, Rd, rd, dobj) -> bool:
    # -A*(y)/b.y = (S - C + Rd)/b.y must be (nearly) PSD, likewise for the LP part
    scale = 1.0 / dobj
    lam = np.linalg.eigvalsh(_herm((S - C + Rd) * scale))
    lp = (s - c + rd) * scale
    return lam[0] > -1e-7 and (lp.size == 0 or lp.min() > -1e-7)


def _farkas_dual(op, X, x, pobj, norm_a) -> bool:
    scale = -1.0 / pobj
    return float(np.linalg.norm(op(X * scale, x * scale))) < 1e-7 * (1.0 + float(np.max(norm_a, initial=0.0)))
