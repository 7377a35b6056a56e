"""Trace-constrained Hermitian SDPs: optimization and max-slack feasibility."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import ConfigError
from . import ipm

GE = ">="
LE = "<="

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITERATIONS = "max-iterations"
UNBOUNDED = "unbounded"

HERMITIAN_TOL = 1e-10
FEASIBLE_SLACK = -1e-8


class SdpError(ValueError):
    """Malformed SDP input (dimension mismatch, non-Hermitian data)."""


def _ingest(a, n: int | None, what: str) -> np.ndarray:
    a = np.array(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SdpError(f"{what} must be a square matrix, got shape {a.shape}")
    if n is not None and a.shape[0] != n:
        raise SdpError(f"{what} has dimension {a.shape[0]}, expected {n}")
    nrm = np.linalg.norm(a)
    if nrm > 0 and np.linalg.norm(a - a.conj().T) > HERMITIAN_TOL * nrm:
        raise SdpError(f"{what} is not Hermitian within {HERMITIAN_TOL:g}")
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class Constraint:
    """``Re Tr(a Z) {>=, <=} bound``."""

    a: np.ndarray
    sense: str
    bound: float

    def __post_init__(self) -> None:
        if self.sense not in (GE, LE):
            raise SdpError(f"constraint sense must be '>=' or '<=', got {self.sense!r}")
        object.__setattr__(self, "bound", float(self.bound))

    def slack(self, z: np.ndarray) -> float:
        """Signed slack at ``z``; negative means violated."""
        v = float(np.vdot(self.a, z).real)
        return v - self.bound if self.sense == GE else self.bound - v


def trace_cap(n: int, cap: float) -> Constraint:
    return Constraint(np.eye(n), LE, cap)


@dataclass
class SdpProblem:
    """Maximize ``Re Tr(objective Z)`` over PSD ``Z`` subject to trace constraints.

    Matrices are symmetrized on construction; anything further than
    ``1e-10`` (relative Frobenius) from Hermitian is rejected.
    """

    objective: np.ndarray
    constraints: list[Constraint] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.objective = _ingest(self.objective, None, "objective")
        n = self.objective.shape[0]
        self.constraints = [
            Constraint(_ingest(c.a, n, f"constraint {i}"), c.sense, c.bound)
            for i, c in enumerate(self.constraints)
        ]

    @property
    def n(self) -> int:
        return self.objective.shape[0]


@dataclass
class SdpSolution:
    """Solver output.

    ``max_constraint_violation`` is the largest violation ``max(0, -slack_i)``
    divided by ``1 + |b_i|``. ``duality_gap`` is the absolute primal-dual
    objective gap in the problem's own units. ``slack`` carries the optimal
    max-slack value for feasibility problems and is ``None`` otherwise.
    """

    z_matrix: np.ndarray
    status: str
    objective_value: float
    max_constraint_violation: float
    duality_gap: float
    iterations: int = 0
    reason: str = ""
    dual: np.ndarray | None = None
    slack: float | None = None
    history: list = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def _violation(constraints, z) -> float:
    worst = 0.0
    for c in constraints:
        worst = max(worst, max(0.0, -c.slack(z)) / (1.0 + abs(c.bound)))
    return worst


def _normalized_rows(constraints, n):
    """Stack constraints as sign-adjusted rows ``Tr(A Z) - b >= 0`` of unit scale.

    Returns ``(A, b, keep)`` where rows with a zero matrix are dropped
    (``keep`` reports whether each such row already held).
    """
    mats, bs, trivial_ok = [], [], True
    for c in constraints:
        sign = 1.0 if c.sense == GE else -1.0
        a = sign * c.a
        b = sign * c.bound
        scale = max(np.linalg.norm(a), abs(b))
        if np.linalg.norm(a) == 0.0:
            trivial_ok &= -b >= 0.0
            continue
        mats.append(a / scale)
        bs.append(b / scale)
    A = np.array(mats, dtype=complex).reshape(len(mats), n, n)
    return A, np.array(bs, dtype=float), trivial_ok


def solve_sdp(problem: SdpProblem, *, tol: float = 1e-9, max_iter: int = 100) -> SdpSolution:
    """Maximize ``Tr(C Z)`` subject to the problem's constraints and ``Z >= 0``.

    Each inequality gets a nonnegative slack variable, so the engine sees
    one Hermitian PSD block plus an orthant block. When the iteration fails
    to converge, a homogenized max-slack problem decides between
    ``infeasible`` (certificate found) and ``max-iterations``.
    """
    n = problem.n
    A, b, trivial_ok = _normalized_rows(problem.constraints, n)
    zero = np.zeros((n, n), dtype=complex)
    if not trivial_ok:
        return SdpSolution(zero, INFEASIBLE, np.nan, np.inf, np.nan,
                           reason="constraint with zero matrix and unsatisfiable bound")
    m = len(b)
    C = problem.objective
    cs = np.linalg.norm(C)
    cs = cs if cs > 0 else 1.0
    # sign-adjusted rows are all '>=': Tr(A Z) - s = b
    res = ipm.solve_standard_form(
        -C / cs, np.zeros(m), A, -np.eye(m), b, tol=tol, max_iter=max_iter
    )
    Z = res.X
    value = float(np.vdot(C, Z).real)
    gap = cs * abs(res.pobj - res.dobj)
    sol = SdpSolution(
        z_matrix=Z,
        status=OPTIMAL,
        objective_value=value,
        max_constraint_violation=_violation(problem.constraints, Z),
        duality_gap=gap,
        iterations=res.iterations,
        dual=res.y,
        history=res.history,
    )
    if res.status == ipm.OPTIMAL:
        return sol
    if res.status == ipm.DUAL_INFEASIBLE:
        sol.status, sol.reason = UNBOUNDED, "objective unbounded above (dual infeasible)"
        return sol
    t = homogenized_slack(A, b, tol=tol, max_iter=max_iter)
    if t is not None and t < FEASIBLE_SLACK:
        sol.status = INFEASIBLE
        sol.reason = f"homogenized max-slack is {t:.3e} < 0"
    else:
        sol.status = MAX_ITERATIONS
        sol.reason = f"interior-point method ended with '{res.status}'"
    return sol


def homogenized_slack(A: np.ndarray, b: np.ndarray, *, tol: float = 1e-9,
                      max_iter: int = 100) -> float | None:
    """Optimal ``t`` of ``max t`` s.t. ``Tr(A_i Z) - b_i tau >= t``, ``Tr Z + tau = 1``.

    Rows must be sign-adjusted to ``>=`` and normalized to unit scale. A
    negative optimum certifies that no PSD ``Z`` satisfies all rows.
    """
    m, n, _ = A.shape
    # LP block: [tau, u, s_1..s_m], t = u - 2 (|row value| <= 2 on the normalized set)
    nl = 2 + m
    rows = np.concatenate([A, np.eye(n, dtype=complex)[None]], axis=0)
    lin = np.zeros((m + 1, nl))
    lin[:m, 0] = -b
    lin[:m, 1] = -1.0
    lin[:m, 2:] = -np.eye(m)
    lin[m, 0] = 1.0
    rhs = np.concatenate([np.full(m, -2.0), [1.0]])
    c = np.zeros(nl)
    c[1] = -1.0
    res = ipm.solve_standard_form(np.zeros((n, n), dtype=complex), c, rows, lin, rhs,
                                  tol=tol, max_iter=max_iter)
    if res.status != ipm.OPTIMAL:
        return None
    return float(res.x[1] - 2.0)


def solve_feasibility(constraints: list[Constraint], *, tol: float = 1e-9,
                      max_iter: int = 100) -> SdpSolution:
    """Find the max-slack point of ``{Z >= 0 : all constraints}``.

    Solves ``max t`` subject to ``slack_i(Z) >= t`` on unit-normalized rows,
    with ``t`` capped at 1 so the problem stays bounded. The status is
    ``optimal`` when ``t >= -1e-8`` and ``infeasible`` otherwise; ``slack``
    holds ``t``.
    """
    if not constraints:
        raise SdpError("feasibility problem needs at least one constraint")
    prob = SdpProblem(np.zeros_like(np.asarray(constraints[0].a, dtype=complex)), list(constraints))
    n = prob.n
    A, b, trivial_ok = _normalized_rows(prob.constraints, n)
    if not trivial_ok:
        zero = np.zeros((n, n), dtype=complex)
        return SdpSolution(zero, INFEASIBLE, 0.0, np.inf, np.nan,
                           reason="constraint with zero matrix and unsatisfiable bound")
    m = len(b)
    # t = u + t_lb with u >= 0; t <= 1 via u + w = 1 - t_lb
    t_lb = float(min(np.min(-b, initial=1.0), 0.0)) - 1.0
    nl = m + 2  # [s_1..s_m, u, w]
    lin = np.zeros((m + 1, nl))
    lin[:m, :m] = -np.eye(m)
    lin[:m, m] = -1.0
    lin[m, m] = 1.0
    lin[m, m + 1] = 1.0
    rows = np.concatenate([A, np.zeros((1, n, n), dtype=complex)], axis=0)
    rhs = np.concatenate([b + t_lb, [1.0 - t_lb]])
    c = np.zeros(nl)
    c[m] = -1.0
    res = ipm.solve_standard_form(np.zeros((n, n), dtype=complex), c, rows, lin, rhs,
                                  tol=tol, max_iter=max_iter)
    t = float(res.x[m] + t_lb)
    Z = res.X
    sol = SdpSolution(
        z_matrix=Z,
        status=OPTIMAL,
        objective_value=t,
        max_constraint_violation=_violation(prob.constraints, Z),
        duality_gap=abs(res.pobj - res.dobj),
        iterations=res.iterations,
        dual=res.y,
        slack=t,
        history=res.history,
    )
    if res.status != ipm.OPTIMAL:
        sol.status = MAX_ITERATIONS
        sol.reason = f"interior-point method ended with '{res.status}'"
    elif t < FEASIBLE_SLACK:
        sol.status = INFEASIBLE
        sol.reason = f"max-slack {t:.3e} < 0"
    return sol
