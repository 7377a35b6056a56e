"""Dense complex-Hermitian SDP solver and Gaussian-randomization rounding."""
from .rounding import RoundingResult, draw_candidates, gaussian_randomization, hermitian_eig
from .solver import (
    GE,
    INFEASIBLE,
    LE,
    MAX_ITERATIONS,
    OPTIMAL,
    UNBOUNDED,
    Constraint,
    SdpError,
    SdpProblem,
    SdpSolution,
    solve_feasibility,
    solve_sdp,
    trace_cap,
)

__all__ = [
    "GE", "LE", "OPTIMAL", "INFEASIBLE", "MAX_ITERATIONS", "UNBOUNDED",
    "Constraint", "SdpError", "SdpProblem", "SdpSolution", "RoundingResult",
    "solve_sdp", "solve_feasibility", "trace_cap", "hermitian_eig",
    "draw_candidates", "gaussian_randomization",
]
