from ppt_discrimination.conic.builder import HermitianTerm, ProblemBuilder
from ppt_discrimination.conic.embedding import real_embed, real_unembed
from ppt_discrimination.conic.exceptions import (
    ConicProblemError,
    ProblemTooLargeError,
    SolverError,
)
from ppt_discrimination.conic.models import (
    Block,
    BlockKind,
    ConicProblem,
    ConicSolution,
    Residuals,
    RowGroup,
    RowKind,
    SolveOptions,
    SolveStatus,
)
from ppt_discrimination.conic.solver import SolutionCheck, check_solution, solve, solve_lp

__all__ = [
    "Block",
    "BlockKind",
    "ConicProblem",
    "ConicProblemError",
    "ConicSolution",
    "HermitianTerm",
    "ProblemBuilder",
    "ProblemTooLargeError",
    "Residuals",
    "RowGroup",
    "RowKind",
    "SolutionCheck",
    "SolveOptions",
    "SolveStatus",
    "SolverError",
    "check_solution",
    "real_embed",
    "real_unembed",
    "solve",
    "solve_lp",
]
