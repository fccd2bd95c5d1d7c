from typing import Any


class ConicProblemError(ValueError):
    """Raise this error if a conic problem is malformed"""


class ProblemTooLargeError(ConicProblemError):
    """The problem exceeds the sizes the dense solver supports"""


class SolverError(Exception):
    """A solve did not reach optimal status

    ``solution`` is the returned ConicSolution and ``metadata`` describes how the problem was built.
    """

    def __init__(self, msg: str, solution: Any, metadata: dict[str, Any] | None = None) -> None:
        super().__init__(msg)
        self.solution = solution
        self.metadata = metadata or {}
