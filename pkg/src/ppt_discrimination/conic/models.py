from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from ppt_discrimination.constants import (
    FEAS_TOL,
    GAP_TOL,
    MAX_BLOCKS,
    MAX_DENSE_SCHUR_ROWS,
    MAX_EMBEDDED_BLOCK_ORDER,
    MAX_ITER,
    MAX_ROWS,
    RELAXED_TOL_FACTOR,
    STEP_FRACTION,
)
from ppt_discrimination.conic.exceptions import ConicProblemError, ProblemTooLargeError
from ppt_discrimination.hermlin import HermOp
from ppt_discrimination.types import CMatrix, RMatrix


class BlockKind(StrEnum):
    PSD_COMPLEX = "psd_complex"
    NONNEG_DIAG = "nonneg_diag"


class SolveStatus(StrEnum):
    OPTIMAL = "optimal"
    MAX_ITERATIONS = "max_iterations"
    NEAR_OPTIMAL = "near_optimal"
    NUMERICAL_FAILURE = "numerical_failure"


class RowKind(StrEnum):
    HERMITIAN = "hermitian"
    VECTOR = "vector"
    SCALAR = "scalar"


@dataclass(frozen=True)
class Block:
    label: str
    kind: BlockKind
    dim_a: int
    dim_b: int = 1

    @property
    def order(self) -> int:
        return self.dim_a * self.dim_b

    @property
    def embedded_order(self) -> int:
        """Order of the real symmetric variable the solver works with"""
        return 2 * self.order if self.kind is BlockKind.PSD_COMPLEX else self.order

    @property
    def size(self) -> int:
        """Number of real coordinates of the block in the constraint matrix"""
        if self.kind is BlockKind.PSD_COMPLEX:
            return self.embedded_order**2
        return self.order


@dataclass
class RowGroup:
    """Named constraint rows whose multipliers are read back together

    For hermitian groups ``components`` lists the (p, q, part) of each row, part being "re" or "im".
    """

    name: str
    kind: RowKind
    rows: list[int] = field(default_factory=list)
    components: list[tuple[int, int, str]] = field(default_factory=list)
    dim_a: int = 1
    dim_b: int = 1

    @property
    def order(self) -> int:
        return self.dim_a * self.dim_b


@dataclass(frozen=True)
class SolveOptions:
    tol_gap: float = GAP_TOL
    tol_feas: float = FEAS_TOL
    max_iter: int = MAX_ITER
    step_fraction: float = STEP_FRACTION
    relaxed_factor: float = RELAXED_TOL_FACTOR


@dataclass
class ConicProblem:
    """maximize Σ_b ⟨C_b, X_b⟩ subject to Σ_b A_b(X_b) = rhs, X_b in the cone of block b

    Data is stored after real assembly: ``objective[b]`` is the real symmetric matrix ½·embed(C_b)
    for complex PSD blocks and the coefficient vector for diagonal blocks, ``constraints[b]`` is a
    sparse (m × size_b) matrix acting on the row-major vectorized block.
    """

    blocks: list[Block]
    objective: list[npt.NDArray[np.float64]]
    constraints: list[sp.csr_matrix]
    rhs: npt.NDArray[np.float64]
    row_groups: dict[str, RowGroup] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)
    dropped_rows: int = 0

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ConicProblemError("A conic problem needs at least one constraint row.")
        if not self.blocks:
            raise ConicProblemError("A conic problem needs at least one block.")
        if len(self.blocks) > MAX_BLOCKS:
            raise ProblemTooLargeError(f"{len(self.blocks)} blocks exceed the limit {MAX_BLOCKS}")
        if self.m > MAX_ROWS:
            raise ProblemTooLargeError(f"{self.m} constraint rows exceed the limit {MAX_ROWS}")
        if not self.is_lp and self.m > MAX_DENSE_SCHUR_ROWS:
            raise ProblemTooLargeError(
                f"{self.m} constraint rows exceed the limit {MAX_DENSE_SCHUR_ROWS} for problems "
                "with PSD blocks"
            )
        if len(self.objective) != len(self.blocks) or len(self.constraints) != len(self.blocks):
            raise ConicProblemError("Objective and constraint data must be given for every block.")
        labels = set()
        for block, c, a in zip(self.blocks, self.objective, self.constraints):
            if block.label in labels:
                raise ConicProblemError(f"Duplicate block label {block.label}")
            labels.add(block.label)
            if block.embedded_order > MAX_EMBEDDED_BLOCK_ORDER:
                raise ProblemTooLargeError(
                    f"Block {block.label} of order {block.embedded_order} exceeds the limit "
                    f"{MAX_EMBEDDED_BLOCK_ORDER}"
                )
            if a.shape != (self.m, block.size):
                raise ConicProblemError(
                    f"Constraint data of block {block.label} has shape {a.shape}, "
                    f"expected {(self.m, block.size)}"
                )
            if block.kind is BlockKind.PSD_COMPLEX:
                n = block.embedded_order
                if c.shape != (n, n) or not np.allclose(c, c.T, rtol=0, atol=1e-14):
                    raise ConicProblemError(f"Objective of block {block.label} is not symmetric")
            elif c.shape != (block.order,):
                raise ConicProblemError(f"Objective of block {block.label} has wrong shape")

    @property
    def m(self) -> int:
        return int(self.rhs.shape[0])

    @property
    def is_lp(self) -> bool:
        return all(b.kind is BlockKind.NONNEG_DIAG for b in self.blocks)

    def block_index(self, label: str) -> int:
        for i, block in enumerate(self.blocks):
            if block.label == label:
                return i
        raise KeyError(label)

    def describe(self) -> dict[str, Any]:
        return {
            "blocks": len(self.blocks),
            "rows": self.m,
            "dropped_rows": self.dropped_rows,
            "max_block_order": max(b.embedded_order for b in self.blocks),
            **self.metadata,
        }


@dataclass(frozen=True)
class Residuals:
    primal_infeasibility: float
    dual_infeasibility: float
    min_primal_eigenvalue: float
    min_dual_eigenvalue: float


@dataclass
class ConicSolution:
    """Result of a solve

    ``primal_blocks`` and ``dual_slacks`` hold complex Hermitian matrices for PSD blocks and real
    vectors for diagonal blocks. ``dual_multipliers`` are the multipliers y of the dual problem
    minimize rhsᵀy subject to Σ_r y_r A_r − C = S ⪰ 0.
    """

    status: SolveStatus
    primal_blocks: list[CMatrix | npt.NDArray[np.float64]]
    dual_multipliers: npt.NDArray[np.float64]
    dual_slacks: list[CMatrix | npt.NDArray[np.float64]]
    primal_value: float
    dual_value: float
    gap: float
    residuals: Residuals
    iterations: int
    problem: ConicProblem = field(repr=False)

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    @property
    def is_solved(self) -> bool:
        """Optimal, or accepted under the relaxed tolerances after the iteration stalled"""
        return self.status in (SolveStatus.OPTIMAL, SolveStatus.NEAR_OPTIMAL)

    def _block(self, values: list, label: str):
        return values[self.problem.block_index(label)]

    def block(self, label: str) -> CMatrix | npt.NDArray[np.float64]:
        return self._block(self.primal_blocks, label)

    def slack(self, label: str) -> CMatrix | npt.NDArray[np.float64]:
        return self._block(self.dual_slacks, label)

    def block_operator(self, label: str) -> HermOp:
        block = self.problem.blocks[self.problem.block_index(label)]
        return HermOp.hermitian_part(self.block(label), block.dim_a, block.dim_b)

    def slack_operator(self, label: str) -> HermOp:
        block = self.problem.blocks[self.problem.block_index(label)]
        return HermOp.hermitian_part(self.slack(label), block.dim_a, block.dim_b)

    def multiplier_vector(self, group: str) -> RMatrix:
        return self.dual_multipliers[self.problem.row_groups[group].rows]

    def multiplier_operator(self, group: str) -> HermOp:
        """Hermitian Y with Σ_r y_r·(row r) = ⟨Y, ·⟩ over the rows of a hermitian group"""
        g = self.problem.row_groups[group]
        if g.kind is not RowKind.HERMITIAN:
            raise ConicProblemError(f"Row group {group} is not a Hermitian equality")
        y = np.zeros((g.order, g.order), dtype=np.complex128)
        for row, (p, q, part) in zip(g.rows, g.components):
            value = self.dual_multipliers[row]
            if p == q:
                y[p, p] += value
            elif part == "re":
                y[p, q] += value / 2
                y[q, p] += value / 2
            else:
                y[p, q] += 1j * value / 2
                y[q, p] -= 1j * value / 2
        return HermOp(g.dim_a, g.dim_b, y)

    def summary(self) -> dict[str, Any]:
        return {
            "status": str(self.status),
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "gap": self.gap,
            "primal_infeasibility": self.residuals.primal_infeasibility,
            "dual_infeasibility": self.residuals.dual_infeasibility,
            "min_primal_eigenvalue": self.residuals.min_primal_eigenvalue,
            "min_dual_eigenvalue": self.residuals.min_dual_eigenvalue,
            "iterations": self.iterations,
            "relaxed_acceptance": self.status is SolveStatus.NEAR_OPTIMAL,
        }
