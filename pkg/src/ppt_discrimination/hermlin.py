"""Dense complex linear algebra for bipartite Hermitian operators

All bipartite operators use the ordering A ⊗ B with B the fast (inner) index, so the matrix entry
``x[(i,k),(j,l)]`` lives at row ``i*dim_b + k`` and column ``j*dim_b + l``.
"""

import logging
from dataclasses import dataclass
from typing import Self

import numpy as np
import numpy.typing as npt

from ppt_discrimination.constants import (
    HERMITIAN_RTOL,
    IMAG_TOL,
    MAX_MATRIX_ORDER,
    PSD_TOL,
)
from ppt_discrimination.types import CMatrix, RMatrix, Subsystem

__all__ = [
    "DimensionMismatchError",
    "EigenConvergenceError",
    "HermOp",
    "NotHermitianError",
    "as_cmatrix",
    "bipartite_tensor",
    "eigvals_hermitian",
    "hs_inner",
    "is_psd",
    "kron",
    "max_norm",
    "min_eigenvalue",
    "partial_trace",
    "partial_transpose",
    "partial_transpose_array",
    "partial_transpose_indices",
]

logger = logging.getLogger("hermlin")


class DimensionMismatchError(ValueError):
    """Operands of an operation have incompatible dimensions"""


class NotHermitianError(ValueError):
    """A matrix that must be Hermitian is not, within tolerance"""


class EigenConvergenceError(ArithmeticError):
    """The Hermitian eigensolver did not converge"""


def as_cmatrix(value: npt.ArrayLike) -> CMatrix:
    """Convert a value to a dense complex matrix with at least one row and one column"""
    m = np.array(value, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionMismatchError(f"Expected a non-empty 2-D matrix, got shape {m.shape}.")
    return m


def max_norm(m: npt.ArrayLike) -> float:
    arr = np.asarray(m)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


@dataclass(frozen=True, eq=False)
class HermOp:
    """A Hermitian operator on C^dim_a ⊗ C^dim_b

    The wrapped matrix is copied and made read-only at construction.
    """

    dim_a: int
    dim_b: int
    matrix: CMatrix

    def __post_init__(self) -> None:
        if self.dim_a < 1 or self.dim_b < 1:
            raise DimensionMismatchError(
                f"Subsystem dimensions must be positive: {self.dim_a}, {self.dim_b}"
            )
        m = as_cmatrix(self.matrix).copy()
        n = self.dim_a * self.dim_b
        if m.shape != (n, n):
            raise DimensionMismatchError(
                f"Matrix of shape {m.shape} does not match dimensions {self.dim_a}x{self.dim_b}."
            )
        deviation = max_norm(m - m.conj().T)
        if deviation > HERMITIAN_RTOL * max_norm(m):
            raise NotHermitianError(f"Matrix is not Hermitian, deviation {deviation:.3e}.")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def hermitian_part(cls, matrix: npt.ArrayLike, dim_a: int, dim_b: int) -> Self:
        """Build an operator from (M + M†)/2 of a nearly Hermitian matrix"""
        m = as_cmatrix(matrix)
        return cls(dim_a, dim_b, (m + m.conj().T) / 2)

    @classmethod
    def from_vector(cls, vector: npt.ArrayLike, dim_a: int, dim_b: int) -> Self:
        """Build the rank-one operator uu* of a vector u"""
        u = np.asarray(vector, dtype=np.complex128).reshape(-1)
        return cls.hermitian_part(np.outer(u, u.conj()), dim_a, dim_b)

    @classmethod
    def identity(cls, dim_a: int, dim_b: int) -> Self:
        return cls(dim_a, dim_b, np.eye(dim_a * dim_b, dtype=np.complex128))

    @classmethod
    def zeros(cls, dim_a: int, dim_b: int) -> Self:
        n = dim_a * dim_b
        return cls(dim_a, dim_b, np.zeros((n, n), dtype=np.complex128))

    @property
    def order(self) -> int:
        return self.dim_a * self.dim_b

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def is_real(self) -> bool:
        return not np.any(self.matrix.imag)

    def same_space(self, other: "HermOp") -> bool:
        return self.dim_a == other.dim_a and self.dim_b == other.dim_b

    def _check_space(self, other: "HermOp") -> None:
        if not self.same_space(other):
            raise DimensionMismatchError(
                f"Operators live on different spaces: {self.dim_a}x{self.dim_b} and "
                f"{other.dim_a}x{other.dim_b}"
            )

    def __add__(self, other: "HermOp") -> "HermOp":
        self._check_space(other)
        return HermOp(self.dim_a, self.dim_b, self.matrix + other.matrix)

    def __sub__(self, other: "HermOp") -> "HermOp":
        self._check_space(other)
        return HermOp(self.dim_a, self.dim_b, self.matrix - other.matrix)

    def __neg__(self) -> "HermOp":
        return HermOp(self.dim_a, self.dim_b, -self.matrix)

    def __mul__(self, scalar: float) -> "HermOp":
        return HermOp(self.dim_a, self.dim_b, float(scalar) * self.matrix)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "HermOp":
        return HermOp(self.dim_a, self.dim_b, self.matrix / float(scalar))

    def allclose(self, other: "HermOp", atol: float = 1e-12) -> bool:
        return self.same_space(other) and max_norm(self.matrix - other.matrix) <= atol


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> CMatrix:
    """Kronecker product with block (i, j) equal to a[i, j]·b

    :raises DimensionMismatchError: if the product order exceeds the supported matrix order.
    """
    ma = as_cmatrix(a)
    mb = as_cmatrix(b)
    rows = ma.shape[0] * mb.shape[0]
    cols = ma.shape[1] * mb.shape[1]
    if max(rows, cols) > MAX_MATRIX_ORDER:
        raise DimensionMismatchError(
            f"Kronecker product of order {rows}x{cols} exceeds the limit {MAX_MATRIX_ORDER}."
        )
    return np.kron(ma, mb)


def bipartite_tensor(*ops: HermOp) -> HermOp:
    """Tensor product of bipartite operators regrouped as (A₁A₂…) ⊗ (B₁B₂…)

    Each factor lives on A_l ⊗ B_l. The result lives on the bipartition where Alice holds every
    A_l and Bob every B_l, keeping the A outer / B inner convention.
    """
    if not ops:
        raise ValueError("At least one operator is required.")
    result = ops[0]
    for op in ops[1:]:
        da, db = result.dim_a, result.dim_b
        ea, eb = op.dim_a, op.dim_b
        full = kron(result.matrix, op.matrix).reshape(da, db, ea, eb, da, db, ea, eb)
        regrouped = full.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(da * ea * db * eb, -1)
        result = HermOp(da * ea, db * eb, regrouped)
    return result


def partial_transpose_array(m: npt.ArrayLike, dim_a: int, dim_b: int) -> CMatrix:
    """Transpose on the A factor of a matrix on C^dim_a ⊗ C^dim_b"""
    arr = as_cmatrix(m)
    t = arr.reshape(dim_a, dim_b, dim_a, dim_b).transpose(2, 1, 0, 3)
    return t.reshape(dim_a * dim_b, dim_a * dim_b)


def partial_transpose_indices(
    dim_a: int, dim_b: int
) -> tuple[npt.NDArray[np.intp], npt.NDArray[np.intp]]:
    """Index map of the partial transpose

    Returns ``(rows, cols)`` such that ``T_A(X)[p, q] == X[rows[p, q], cols[p, q]]``.
    """
    n = dim_a * dim_b
    p, q = np.indices((n, n))
    j, k = np.divmod(p, dim_b)
    i, l_ = np.divmod(q, dim_b)
    return i * dim_b + k, j * dim_b + l_


def partial_transpose(x: HermOp) -> HermOp:
    """Return T_A(x) with output[(j,k),(i,l)] = x[(i,k),(j,l)]"""
    return HermOp(x.dim_a, x.dim_b, partial_transpose_array(x.matrix, x.dim_a, x.dim_b))


def partial_trace(x: HermOp, over: Subsystem | str) -> CMatrix:
    """Trace out one subsystem

    :param x: operator on A ⊗ B.
    :param over: the subsystem traced out. Tracing out A leaves a dim_b × dim_b matrix.
    :return: the reduced matrix.
    """
    t = x.matrix.reshape(x.dim_a, x.dim_b, x.dim_a, x.dim_b)
    match Subsystem(over):
        case Subsystem.A:
            return np.einsum("ikil->kl", t)
        case Subsystem.B:
            return np.einsum("ikjk->ij", t)
    raise ValueError(f"Unknown subsystem {over!r}")  # pragma: no cover


def hs_inner(a: HermOp, b: HermOp) -> float:
    """Hilbert-Schmidt inner product Tr(a†b) of Hermitian operators

    :raises DimensionMismatchError: if a and b live on different spaces.
    :raises NotHermitianError: if the imaginary residue is too large to be rounding.
    """
    if a.matrix.shape != b.matrix.shape:
        raise DimensionMismatchError(
            f"Cannot pair operators of orders {a.matrix.shape[0]} and {b.matrix.shape[0]}."
        )
    value = np.vdot(a.matrix, b.matrix)
    if abs(value.imag) > IMAG_TOL * max(1.0, abs(value.real)):
        raise NotHermitianError(f"Inner product has imaginary residue {value.imag:.3e}.")
    return float(value.real)


def _as_matrix(x: HermOp | npt.ArrayLike) -> npt.NDArray:
    return x.matrix if isinstance(x, HermOp) else np.asarray(x)


def eigvals_hermitian(x: HermOp | npt.ArrayLike) -> RMatrix:
    """Ascending real spectrum of a Hermitian (or real symmetric) matrix

    :raises EigenConvergenceError: if LAPACK fails to converge.
    """
    m = _as_matrix(x)
    try:
        return np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as e:
        logger.error("Eigenvalue computation failed for a matrix of order %d", m.shape[0])
        raise EigenConvergenceError(str(e)) from e


def min_eigenvalue(x: HermOp | npt.ArrayLike) -> float:
    return float(eigvals_hermitian(x)[0])


def is_psd(x: HermOp | npt.ArrayLike, tol: float = PSD_TOL) -> bool:
    """True iff the minimum eigenvalue is at least -tol·max(1, max-norm(x))"""
    m = _as_matrix(x)
    return min_eigenvalue(m) >= -tol * max(1.0, max_norm(m))
