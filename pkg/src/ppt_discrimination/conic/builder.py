import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp
from scipy.linalg import lapack

from ppt_discrimination.conic.embedding import real_embed
from ppt_discrimination.constants import (
    MAX_DENSE_SCHUR_ROWS,
    MAX_EMBEDDED_BLOCK_ORDER,
    MAX_ROWS,
)
from ppt_discrimination.conic.exceptions import ConicProblemError, ProblemTooLargeError
from ppt_discrimination.conic.models import Block, BlockKind, ConicProblem, RowGroup, RowKind
from ppt_discrimination.hermlin import HermOp, as_cmatrix

__all__ = ["HermitianTerm", "ProblemBuilder"]

logger = logging.getLogger("conic")


@dataclass(frozen=True)
class HermitianTerm:
    """scale · M[index_map] inside a Hermitian equality, with M = V·X_block·V† or M = X_block

    ``index_map`` is a pair of integer arrays (rows, cols) selecting ``M[rows[p, q], cols[p, q]]``
    for entry (p, q). None means the identity map. ``isometry`` is the matrix V with orthonormal
    columns; its column count is the order of the block.
    """

    block: str
    scale: float = 1.0
    index_map: tuple[npt.NDArray[np.intp], npt.NDArray[np.intp]] | None = None
    isometry: npt.NDArray[np.complex128] | None = None


class ProblemBuilder:
    """Accumulate blocks, objective and equality rows of a ConicProblem

    Rows are collected as sparse triplets per block and assembled once by ``build``, which also
    removes linearly dependent rows.
    """

    def __init__(self) -> None:
        self._blocks: list[Block] = []
        self._index: dict[str, int] = {}
        self._objective: list[npt.NDArray[np.float64]] = []
        self._triplets: list[tuple[list[int], list[int], list[float]]] = []
        self._rhs: list[float] = []
        self._groups: dict[str, RowGroup] = {}
        self.metadata: dict[str, Any] = {}

    @property
    def m(self) -> int:
        return len(self._rhs)

    def add_block(self, label: str, kind: BlockKind, dim_a: int, dim_b: int = 1) -> Block:
        if label in self._index:
            raise ConicProblemError(f"Block {label} is already defined")
        block = Block(label, BlockKind(kind), dim_a, dim_b)
        if block.embedded_order > MAX_EMBEDDED_BLOCK_ORDER:
            raise ProblemTooLargeError(
                f"Block {label} of order {block.embedded_order} exceeds the limit "
                f"{MAX_EMBEDDED_BLOCK_ORDER}"
            )
        self._index[label] = len(self._blocks)
        self._blocks.append(block)
        n = block.embedded_order
        shape = (n, n) if block.kind is BlockKind.PSD_COMPLEX else (n,)
        self._objective.append(np.zeros(shape))
        self._triplets.append(([], [], []))
        return block

    def block(self, label: str) -> Block:
        try:
            return self._blocks[self._index[label]]
        except KeyError:
            raise ConicProblemError(f"Unknown block {label}") from None

    def _check_hermitian(self, block: Block, coeff: HermOp | npt.ArrayLike) -> npt.NDArray:
        m = coeff.matrix if isinstance(coeff, HermOp) else as_cmatrix(coeff)
        if m.shape != (block.order, block.order):
            raise ConicProblemError(
                f"Coefficient of shape {m.shape} does not match block {block.label} "
                f"of order {block.order}"
            )
        if not np.allclose(m, m.conj().T, rtol=0, atol=1e-12 * max(1.0, np.abs(m).max())):
            raise ConicProblemError(f"Coefficient for block {block.label} is not Hermitian")
        return m

    def _check_vector(self, block: Block, coeff: npt.ArrayLike) -> npt.NDArray[np.float64]:
        v = np.asarray(coeff, dtype=np.float64).reshape(-1)
        if v.shape != (block.order,):
            raise ConicProblemError(
                f"Coefficient of length {v.size} does not match block {block.label}"
            )
        return v

    def add_objective(self, label: str, coeff: HermOp | npt.ArrayLike) -> None:
        """Add ⟨coeff, X_label⟩ to the maximized objective"""
        i = self._index[label]
        block = self._blocks[i]
        if block.kind is BlockKind.PSD_COMPLEX:
            embedded = real_embed(self._check_hermitian(block, coeff)) / 2
            self._objective[i] = self._objective[i] + embedded
        else:
            self._objective[i] = self._objective[i] + self._check_vector(block, coeff)

    def _group(self, name: str, kind: RowKind, dim_a: int = 1, dim_b: int = 1) -> RowGroup:
        group = self._groups.get(name)
        if group is None:
            group = self._groups[name] = RowGroup(name, kind, dim_a=dim_a, dim_b=dim_b)
        elif group.kind is not kind:
            raise ConicProblemError(f"Row group {name} mixes row kinds")
        return group

    def _put(self, i: int, row: int, cols: npt.ArrayLike, vals: npt.ArrayLike) -> None:
        rows_, cols_, vals_ = self._triplets[i]
        c = np.asarray(cols).reshape(-1)
        v = np.asarray(vals, dtype=np.float64).reshape(-1)
        nz = v != 0
        rows_.extend([row] * int(nz.sum()))
        cols_.extend(c[nz].tolist())
        vals_.extend(v[nz].tolist())

    def _put_embedded(self, i: int, row: int, coeff: npt.NDArray) -> None:
        # ⟨coeff, X⟩ = ½·⟨embed(coeff), embed(X)⟩
        e = real_embed(coeff) / 2
        flat = e.reshape(-1)
        nz = np.flatnonzero(flat)
        self._put(i, row, nz, flat[nz])

    def add_scalar_row(
        self, group: str, coeffs: Mapping[str, HermOp | npt.ArrayLike], rhs: float
    ) -> int:
        """Add the row Σ_b ⟨coeffs[b], X_b⟩ = rhs"""
        row = self.m
        for label, coeff in coeffs.items():
            i = self._index[label]
            block = self._blocks[i]
            if block.kind is BlockKind.PSD_COMPLEX:
                self._put_embedded(i, row, self._check_hermitian(block, coeff))
            else:
                v = self._check_vector(block, coeff)
                nz = np.flatnonzero(v)
                self._put(i, row, nz, v[nz])
        self._rhs.append(float(rhs))
        self._group(group, RowKind.SCALAR).rows.append(row)
        return row

    def add_vector_equality(
        self,
        group: str,
        coeffs: Mapping[str, npt.ArrayLike | sp.spmatrix],
        rhs: npt.ArrayLike,
    ) -> list[int]:
        """Add rows Σ_b coeffs[b] @ x_b = rhs over diagonal blocks"""
        r = np.asarray(rhs, dtype=np.float64).reshape(-1)
        start = self.m
        for label, coeff in coeffs.items():
            i = self._index[label]
            block = self._blocks[i]
            if block.kind is not BlockKind.NONNEG_DIAG:
                raise ConicProblemError(f"Vector equalities act on diagonal blocks, not {label}")
            mat = sp.coo_matrix(coeff)
            if mat.shape != (r.size, block.order):
                raise ConicProblemError(
                    f"Coefficient of shape {mat.shape} does not match {(r.size, block.order)}"
                )
            rows_, cols_, vals_ = self._triplets[i]
            rows_.extend((mat.row + start).tolist())
            cols_.extend(mat.col.tolist())
            vals_.extend(mat.data.tolist())
        self._rhs.extend(r.tolist())
        rows = list(range(start, start + r.size))
        self._group(group, RowKind.VECTOR).rows.extend(rows)
        return rows

    def add_hermitian_equality(
        self, group: str, terms: Sequence[HermitianTerm], rhs: HermOp | npt.ArrayLike
    ) -> list[int]:
        """Add Σ_t scale_t·X_t[index_map_t] = rhs as one real row per independent component

        Each row is the functional Re M[p, q] (p ≤ q) or Im M[p, q] (p < q) of the left-hand side
        matrix M, written symmetrically on the real embedding of every term's block.
        """
        h = rhs.matrix if isinstance(rhs, HermOp) else as_cmatrix(rhs)
        order = h.shape[0]
        dims = (rhs.dim_a, rhs.dim_b) if isinstance(rhs, HermOp) else (order, 1)
        resolved = []
        for term in terms:
            i = self._index[term.block]
            block = self._blocks[i]
            iso = None if term.isometry is None else as_cmatrix(term.isometry)
            expected = block.order if iso is None else iso.shape[0]
            if (
                block.kind is not BlockKind.PSD_COMPLEX
                or expected != order
                or (iso is not None and iso.shape[1] != block.order)
            ):
                raise ConicProblemError(
                    f"Block {term.block} cannot appear in a Hermitian equality of order {order}"
                )
            if term.index_map is None:
                src_rows, src_cols = np.indices((order, order))
            else:
                src_rows, src_cols = term.index_map
            resolved.append((i, term.scale, src_rows, src_cols, iso))

        g = self._group(group, RowKind.HERMITIAN, *dims)
        n = order
        two_n = 2 * n
        created = []
        for p in range(n):
            for q in range(p, n):
                parts = ("re",) if p == q else ("re", "im")
                for part in parts:
                    row = self.m
                    for i, scale, src_rows, src_cols, iso in resolved:
                        a, b = int(src_rows[p, q]), int(src_cols[p, q])
                        if iso is not None:
                            coeff = scale * _isometry_functional(iso, a, b, part)
                            self._put_embedded(i, row, coeff)
                            continue
                        w = scale / 4
                        if part == "re":
                            cols = [
                                a * two_n + b,
                                b * two_n + a,
                                (n + a) * two_n + n + b,
                                (n + b) * two_n + n + a,
                            ]
                            vals = [w, w, w, w]
                        else:
                            cols = [
                                (n + a) * two_n + b,
                                b * two_n + n + a,
                                a * two_n + n + b,
                                (n + b) * two_n + a,
                            ]
                            vals = [w, w, -w, -w]
                        self._put(i, row, cols, vals)
                    self._rhs.append(float(h[p, q].real if part == "re" else h[p, q].imag))
                    g.rows.append(row)
                    g.components.append((p, q, part))
                    created.append(row)
        return created

    def build(self, check_rank: bool = True) -> ConicProblem:
        m = self.m
        lp = all(b.kind is BlockKind.NONNEG_DIAG for b in self._blocks)
        if m > MAX_ROWS or (not lp and m > MAX_DENSE_SCHUR_ROWS):
            raise ProblemTooLargeError(f"Problem with {m} constraint rows is too large")
        constraints = []
        for block, (rows_, cols_, vals_) in zip(self._blocks, self._triplets):
            a = sp.coo_matrix((vals_, (rows_, cols_)), shape=(m, block.size)).tocsr()
            a.sum_duplicates()
            a.eliminate_zeros()
            constraints.append(a)
        rhs = np.array(self._rhs, dtype=np.float64)
        keep = independent_rows(constraints, m) if check_rank and m else np.arange(m)
        dropped = m - keep.size
        groups = self._groups
        if dropped:
            logger.warning("Removed %d linearly dependent constraint rows", dropped)
            constraints = [a[keep] for a in constraints]
            rhs = rhs[keep]
            groups = _reindex_groups(self._groups, keep, m)
        return ConicProblem(
            blocks=list(self._blocks),
            objective=[c.copy() for c in self._objective],
            constraints=constraints,
            rhs=rhs,
            row_groups=groups,
            metadata=dict(self.metadata),
            dropped_rows=dropped,
        )


def _isometry_functional(
    iso: npt.NDArray[np.complex128], a: int, b: int, part: str
) -> npt.NDArray[np.complex128]:
    """Hermitian F with ⟨F, X⟩ = Re or Im of (V·X·V†)[a, b]"""
    # (V X V†)[a, b] = Σ_cd V[a, c]·conj(V[b, d])·X[c, d] = Tr(ct·X)
    ct = np.outer(iso[b].conj(), iso[a])
    if part == "im":
        ct = -1j * ct
    return (ct + ct.conj().T) / 2


def independent_rows(constraints: Sequence[sp.csr_matrix], m: int) -> npt.NDArray[np.intp]:
    """Indices of a maximal set of linearly independent rows, in increasing order

    Uses pivoted Cholesky of the Gram matrix A·Aᵀ.
    """
    gram = sp.csr_matrix((m, m))
    for a in constraints:
        gram = gram + a @ a.T
    dense = gram.toarray()
    scale = float(np.max(np.diag(dense))) if m else 0.0
    if scale <= 0:
        raise ConicProblemError("Every constraint row is zero")
    _, piv, rank, info = lapack.dpstrf(dense / scale, tol=1e-12)
    if info < 0:  # pragma: no cover
        raise ConicProblemError(f"Rank computation failed with LAPACK info {info}")
    return np.sort(piv[:rank] - 1).astype(np.intp)


def _reindex_groups(
    groups: dict[str, RowGroup], keep: npt.NDArray[np.intp], m: int
) -> dict[str, RowGroup]:
    new_index = np.full(m, -1, dtype=np.intp)
    new_index[keep] = np.arange(keep.size)
    result = {}
    for name, g in groups.items():
        rows, comps = [], []
        for pos, row in enumerate(g.rows):
            if new_index[row] >= 0:
                rows.append(int(new_index[row]))
                if g.components:
                    comps.append(g.components[pos])
        result[name] = RowGroup(name, g.kind, rows, comps, g.dim_a, g.dim_b)
    return result
