"""Full semidefinite formulations of PPT discrimination

Every builder returns a ConicProblem whose optimal value is the success probability (or the
transposed-state upper bound) directly; the matching ``extract_*`` function turns a solution into a
measurement and a dual certificate scaled to the convention of verify_certificate.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ppt_discrimination.conic import (
    BlockKind,
    ConicProblem,
    ConicSolution,
    HermitianTerm,
    ProblemBuilder,
)
from ppt_discrimination.discrim.models import BuildPath, CertificateForm, DualCertificate
from ppt_discrimination.hermlin import (
    HermOp,
    max_norm,
    partial_transpose,
    partial_transpose_indices,
)
from ppt_discrimination.states import DiscriminationInstance
from ppt_discrimination.types import CMatrix, Cone, Mode

__all__ = [
    "build_eq3_bound",
    "build_min_error",
    "build_unambiguous",
    "extract_eq3",
    "extract_min_error",
    "extract_unambiguous",
]

logger = logging.getLogger("discrim")

# Eigenvalues above this fraction of the largest one belong to the support of an operator.
SUPPORT_TOL = 1e-9


def _p(j: int) -> str:
    return f"P[{j}]"


def _z(j: int) -> str:
    return f"Z[{j}]"


def _metadata(inst: DiscriminationInstance, mode: Mode, cone: Cone, **extra: object) -> dict:
    return {
        "path": str(BuildPath.SDP),
        "mode": str(mode),
        "cone": str(cone),
        "instance": inst.name,
        "k": inst.k,
        **extra,
    }


def build_min_error(inst: DiscriminationInstance, cone: Cone | str = Cone.PPT) -> ConicProblem:
    """maximize Σ_j p_j⟨P_j, ρ_j⟩ s.t. Σ_j P_j = 1, P_j ⪰ 0 and (PPT cone) T_A(P_j) ⪰ 0

    T_A(P_j) ⪰ 0 is written as Z_j − T_A(P_j) = 0 with a PSD block Z_j.
    """
    cone = Cone(cone)
    da, db = inst.dim_a, inst.dim_b
    pt = partial_transpose_indices(da, db)
    builder = ProblemBuilder()
    for j, (rho, p) in enumerate(zip(inst.states, inst.priors)):
        builder.add_block(_p(j), BlockKind.PSD_COMPLEX, da, db)
        builder.add_objective(_p(j), p * rho)
        if cone is Cone.PPT:
            builder.add_block(_z(j), BlockKind.PSD_COMPLEX, da, db)
    builder.add_hermitian_equality(
        "completeness", [HermitianTerm(_p(j)) for j in range(inst.k)], HermOp.identity(da, db)
    )
    if cone is Cone.PPT:
        for j in range(inst.k):
            builder.add_hermitian_equality(
                f"ppt[{j}]",
                [HermitianTerm(_z(j)), HermitianTerm(_p(j), -1.0, pt)],
                HermOp.zeros(da, db),
            )
    builder.metadata.update(_metadata(inst, Mode.MIN_ERROR, cone))
    return builder.build()


def extract_min_error(
    inst: DiscriminationInstance, sol: ConicSolution
) -> tuple[list[HermOp], DualCertificate]:
    k = inst.k
    ppt = sol.problem.metadata["cone"] == Cone.PPT
    ops = [sol.block_operator(_p(j)) for j in range(k)]
    y = sol.multiplier_operator("completeness") * k
    zero = HermOp.zeros(inst.dim_a, inst.dim_b)
    q_ops = [sol.slack_operator(_z(j)) * k if ppt else zero for j in range(k)]
    return ops, DualCertificate(y, CertificateForm.DUAL2, tuple(q_ops))


@dataclass(frozen=True)
class _Subspace:
    """Orthonormal bases of the complement (kept) and of the support (removed) of an operator"""

    kept: CMatrix
    removed: CMatrix

    @property
    def full(self) -> bool:
        return self.removed.shape[1] == 0


def _split(op: HermOp | None, order: int) -> _Subspace:
    if op is None:
        return _Subspace(np.eye(order, dtype=np.complex128), np.zeros((order, 0), np.complex128))
    vals, vecs = np.linalg.eigh(op.matrix)
    support = vals > SUPPORT_TOL * max(1.0, float(vals[-1]))
    return _Subspace(vecs[:, ~support], vecs[:, support])


def _others(inst: DiscriminationInstance, j: int) -> HermOp | None:
    others = [rho for i, rho in enumerate(inst.states) if i != j]
    return sum(others[1:], others[0]) if others else None


def orthogonal_subspaces(inst: DiscriminationInstance) -> list[_Subspace]:
    """For each state, the complement of the support of all other states"""
    return [_split(_others(inst, j), inst.order) for j in range(inst.k)]


def build_unambiguous(inst: DiscriminationInstance, cone: Cone | str = Cone.PPT) -> ConicProblem:
    """maximize Σ_j p_j⟨P_j, ρ_j⟩ over k + 1 outcomes, the last one inconclusive

    ⟨P_i, ρ_j⟩ = 0 for i ≠ j is imposed by writing P_i = V_i X_i V_i† where V_i spans the
    complement of the other states' supports, which keeps the problem strictly feasible.
    """
    cone = Cone(cone)
    da, db = inst.dim_a, inst.dim_b
    k = inst.k
    pt = partial_transpose_indices(da, db)
    spaces = orthogonal_subspaces(inst)
    builder = ProblemBuilder()
    completeness: list[HermitianTerm] = []
    outcome_terms: list[HermitianTerm | None] = []
    for j, space in enumerate(spaces):
        r = space.kept.shape[1]
        if r == 0:
            logger.info("Outcome %d of %s is forced to zero by orthogonality", j + 1, inst.name)
            outcome_terms.append(None)
            continue
        iso = None if space.full else space.kept
        if iso is None:
            builder.add_block(_p(j), BlockKind.PSD_COMPLEX, da, db)
            builder.add_objective(_p(j), inst.priors[j] * inst.states[j])
        else:
            builder.add_block(_p(j), BlockKind.PSD_COMPLEX, r)
            compressed = iso.conj().T @ inst.states[j].matrix @ iso
            builder.add_objective(_p(j), inst.priors[j] * HermOp.hermitian_part(compressed, r, 1))
        term = HermitianTerm(_p(j), isometry=iso)
        completeness.append(term)
        outcome_terms.append(HermitianTerm(_p(j), -1.0, pt, iso))
    builder.add_block(_p(k), BlockKind.PSD_COMPLEX, da, db)
    completeness.append(HermitianTerm(_p(k)))
    outcome_terms.append(HermitianTerm(_p(k), -1.0, pt))
    builder.add_hermitian_equality("completeness", completeness, HermOp.identity(da, db))
    if cone is Cone.PPT:
        for j, term in enumerate(outcome_terms):
            if term is None:
                continue
            builder.add_block(_z(j), BlockKind.PSD_COMPLEX, da, db)
            builder.add_hermitian_equality(
                f"ppt[{j}]", [HermitianTerm(_z(j)), term], HermOp.zeros(da, db)
            )
    builder.metadata.update(_metadata(inst, Mode.UNAMBIGUOUS, cone))
    return builder.build()


def _outcome(sol: ConicSolution, space: _Subspace, j: int, dims: tuple[int, int]) -> HermOp:
    label = _p(j)
    if space.kept.shape[1] == 0:
        return HermOp.zeros(*dims)
    if space.full:
        return sol.block_operator(label)
    x = sol.block_operator(label).matrix
    return HermOp.hermitian_part(space.kept @ x @ space.kept.conj().T, *dims)


def _offdiag_scale(
    m: HermOp, space: _Subspace, regularization: float
) -> float:
    """Smallest c with M + c·Π ⪰ −δ, Π the projector on the removed subspace

    Uses the Schur complement in the basis [kept, removed] with the kept block lifted to δ.
    """
    v, u = space.kept, space.removed
    c_block = u.conj().T @ m.matrix @ u
    if v.shape[1] == 0:
        need = -c_block
    else:
        a = v.conj().T @ m.matrix @ v
        b = v.conj().T @ m.matrix @ u
        vals, vecs = np.linalg.eigh((a + a.conj().T) / 2)
        vals = np.maximum(vals, regularization)
        w = vecs.conj().T @ b
        need = (w.conj().T / vals) @ w - c_block
    need = (need + need.conj().T) / 2
    return max(0.0, float(np.linalg.eigvalsh(need)[-1]) + regularization)


def _min_positive_eigenvalue(rho: HermOp) -> float:
    vals = np.linalg.eigvalsh(rho.matrix)
    return float(vals[vals > SUPPORT_TOL * max(1.0, float(vals[-1]))].min())


def extract_unambiguous(
    inst: DiscriminationInstance, sol: ConicSolution
) -> tuple[list[HermOp], DualCertificate]:
    """Outcomes P_1..P_{k+1} and a dual certificate with off-diagonal multipliers

    The solve never sees the orthogonality rows, so their multipliers y_ij are reconstructed:
    the coefficient of ρ_i in condition j is chosen just large enough, through a Schur
    complement, for the condition to be positive semidefinite.
    """
    k = inst.k
    dims = (inst.dim_a, inst.dim_b)
    ppt = sol.problem.metadata["cone"] == Cone.PPT
    spaces = orthogonal_subspaces(inst)
    ops = [_outcome(sol, space, j, dims) for j, space in enumerate(spaces)]
    ops.append(sol.block_operator(_p(k)))
    y = sol.multiplier_operator("completeness")
    labels = {b.label for b in sol.problem.blocks}
    zero = HermOp.zeros(*dims)
    q = [sol.slack_operator(_z(j)) if ppt and _z(j) in labels else zero for j in range(k + 1)]
    offdiag = np.zeros((k, k))
    lambda_min = [_min_positive_eigenvalue(rho) for rho in inst.states]
    for j, space in enumerate(spaces):
        if k == 1:
            break
        m = y - inst.priors[j] * inst.states[j] - partial_transpose(q[j])
        scale = _offdiag_scale(m, space, 1e-10 * (1.0 + max_norm(m.matrix)))
        for i in range(k):
            if i != j:
                offdiag[i, j] = scale / lambda_min[i]
    cert = DualCertificate(
        y * k, CertificateForm.DUAL5, tuple(op * k for op in q), offdiag * k
    )
    return ops, cert


def build_eq3_bound(inst: DiscriminationInstance) -> ConicProblem:
    """Upper bound min (1/k)·Tr(Y) s.t. Y ⪰ w_j·T_A(ρ_j), given to the solver through its dual

    The primal is maximize Σ_j ⟨W_j, w_j·T_A(ρ_j)⟩ s.t. Σ_j W_j = (1/k)·1, W_j ⪰ 0; the
    multiplier of the completeness rows is Y.
    """
    da, db = inst.dim_a, inst.dim_b
    builder = ProblemBuilder()
    for j, (rho, w) in enumerate(zip(inst.states, inst.weights)):
        label = f"W[{j}]"
        builder.add_block(label, BlockKind.PSD_COMPLEX, da, db)
        builder.add_objective(label, w * partial_transpose(rho))
    builder.add_hermitian_equality(
        "completeness",
        [HermitianTerm(f"W[{j}]") for j in range(inst.k)],
        HermOp.identity(da, db) / inst.k,
    )
    builder.metadata.update(_metadata(inst, Mode.MIN_ERROR, Cone.PPT, bound="eq3"))
    return builder.build()


def extract_eq3(inst: DiscriminationInstance, sol: ConicSolution) -> DualCertificate:
    return DualCertificate(sol.multiplier_operator("completeness"), CertificateForm.DUAL3)

