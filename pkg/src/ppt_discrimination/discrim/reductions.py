"""Symmetry reductions of the discrimination problems

Lattice states (tensor products of Bell states) are invariant under local Pauli twirls, so an
optimal PPT measurement can be taken diagonal in the lattice basis and the problem becomes a
linear program in its coefficients. Generalized Bell states get the same treatment in the
generalized Bell basis, except that T_A of a basis operator is not diagonal there, so the PPT
constraints stay small LMIs.
"""

import logging
from functools import cache

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from ppt_discrimination.conic import BlockKind, ConicProblem, ConicSolution, ProblemBuilder
from ppt_discrimination.discrim.exceptions import NonLatticeStateError, NonWeylStateError
from ppt_discrimination.discrim.models import BuildPath, CertificateForm, DualCertificate
from ppt_discrimination.hermlin import HermOp, partial_transpose
from ppt_discrimination.states import (
    DiscriminationInstance,
    gbell_operator,
    generalized_bell_basis,
    lattice_operator,
    lattice_position,
    transpose_sign_matrix,
)
from ppt_discrimination.types import Cone, Mode

__all__ = [
    "extract_lattice",
    "extract_lattice_eq3",
    "extract_weyl",
    "extract_weyl_eq3",
    "lattice_eq3",
    "lattice_eq3_certificate",
    "lattice_eq3_closed_form",
    "lattice_reduce",
    "weyl_eq3",
    "weyl_reduce",
]

logger = logging.getLogger("discrim")

Positions = npt.NDArray[np.intp]


def _c(j: int) -> str:
    return f"c[{j}]"


def _z(j: int) -> str:
    return f"z[{j}]"


def _lattice_data(inst: DiscriminationInstance) -> tuple[int, list[int]]:
    labels = inst.lattice_labels
    if labels is None:
        raise NonLatticeStateError(
            f"Instance {inst.name} has a state that is not a tensor product of Bell states"
        )
    return labels[0].t, [lattice_position(v) for v in labels]


def _weyl_data(inst: DiscriminationInstance) -> tuple[int, list[int]]:
    labels = inst.gbell_labels
    if labels is None:
        raise NonWeylStateError(
            f"Instance {inst.name} has a state that is not a generalized Bell state"
        )
    d = labels[0].d
    return d, [s.a * d + s.b for s in labels]


def coefficient_families(positions: list[int], n: int, mode: Mode) -> list[Positions]:
    """Basis positions each measurement operator may use

    Unambiguous outcomes j ≤ k drop the positions of the other states, which is the same as fixing
    those coefficients to zero; the trailing inconclusive family keeps every position.
    """
    everything = np.arange(n, dtype=np.intp)
    k = len(positions)
    if mode is Mode.MIN_ERROR:
        return [everything] * k
    families = []
    for j in range(k):
        mask = np.ones(n, dtype=bool)
        mask[[p for i, p in enumerate(positions) if i != j]] = False
        families.append(np.flatnonzero(mask))
    families.append(everything)
    return families


def _selection(allowed: Positions, n: int) -> sp.csr_matrix:
    return sp.csr_matrix(
        (np.ones(allowed.size), (allowed, np.arange(allowed.size))), shape=(n, allowed.size)
    )


def _metadata(
    path: BuildPath, inst: DiscriminationInstance, mode: Mode, cone: Cone, **extra: object
) -> dict:
    return {
        "path": str(path),
        "mode": str(mode),
        "cone": str(cone),
        "instance": inst.name,
        "k": inst.k,
        **extra,
    }


def lattice_reduce(
    inst: DiscriminationInstance,
    mode: Mode | str = Mode.MIN_ERROR,
    cone: Cone | str = Cone.PPT,
) -> ConicProblem:
    """Linear program over lattice coefficients c_{j,w} ≥ 0 of P_j = Σ_w c_{j,w} ψ_w

    Rows: Σ_j c_{j,w} = 1 for every w and, for the PPT cone, S·c_j − z_j = 0 with z_j ≥ 0
    where S[u, w] is the coefficient of ψ_u in T_A(ψ_w).

    :raises NonLatticeStateError: if a state is not a lattice state.
    """
    mode, cone = Mode(mode), Cone(cone)
    t, positions = _lattice_data(inst)
    n = 4**t
    signs = transpose_sign_matrix(t)
    families = coefficient_families(positions, n, mode)
    builder = ProblemBuilder()
    for j, allowed in enumerate(families):
        builder.add_block(_c(j), BlockKind.NONNEG_DIAG, allowed.size)
        if j < inst.k:
            objective = np.zeros(allowed.size)
            objective[np.searchsorted(allowed, positions[j])] = inst.priors[j]
            builder.add_objective(_c(j), objective)
        if cone is Cone.PPT:
            builder.add_block(_z(j), BlockKind.NONNEG_DIAG, n)
    builder.add_vector_equality(
        "completeness",
        {_c(j): _selection(allowed, n) for j, allowed in enumerate(families)},
        np.ones(n),
    )
    if cone is Cone.PPT:
        for j, allowed in enumerate(families):
            builder.add_vector_equality(
                f"ppt[{j}]",
                {_c(j): sp.csr_matrix(signs[:, allowed]), _z(j): -sp.identity(n, format="csr")},
                np.zeros(n),
            )
    builder.metadata.update(_metadata(BuildPath.LATTICE, inst, mode, cone, qubit_pairs=t))
    logger.debug(
        "Lattice reduction of %s: %d families over %d coefficients", inst.name, len(families), n
    )
    # rows are independent by construction: every ppt row owns one z coordinate
    return builder.build(check_rank=False)


def _normalize(coeffs: npt.NDArray[np.float64], k: int, mode: Mode) -> npt.NDArray[np.float64]:
    """Clip to nonnegative coefficients and restore completeness exactly"""
    coeffs = np.clip(coeffs, 0.0, None)
    if mode is Mode.MIN_ERROR:
        return coeffs / coeffs.sum(axis=0)
    conclusive = coeffs[:k].sum(axis=0)
    coeffs[:k] /= np.maximum(conclusive, 1.0)
    coeffs[k] = 1.0 - coeffs[:k].sum(axis=0)
    return np.clip(coeffs, 0.0, None)


def extract_lattice(
    inst: DiscriminationInstance, sol: ConicSolution
) -> tuple[list[HermOp], DualCertificate]:
    """Measurement and certificate from a solved lattice_reduce problem"""
    mode, cone = Mode(sol.problem.metadata["mode"]), Cone(sol.problem.metadata["cone"])
    t, positions = _lattice_data(inst)
    n = 4**t
    k = inst.k
    signs = transpose_sign_matrix(t)
    families = coefficient_families(positions, n, mode)
    coeffs = np.zeros((len(families), n))
    for j, allowed in enumerate(families):
        coeffs[j, allowed] = sol.block(_c(j))
    coeffs = _normalize(coeffs, k, mode)
    ops = [lattice_operator(c, t) for c in coeffs]

    y = sol.multiplier_vector("completeness")
    q = [
        np.clip(sol.slack(_z(j)), 0.0, None) if cone is Cone.PPT else np.zeros(n)
        for j in range(len(families))
    ]
    q_ops = tuple(lattice_operator(qj, t) * k for qj in q)
    if mode is Mode.MIN_ERROR:
        return ops, DualCertificate(lattice_operator(y, t) * k, CertificateForm.DUAL2, q_ops)
    offdiag = np.zeros((k, k))
    for j in range(k):
        transposed = signs @ q[j]
        for i in range(k):
            if i != j:
                offdiag[i, j] = transposed[positions[i]] - y[positions[i]]
    return ops, DualCertificate(
        lattice_operator(y, t) * k, CertificateForm.DUAL5, q_ops, offdiag * k
    )


def lattice_eq3(inst: DiscriminationInstance) -> ConicProblem:
    """min (1/k)·Σ_u y_u s.t. y_u ≥ w_j·S[u, v_j], the transposed-state bound over lattice Y

    Posed as its dual LP: maximize Σ_j w_j⟨S[:, v_j], W_j⟩ s.t. Σ_j W_j = (1/k)·1, W_j ≥ 0.
    """
    t, positions = _lattice_data(inst)
    n = 4**t
    signs = transpose_sign_matrix(t)
    builder = ProblemBuilder()
    for j, (pos, w) in enumerate(zip(positions, inst.weights)):
        label = f"W[{j}]"
        builder.add_block(label, BlockKind.NONNEG_DIAG, n)
        builder.add_objective(label, w * signs[:, pos])
    identity = sp.identity(n, format="csr")
    builder.add_vector_equality(
        "completeness", {f"W[{j}]": identity for j in range(inst.k)}, np.full(n, 1.0 / inst.k)
    )
    builder.metadata.update(
        _metadata(BuildPath.LATTICE, inst, Mode.MIN_ERROR, Cone.PPT, bound="eq3", qubit_pairs=t)
    )
    return builder.build(check_rank=False)


def extract_lattice_eq3(inst: DiscriminationInstance, sol: ConicSolution) -> DualCertificate:
    t, _ = _lattice_data(inst)
    return DualCertificate(
        lattice_operator(sol.multiplier_vector("completeness"), t), CertificateForm.DUAL3
    )


def _eq3_coefficients(inst: DiscriminationInstance) -> tuple[int, npt.NDArray[np.float64]]:
    t, positions = _lattice_data(inst)
    signs = transpose_sign_matrix(t)
    weights = np.asarray(inst.weights)
    return t, np.max(signs[:, positions] * weights, axis=1)


def lattice_eq3_closed_form(inst: DiscriminationInstance) -> float:
    """(1/k)·Σ_u max_j w_j·S[u, v_j], the optimum of lattice_eq3"""
    _, y = _eq3_coefficients(inst)
    return float(y.sum() / inst.k)


def lattice_eq3_certificate(inst: DiscriminationInstance) -> DualCertificate:
    t, y = _eq3_coefficients(inst)
    return DualCertificate(lattice_operator(y, t), CertificateForm.DUAL3)


@cache
def _transposed_basis(d: int) -> tuple[HermOp, ...]:
    basis = generalized_bell_basis(d)
    return tuple(
        partial_transpose(HermOp.from_vector(basis[:, w], d, d)) for w in range(d * d)
    )


def _transposed_stack(d: int) -> npt.NDArray[np.complex128]:
    return np.stack([op.matrix for op in _transposed_basis(d)])


def _weyl_layout(
    inst: DiscriminationInstance, mode: Mode
) -> tuple[int, list[int], list[Positions], int, float]:
    """Local dimension, state positions, coefficient families, eliminated family and offset"""
    d, positions = _weyl_data(inst)
    families = coefficient_families(positions, d * d, mode)
    if mode is Mode.MIN_ERROR:
        return d, positions, families, inst.k - 1, inst.priors[-1]
    return d, positions, families, inst.k, 0.0


def weyl_reduce(
    inst: DiscriminationInstance,
    mode: Mode | str = Mode.MIN_ERROR,
    cone: Cone | str = Cone.PPT,
) -> ConicProblem:
    """Generalized-Bell-diagonal measurements, posed in the solver's dual form

    The coefficients c_{j,w} of every family but the eliminated one (the last state, or the
    inconclusive outcome) are the free multipliers; the eliminated family is 1 − Σ_j c_j. Slack
    blocks are T_A(P_j) ⪰ 0 of order d² and c ≥ 0 for every family. The success probability is
    offset − (solver dual value).

    :raises NonWeylStateError: if a state is not a generalized Bell state.
    """
    mode, cone = Mode(mode), Cone(cone)
    if inst.k < 2 and mode is Mode.MIN_ERROR:
        raise NonWeylStateError("The generalized Bell reduction needs at least two states.")
    d, positions, families, e, offset = _weyl_layout(inst, mode)
    n = d * d
    transposed = _transposed_basis(d)
    builder = ProblemBuilder()
    for j, allowed in enumerate(families):
        builder.add_block(_c(j), BlockKind.NONNEG_DIAG, allowed.size)
        if cone is Cone.PPT:
            builder.add_block(_z(j), BlockKind.PSD_COMPLEX, d, d)
    builder.add_objective(_c(e), -np.ones(n))
    if cone is Cone.PPT:
        builder.add_objective(_z(e), -HermOp.identity(d, d))
    for j, allowed in enumerate(families):
        if j == e:
            continue
        for idx, w in enumerate(allowed):
            unit = np.zeros(allowed.size)
            unit[idx] = 1.0
            back = np.zeros(n)
            back[w] = -1.0
            coeffs: dict[str, HermOp | npt.NDArray[np.float64]] = {_c(j): unit, _c(e): back}
            if cone is Cone.PPT:
                coeffs[_z(j)] = transposed[w]
                coeffs[_z(e)] = -transposed[w]
            gain = inst.priors[j] if w == positions[j] else 0.0
            if mode is Mode.MIN_ERROR and w == positions[e]:
                gain -= offset
            builder.add_scalar_row("coefficients", coeffs, -gain)
    builder.metadata.update(
        _metadata(BuildPath.WEYL, inst, mode, cone, local_dimension=d, offset=offset)
    )
    return builder.build(check_rank=False)


def extract_weyl(
    inst: DiscriminationInstance, sol: ConicSolution
) -> tuple[list[HermOp], DualCertificate]:
    """Measurement and certificate from a solved weyl_reduce problem

    With X_j the primal blocks of the reduced problem and t_{j,w} = ⟨T_A(ψ_w), X_j⟩, the
    certificate is Y = k·Σ_w (t_{e,w} + x_{e,w} + offset·[w = v_e]) ψ_w and
    Q_j = k·T_A(Σ_w t_{j,w} ψ_w), positive since it is X_j twirled by {U⊗U : U Weyl}.
    """
    mode, cone = Mode(sol.problem.metadata["mode"]), Cone(sol.problem.metadata["cone"])
    d, positions, families, e, offset = _weyl_layout(inst, mode)
    n = d * d
    k = inst.k
    variables = sol.multiplier_vector("coefficients")
    coeffs = np.zeros((len(families), n))
    start = 0
    for j, allowed in enumerate(families):
        if j == e:
            continue
        coeffs[j, allowed] = variables[start : start + allowed.size]
        start += allowed.size
    coeffs = np.clip(coeffs, 0.0, None)
    others = [j for j in range(len(families)) if j != e]
    total = coeffs[others].sum(axis=0)
    coeffs[others] /= np.maximum(total, 1.0)
    coeffs[e] = np.clip(1.0 - coeffs[others].sum(axis=0), 0.0, None)
    ops = [gbell_operator(c, d) for c in coeffs]

    overlaps = np.zeros((len(families), n))
    if cone is Cone.PPT:
        stack = _transposed_stack(d)
        for j in range(len(families)):
            overlaps[j] = np.einsum("wab,ba->w", stack, sol.block(_z(j))).real
    y = overlaps[e] + np.asarray(sol.block(_c(e)))
    if mode is Mode.MIN_ERROR:
        y[positions[e]] += offset
    q_ops = tuple(
        partial_transpose(gbell_operator(overlaps[j], d)) * k for j in range(len(families))
    )
    y_op = gbell_operator(y, d) * k
    if mode is Mode.MIN_ERROR:
        return ops, DualCertificate(y_op, CertificateForm.DUAL2, q_ops)
    offdiag = np.zeros((k, k))
    for j in range(k):
        for i in range(k):
            if i != j:
                offdiag[i, j] = overlaps[j, positions[i]] - y[positions[i]]
    return ops, DualCertificate(y_op, CertificateForm.DUAL5, q_ops, offdiag * k)


def weyl_eq3(inst: DiscriminationInstance) -> ConicProblem:
    """Transposed-state bound with Y = T_A(Σ_w y_w ψ_w), posed in the solver's dual form

    Twirling Y over {V⊗V : V Weyl} keeps Y ⪰ w_j·T_A(ρ_j) and its trace, and the operators
    commuting with that group are exactly the partial transposes of generalized-Bell-diagonal
    operators, so the restriction is exact.
    """
    d, _ = _weyl_data(inst)
    transposed = _transposed_basis(d)
    builder = ProblemBuilder()
    labels = [f"W[{j}]" for j in range(inst.k)]
    for label, rho, w in zip(labels, inst.states, inst.weights):
        builder.add_block(label, BlockKind.PSD_COMPLEX, d, d)
        builder.add_objective(label, w * partial_transpose(rho))
    for op in transposed:
        builder.add_scalar_row("coefficients", {label: op for label in labels}, 1.0 / inst.k)
    builder.metadata.update(
        _metadata(BuildPath.WEYL, inst, Mode.MIN_ERROR, Cone.PPT, bound="eq3", local_dimension=d)
    )
    return builder.build(check_rank=False)


def extract_weyl_eq3(inst: DiscriminationInstance, sol: ConicSolution) -> DualCertificate:
    d, _ = _weyl_data(inst)
    y = gbell_operator(sol.multiplier_vector("coefficients"), d)
    return DualCertificate(partial_transpose(y), CertificateForm.DUAL3)
