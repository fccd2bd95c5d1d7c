import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Generic, TypeVar

import numpy as np

from ppt_discrimination.constants import COMPLETENESS_TOL, PSD_TOL
from ppt_discrimination.discrim.exceptions import (
    MalformedCertificateError,
    MeasurementSizeError,
)
from ppt_discrimination.discrim.models import (
    CertificateCheck,
    CertificateForm,
    DualCertificate,
    Measurement,
    MeasurementCheck,
)
from ppt_discrimination.hermlin import (
    DimensionMismatchError,
    HermOp,
    eigvals_hermitian,
    hs_inner,
    max_norm,
    min_eigenvalue,
    partial_transpose,
)
from ppt_discrimination.states import DiscriminationInstance, is_maximally_entangled
from ppt_discrimination.types import Mode

__all__ = [
    "Condition",
    "certificate_conditions",
    "psd_part",
    "repair_certificate",
    "theorem1_bound",
    "theorem1_certificate",
    "verify_certificate",
    "verify_measurement",
]

logger = logging.getLogger("discrim")

C = TypeVar("C")


@dataclass(frozen=True)
class Condition(Generic[C]):
    """Σ coeff·op (op partially transposed when flagged) that must be positive semidefinite"""

    name: str
    terms: tuple[tuple[C, HermOp, bool], ...]
    contains_y: bool = True


def _check_shape(cert: DualCertificate, inst: DiscriminationInstance) -> None:
    k = inst.k
    if cert.y.dim_a != inst.dim_a or cert.y.dim_b != inst.dim_b:
        raise MalformedCertificateError(
            f"Y acts on {cert.y.dim_a}x{cert.y.dim_b}, the instance on {inst.dim_a}x{inst.dim_b}"
        )
    expected = {
        CertificateForm.DUAL3: None,
        CertificateForm.DUAL2: k,
        CertificateForm.DUAL5: k + 1,
    }[cert.form]
    got = None if cert.q_ops is None else len(cert.q_ops)
    if got != expected:
        raise MalformedCertificateError(
            f"A {cert.form} certificate for {k} states needs {expected} Q operators, got {got}"
        )
    for q in cert.q_ops or ():
        if not q.same_space(cert.y):
            raise MalformedCertificateError("Q operators must live on the space of Y.")
    if cert.form is CertificateForm.DUAL5:
        if cert.y_offdiag is None or cert.y_offdiag.shape != (k, k):
            raise MalformedCertificateError(
                f"An unambiguous certificate needs a {k}x{k} table of off-diagonal multipliers"
            )
        if not np.all(np.isfinite(cert.y_offdiag)):
            raise MalformedCertificateError("Off-diagonal multipliers must be finite.")
    elif cert.y_offdiag is not None:
        raise MalformedCertificateError(
            f"A {cert.form} certificate has no off-diagonal multipliers"
        )


def certificate_conditions(
    cert: DualCertificate,
    inst: DiscriminationInstance,
    weights: Sequence[C] | None = None,
    offdiag: Sequence[Sequence[C]] | None = None,
    one: C | None = None,
) -> list[Condition]:
    """Matrices that must be positive semidefinite for cert to be a feasible dual point

    Coefficients default to floats; the exact backend passes rationals for ``weights``,
    ``offdiag`` and ``one``.

    :raises MalformedCertificateError: if the certificate does not fit the instance.
    """
    _check_shape(cert, inst)
    k = inst.k
    w = list(inst.weights) if weights is None else list(weights)
    unit = 1.0 if one is None else one
    y = cert.y
    match cert.form:
        case CertificateForm.DUAL3:
            return [
                Condition(f"Y - w_{j + 1} T_A(rho_{j + 1})", ((unit, y, False), (-w[j], rho, True)))
                for j, rho in enumerate(inst.states)
            ]
        case CertificateForm.DUAL2:
            assert cert.q_ops is not None
            out: list[Condition] = [
                Condition(f"Q_{j + 1}", ((unit, q, False),), contains_y=False)
                for j, q in enumerate(cert.q_ops)
            ]
            out.extend(
                Condition(
                    f"Y - w_{j + 1} rho_{j + 1} - T_A(Q_{j + 1})",
                    ((unit, y, False), (-w[j], inst.states[j], False), (-unit, q, True)),
                )
                for j, q in enumerate(cert.q_ops)
            )
            return out
        case CertificateForm.DUAL5:
            assert cert.q_ops is not None and cert.y_offdiag is not None
            table = cert.y_offdiag.tolist() if offdiag is None else offdiag
            out = [
                Condition(f"Q_{j + 1}", ((unit, q, False),), contains_y=False)
                for j, q in enumerate(cert.q_ops)
            ]
            for j in range(k):
                terms = [(unit, y, False), (-w[j], inst.states[j], False)]
                terms.extend(
                    (table[i][j], inst.states[i], False) for i in range(k) if i != j
                )
                terms.append((-unit, cert.q_ops[j], True))
                out.append(
                    Condition(
                        f"Y - w_{j + 1} rho_{j + 1} + Σ y_ij rho_i - T_A(Q_{j + 1})", tuple(terms)
                    )
                )
            out.append(
                Condition(f"Y - T_A(Q_{k + 1})", ((unit, y, False), (-unit, cert.q_ops[k], True)))
            )
            return out
    raise MalformedCertificateError(f"Unknown certificate form {cert.form!r}")  # pragma: no cover


def evaluate_condition(cond: Condition) -> HermOp:
    total = None
    for coeff, op, transposed in cond.terms:
        term = float(coeff) * (partial_transpose(op) if transposed else op)
        total = term if total is None else total + term
    assert total is not None
    return total


def verify_certificate(
    cert: DualCertificate,
    inst: DiscriminationInstance,
    exact: bool = False,
    tol: float = PSD_TOL,
) -> CertificateCheck:
    """Check dual feasibility of cert and report its bound (1/k)·Tr(Y)

    The floating backend accepts a matrix whose minimum eigenvalue is at least
    -tol·max(1, max-norm). The exact backend lifts every entry to a dyadic rational and decides
    positive semidefiniteness by exact LDLᵀ elimination.

    :raises MalformedCertificateError: if the certificate does not fit the instance.
    :raises NotDyadicError: for the exact backend when data is not small dyadic.
    """
    if exact:
        from ppt_discrimination.discrim.exact import verify_certificate_exact

        return verify_certificate_exact(cert, inst)
    eigs = []
    failures = []
    for cond in certificate_conditions(cert, inst):
        m = evaluate_condition(cond)
        lam = min_eigenvalue(m)
        eigs.append(lam)
        if lam < -tol * max(1.0, max_norm(m.matrix)):
            failures.append(f"{cond.name}: minimum eigenvalue {lam:.3e}")
    bound = cert.y.trace / inst.k
    if failures:
        logger.debug("Certificate rejected: %s", "; ".join(failures))
    return CertificateCheck(not failures, bound, "float", tuple(eigs), tuple(failures))


def verify_measurement(
    m: Measurement,
    inst: DiscriminationInstance,
    mode: Mode | str | None = None,
    tol: float = PSD_TOL,
    completeness_tol: float = COMPLETENESS_TOL,
) -> MeasurementCheck:
    """Check a measurement against the instance and compute its success probability

    :raises MeasurementSizeError: if the operator count does not match k (or k + 1 when
        unambiguous).
    :raises DimensionMismatchError: if an operator lives on another space.
    """
    k = inst.k
    if mode is None:
        mode = Mode.UNAMBIGUOUS if m.count == k + 1 else Mode.MIN_ERROR
    mode = Mode(mode)
    expected = k + 1 if mode is Mode.UNAMBIGUOUS else k
    if m.count != expected:
        raise MeasurementSizeError(
            f"A {mode} measurement for {k} states needs {expected} operators"
        )
    ident = HermOp.identity(inst.dim_a, inst.dim_b)
    failures = []
    for a, p in enumerate(m.operators):
        if not p.same_space(ident):
            raise DimensionMismatchError(f"Measurement operator {a + 1} acts on another space.")
        if (lam := min_eigenvalue(p)) < -tol * max(1.0, max_norm(p.matrix)):
            failures.append(f"P_{a + 1} has eigenvalue {lam:.3e}")
        if m.ppt_flag:
            pt = partial_transpose(p)
            if (lam := min_eigenvalue(pt)) < -tol * max(1.0, max_norm(pt.matrix)):
                failures.append(f"T_A(P_{a + 1}) has eigenvalue {lam:.3e}")
    total = sum(m.operators[1:], m.operators[0])
    if (dev := max_norm(total.matrix - ident.matrix)) > completeness_tol:
        failures.append(f"operators sum to identity only within {dev:.3e}")
    if mode is Mode.UNAMBIGUOUS:
        for i in range(k):
            for j in range(k):
                if i != j and (v := hs_inner(m.operators[i], inst.states[j])) > tol:
                    failures.append(f"<P_{i + 1}, rho_{j + 1}> = {v:.3e}")
    per_state = tuple(hs_inner(m.operators[j], inst.states[j]) for j in range(k))
    success = float(sum(p * v for p, v in zip(inst.priors, per_state)))
    return MeasurementCheck(not failures, success, per_state, tuple(failures))


def _pure_vector(rho: HermOp) -> np.ndarray | None:
    vals, vecs = np.linalg.eigh(rho.matrix)
    if abs(vals[-1] - 1.0) > PSD_TOL:
        return None
    return vecs[:, -1]


def theorem1_bound(inst: DiscriminationInstance) -> float | None:
    """d·max_j p_j for maximally entangled pure states on C^d ⊗ C^d, otherwise None"""
    if inst.dim_a != inst.dim_b:
        return None
    for rho in inst.states:
        u = _pure_vector(rho)
        if u is None or not is_maximally_entangled(u, inst.dim_a, inst.dim_b):
            return None
    return inst.dim_a * max(inst.priors)


def theorem1_certificate(inst: DiscriminationInstance) -> DualCertificate | None:
    """Y = (max_j w_j / d)·1, valid since T_A of a maximally entangled state is at most 1/d"""
    if theorem1_bound(inst) is None:
        return None
    y = HermOp.identity(inst.dim_a, inst.dim_b) * (max(inst.weights) / inst.dim_a)
    return DualCertificate(y, CertificateForm.DUAL3)


def psd_part(op: HermOp) -> HermOp:
    """Projection of op onto the positive semidefinite cone"""
    vals, vecs = np.linalg.eigh(op.matrix)
    if vals[0] >= 0:
        return op
    vals = np.clip(vals, 0.0, None)
    return HermOp.hermitian_part((vecs * vals) @ vecs.conj().T, op.dim_a, op.dim_b)


def repair_certificate(cert: DualCertificate, inst: DiscriminationInstance) -> DualCertificate:
    """Make a numerically extracted certificate feasible

    Q operators are projected onto the PSD cone, then Y is shifted by the identity until every
    condition containing Y is positive semidefinite. The bound grows by shift·n/k.
    """
    if cert.q_ops is not None:
        cert = DualCertificate(
            cert.y, cert.form, tuple(psd_part(q) for q in cert.q_ops), cert.y_offdiag, cert.shift
        )
    worst = 0.0
    for cond in certificate_conditions(cert, inst):
        if cond.contains_y:
            worst = min(worst, float(eigvals_hermitian(evaluate_condition(cond))[0]))
    if worst < 0:
        logger.debug("Shifting certificate by %.3e to restore feasibility", -worst)
        return cert.shifted(-worst)
    return cert
