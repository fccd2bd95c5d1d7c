import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ppt_discrimination.conic import ConicProblem, ConicSolution, SolveOptions, SolverError, solve
from ppt_discrimination.constants import CHAIN_TOL, EXTRACTION_TOL
from ppt_discrimination.discrim.builders import (
    build_eq3_bound,
    build_min_error,
    build_unambiguous,
    extract_eq3,
    extract_min_error,
    extract_unambiguous,
)
from ppt_discrimination.discrim.certificates import (
    psd_part,
    repair_certificate,
    theorem1_bound,
    verify_certificate,
    verify_measurement,
)
from ppt_discrimination.discrim.exceptions import DualityChainError, VerificationError
from ppt_discrimination.discrim.models import (
    BuildPath,
    CertificateCheck,
    DualCertificate,
    Measurement,
    MeasurementCheck,
    SolveReport,
)
from ppt_discrimination.discrim.reductions import (
    extract_lattice,
    extract_lattice_eq3,
    extract_weyl,
    extract_weyl_eq3,
    lattice_eq3,
    lattice_eq3_closed_form,
    lattice_reduce,
    weyl_eq3,
    weyl_reduce,
)
from ppt_discrimination.hermlin import HermOp, min_eigenvalue, partial_transpose
from ppt_discrimination.states import DiscriminationInstance
from ppt_discrimination.types import Cone, Mode

__all__ = [
    "BoundReport",
    "eq3_bound",
    "polish_measurement",
    "select_path",
    "solve_instance",
]

logger = logging.getLogger("discrim")

Extractor = Callable[[DiscriminationInstance, ConicSolution], tuple[list[HermOp], DualCertificate]]


@dataclass(frozen=True)
class BoundReport:
    """The transposed-state bound β′ with its certificate, and the analytic d/k bound if any"""

    bound: float
    certificate: DualCertificate
    path: BuildPath
    theorem1_bound: float | None
    diagnostics: dict


def select_path(
    inst: DiscriminationInstance, mode: Mode, cone: Cone, force_sdp: bool = False
) -> BuildPath:
    """Pick the cheapest exact formulation for inst

    Lattice states go to the linear program, generalized Bell states to the Weyl-diagonal
    reduction; everything else, and every forced request, uses the full semidefinite program.
    """
    if force_sdp or cone is not Cone.PPT:
        return BuildPath.SDP
    if inst.lattice_labels is not None:
        return BuildPath.LATTICE
    if inst.gbell_labels is not None and (inst.k >= 2 or mode is Mode.UNAMBIGUOUS):
        return BuildPath.WEYL
    return BuildPath.SDP


def _build(
    inst: DiscriminationInstance, mode: Mode, cone: Cone, path: BuildPath
) -> tuple[ConicProblem, Extractor]:
    match path:
        case BuildPath.LATTICE:
            return lattice_reduce(inst, mode, cone), extract_lattice
        case BuildPath.WEYL:
            return weyl_reduce(inst, mode, cone), extract_weyl
    if mode is Mode.UNAMBIGUOUS:
        return build_unambiguous(inst, cone), extract_unambiguous
    return build_min_error(inst, cone), extract_min_error


def _run(problem: ConicProblem, opts: SolveOptions | None) -> ConicSolution:
    sol = solve(problem, opts)
    if not sol.is_solved:
        raise SolverError(
            f"Solver finished with status {sol.status} after {sol.iterations} iterations",
            sol,
            problem.describe(),
        )
    return sol


def _inverse_sqrt(m: HermOp) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m.matrix)
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def _worst(op: HermOp, ppt: bool) -> float:
    lam = min_eigenvalue(op)
    if ppt:
        lam = min(lam, min_eigenvalue(partial_transpose(op)))
    return min(lam, 0.0)


def _polish_min_error(ops: list[HermOp], inst: DiscriminationInstance, ppt: bool) -> Measurement:
    ident = HermOp.identity(inst.dim_a, inst.dim_b)
    k = inst.k
    total = sum(ops[1:], ops[0])
    root = _inverse_sqrt(total)
    ops = [HermOp.hermitian_part(root @ p.matrix @ root, p.dim_a, p.dim_b) for p in ops]
    worst = min(_worst(p, ppt) for p in ops)
    lam = -worst / (1.0 / k - worst)
    if lam > 0:
        logger.debug("Mixing measurement with the uniform one, weight %.3e", lam)
        ops = [(1.0 - lam) * p + (lam / k) * ident for p in ops]
    return Measurement(tuple(ops), ppt_flag=ppt)


def _polish_unambiguous(
    ops: list[HermOp], inst: DiscriminationInstance, ppt: bool
) -> Measurement:
    ident = HermOp.identity(inst.dim_a, inst.dim_b)
    conclusive = [psd_part(p) for p in ops[: inst.k]]
    inconclusive = ident - sum(conclusive[1:], conclusive[0])
    worst = _worst(inconclusive, ppt)
    lam = -worst / (1.0 - worst)
    if lam > 0:
        logger.debug("Mixing measurement with the inconclusive one, weight %.3e", lam)
        conclusive = [(1.0 - lam) * p for p in conclusive]
        inconclusive = (1.0 - lam) * inconclusive + lam * ident
    return Measurement((*conclusive, inconclusive), ppt_flag=ppt)


def _require_valid(
    inst: DiscriminationInstance, checks: dict[str, MeasurementCheck | CertificateCheck]
) -> None:
    failures = {label: list(c.failures) for label, c in checks.items() if not c.valid}
    if not failures:
        return
    for label, reasons in failures.items():
        logger.warning("Extracted %s failed verification: %s", label, "; ".join(reasons))
    raise VerificationError(
        f"The {' and '.join(failures)} computed for {inst.name} failed verification: "
        + "; ".join(r for reasons in failures.values() for r in reasons),
        failures,
    )


def polish_measurement(
    ops: list[HermOp], inst: DiscriminationInstance, mode: Mode, ppt: bool
) -> Measurement:
    """Turn ε-feasible solver operators into a measurement

    Minimum-error operators are renormalized by (ΣP)^{-1/2} and mixed with the uniform measurement
    1/k just enough to be positive (and PPT). Unambiguous operators keep their conclusive parts,
    the inconclusive outcome becomes 1 − Σ_j P_j and the whole is mixed with the measurement that
    always answers inconclusive.

    Every polished operator, conclusive ones included, is checked again at EXTRACTION_TOL.

    :raises VerificationError: if the polished measurement is not a valid (PPT) measurement.
    """
    if mode is Mode.MIN_ERROR:
        measurement = _polish_min_error(ops, inst, ppt)
    else:
        measurement = _polish_unambiguous(ops, inst, ppt)
    check = verify_measurement(measurement, inst, mode, tol=EXTRACTION_TOL)
    _require_valid(inst, {"measurement": check})
    return measurement


def _eq3_problem(
    inst: DiscriminationInstance, path: BuildPath
) -> tuple[ConicProblem, Callable[[DiscriminationInstance, ConicSolution], DualCertificate]]:
    match path:
        case BuildPath.LATTICE:
            return lattice_eq3(inst), extract_lattice_eq3
        case BuildPath.WEYL:
            return weyl_eq3(inst), extract_weyl_eq3
    return build_eq3_bound(inst), extract_eq3


def eq3_bound(
    inst: DiscriminationInstance, opts: SolveOptions | None = None, force_sdp: bool = False
) -> BoundReport:
    """The transposed-state upper bound β′ = min (1/k)Tr(Y) s.t. Y ⪰ w_j·T_A(ρ_j)

    :raises SolverError: if the bound program does not solve to optimality.
    :raises VerificationError: if the repaired certificate fails its check.
    """
    path = select_path(inst, Mode.MIN_ERROR, Cone.PPT, force_sdp)
    problem, extract = _eq3_problem(inst, path)
    sol = _run(problem, opts)
    cert = repair_certificate(extract(inst, sol), inst)
    check = verify_certificate(cert, inst)
    diagnostics = {"solver": sol.summary(), "problem": problem.describe(), "shift": cert.shift}
    if path is BuildPath.LATTICE:
        diagnostics["closed_form"] = lattice_eq3_closed_form(inst)
    _require_valid(inst, {"bound certificate": check})
    return BoundReport(float(check.bound), cert, path, theorem1_bound(inst), diagnostics)


def solve_instance(
    inst: DiscriminationInstance,
    mode: Mode | str = Mode.MIN_ERROR,
    cone: Cone | str = Cone.PPT,
    force_sdp: bool = False,
    opts: SolveOptions | None = None,
    compute_eq3: bool = True,
) -> SolveReport:
    """Solve a discrimination problem and certify the result from both sides

    The reported primal value is the success probability of the verified measurement and the dual
    value the bound of the verified, repaired certificate. For minimum-error PPT problems the
    transposed-state bound is added and α ≤ β ≤ β′ is enforced.

    :raises SolverError: on a non-optimal solve, annotated with the build metadata.
    :raises VerificationError: if the measurement or the certificate fails its independent check.
    :raises DualityChainError: if the verified values violate α ≤ β ≤ β′.
    """
    mode, cone = Mode(mode), Cone(cone)
    path = select_path(inst, mode, cone, force_sdp)
    problem, extract = _build(inst, mode, cone, path)
    logger.info(
        "Solving %s for %s (%s, %s) with %d rows", path, inst.name, mode, cone, problem.m
    )
    sol = _run(problem, opts)
    ops, raw_cert = extract(inst, sol)
    ppt = cone is Cone.PPT
    measurement = polish_measurement(ops, inst, mode, ppt)
    cert = repair_certificate(raw_cert, inst)
    m_check = verify_measurement(measurement, inst, mode, tol=EXTRACTION_TOL)
    c_check = verify_certificate(cert, inst)
    diagnostics: dict = {
        "solver": sol.summary(),
        "problem": problem.describe(),
        "certificate_shift": cert.shift,
    }
    _require_valid(inst, {"measurement": m_check, "certificate": c_check})
    alpha = m_check.success_prob
    beta = float(c_check.bound)
    report = SolveReport(
        instance=inst.summary(),
        mode=mode,
        cone=cone,
        path=path,
        primal_value=alpha,
        dual_value=beta,
        measurement=measurement,
        certificate=cert,
        per_state=m_check.per_state,
        theorem1_bound=theorem1_bound(inst),
        diagnostics=diagnostics,
    )
    if mode is Mode.MIN_ERROR and ppt and compute_eq3:
        bound = eq3_bound(inst, opts, force_sdp)
        report.eq3_bound = bound.bound
        report.eq3_certificate = bound.certificate
        diagnostics["eq3"] = bound.diagnostics
    _check_chain(report)
    logger.info("%s: alpha=%.10f beta=%.10f", inst.name, alpha, beta)
    return report


def _check_chain(report: SolveReport) -> None:
    values = {"alpha": report.primal_value, "beta": report.dual_value}
    if report.eq3_bound is not None:
        values["eq3_bound"] = report.eq3_bound
    chain = list(values.items())
    for (low_name, low), (high_name, high) in zip(chain, chain[1:]):
        if low > high + CHAIN_TOL:
            raise DualityChainError(
                f"Weak duality violated for {report.instance['name']}: "
                f"{low_name}={low!r} > {high_name}={high!r}",
                values,
            )
