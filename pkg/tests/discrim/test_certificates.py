import numpy as np
import pytest

from ppt_discrimination.discrim import (
    CertificateForm,
    DualCertificate,
    MalformedCertificateError,
    Measurement,
    MeasurementSizeError,
    repair_certificate,
    theorem1_bound,
    theorem1_certificate,
    verify_certificate,
    verify_measurement,
)
from ppt_discrimination.discrim.certificates import certificate_conditions, psd_part
from ppt_discrimination.discrim.fixtures import thm3_certificate
from ppt_discrimination.hermlin import DimensionMismatchError, HermOp, is_psd
from ppt_discrimination.states import bell_density, make_instance
from tests.utils import random_hermitian, rotated_maximally_entangled


def test_theorem1_bound(bell_basis, yde4):
    assert theorem1_bound(bell_basis) == 0.5
    assert theorem1_bound(yde4) == 1.0
    skewed = make_instance([bell_density(i) for i in range(4)], priors=[0.4, 0.3, 0.2, 0.1])
    assert theorem1_bound(skewed) == pytest.approx(0.8)


def test_theorem1_bound_needs_maximally_entangled_states():
    product = HermOp.from_vector(np.array([0, 1, 0, 0]), 2, 2)
    inst = make_instance([bell_density(0), product])
    assert theorem1_bound(inst) is None
    assert theorem1_certificate(inst) is None

    mixed = make_instance([(bell_density(0) + bell_density(1)) * 0.5, bell_density(2)])
    assert theorem1_bound(mixed) is None


def test_theorem1_certificate_exact(bell_basis):
    cert = theorem1_certificate(bell_basis)
    assert cert is not None
    assert cert.form is CertificateForm.DUAL3
    check = verify_certificate(cert, bell_basis, exact=True)
    assert check.valid
    assert check.bound == 0.5
    assert check.backend == "exact"


@pytest.mark.parametrize(
    "d,pairs,priors",
    [
        (2, [(0, 0), (1, 1), (0, 1)], [0.5, 0.25, 0.25]),
        (2, [(0, 0), (1, 0)], None),
        (3, [(0, 0), (1, 2), (2, 1)], [0.2, 0.3, 0.5]),
        (3, [(0, 1), (1, 1), (2, 2), (0, 2)], None),
        (3, [(a, b) for a in range(3) for b in range(3)], None),
    ],
)
def test_theorem1_certificate_after_local_rotation(rng, d, pairs, priors):
    inst = rotated_maximally_entangled(rng, d, pairs, priors)
    bound = theorem1_bound(inst)
    assert bound == pytest.approx(d * max(inst.priors))
    check = verify_certificate(theorem1_certificate(inst), inst)
    assert check.valid, check.failures
    assert check.bound == pytest.approx(bound, abs=1e-12)


def test_float_check_reports_eigenvalues(yde4):
    check = verify_certificate(thm3_certificate(), yde4)
    assert check.valid
    assert check.backend == "float"
    assert check.bound == pytest.approx(7 / 8, abs=1e-15)
    assert len(check.min_eigenvalues) == 4
    assert min(check.min_eigenvalues) == pytest.approx(0.0, abs=1e-12)


def test_invalid_certificate_names_failing_condition(yde4):
    cert = thm3_certificate().shifted(-0.1)
    check = verify_certificate(cert, yde4)
    assert not check.valid
    assert len(check.failures) == 4
    assert check.failures[0].startswith("Y - w_1 T_A(rho_1)")


def test_repair_certificate_restores_feasibility(yde4):
    broken = thm3_certificate().shifted(-0.1)
    repaired = repair_certificate(broken, yde4)
    assert repaired.shift == pytest.approx(0.0, abs=1e-12)
    check = verify_certificate(repaired, yde4)
    assert check.valid
    assert check.bound == pytest.approx(7 / 8, abs=1e-12)


def test_repair_keeps_feasible_certificate(yde4):
    repaired = repair_certificate(thm3_certificate(), yde4)
    assert repaired.shift <= 1e-12


def test_repair_projects_q_operators(bell_basis, rng):
    ident = HermOp.identity(2, 2)
    q = tuple(random_hermitian(rng, 2, 2) for _ in range(4))
    cert = DualCertificate(ident * 4.0, CertificateForm.DUAL2, q)
    repaired = repair_certificate(cert, bell_basis)
    assert all(is_psd(op) for op in repaired.q_ops)
    assert verify_certificate(repaired, bell_basis).valid


def test_malformed_certificates(bell_basis):
    ident = HermOp.identity(2, 2)
    with pytest.raises(MalformedCertificateError, match="needs 4 Q operators, got None"):
        verify_certificate(DualCertificate(ident, CertificateForm.DUAL2), bell_basis)
    with pytest.raises(MalformedCertificateError, match="the instance on 2x2"):
        verify_certificate(
            DualCertificate(HermOp.identity(2, 1), CertificateForm.DUAL3), bell_basis
        )
    with pytest.raises(MalformedCertificateError, match="off-diagonal multipliers"):
        verify_certificate(
            DualCertificate(ident, CertificateForm.DUAL5, (ident,) * 5), bell_basis
        )
    with pytest.raises(MalformedCertificateError, match="has no off-diagonal multipliers"):
        verify_certificate(
            DualCertificate(ident, CertificateForm.DUAL3, y_offdiag=np.zeros((4, 4))), bell_basis
        )
    with pytest.raises(MalformedCertificateError, match="space of Y"):
        verify_certificate(
            DualCertificate(ident, CertificateForm.DUAL2, (HermOp.identity(4, 1),) * 4),
            bell_basis,
        )
    with pytest.raises(MalformedCertificateError, match="finite"):
        offdiag = np.full((4, 4), np.nan)
        verify_certificate(
            DualCertificate(ident, CertificateForm.DUAL5, (ident,) * 5, offdiag), bell_basis
        )


def test_unambiguous_conditions(bell_basis):
    ident = HermOp.identity(2, 2)
    cert = DualCertificate(
        ident, CertificateForm.DUAL5, (HermOp.zeros(2, 2),) * 5, np.ones((4, 4)) - np.eye(4)
    )
    conditions = certificate_conditions(cert, bell_basis)
    # five Q conditions, one per conclusive outcome and the inconclusive one
    assert len(conditions) == 10
    assert sum(c.contains_y for c in conditions) == 5
    # Y = 1 dominates ρ_j on its own
    assert verify_certificate(cert, bell_basis).valid


def test_verify_measurement_uniform(yde4):
    ident = HermOp.identity(4, 4)
    check = verify_measurement(Measurement((ident * 0.25,) * 4), yde4)
    assert check.valid
    assert check.success_prob == pytest.approx(0.25, abs=1e-15)
    assert check.per_state == pytest.approx((0.25,) * 4)


def test_verify_measurement_detects_violations(bell_basis):
    ops = tuple(bell_density(i) for i in range(4))
    check = verify_measurement(Measurement(ops), bell_basis)
    assert not check.valid
    assert check.success_prob == pytest.approx(1.0)
    assert any("T_A(P_1)" in f for f in check.failures)
    assert verify_measurement(Measurement(ops, ppt_flag=False), bell_basis).valid

    short = ops[:3] + (bell_density(3) * 0.5,)
    check = verify_measurement(Measurement(short, ppt_flag=False), bell_basis)
    assert not check.valid
    assert any("sum to identity" in f for f in check.failures)


def test_verify_measurement_unambiguous_orthogonality(bell_basis):
    ident = HermOp.identity(2, 2)
    ops = (ident * 0.25,) * 4 + (HermOp.zeros(2, 2),)
    check = verify_measurement(Measurement(ops, ppt_flag=False), bell_basis)
    assert not check.valid
    assert any(f.startswith("<P_1, rho_2>") for f in check.failures)


def test_verify_measurement_sizes(bell_basis):
    ops = tuple(bell_density(i) for i in range(3))
    with pytest.raises(MeasurementSizeError, match="needs 4 operators"):
        verify_measurement(Measurement(ops), bell_basis)
    with pytest.raises(MeasurementSizeError, match="needs 5 operators"):
        verify_measurement(Measurement(ops), bell_basis, "unambiguous")
    with pytest.raises(DimensionMismatchError):
        verify_measurement(Measurement((HermOp.identity(4, 1) * 0.25,) * 4), bell_basis)


def test_psd_part(rng):
    op = random_hermitian(rng, 2, 2)
    projected = psd_part(op)
    assert is_psd(projected)
    vals = np.linalg.eigvalsh(op.matrix)
    assert projected.trace == pytest.approx(vals[vals > 0].sum())
    positive = projected + HermOp.identity(2, 2)
    assert psd_part(positive) is positive
