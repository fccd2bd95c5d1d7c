import numpy as np
import pytest

from ppt_discrimination.conic import solve
from ppt_discrimination.discrim import (
    CertificateForm,
    Measurement,
    build_eq3_bound,
    build_min_error,
    build_unambiguous,
    extract_eq3,
    extract_min_error,
    extract_unambiguous,
    repair_certificate,
    verify_certificate,
    verify_measurement,
)
from ppt_discrimination.discrim.builders import orthogonal_subspaces
from ppt_discrimination.hermlin import HermOp
from ppt_discrimination.states import bell_density, make_instance


def test_min_error_problem_layout(bell_basis):
    problem = build_min_error(bell_basis)
    labels = [b.label for b in problem.blocks]
    assert labels == ["P[0]", "Z[0]", "P[1]", "Z[1]", "P[2]", "Z[2]", "P[3]", "Z[3]"]
    assert set(problem.row_groups) == {"completeness", "ppt[0]", "ppt[1]", "ppt[2]", "ppt[3]"}
    # 16 rows per Hermitian equality on C^2 ⊗ C^2
    assert problem.m == 80
    assert problem.metadata["mode"] == "min_error"
    assert problem.metadata["cone"] == "ppt"

    psd = build_min_error(bell_basis, "psd")
    assert [b.label for b in psd.blocks] == ["P[0]", "P[1]", "P[2]", "P[3]"]
    assert psd.m == 16


@pytest.mark.parametrize("cone,expected", [("psd", 1.0), ("ppt", 0.5)])
def test_bell_basis_min_error(bell_basis, cone, expected):
    sol = solve(build_min_error(bell_basis, cone))
    assert sol.is_optimal
    assert sol.primal_value == pytest.approx(expected, abs=1e-7)

    ops, cert = extract_min_error(bell_basis, sol)
    assert cert.form is CertificateForm.DUAL2
    check = verify_measurement(Measurement(tuple(ops), cone == "ppt"), bell_basis, tol=1e-6)
    assert check.success_prob == pytest.approx(expected, abs=1e-6)
    repaired = repair_certificate(cert, bell_basis)
    c_check = verify_certificate(repaired, bell_basis)
    assert c_check.valid
    assert c_check.bound == pytest.approx(expected, abs=1e-6)


def test_orthogonal_subspaces(yde4):
    spaces = orthogonal_subspaces(yde4)
    assert len(spaces) == 4
    for j, space in enumerate(spaces):
        assert space.kept.shape == (16, 13)
        assert space.removed.shape == (16, 3)
        for i, rho in enumerate(yde4.states):
            if i != j:
                compressed = space.kept.conj().T @ rho.matrix @ space.kept
                assert np.allclose(compressed, 0, atol=1e-12)


def test_unambiguous_bell_basis_psd(bell_basis):
    problem = build_unambiguous(bell_basis, "psd")
    # one kept direction per state plus the full inconclusive block
    orders = [b.order for b in problem.blocks]
    assert orders == [1, 1, 1, 1, 4]
    sol = solve(problem)
    assert sol.is_optimal
    assert sol.primal_value == pytest.approx(1.0, abs=1e-7)

    ops, cert = extract_unambiguous(bell_basis, sol)
    assert len(ops) == 5
    assert cert.form is CertificateForm.DUAL5
    check = verify_measurement(Measurement(tuple(ops), False), bell_basis, tol=1e-6)
    assert check.success_prob == pytest.approx(1.0, abs=1e-6)
    for j in range(4):
        assert check.per_state[j] == pytest.approx(1.0, abs=1e-6)


def test_unambiguous_certificate_with_mixed_states():
    """Reconstructed y_ij make the dual feasible when a state has a two-dimensional support"""
    mixed = (bell_density(0) + bell_density(1)) * 0.5
    inst = make_instance([mixed, bell_density(2)], priors=[0.75, 0.25], name="mixed")
    sol = solve(build_unambiguous(inst, "psd"))
    assert sol.is_optimal
    ops, cert = extract_unambiguous(inst, sol)
    assert cert.y_offdiag is not None
    assert cert.y_offdiag.shape == (2, 2)
    check = verify_certificate(repair_certificate(cert, inst), inst)
    assert check.valid
    assert check.bound == pytest.approx(1.0, abs=1e-5)
    m_check = verify_measurement(Measurement(tuple(ops), False), inst, tol=1e-6)
    assert m_check.success_prob == pytest.approx(1.0, abs=1e-6)


def test_eq3_bound_bell_basis(bell_basis):
    problem = build_eq3_bound(bell_basis)
    assert [b.label for b in problem.blocks] == ["W[0]", "W[1]", "W[2]", "W[3]"]
    sol = solve(problem)
    assert sol.is_optimal
    cert = extract_eq3(bell_basis, sol)
    assert cert.form is CertificateForm.DUAL3
    check = verify_certificate(repair_certificate(cert, bell_basis), bell_basis)
    assert check.valid
    assert check.bound == pytest.approx(0.5, abs=1e-6)


def test_eq3_bound_is_above_ppt_optimum():
    inst = make_instance(
        [bell_density(0), HermOp.from_vector(np.array([0, 1, 0, 0]), 2, 2)],
        priors=[0.5, 0.5],
    )
    alpha = solve(build_min_error(inst)).primal_value
    beta_prime = solve(build_eq3_bound(inst)).dual_value
    assert alpha <= beta_prime + 1e-7


@pytest.mark.slow
def test_yde4_full_sdp(yde4):
    sol = solve(build_min_error(yde4))
    assert sol.is_optimal
    assert sol.primal_value == pytest.approx(7 / 8, abs=1e-6)
