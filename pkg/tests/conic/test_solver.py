import numpy as np
import pytest

from ppt_discrimination.conic import (
    BlockKind,
    ConicProblemError,
    HermitianTerm,
    ProblemBuilder,
    SolveOptions,
    SolveStatus,
    check_solution,
    solve,
    solve_lp,
)
from ppt_discrimination.hermlin import HermOp, is_psd
from tests.utils import random_hermitian, random_psd


def largest_eigenvalue_problem(c: HermOp):
    builder = ProblemBuilder()
    builder.add_block("X", BlockKind.PSD_COMPLEX, c.dim_a, c.dim_b)
    builder.add_objective("X", c)
    builder.add_scalar_row("trace", {"X": HermOp.identity(c.dim_a, c.dim_b)}, 1.0)
    return builder.build()


def test_largest_eigenvalue(rng):
    c = random_hermitian(rng, 3, 1)
    lam = np.linalg.eigvalsh(c.matrix)[-1]
    sol = solve(largest_eigenvalue_problem(c))
    assert sol.is_optimal
    assert sol.primal_value == pytest.approx(lam, abs=1e-6)
    assert sol.dual_value == pytest.approx(lam, abs=1e-6)
    assert sol.multiplier_vector("trace")[0] == pytest.approx(lam, abs=1e-6)
    x = sol.block_operator("X")
    assert x.trace == pytest.approx(1.0, abs=1e-7)
    assert is_psd(x, tol=1e-7)
    # the slack is y·1 - C
    assert sol.slack_operator("X").allclose(lam * HermOp.identity(3, 1) - c, atol=1e-5)


def test_simplex_lp():
    c = np.array([0.3, -1.0, 0.9, 0.5])
    builder = ProblemBuilder()
    builder.add_block("x", BlockKind.NONNEG_DIAG, 4)
    builder.add_objective("x", c)
    builder.add_scalar_row("sum", {"x": np.ones(4)}, 1.0)
    sol = solve_lp(builder.build())
    assert sol.is_optimal
    assert sol.primal_value == pytest.approx(0.9, abs=1e-7)
    assert np.argmax(sol.block("x")) == 2


def test_diagonal_sdp_matches_lp():
    c = np.array([0.25, 0.75, -0.5])
    lp = ProblemBuilder()
    lp.add_block("x", BlockKind.NONNEG_DIAG, 3)
    lp.add_objective("x", c)
    lp.add_scalar_row("sum", {"x": np.ones(3)}, 1.0)
    sdp = ProblemBuilder()
    sdp.add_block("X", BlockKind.PSD_COMPLEX, 3)
    sdp.add_objective("X", np.diag(c))
    sdp.add_scalar_row("sum", {"X": np.eye(3)}, 1.0)
    assert solve(lp.build()).primal_value == pytest.approx(
        solve(sdp.build()).primal_value, abs=1e-7
    )


def test_solve_lp_rejects_psd_blocks(rng):
    with pytest.raises(ConicProblemError, match="diagonal blocks only"):
        solve_lp(largest_eigenvalue_problem(random_hermitian(rng, 2, 1)))


def test_hermitian_equality_multiplier(rng):
    """With X pinned to a positive definite H the dual optimum is Y = C"""
    h = random_psd(rng, 2, 1) + HermOp.identity(2, 1)
    c = random_hermitian(rng, 2, 1)
    builder = ProblemBuilder()
    builder.add_block("X", BlockKind.PSD_COMPLEX, 2)
    builder.add_objective("X", c)
    builder.add_hermitian_equality("pin", [HermitianTerm("X")], h)
    sol = solve(builder.build())
    assert sol.is_optimal
    expected = np.trace(c.matrix @ h.matrix).real
    assert sol.primal_value == pytest.approx(expected, abs=1e-6)
    assert sol.multiplier_operator("pin").allclose(c, atol=1e-5)


def test_multiplier_operator_needs_hermitian_group(rng):
    sol = solve(largest_eigenvalue_problem(random_hermitian(rng, 2, 1)))
    with pytest.raises(ConicProblemError, match="not a Hermitian equality"):
        sol.multiplier_operator("trace")


def test_isometry_constraint():
    """max ⟨C, X⟩ with V·X·V† ⪯ 1 is the positive part of V†·C·V"""
    c = np.diag([1.0, -1.0, 2.0])
    v = np.eye(3)[:, :2]
    builder = ProblemBuilder()
    builder.add_block("X", BlockKind.PSD_COMPLEX, 2)
    builder.add_block("W", BlockKind.PSD_COMPLEX, 3)
    builder.add_objective("X", v.T @ c @ v)
    builder.add_hermitian_equality(
        "bound", [HermitianTerm("X", isometry=v), HermitianTerm("W")], np.eye(3)
    )
    sol = solve(builder.build())
    assert sol.is_optimal
    assert sol.primal_value == pytest.approx(1.0, abs=1e-6)


def test_check_solution_recomputes_values(rng):
    problem = largest_eigenvalue_problem(random_hermitian(rng, 3, 1))
    sol = solve(problem)
    check = check_solution(problem, sol.primal_blocks, sol.dual_slacks, sol.dual_multipliers)
    assert check.primal_value == pytest.approx(sol.primal_value, abs=1e-12)
    assert check.gap <= 1e-8
    assert check.residuals.primal_infeasibility <= 1e-8

    doubled = [2 * x for x in sol.primal_blocks]
    bad = check_solution(problem, doubled, sol.dual_slacks, sol.dual_multipliers)
    assert bad.residuals.primal_infeasibility > 0.1


def test_check_solution_multiplier_count(rng):
    problem = largest_eigenvalue_problem(random_hermitian(rng, 2, 1))
    sol = solve(problem)
    with pytest.raises(ConicProblemError, match="multipliers"):
        check_solution(problem, sol.primal_blocks, sol.dual_slacks, np.zeros(3))


def test_iteration_limit_is_a_status(rng):
    problem = largest_eigenvalue_problem(random_hermitian(rng, 3, 1))
    sol = solve(problem, SolveOptions(max_iter=0))
    assert sol.status is SolveStatus.MAX_ITERATIONS
    assert not sol.is_optimal
    assert sol.summary()["status"] == "max_iterations"


def test_summary_fields(rng):
    sol = solve(largest_eigenvalue_problem(random_hermitian(rng, 2, 1)))
    summary = sol.summary()
    assert summary["status"] == "optimal"
    assert summary["iterations"] == sol.iterations
    assert set(summary) >= {"primal_value", "dual_value", "gap", "min_dual_eigenvalue"}


def test_relaxed_acceptance_of_best_iterate(rng):
    """A stopped solve is only accepted when the relaxed tolerances hold"""
    problem = largest_eigenvalue_problem(random_hermitian(rng, 3, 1))
    strict = solve(problem, SolveOptions(max_iter=0))
    assert not strict.is_solved
    assert strict.summary()["relaxed_acceptance"] is False

    relaxed = solve(problem, SolveOptions(max_iter=0, relaxed_factor=1e12))
    assert relaxed.status is SolveStatus.NEAR_OPTIMAL
    assert relaxed.is_solved
    assert not relaxed.is_optimal
    summary = relaxed.summary()
    assert summary["status"] == "near_optimal"
    assert summary["relaxed_acceptance"] is True


def test_converged_solve_is_not_relaxed(rng):
    sol = solve(largest_eigenvalue_problem(random_hermitian(rng, 3, 1)))
    assert sol.is_optimal and sol.is_solved
    assert sol.summary()["relaxed_acceptance"] is False


def test_small_step_fraction_still_converges(rng):
    """Halved steps, as taken after a failed iteration, still reach the optimum"""
    c = random_hermitian(rng, 3, 1)
    lam = np.linalg.eigvalsh(c.matrix)[-1]
    sol = solve(largest_eigenvalue_problem(c), SolveOptions(step_fraction=0.49))
    assert sol.is_optimal
    assert sol.primal_value == pytest.approx(lam, abs=1e-6)
