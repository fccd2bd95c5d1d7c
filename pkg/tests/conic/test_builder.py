import numpy as np
import pytest

from ppt_discrimination.conic import (
    BlockKind,
    ConicProblemError,
    HermitianTerm,
    ProblemBuilder,
    ProblemTooLargeError,
    RowKind,
    real_embed,
    real_unembed,
)
from ppt_discrimination.hermlin import HermOp
from tests.utils import random_hermitian


def test_add_block_rejects_duplicate_label():
    builder = ProblemBuilder()
    builder.add_block("X", BlockKind.PSD_COMPLEX, 2)
    with pytest.raises(ConicProblemError, match="already defined"):
        builder.add_block("X", BlockKind.NONNEG_DIAG, 3)


def test_add_block_size_limit():
    builder = ProblemBuilder()
    with pytest.raises(ProblemTooLargeError, match="exceeds the limit"):
        builder.add_block("X", BlockKind.PSD_COMPLEX, 101)
    block = builder.add_block("x", BlockKind.NONNEG_DIAG, 200)
    assert block.embedded_order == 200
    assert block.size == 200


def test_block_sizes():
    builder = ProblemBuilder()
    block = builder.add_block("X", BlockKind.PSD_COMPLEX, 2, 3)
    assert block.order == 6
    assert block.embedded_order == 12
    assert block.size == 144
    assert builder.block("X") is block
    with pytest.raises(ConicProblemError, match="Unknown block"):
        builder.block("Y")


def test_coefficient_shape_and_hermiticity_are_checked():
    builder = ProblemBuilder()
    builder.add_block("X", BlockKind.PSD_COMPLEX, 2)
    builder.add_block("x", BlockKind.NONNEG_DIAG, 3)
    with pytest.raises(ConicProblemError, match="does not match block X"):
        builder.add_objective("X", np.eye(3))
    with pytest.raises(ConicProblemError, match="not Hermitian"):
        builder.add_objective("X", np.array([[0, 1], [0, 0]]))
    with pytest.raises(ConicProblemError, match="does not match block x"):
        builder.add_scalar_row("sum", {"x": np.ones(2)}, 1.0)


def test_vector_equality_only_on_diagonal_blocks():
    builder = ProblemBuilder()
    builder.add_block("X", BlockKind.PSD_COMPLEX, 2)
    with pytest.raises(ConicProblemError, match="diagonal blocks"):
        builder.add_vector_equality("v", {"X": np.eye(2)}, np.ones(2))


def test_vector_equality_shape_mismatch():
    builder = ProblemBuilder()
    builder.add_block("x", BlockKind.NONNEG_DIAG, 3)
    with pytest.raises(ConicProblemError, match="does not match"):
        builder.add_vector_equality("v", {"x": np.eye(2)}, np.ones(3))


def test_row_groups_cannot_mix_kinds():
    builder = ProblemBuilder()
    builder.add_block("x", BlockKind.NONNEG_DIAG, 2)
    builder.add_scalar_row("g", {"x": np.ones(2)}, 1.0)
    with pytest.raises(ConicProblemError, match="mixes row kinds"):
        builder.add_vector_equality("g", {"x": np.eye(2)}, np.ones(2))


def test_build_without_rows_fails():
    builder = ProblemBuilder()
    builder.add_block("x", BlockKind.NONNEG_DIAG, 2)
    with pytest.raises(ConicProblemError, match="constraint row"):
        builder.build()


def test_hermitian_equality_row_count_and_components():
    builder = ProblemBuilder()
    builder.add_block("X", BlockKind.PSD_COMPLEX, 2, 2)
    rows = builder.add_hermitian_equality(
        "eq", [HermitianTerm("X")], HermOp.identity(2, 2)
    )
    # n diagonal rows and n(n-1) off-diagonal real and imaginary parts
    assert len(rows) == 16
    problem = builder.build()
    group = problem.row_groups["eq"]
    assert group.kind is RowKind.HERMITIAN
    assert (group.dim_a, group.dim_b) == (2, 2)
    assert group.components[0] == (0, 0, "re")
    assert group.components[1:3] == [(0, 1, "re"), (0, 1, "im")]
    assert problem.dropped_rows == 0


def test_hermitian_equality_rejects_wrong_order():
    builder = ProblemBuilder()
    builder.add_block("X", BlockKind.PSD_COMPLEX, 3)
    with pytest.raises(ConicProblemError, match="cannot appear"):
        builder.add_hermitian_equality("eq", [HermitianTerm("X")], np.eye(2))
    builder.add_block("x", BlockKind.NONNEG_DIAG, 3)
    with pytest.raises(ConicProblemError, match="cannot appear"):
        builder.add_hermitian_equality("eq", [HermitianTerm("x")], np.eye(3))


def test_hermitian_equality_rows_read_the_matrix(rng):
    """Every row applied to embed(X) returns the matching component of X"""
    h = random_hermitian(rng, 3, 1).matrix
    builder = ProblemBuilder()
    builder.add_block("X", BlockKind.PSD_COMPLEX, 3)
    builder.add_hermitian_equality("eq", [HermitianTerm("X", scale=2.0)], np.zeros((3, 3)))
    problem = builder.build()
    values = problem.constraints[0] @ real_embed(h).reshape(-1)
    for value, (p, q, part) in zip(values, problem.row_groups["eq"].components):
        expected = h[p, q].real if part == "re" else h[p, q].imag
        assert value == pytest.approx(2.0 * expected, abs=1e-12)


def test_isometry_term_reads_the_conjugated_block(rng):
    h = random_hermitian(rng, 2, 1).matrix
    v = np.linalg.qr(rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2)))[0]
    builder = ProblemBuilder()
    builder.add_block("X", BlockKind.PSD_COMPLEX, 2)
    builder.add_hermitian_equality("eq", [HermitianTerm("X", isometry=v)], np.zeros((3, 3)))
    problem = builder.build(check_rank=False)
    values = problem.constraints[0] @ real_embed(h).reshape(-1)
    full = v @ h @ v.conj().T
    for value, (p, q, part) in zip(values, problem.row_groups["eq"].components):
        expected = full[p, q].real if part == "re" else full[p, q].imag
        assert value == pytest.approx(expected, abs=1e-12)


def test_index_map_term_reads_permuted_entries(rng):
    h = random_hermitian(rng, 2, 1).matrix
    swap = np.array([1, 0])
    rows, cols = np.meshgrid(swap, swap, indexing="ij")
    builder = ProblemBuilder()
    builder.add_block("X", BlockKind.PSD_COMPLEX, 2)
    builder.add_hermitian_equality(
        "eq", [HermitianTerm("X", index_map=(rows, cols))], np.zeros((2, 2))
    )
    problem = builder.build()
    values = problem.constraints[0] @ real_embed(h).reshape(-1)
    permuted = h[np.ix_(swap, swap)]
    for value, (p, q, part) in zip(values, problem.row_groups["eq"].components):
        expected = permuted[p, q].real if part == "re" else permuted[p, q].imag
        assert value == pytest.approx(expected, abs=1e-12)


def test_dependent_rows_are_dropped():
    builder = ProblemBuilder()
    builder.add_block("x", BlockKind.NONNEG_DIAG, 3)
    builder.add_scalar_row("first", {"x": [1.0, 1.0, 0.0]}, 1.0)
    builder.add_scalar_row("second", {"x": [2.0, 2.0, 0.0]}, 2.0)
    builder.add_scalar_row("third", {"x": [0.0, 0.0, 1.0]}, 0.5)
    problem = builder.build()
    assert problem.m == 2
    assert problem.dropped_rows == 1
    kept = problem.row_groups["first"].rows + problem.row_groups["second"].rows
    assert len(kept) == 1
    assert problem.row_groups["third"].rows == [1]


def test_build_can_skip_rank_check():
    builder = ProblemBuilder()
    builder.add_block("x", BlockKind.NONNEG_DIAG, 2)
    builder.add_scalar_row("a", {"x": [1.0, 1.0]}, 1.0)
    builder.add_scalar_row("b", {"x": [1.0, 1.0]}, 1.0)
    assert builder.build(check_rank=False).m == 2


def test_describe_and_metadata():
    builder = ProblemBuilder()
    builder.add_block("X", BlockKind.PSD_COMPLEX, 2)
    builder.add_block("x", BlockKind.NONNEG_DIAG, 4)
    builder.add_scalar_row("trace", {"X": np.eye(2), "x": np.ones(4)}, 1.0)
    builder.metadata["mode"] = "min_error"
    problem = builder.build()
    assert not problem.is_lp
    assert problem.metadata == {"mode": "min_error"}
    described = problem.describe()
    assert described["rows"] == 1


def test_real_embedding_inner_product_and_spectrum(rng):
    a = random_hermitian(rng, 3, 1).matrix
    b = random_hermitian(rng, 3, 1).matrix
    ea, eb = real_embed(a), real_embed(b)
    assert np.trace(ea @ eb) / 2 == pytest.approx(np.trace(a @ b).real, abs=1e-12)
    doubled = np.sort(np.repeat(np.linalg.eigvalsh(a), 2))
    assert np.allclose(np.linalg.eigvalsh(ea), doubled, atol=1e-12)
    assert np.allclose(real_unembed(ea), a, atol=1e-15)


def test_real_unembed_needs_even_order():
    with pytest.raises(ValueError, match="even order"):
        real_unembed(np.eye(3))
