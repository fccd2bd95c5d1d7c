import numpy as np
import pytest

from ppt_discrimination.hermlin import (
    DimensionMismatchError,
    HermOp,
    NotHermitianError,
    bipartite_tensor,
    eigvals_hermitian,
    hs_inner,
    is_psd,
    kron,
    max_norm,
    min_eigenvalue,
    partial_trace,
    partial_transpose,
    partial_transpose_array,
    partial_transpose_indices,
)
from ppt_discrimination.states import bell_density, bell_transpose_index

from tests.utils import random_hermitian


@pytest.mark.parametrize(
    "matrix,dims",
    [
        pytest.param(np.eye(3), (2, 2), id="wrong-order"),
        pytest.param(np.zeros((2, 3)), (1, 2), id="not-square"),
        pytest.param(np.zeros((4, 4)), (0, 4), id="zero-dimension"),
    ],
)
def test_hermop_rejects_bad_dimensions(matrix, dims):
    with pytest.raises(DimensionMismatchError):
        HermOp(dims[0], dims[1], matrix)


def test_hermop_rejects_non_hermitian_matrix():
    with pytest.raises(NotHermitianError):
        HermOp(1, 2, np.array([[0, 1], [0, 0]]))


def test_hermop_copies_and_freezes_matrix():
    m = np.eye(4, dtype=np.complex128)
    op = HermOp(2, 2, m)
    m[0, 0] = 5
    assert op.matrix[0, 0] == 1
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 2


def test_hermop_arithmetic():
    a = HermOp.identity(2, 2)
    b = bell_density(0)
    assert (a - b + b).allclose(a)
    assert (2 * b).trace == pytest.approx(2.0)
    assert (b / 4).trace == pytest.approx(0.25)
    assert (-b).allclose(b * -1)
    with pytest.raises(DimensionMismatchError):
        a + HermOp.identity(1, 4)


def test_kron_size_guard():
    with pytest.raises(DimensionMismatchError):
        kron(np.eye(100), np.eye(100))


@pytest.mark.parametrize("i", range(4))
def test_partial_transpose_of_bell_states(i):
    expected = HermOp.identity(2, 2) * 0.5 - bell_density(bell_transpose_index(i))
    assert max_norm(partial_transpose(bell_density(i)).matrix - expected.matrix) <= 1e-14


def test_partial_transpose_properties(rng):
    for _ in range(100):
        dim_a, dim_b = rng.integers(1, 4, size=2)
        x = random_hermitian(rng, int(dim_a), int(dim_b))
        y = random_hermitian(rng, int(dim_a), int(dim_b))
        tx = partial_transpose(x)
        assert partial_transpose(tx).allclose(x, atol=1e-12)
        assert tx.trace == pytest.approx(x.trace, abs=1e-12)
        assert max_norm(tx.matrix - tx.matrix.conj().T) <= 1e-12
        assert hs_inner(x, partial_transpose(y)) == pytest.approx(hs_inner(tx, y), abs=1e-9)


def test_partial_transpose_of_product(rng):
    a = random_hermitian(rng, 3, 1).matrix
    b = random_hermitian(rng, 2, 1).matrix
    product = HermOp(3, 2, kron(a, b))
    assert np.array_equal(partial_transpose(product).matrix, kron(a.T, b))


def test_partial_transpose_indices_match_array(rng):
    x = random_hermitian(rng, 3, 2).matrix
    rows, cols = partial_transpose_indices(3, 2)
    assert np.array_equal(x[rows, cols], partial_transpose_array(x, 3, 2))


def test_partial_trace_of_bell_state():
    for side in ("A", "B"):
        assert np.allclose(partial_trace(bell_density(2), side), np.eye(2) / 2, atol=1e-15)


def test_partial_trace_keeps_the_other_factor():
    x = HermOp(2, 3, kron(np.diag([1.0, 2.0]), np.diag([1.0, 0.0, 3.0])))
    assert np.allclose(partial_trace(x, "A"), 3 * np.diag([1.0, 0.0, 3.0]))
    assert np.allclose(partial_trace(x, "B"), 4 * np.diag([1.0, 2.0]))


def test_hs_inner_rejects_different_spaces():
    with pytest.raises(DimensionMismatchError):
        hs_inner(HermOp.identity(2, 2), HermOp.identity(3, 3))


def test_eigenvalues_sum_to_trace(rng):
    for _ in range(20):
        x = random_hermitian(rng, 3, 3)
        vals = eigvals_hermitian(x)
        assert np.all(np.diff(vals) >= 0)
        assert vals.sum() == pytest.approx(x.trace, rel=1e-10, abs=1e-10)


@pytest.mark.parametrize(
    "op,expected",
    [
        pytest.param(bell_density(0), True, id="bell-state"),
        pytest.param(partial_transpose(bell_density(0)), False, id="transposed-bell-state"),
        pytest.param(HermOp.zeros(2, 2), True, id="zero"),
    ],
)
def test_is_psd(op, expected):
    assert is_psd(op, 1e-9) is expected


def test_transposed_bell_state_has_eigenvalue_minus_half():
    assert min_eigenvalue(partial_transpose(bell_density(0))) == pytest.approx(-0.5, abs=1e-14)


def test_bipartite_tensor_regroups_factors():
    ident = HermOp.identity(2, 2)
    product = bipartite_tensor(bell_density(0), ident)
    assert (product.dim_a, product.dim_b) == (4, 4)
    # ½·1 from the Bell pair times 2·1 from the identity pair
    assert np.allclose(partial_trace(product, "B"), np.eye(4))
    expected = bipartite_tensor(partial_transpose(bell_density(0)), ident)
    assert partial_transpose(product).allclose(expected)


def test_bipartite_tensor_needs_an_operator():
    with pytest.raises(ValueError):
        bipartite_tensor()
