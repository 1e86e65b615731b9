import numpy as np
import pytest

from hybridbell.operators import (DimensionMismatchError, JointOperator, PureState, SubspaceSpec, expectation,
                                  product_state, project_to_subspace, tensor)


def random_herm(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


def test_matvec_matches_dense():
    rng = np.random.default_rng(1)
    op = tensor(random_herm(rng, 3), random_herm(rng, 4)) + 0.5 * tensor(random_herm(rng, 3), np.eye(4))
    v = rng.normal(size=12) + 1j * rng.normal(size=12)
    assert np.allclose(op.matvec(v), op.matrix @ v)
    assert op.hermiticity_error() < 1e-12


def test_operator_arithmetic():
    a, b = np.diag([1.0, 2.0]), np.diag([3.0, -1.0])
    op = tensor(a, b) - tensor(b, a)
    assert np.allclose(op.matrix, np.kron(a, b) - np.kron(b, a))
    assert np.allclose((-op).matrix, -op.matrix)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        tensor(np.eye(2), np.eye(2)) + tensor(np.eye(3), np.eye(2))


def test_state_must_be_normalized():
    with pytest.raises(ValueError):
        PureState.from_vector((2,), np.array([1.0, 1.0]), normalize=False)
    s = PureState.from_vector((2,), np.array([1.0, 1.0]))
    assert np.linalg.norm(s.vector) == pytest.approx(1.0)


def test_state_is_read_only():
    s = PureState.basis((2, 2), (0, 1))
    with pytest.raises(ValueError):
        s.vector[0] = 1.0


def test_resize_refuses_to_drop_weight():
    s = PureState.from_amplitudes((3, 3), {(2, 0): 1.0, (0, 0): 1.0})
    assert s.resized((5, 5)).amplitude(2, 0) == pytest.approx(1 / np.sqrt(2))
    with pytest.raises(ValueError):
        s.resized((2, 2))


def test_expectation_of_product():
    a = PureState.from_vector((2,), np.array([1.0, 1.0]))
    b = PureState.basis((2,), (1,))
    z = np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert expectation(product_state(a, b), tensor(x, z)) == pytest.approx(-1.0)


def test_marginal_populations():
    s = PureState.from_amplitudes((2, 3), {(0, 2): 1.0, (1, 0): 1.0})
    assert np.allclose(s.marginal_populations(1), [0.5, 0.0, 0.5])


def test_subspace_embed_restrict_roundtrip():
    spec = SubspaceSpec.uniform((0, 2))
    assert spec.ambient_dims == (3, 3) and spec.dims == (2, 2)
    small = PureState.from_vector((2, 2), np.array([1.0, 0.0, 0.0, 1.0]))
    big = spec.embed(small)
    assert big.amplitude(2, 2) == pytest.approx(1 / np.sqrt(2))
    assert np.allclose(spec.restrict(big).vector, small.vector)


def test_compression_is_submatrix():
    rng = np.random.default_rng(3)
    a, b = random_herm(rng, 4), random_herm(rng, 4)
    spec = SubspaceSpec.even(3)
    small = project_to_subspace(tensor(a, b), spec)
    idx = [0, 2]
    assert np.allclose(small.matrix, np.kron(a[np.ix_(idx, idx)], b[np.ix_(idx, idx)]))


def test_lowest_and_even_specs():
    assert SubspaceSpec.lowest(3).indices[0] == (0, 1, 2, 3)
    assert SubspaceSpec.even(6).indices[0] == (0, 2, 4, 6)
