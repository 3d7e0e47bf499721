"""Linear-algebra layer: products, partial traces, propagators, states."""

import numpy as np
import pytest

from decosim.errors import DimensionError, DomainError, StateError
from decosim.hilbert import (QuantumState, TensorFactorization, as_matrix,
                             as_vector, dagger, eig_hermitian,
                             expm_hermitian_prop, is_hermitian, is_unitary,
                             kron, matmul, partial_trace)

from oracles import expm_series, kron_loops, matmul_loops, partial_trace_loops


def _random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _random_density(rng, d):
    a = _random_complex(rng, d, d)
    rho = a @ a.conj().T
    return rho / rho.trace()


def test_matmul_matches_loop_oracle():
    rng = np.random.default_rng(11)
    for n, k, m in [(2, 2, 2), (3, 4, 2), (5, 5, 5), (1, 7, 3)]:
        a = _random_complex(rng, n, k)
        b = _random_complex(rng, k, m)
        assert np.allclose(matmul(a, b), matmul_loops(a, b),
                           rtol=1e-12, atol=1e-12)


def test_matmul_rejects_inner_mismatch():
    with pytest.raises(DimensionError):
        matmul(np.eye(2), np.eye(3))


def test_dagger_and_kron():
    rng = np.random.default_rng(12)
    a = _random_complex(rng, 3, 3)
    b = _random_complex(rng, 2, 2)
    assert np.array_equal(dagger(a), a.conj().T)
    assert np.allclose(kron(a, b), kron_loops(a, b), atol=1e-12)
    # mixed-product property
    c = _random_complex(rng, 3, 3)
    d = _random_complex(rng, 2, 2)
    lhs = matmul(kron(a, b), kron(c, d))
    rhs = kron(matmul(a, c), matmul(b, d))
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_as_matrix_validation():
    with pytest.raises(DimensionError):
        as_matrix([1.0, 2.0])
    with pytest.raises(DimensionError):
        as_matrix(np.ones((2, 3)), square=True)
    with pytest.raises(DomainError):
        as_matrix([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(DomainError):
        as_vector([np.inf, 0.0])


def test_partial_trace_matches_loop_oracle():
    rng = np.random.default_rng(13)
    dims = (2, 3, 2)
    rho = _random_density(rng, 12)
    for keep in ([0], [1], [2], [0, 2], [1, 2], [0, 1, 2]):
        got = partial_trace(rho, dims, keep)
        want = partial_trace_loops(rho, dims, keep)
        assert np.allclose(got, want, atol=1e-12)
        assert abs(got.trace() - rho.trace()) < 1e-12


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(14)
    rho_a = _random_density(rng, 2)
    rho_b = _random_density(rng, 3)
    joint = np.kron(rho_a, rho_b)
    assert np.allclose(partial_trace(joint, (2, 3), [0]), rho_a, atol=1e-12)
    assert np.allclose(partial_trace(joint, (2, 3), [1]), rho_b, atol=1e-12)


def test_partial_trace_validation():
    rho = np.eye(4) / 4.0
    with pytest.raises(DimensionError):
        partial_trace(rho, (2, 3), [0])        # 2*3 != 4
    with pytest.raises(DimensionError):
        partial_trace(rho, (2, 2), [2])        # index out of range
    with pytest.raises(DimensionError):
        partial_trace(rho, (2, 2), [])         # nothing kept
    with pytest.raises(DimensionError):
        TensorFactorization([])
    with pytest.raises(DimensionError):
        TensorFactorization([2, 0])


def test_eig_hermitian_reconstructs():
    rng = np.random.default_rng(15)
    a = _random_complex(rng, 6, 6)
    h = a + a.conj().T
    w, v = eig_hermitian(h)
    assert np.all(np.diff(w) >= 0.0)
    assert np.allclose((v * w) @ v.conj().T, h, atol=1e-10)


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(DomainError):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_propagator_matches_series_oracle():
    rng = np.random.default_rng(16)
    a = _random_complex(rng, 5, 5)
    h = a + a.conj().T
    for t in (0.0, 0.37, 2.5, -1.1):
        u = expm_hermitian_prop(h, t)
        assert is_unitary(u)
        assert np.allclose(u, expm_series(-1j * h * t), atol=1e-10)


def test_hermitian_unitary_predicates():
    assert is_hermitian(np.diag([1.0, 2.0]))
    assert not is_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert is_unitary(np.eye(3))
    assert not is_unitary(2.0 * np.eye(3))


def test_pure_state_validation():
    v = np.array([1.0, 1.0]) / np.sqrt(2.0)
    st = QuantumState.pure(v)
    assert st.kind == "pure" and st.dim == 2
    with pytest.raises(StateError):
        QuantumState.pure([1.0, 1.0])          # unnormalized
    with pytest.raises(StateError):
        QuantumState.pure([1.0])               # dim < 2
    with pytest.raises(DomainError):
        QuantumState.pure([np.nan, 0.0])
    with pytest.raises(TypeError):
        QuantumState(object(), "pure", v)      # ctor is factory-only


def test_mixed_state_validation():
    ok = QuantumState.mixed(np.eye(2) / 2.0)
    assert ok.kind == "mixed" and ok.dim == 2
    with pytest.raises(StateError):
        QuantumState.mixed(np.array([[0.5, 0.3], [0.1, 0.5]]))  # not hermitian
    with pytest.raises(StateError):
        QuantumState.mixed(np.eye(2))                           # trace 2
    neg = np.diag([1.1, -0.1])
    with pytest.raises(StateError):
        QuantumState.mixed(neg)                                 # eigenvalue -0.1
    # a tiny negative eigenvalue is tolerated and left untouched
    tiny = np.diag([1.0 + 1e-9, -1e-9])
    st = QuantumState.mixed(tiny)
    assert st.data[1, 1].real == -1e-9


def test_density_matrix_forms():
    v = np.array([0.6, 0.8j])
    st = QuantumState.pure(v)
    assert np.allclose(st.density_matrix(), np.outer(v, v.conj()), atol=1e-15)
    m = QuantumState.mixed(np.eye(2) / 2.0)
    rho = m.density_matrix()
    rho[0, 0] = 99.0        # the returned matrix is a copy
    assert m.data[0, 0] == 0.5


def test_pure_state_data_is_copied():
    v = np.array([1.0 + 0.0j, 0.0])
    st = QuantumState.pure(v)
    v[0] = 0.0
    assert st.data[0] == 1.0
