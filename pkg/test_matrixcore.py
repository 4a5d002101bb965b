import numpy as np
import pytest
from numpy.testing import assert_allclose

from qflow.core.errors import DimensionMismatchError, DomainError, SpecValidationError
from qflow.core.matrixcore import (
    as_density,
    as_hermitian,
    func_calculus,
    hermitian_eig,
    is_density,
    maximally_mixed,
    partial_trace,
    random_density,
    random_hermitian,
    tensor_product,
    tensor_product_all,
    traceless_basis,
    traceless_part,
)


def test_eig_of_pauli_x():
    eig = hermitian_eig([[0, 1], [1, 0]])
    assert_allclose(eig.eigenvalues, [1.0, -1.0], atol=1e-14)
    assert_allclose(eig.eigenvectors[:, 0], np.array([1, 1]) / np.sqrt(2), atol=1e-14)
    assert_allclose(eig.eigenvectors[:, 1], np.array([1, -1]) / np.sqrt(2), atol=1e-14)


def test_eig_is_deterministic_and_reconstructs():
    rng = np.random.default_rng(3)
    H = random_hermitian(rng, 4, 2.0)
    first = hermitian_eig(H)
    second = hermitian_eig(H.copy())
    assert np.array_equal(first.eigenvalues, second.eigenvalues)
    assert np.array_equal(first.eigenvectors, second.eigenvectors)
    assert np.all(np.diff(first.eigenvalues) <= 0)
    assert_allclose(first.reconstruct(), H, atol=1e-12)
    # first non-negligible component of each eigenvector is real and positive
    for j in range(4):
        column = first.eigenvectors[:, j]
        lead = column[np.flatnonzero(np.abs(column) > 1e-12)[0]]
        assert abs(lead.imag) < 1e-14 and lead.real > 0


def test_eig_of_complex_hermitian():
    eig = hermitian_eig([[2, 1j], [-1j, 2]])
    assert_allclose(eig.eigenvalues, [3.0, 1.0], atol=1e-14)
    assert_allclose(eig.reconstruct(), [[2, 1j], [-1j, 2]], atol=1e-14)


@pytest.mark.parametrize("d", [2, 3, 5, 6])
def test_eigenvectors_are_unitary(d):
    rng = np.random.default_rng(d)
    eig = hermitian_eig(random_hermitian(rng, d, 3.0))
    U = eig.eigenvectors
    assert np.linalg.norm(U.conj().T @ U - np.eye(d)) <= 1e-12
    assert np.linalg.norm(U @ U.conj().T - np.eye(d)) <= 1e-12


def test_eig_rejects_non_finite():
    with pytest.raises(DomainError):
        hermitian_eig(np.array([[np.nan, 0], [0, 1]]))


def test_func_calculus_sqrt_and_log():
    assert_allclose(func_calculus(np.diag([4.0, 9.0]), np.sqrt), np.diag([2.0, 3.0]), atol=1e-14)
    assert_allclose(func_calculus(np.eye(3) / 3, lambda x: x), np.eye(3) / 3, atol=1e-15)
    with pytest.raises(DomainError):
        func_calculus(np.diag([1.0, 0.0]), np.log)


@pytest.mark.parametrize("seed", range(5))
def test_exp_undoes_log(seed):
    rng = np.random.default_rng(seed)
    H = random_density(rng, 4, min_eigenvalue=0.01)
    assert np.linalg.norm(func_calculus(func_calculus(H, np.log), np.exp) - H) <= 1e-9


def test_partial_trace_of_product_state():
    rho1 = np.diag([0.25, 0.75]).astype(complex)
    rho2 = np.array([[0.5, 0.5j], [-0.5j, 0.5]])
    joint = tensor_product(rho1, rho2)
    assert_allclose(partial_trace(joint, [2, 2], 0), rho1, atol=1e-15)
    assert_allclose(partial_trace(joint, [2, 2], 1), rho2, atol=1e-15)


def test_partial_trace_three_factors():
    rng = np.random.default_rng(0)
    states = [random_density(rng, d) for d in (2, 3, 2)]
    joint = tensor_product_all(states)
    for k, rho in enumerate(states):
        assert_allclose(partial_trace(joint, [2, 3, 2], k), rho, atol=1e-14)


def test_partial_trace_bell_state_is_maximally_mixed():
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    bell = np.outer(phi, phi.conj())
    assert_allclose(partial_trace(bell, [2, 2], 0), maximally_mixed(2), atol=1e-15)


def test_partial_trace_of_classically_correlated_state():
    M = np.zeros((4, 4), dtype=complex)
    M[0, 0] = M[3, 3] = 1.0
    assert_allclose(partial_trace(M, [2, 2], 0), np.eye(2), atol=1e-15)
    assert_allclose(partial_trace(M, [2, 2], 1), np.eye(2), atol=1e-15)


@pytest.mark.parametrize("dims", [[2, 2], [2, 3], [3, 2, 2]])
def test_partial_trace_preserves_trace(dims):
    rng = np.random.default_rng(len(dims))
    n = int(np.prod(dims))
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    for keep in range(len(dims)):
        reduced = partial_trace(M, dims, keep)
        assert abs(np.trace(reduced) - np.trace(M)) <= 1e-12 * abs(np.trace(M))


def test_partial_trace_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        partial_trace(np.eye(5), [2, 2], 0)
    with pytest.raises(DimensionMismatchError):
        partial_trace(np.eye(4), [2, 2], 2)


def test_kron_dimensions():
    assert tensor_product(np.eye(2), np.eye(3)).shape == (6, 6)
    assert tensor_product_all([]).shape == (1, 1)


def test_kron_example():
    expected = np.array([
        [0, 0, 2, 0],
        [0, 0, 0, 3],
        [2, 0, 0, 0],
        [0, 3, 0, 0],
    ])
    assert np.array_equal(tensor_product([[0, 1], [1, 0]], np.diag([2, 3])), expected)


def test_kron_is_associative():
    rng = np.random.default_rng(4)
    A, B, C = (rng.integers(-4, 5, size=(n, n)) + 1j * rng.integers(-4, 5, size=(n, n)) for n in (2, 3, 2))
    assert np.linalg.norm(tensor_product(tensor_product(A, B), C) - tensor_product(A, tensor_product(B, C))) == 0.0


def test_density_validation():
    assert is_density(maximally_mixed(3))
    assert not is_density(np.diag([0.6, 0.6]))
    with pytest.raises(SpecValidationError):
        as_density(np.diag([1.2, -0.2]))
    with pytest.raises(SpecValidationError):
        as_hermitian([[0, 1], [0, 0]])
    frozen = as_density(np.diag([0.5, 0.5]))
    assert not frozen.flags.writeable


def test_random_density_is_valid():
    rng = np.random.default_rng(11)
    for d in (2, 3, 5):
        rho = random_density(rng, d, min_eigenvalue=0.01)
        assert is_density(rho)
        assert hermitian_eig(rho).eigenvalues[-1] >= 0.01 - 1e-12


def test_traceless_basis_is_orthonormal():
    for d in (2, 3, 4):
        basis = traceless_basis(d)
        assert len(basis) == d * d - 1
        gram = np.array([[np.real(np.trace(A @ B)) for B in basis] for A in basis])
        assert_allclose(gram, np.eye(d * d - 1), atol=1e-14)
        for E in basis:
            assert abs(np.trace(E)) < 1e-14
            assert_allclose(E, E.conj().T)


def test_traceless_part():
    H = np.diag([3.0, 1.0]).astype(complex)
    assert_allclose(traceless_part(H), np.diag([1.0, -1.0]))
