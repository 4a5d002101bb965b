"""
Complex Hermitian linear algebra used throughout the engine.

Matrices are plain numpy arrays. The ``as_*`` constructors validate their
input once and hand back read-only complex copies; internal code that produces
Hermitian matrices by arithmetic calls ``hermitize`` instead of re-validating.
"""
from dataclasses import dataclass
from functools import reduce
from typing import Callable, List, Sequence
import logging

import numpy as np
import scipy.linalg as la

from qflow.core.errors import ConvergenceError, DimensionMismatchError, DomainError, SpecValidationError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
PHASE_TOL = 1e-12


def _frozen(M: np.ndarray) -> np.ndarray:
    M = np.array(M, dtype=complex, copy=True)
    M.setflags(write=False)
    return M


def as_matrix(M) -> np.ndarray:
    """Validate a finite 2-D complex matrix."""
    arr = np.asarray(M, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionMismatchError(f"Expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SpecValidationError("Matrix contains NaN or Inf entries")
    return _frozen(arr)


def as_hermitian(M) -> np.ndarray:
    arr = as_matrix(M)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"Hermitian matrix must be square, got shape {arr.shape}")
    scale = max(float(np.max(np.abs(arr))), 1.0)
    residue = float(np.max(np.abs(arr - arr.conj().T)))
    if residue > HERMITIAN_TOL * scale:
        raise SpecValidationError(f"Matrix is not Hermitian (max |M - M^H| = {residue:.3e})")
    return _frozen(hermitize(arr))


def as_density(M) -> np.ndarray:
    arr = as_hermitian(M)
    trace = float(np.trace(arr).real)
    if abs(trace - 1.0) > TRACE_TOL:
        raise SpecValidationError(f"Density matrix must have unit trace, got {trace:.12g}")
    min_eig = float(la.eigvalsh(arr)[0])
    if min_eig < -PSD_TOL:
        raise SpecValidationError(f"Density matrix must be positive semi-definite, min eigenvalue {min_eig:.3e}")
    return arr


def hermitize(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    return 0.5 * (M + M.conj().T)


def is_density(M: np.ndarray, tol: float = PSD_TOL) -> bool:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    if abs(np.trace(M).real - 1.0) > TRACE_TOL:
        return False
    return bool(la.eigvalsh(hermitize(M))[0] >= -tol)


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # columns are unit eigenvectors

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.shape[0])

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T

    def projector(self, k: int) -> np.ndarray:
        u = self.eigenvectors[:, k]
        return np.outer(u, u.conj())


def tensor_product(A, B) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def tensor_product_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    if not mats:
        return np.ones((1, 1), dtype=complex)
    return reduce(tensor_product, mats)


def partial_trace(M, dims: Sequence[int], keep: int) -> np.ndarray:
    """Trace out every tensor factor of ``M`` except factor ``keep``."""
    M = np.asarray(M, dtype=complex)
    dims = [int(d) for d in dims]
    if any(d <= 0 for d in dims):
        raise DimensionMismatchError(f"Factor dimensions must be positive, got {dims}")
    total = int(np.prod(dims))
    if M.ndim != 2 or M.shape != (total, total):
        raise DimensionMismatchError(f"Matrix of shape {M.shape} does not match factor dimensions {dims}")
    n = len(dims)
    if not 0 <= keep < n:
        raise DimensionMismatchError(f"keep={keep} out of range for {n} factors")

    d_keep = dims[keep]
    rest = total // d_keep
    tensor = M.reshape(dims + dims)
    tensor = np.moveaxis(tensor, [keep, n + keep], [0, 1])
    tensor = tensor.reshape(d_keep, d_keep, rest, rest)
    return np.einsum("abrr->ab", tensor)


def _fix_phases(U: np.ndarray) -> np.ndarray:
    U = U.copy()
    for j in range(U.shape[1]):
        column = U[:, j]
        nonzero = np.flatnonzero(np.abs(column) > PHASE_TOL)
        if nonzero.size == 0:
            continue
        lead = column[nonzero[0]]
        U[:, j] = column * (np.conj(lead) / abs(lead))
    return U


def hermitian_eig(H) -> EigenDecomposition:
    """
    Eigendecomposition with eigenvalues sorted descending.

    Each eigenvector has its first non-negligible component made real and
    positive so that identical inputs always produce identical outputs.
    """
    H = hermitize(H)
    if not np.all(np.isfinite(H)):
        raise DomainError("Cannot diagonalize a matrix with NaN or Inf entries")
    try:
        values, vectors = la.eigh(H)
    except la.LinAlgError as e:
        raise ConvergenceError(f"Hermitian eigendecomposition failed: {e}")
    values = values[::-1].copy()
    vectors = _fix_phases(vectors[:, ::-1])
    values.setflags(write=False)
    vectors.setflags(write=False)
    return EigenDecomposition(eigenvalues=values, eigenvectors=vectors)


def spectral_apply(eig: EigenDecomposition, values: np.ndarray) -> np.ndarray:
    """Rebuild U diag(values) U^H from an existing eigenbasis."""
    U = eig.eigenvectors
    return hermitize((U * np.asarray(values, dtype=float)) @ U.conj().T)


def func_calculus(H, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    eig = hermitian_eig(H)
    with np.errstate(all="ignore"):
        fx = np.asarray(f(eig.eigenvalues), dtype=float)
    if fx.shape != eig.eigenvalues.shape:
        fx = np.broadcast_to(fx, eig.eigenvalues.shape)
    if not np.all(np.isfinite(fx)):
        bad = eig.eigenvalues[~np.isfinite(fx)]
        raise DomainError(f"Function undefined at eigenvalue(s) {bad.tolist()}")
    return spectral_apply(eig, fx)


def identity(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex)


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex) / d


def frobenius(M) -> float:
    return float(np.linalg.norm(np.asarray(M), "fro"))


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    """Gaussian Hermitian matrix normalized to Frobenius norm ``scale``."""
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    H = hermitize(G)
    norm = frobenius(H)
    if norm == 0.0:
        return np.zeros((d, d), dtype=complex)
    return H * (scale / norm)


def random_density(rng: np.random.Generator, d: int, min_eigenvalue: float = 0.0) -> np.ndarray:
    """Full-rank random state: random unitary basis with Dirichlet spectrum lifted by ``min_eigenvalue``."""
    if min_eigenvalue * d >= 1.0:
        raise DomainError(f"min_eigenvalue={min_eigenvalue} infeasible in dimension {d}")
    spectrum = rng.dirichlet(np.ones(d))
    spectrum = min_eigenvalue + (1.0 - d * min_eigenvalue) * spectrum
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    return hermitize((Q * spectrum) @ Q.conj().T)


def traceless_part(H: np.ndarray) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    d = H.shape[0]
    return H - (np.trace(H) / d) * np.eye(d, dtype=complex)


def traceless_basis(d: int) -> List[np.ndarray]:
    """Orthonormal (Frobenius) basis of traceless d x d Hermitian matrices."""
    basis = []
    for a in range(d):
        for b in range(a + 1, d):
            S = np.zeros((d, d), dtype=complex)
            S[a, b] = S[b, a] = 1.0 / np.sqrt(2.0)
            A = np.zeros((d, d), dtype=complex)
            A[a, b] = -1j / np.sqrt(2.0)
            A[b, a] = 1j / np.sqrt(2.0)
            basis.extend([S, A])
    for k in range(1, d):
        D = np.zeros((d, d), dtype=complex)
        D[np.arange(k), np.arange(k)] = 1.0
        D[k, k] = -float(k)
        basis.append(D / np.sqrt(k * (k + 1)))
    return basis
