"""
Vector fields of follow-the-quantum-regularized-leader learning.

Dual field: dY_i/dt = V_i(Q_1(Y_1), ..., Q_N(Y_N)).
Primal field (quantum state dynamics): the induced velocity of X = Q(Y),
expressed in the eigenbasis of X.
"""
from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np

from qflow.config import settings
from qflow.core.errors import BoundaryCollisionError, DimensionMismatchError, DomainError
from qflow.core.game import QuantumGame
from qflow.core.kernels import RegularizerKernel, VonNeumannKernel
from qflow.core.matrixcore import PSD_TOL, hermitian_eig, hermitize, traceless_part
from qflow.core.regmirror import mirror

logger = logging.getLogger(__name__)

TRACELESS_TOL = 1e-10


def _check_kernels(game: QuantumGame, kernels: Sequence[RegularizerKernel], scores: Sequence[np.ndarray]) -> None:
    if len(kernels) != game.n_players:
        raise DimensionMismatchError(f"Got {len(kernels)} kernels for {game.n_players} players")
    if len(scores) != game.n_players:
        raise DimensionMismatchError(f"Got {len(scores)} score matrices for {game.n_players} players")


def states_from_scores(kernels: Sequence[RegularizerKernel], scores: Sequence[np.ndarray]) -> List[np.ndarray]:
    return [mirror(k, Y) for k, Y in zip(kernels, scores)]


def dual_field(game: QuantumGame, kernels: Sequence[RegularizerKernel], scores: Sequence[np.ndarray]) -> List[np.ndarray]:
    _check_kernels(game, kernels, scores)
    return game.gradient_fields(states_from_scores(kernels, scores))


def quotient_field(game: QuantumGame, kernels: Sequence[RegularizerKernel], scores: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Dual field on traceless scores, with the identity component removed."""
    _check_kernels(game, kernels, scores)
    for i, Z in enumerate(scores):
        trace = abs(complex(np.trace(Z)))
        if trace > TRACELESS_TOL * max(1.0, float(np.max(np.abs(Z)))):
            raise DomainError(f"Score of player {i} is not traceless (|tr Z| = {trace:.3e})")
    return [traceless_part(V) for V in dual_field(game, kernels, scores)]


def _floored_eig(X: np.ndarray, floor: Optional[float]):
    floor = settings.EIGEN_FLOOR if floor is None else floor
    eig = hermitian_eig(X)
    x = eig.eigenvalues
    if x[-1] < -PSD_TOL:
        raise BoundaryCollisionError(f"State left the spectraplex (min eigenvalue {x[-1]:.3e})")
    return eig, np.maximum(x, floor)


def _off_diagonal_coefficients(kernel: RegularizerKernel, x: np.ndarray, gap: float) -> np.ndarray:
    """(x_l - x_k)/(theta'(x_l) - theta'(x_k)), or 1/theta''(x_k) for near-equal eigenvalues."""
    dx = x[None, :] - x[:, None]
    d1 = kernel.dtheta(x)
    dtheta_gap = d1[None, :] - d1[:, None]
    degenerate = np.abs(dx) < gap
    limit = np.broadcast_to(1.0 / kernel.ddtheta(x)[:, None], dx.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(degenerate, 1.0, dx) / np.where(degenerate, 1.0, dtheta_gap)
    return np.where(degenerate, limit, ratio)


def qd_field(
    kernel: RegularizerKernel,
    X: np.ndarray,
    V: np.ndarray,
    floor: Optional[float] = None,
    gap: Optional[float] = None,
) -> np.ndarray:
    """
    Velocity of X = Q(Y) when dY/dt = V.

    Eigenvalues of X below the floor are raised to it before theta'/theta''
    are evaluated, so pure states are handled at the floored spectrum.
    """
    X = np.asarray(X, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if X.shape != V.shape:
        raise DimensionMismatchError(f"State shape {X.shape} and payoff gradient shape {V.shape} differ")
    gap = settings.DEGENERACY_GAP if gap is None else gap

    eig, x = _floored_eig(X, floor)
    U = eig.eigenvectors
    V_hat = U.conj().T @ V @ U

    inv_curv = 1.0 / kernel.ddtheta(x)
    v_diag = np.real(np.diag(V_hat))
    # sum_l V_ll/theta''(x_l) over sum_l theta''(x_k)/theta''(x_l), written with 1/theta''
    diag = v_diag * inv_curv - inv_curv * np.sum(v_diag * inv_curv) / np.sum(inv_curv)

    X_dot_hat = _off_diagonal_coefficients(kernel, x, gap) * V_hat
    np.fill_diagonal(X_dot_hat, diag)
    return hermitize(U @ X_dot_hat @ U.conj().T)


def qrd_field(X: np.ndarray, V: np.ndarray, floor: Optional[float] = None, gap: Optional[float] = None) -> np.ndarray:
    """Quantum replicator field: the state dynamics of the von Neumann kernel in closed form."""
    X = np.asarray(X, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if X.shape != V.shape:
        raise DimensionMismatchError(f"State shape {X.shape} and payoff gradient shape {V.shape} differ")
    gap = settings.DEGENERACY_GAP if gap is None else gap

    eig, x = _floored_eig(X, floor)
    U = eig.eigenvectors
    V_hat = U.conj().T @ V @ U
    v_diag = np.real(np.diag(V_hat))

    log_x = np.log(x)
    dx = x[None, :] - x[:, None]
    dlog = log_x[None, :] - log_x[:, None]
    degenerate = np.abs(dx) < gap
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = np.where(degenerate, x[:, None], dx / np.where(degenerate, 1.0, dlog))

    X_dot_hat = mean * V_hat
    np.fill_diagonal(X_dot_hat, x * (v_diag - np.dot(x, v_diag)))
    return hermitize(U @ X_dot_hat @ U.conj().T)


def spectral_velocity(
    kernel: RegularizerKernel,
    X: np.ndarray,
    V: np.ndarray,
    floor: Optional[float] = None,
    gap: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split the state dynamics into eigenvalue rates and eigenvector rotation.

    Returns (x_dot, B) where x_dot[k] is the rate of the k-th eigenvalue
    (descending order) and B[l, k] = V_kl / (theta'(x_l) - theta'(x_k)) is the
    component of du_l/dt along u_k; degenerate pairs get B = 0.
    """
    gap = settings.DEGENERACY_GAP if gap is None else gap
    X = np.asarray(X, dtype=complex)
    V = np.asarray(V, dtype=complex)
    eig, x = _floored_eig(X, floor)
    U = eig.eigenvectors
    V_hat = U.conj().T @ V @ U

    inv_curv = 1.0 / kernel.ddtheta(x)
    v_diag = np.real(np.diag(V_hat))
    x_dot = v_diag * inv_curv - inv_curv * np.sum(v_diag * inv_curv) / np.sum(inv_curv)

    d1 = kernel.dtheta(x)
    dtheta_gap = d1[:, None] - d1[None, :]  # [l, k] = theta'(x_l) - theta'(x_k)
    degenerate = np.abs(x[:, None] - x[None, :]) < gap
    with np.errstate(divide="ignore", invalid="ignore"):
        B = np.where(degenerate, 0.0, V_hat.T / np.where(degenerate, 1.0, dtheta_gap))
    return x_dot, B


def primal_field(game: QuantumGame, kernels: Sequence[RegularizerKernel], states: Sequence[np.ndarray]) -> List[np.ndarray]:
    """State dynamics for every player at a profile of density matrices."""
    _check_kernels(game, kernels, states)
    gradients = game.gradient_fields(states)
    fields = []
    for kernel, X, V in zip(kernels, states, gradients):
        if isinstance(kernel, VonNeumannKernel):
            fields.append(qrd_field(X, V))
        else:
            fields.append(qd_field(kernel, X, V))
    return fields
