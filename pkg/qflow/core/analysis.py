"""
Diagnostics over games and trajectories: regret, Fenchel coupling series,
recurrence, variational stability probes, purity and Bloch coordinates.
"""
from typing import List, Optional, Sequence
import logging

import numpy as np
import scipy.linalg as la
from scipy.integrate import trapezoid

from qflow.config import settings
from qflow.core.dynamics import qd_field
from qflow.core.errors import ConvergenceError, DimensionMismatchError, DomainError
from qflow.core.game import QuantumGame
from qflow.core.kernels import EuclideanKernel, RegularizerKernel
from qflow.core.matrixcore import frobenius, hermitian_eig, hermitize, random_hermitian
from qflow.core.regmirror import fenchel_coupling, mirror
from qflow.core.trajectory import Trajectory
from qflow.models.report import ConservationReport, RecurrenceReport, RegretReport
from qflow.utils.thread_pool import parallel_map

logger = logging.getLogger(__name__)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

VS_MAX_ATTEMPTS = 100


def _trace_pairing(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Re tr(A_k B_k) for stacks of matrices (or a single pair)."""
    return np.real(np.einsum("...ab,...ba->...", A, B))


def purity(X) -> float:
    X = np.asarray(X, dtype=complex)
    return float(_trace_pairing(X, X))


def bloch_coords(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.shape != (2, 2):
        raise DimensionMismatchError(f"Bloch coordinates need a 2x2 state, got shape {X.shape}")
    return np.array([
        2.0 * X[0, 1].real,
        -2.0 * X[0, 1].imag,
        (X[0, 0] - X[1, 1]).real,
    ])


def bloch_series(trajectory: Trajectory, player: int) -> np.ndarray:
    stack = trajectory.states[player]
    if stack.shape[1:] != (2, 2):
        raise DimensionMismatchError(f"Player {player} is not a qubit (dimension {stack.shape[1]})")
    return np.stack([2.0 * stack[:, 0, 1].real, -2.0 * stack[:, 0, 1].imag,
                     (stack[:, 0, 0] - stack[:, 1, 1]).real], axis=1)


def support_rank(X, tol: float = 1e-8) -> int:
    return int(np.sum(la.eigvalsh(hermitize(X)) > tol))


def fenchel_rate(game: QuantumGame, P: Sequence[np.ndarray], profile: Sequence[np.ndarray]) -> float:
    """sum_i tr[V_i(X)(X_i - P_i)], the time derivative of the Fenchel coupling to P."""
    return float(sum(
        _trace_pairing(V, np.asarray(X) - np.asarray(Pi))
        for V, X, Pi in zip(game.gradient_fields(profile), profile, P)
    ))


def regret(game: QuantumGame, player: int, trajectory: Trajectory, tolerance: float = 1e-4) -> RegretReport:
    """
    Realized regret of ``player`` against the best fixed state in hindsight,
    next to the constant bound |d theta(1/d) - theta(1)|.
    """
    gradients = trajectory.require_gradients()[player]
    states = trajectory.states[player]
    times = trajectory.times

    cumulative = hermitize(trapezoid(gradients, times, axis=0))
    eig = hermitian_eig(cumulative)
    realized_value = float(trapezoid(_trace_pairing(states, gradients), times))
    realized = float(eig.eigenvalues[0]) - realized_value

    kernel = trajectory.kernel_objects()[player]
    bound = kernel.regret_bound(game.player_dims[player])
    report = RegretReport(
        player=player,
        realized_regret=realized,
        bound=bound,
        best_fixed_state=eig.projector(0),
        horizon=trajectory.horizon,
        kernel=kernel.label(),
        tolerance=tolerance,
    )
    logger.info(f"Player {player} regret {realized:.6g} (bound {bound:.6g}) over T={trajectory.horizon:g}")
    return report


def fenchel_series(
    kernels: Optional[Sequence[RegularizerKernel]],
    P: Sequence[np.ndarray],
    trajectory: Trajectory,
) -> ConservationReport:
    scores = trajectory.require_dual_scores()
    kernels = trajectory.kernel_objects() if kernels is None else list(kernels)
    if len(P) != trajectory.n_players or len(kernels) != trajectory.n_players:
        raise DimensionMismatchError("Reference profile and kernels must have one entry per player")

    series = np.array([
        sum(fenchel_coupling(kernels[i], P[i], scores[i][k]) for i in range(trajectory.n_players))
        for k in range(trajectory.n_times)
    ])
    drift = float(np.max(np.abs(series - series[0])))
    logger.info(f"Fenchel coupling: F(0)={series[0]:.10g}, max drift {drift:.3e}")
    return ConservationReport(
        times=[float(t) for t in trajectory.times],
        series=[float(v) for v in series],
        max_drift=drift,
        initial_value=float(series[0]),
    )


def distance_from_start(trajectory: Trajectory) -> np.ndarray:
    squared = sum(
        np.sum(np.abs(stack - stack[0]) ** 2, axis=(1, 2)) for stack in trajectory.states
    )
    return np.sqrt(squared)


def recurrence_stats(trajectory: Trajectory, r_out: Optional[float] = None) -> RecurrenceReport:
    r_out = settings.DEFAULT_R_OUT if r_out is None else float(r_out)
    distance = distance_from_start(trajectory)
    times = trajectory.times

    outside = np.flatnonzero(distance > r_out)
    if outside.size == 0:
        later = distance[1:] if distance.size > 1 else distance
        return RecurrenceReport(
            departed=False,
            return_distance=float(np.min(later)),
            horizon=trajectory.horizon,
            r_out=r_out,
        )

    k_out = int(outside[0])
    tail = distance[k_out + 1:]
    if tail.size == 0:
        return RecurrenceReport(departed=True, departure_time=float(times[k_out]),
                                return_distance=float(distance[k_out]), horizon=trajectory.horizon, r_out=r_out)
    k_back = k_out + 1 + int(np.argmin(tail))
    closest = float(distance[k_back])
    report = RecurrenceReport(
        departed=True,
        departure_time=float(times[k_out]),
        return_distance=closest,
        return_time=float(times[k_back]),
        horizon=trajectory.horizon,
        r_out=r_out,
        returned=closest < 0.5 * r_out,
    )
    logger.info(
        f"Recurrence: departed at t={report.departure_time:.4g}, closest return {closest:.3e} at t={report.return_time:.4g}"
    )
    return report


def _sample_near(rng: np.random.Generator, P_star: Sequence[np.ndarray], radius: float) -> List[np.ndarray]:
    projector = EuclideanKernel()
    for _ in range(VS_MAX_ATTEMPTS):
        profile = []
        for P in P_star:
            d = P.shape[0]
            G = random_hermitian(rng, d, radius * rng.uniform(0.0, 1.0))
            profile.append(mirror(projector, np.asarray(P) + G))
        gaps = [frobenius(X - P) for X, P in zip(profile, P_star)]
        if max(gaps) <= radius and sum(gaps) > 0.0:
            return profile
    raise ConvergenceError(f"Could not draw a profile within radius {radius} of the reference profile")


def vs_probe(
    game: QuantumGame,
    P_star: Sequence[np.ndarray],
    radius: Optional[float] = None,
    samples: Optional[int] = None,
    rng_seed: int = 0,
) -> float:
    """
    Largest sampled value of sum_i tr[V_i(X)(X_i - P*_i)] over profiles within
    ``radius`` of P*. A negative value certifies the stability inequality on the
    sample set only.
    """
    radius = settings.DEFAULT_VS_RADIUS if radius is None else float(radius)
    samples = settings.DEFAULT_VS_SAMPLES if samples is None else int(samples)
    if radius <= 0:
        raise DomainError(f"vs_probe radius must be positive, got {radius}")
    P_star = [np.asarray(P, dtype=complex) for P in P_star]
    game.check_profile(P_star)

    seeds = np.random.SeedSequence(rng_seed).spawn(samples)

    def evaluate(seed: np.random.SeedSequence) -> float:
        profile = _sample_near(np.random.default_rng(seed), P_star, radius)
        return fenchel_rate(game, P_star, profile)

    values = parallel_map(evaluate, seeds)
    margin = float(np.max(values))
    logger.info(f"Variational stability probe: margin {margin:.6g} over {samples} samples (radius {radius})")
    return margin


def stationarity_residual(
    game: QuantumGame,
    kernels: Sequence[RegularizerKernel],
    P: Sequence[np.ndarray],
) -> float:
    gradients = game.gradient_fields(P)
    return float(sum(frobenius(qd_field(k, X, V)) for k, X, V in zip(kernels, P, gradients)))


def exploitability_series(game: QuantumGame, trajectory: Trajectory) -> np.ndarray:
    return np.array([game.exploitability(trajectory.profile_at(k)) for k in range(trajectory.n_times)])


def time_average(trajectory: Trajectory) -> List[np.ndarray]:
    if trajectory.n_times < 2:
        return [stack[0].copy() for stack in trajectory.states]
    span = trajectory.times[-1] - trajectory.times[0]
    return [hermitize(trapezoid(stack, trajectory.times, axis=0) / span) for stack in trajectory.states]


def regret_integrand(trajectory: Trajectory, player: int, best_state: np.ndarray) -> np.ndarray:
    """tr[V_i(t)(B - X_i(t))] along the run, for the CSV time series."""
    gradients = trajectory.require_gradients()[player]
    return _trace_pairing(gradients, np.asarray(best_state)[None, :, :] - trajectory.states[player])
