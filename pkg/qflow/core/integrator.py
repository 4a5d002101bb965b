"""
Time integration of the learning dynamics.

Three state spaces are supported: ``dual`` integrates the scores Y, ``quotient``
integrates traceless scores Z, ``primal`` integrates the density matrices X
directly through the state dynamics. States in the dual and quotient spaces are
recovered with the mirror map at record times.
"""
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence
import logging
import time

import numpy as np
from scipy.integrate import solve_ivp

from qflow.config import SUPPORTED_INTEGRATORS, SUPPORTED_SPACES, settings
from qflow.core.dynamics import dual_field, primal_field, quotient_field
from qflow.core.errors import DimensionMismatchError, IntegrationError, SpecValidationError
from qflow.core.game import QuantumGame
from qflow.core.kernels import RegularizerKernel
from qflow.core.matrixcore import (
    as_density,
    hermitian_eig,
    hermitize,
    maximally_mixed,
    random_hermitian,
    traceless_part,
)
from qflow.core.regmirror import dual_preimage, mirror
from qflow.core.trajectory import Trajectory

logger = logging.getLogger(__name__)

INITIAL_KINDS = ["dual", "primal", "uniform", "random"]


@dataclass
class InitialState:
    kind: str = "uniform"
    matrix: Optional[np.ndarray] = None
    seed: Optional[int] = None
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise SpecValidationError(f"Unknown initial condition kind {self.kind!r}; expected one of {INITIAL_KINDS}")
        if self.kind in ("dual", "primal") and self.matrix is None:
            raise SpecValidationError(f"Initial condition of kind {self.kind!r} needs a matrix")


@dataclass
class SimulationConfig:
    kernels: List[RegularizerKernel]
    horizon: float
    initial: List[InitialState]
    integrator: str = "dopri45"
    step: float = field(default_factory=lambda: settings.DEFAULT_RK4_STEP)
    rtol: float = field(default_factory=lambda: settings.DEFAULT_RTOL)
    atol: float = field(default_factory=lambda: settings.DEFAULT_ATOL)
    record_stride: float = field(default_factory=lambda: settings.DEFAULT_RECORD_STRIDE)
    space: str = "dual"

    def __post_init__(self):
        if self.space not in SUPPORTED_SPACES:
            raise SpecValidationError(f"Unsupported space {self.space!r}; expected one of {SUPPORTED_SPACES}")
        if self.integrator not in SUPPORTED_INTEGRATORS:
            raise SpecValidationError(
                f"Unsupported integrator {self.integrator!r}; expected one of {SUPPORTED_INTEGRATORS}"
            )
        if not self.horizon > 0:
            raise SpecValidationError(f"Horizon must be positive, got {self.horizon}")
        if not self.step > 0:
            raise SpecValidationError(f"RK4 step must be positive, got {self.step}")
        if not (self.rtol > 0 and self.atol > 0):
            raise SpecValidationError(f"rtol and atol must be positive, got {self.rtol}, {self.atol}")
        if not self.record_stride > 0:
            raise SpecValidationError(f"record_stride must be positive, got {self.record_stride}")

    def record_times(self) -> np.ndarray:
        n = max(1, int(round(self.horizon / self.record_stride)))
        if abs(n * self.record_stride - self.horizon) > 1e-9 * self.horizon:
            logger.info(f"record_stride adjusted to {self.horizon / n:.6g} to land on the horizon")
        return np.linspace(0.0, self.horizon, n + 1)


def _pack(mats: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([np.asarray(M, dtype=complex).ravel() for M in mats])


def _unpack(z: np.ndarray, dims: Sequence[int]) -> List[np.ndarray]:
    mats, offset = [], 0
    for d in dims:
        mats.append(hermitize(z[offset:offset + d * d].reshape(d, d)))
        offset += d * d
    return mats


def resolve_initial(
    game: QuantumGame,
    config: SimulationConfig,
) -> List[np.ndarray]:
    """Initial point of the selected space: scores for dual/quotient, states for primal."""
    if len(config.initial) != game.n_players:
        raise DimensionMismatchError(f"Got {len(config.initial)} initial conditions for {game.n_players} players")
    if len(config.kernels) != game.n_players:
        raise DimensionMismatchError(f"Got {len(config.kernels)} kernels for {game.n_players} players")

    points = []
    for i, (init, kernel, d) in enumerate(zip(config.initial, config.kernels, game.player_dims)):
        if init.matrix is not None and np.shape(init.matrix) != (d, d):
            raise DimensionMismatchError(f"Initial matrix of player {i} has shape {np.shape(init.matrix)}, expected ({d}, {d})")

        if config.space == "primal":
            if not kernel.steep:
                raise SpecValidationError(
                    f"Primal integration requires steep kernels; player {i} uses {kernel.label()}"
                )
            if init.kind == "primal":
                X = as_density(init.matrix)
            elif init.kind == "uniform":
                X = maximally_mixed(d)
            elif init.kind == "random":
                X = mirror(kernel, random_hermitian(np.random.default_rng(init.seed), d, init.scale))
            else:
                X = mirror(kernel, hermitize(init.matrix))
            if hermitian_eig(X).eigenvalues[-1] <= settings.EIGEN_FLOOR:
                raise SpecValidationError(f"Primal integration requires a full-rank initial state for player {i}")
            points.append(np.array(X, dtype=complex))
            continue

        if init.kind == "dual":
            Y = hermitize(init.matrix)
        elif init.kind == "primal":
            Y = dual_preimage(kernel, as_density(init.matrix))
        elif init.kind == "uniform":
            Y = np.zeros((d, d), dtype=complex)
        else:
            Y = random_hermitian(np.random.default_rng(init.seed), d, init.scale)
        points.append(traceless_part(Y) if config.space == "quotient" else Y)
    return points


def _rhs_factory(game: QuantumGame, config: SimulationConfig) -> Callable[[float, np.ndarray], np.ndarray]:
    dims = game.player_dims
    kernels = config.kernels
    if config.space == "dual":
        field_fn = dual_field
    elif config.space == "quotient":
        field_fn = quotient_field
    else:
        field_fn = primal_field

    def rhs(t: float, z: np.ndarray) -> np.ndarray:
        return _pack(field_fn(game, kernels, _unpack(z, dims)))

    return rhs


def _rk4(rhs, z0: np.ndarray, times: np.ndarray, step: float) -> np.ndarray:
    substeps = max(1, int(round((times[1] - times[0]) / step))) if times.size > 1 else 1
    out = np.empty((times.size, z0.size), dtype=complex)
    out[0] = z0
    z = z0.copy()
    for k in range(1, times.size):
        t = times[k - 1]
        h = (times[k] - times[k - 1]) / substeps
        for _ in range(substeps):
            k1 = rhs(t, z)
            k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1)
            k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2)
            k4 = rhs(t + h, z + h * k3)
            z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        out[k] = z
    return out


def integrate(game: QuantumGame, config: SimulationConfig) -> Trajectory:
    times = config.record_times()
    z0 = _pack(resolve_initial(game, config))
    rhs = _rhs_factory(game, config)

    start = time.perf_counter()
    logger.info(
        f"Integrating {config.space} dynamics of '{game.name}' with {config.integrator} to T={config.horizon} "
        f"({times.size} record times, kernels={[k.label() for k in config.kernels]})"
    )

    if config.integrator == "dopri45":
        sol = solve_ivp(rhs, (0.0, config.horizon), z0, method="RK45", t_eval=times,
                        rtol=config.rtol, atol=config.atol)
        if not sol.success:
            raise IntegrationError(f"dopri45 integration failed at t={sol.t[-1] if sol.t.size else 0.0:.6g}: {sol.message}")
        path = sol.y.T
        logger.info(f"dopri45 finished: {sol.nfev} field evaluations in {time.perf_counter() - start:.2f}s")
    else:
        path = _rk4(rhs, z0, times, config.step)
        if not np.all(np.isfinite(path)):
            raise IntegrationError("rk4 integration produced non-finite values")
        logger.info(f"rk4 finished in {time.perf_counter() - start:.2f}s")

    return _record(game, config, times, path)


def _record(game: QuantumGame, config: SimulationConfig, times: np.ndarray, path: np.ndarray) -> Trajectory:
    dims = game.player_dims
    n = times.size
    states = [np.empty((n, d, d), dtype=complex) for d in dims]
    gradients = [np.empty((n, d, d), dtype=complex) for d in dims]
    scores = None if config.space == "primal" else [np.empty((n, d, d), dtype=complex) for d in dims]

    for k in range(n):
        point = _unpack(path[k], dims)
        if scores is None:
            profile = point
        else:
            profile = [mirror(kernel, Y) for kernel, Y in zip(config.kernels, point)]
            for i, Y in enumerate(point):
                scores[i][k] = Y
        for i, (X, V) in enumerate(zip(profile, game.gradient_fields(profile))):
            states[i][k] = X
            gradients[i][k] = V

    return Trajectory(
        times=times,
        states=states,
        gradients=gradients,
        dual_scores=scores,
        kernels=[k.label() for k in config.kernels],
        space=config.space,
    )
