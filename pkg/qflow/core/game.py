"""
Quantum games: POVM payoff mechanism, expected payoffs and payoff gradients.

Player i occupies tensor factor i of the joint space, in ascending order.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np
import scipy.linalg as la

from qflow.core.errors import DimensionMismatchError, DomainError, SpecValidationError
from qflow.core.matrixcore import (
    PSD_TOL,
    as_density,
    as_hermitian,
    hermitize,
    identity,
    partial_trace,
    tensor_product_all,
)

logger = logging.getLogger(__name__)

COMPLETENESS_TOL = 1e-10
IMAG_TOL = 1e-10
ZERO_SUM_TOL = 1e-10


@dataclass(frozen=True)
class PovmOutcome:
    operator: np.ndarray
    payoffs: Tuple[float, ...]
    label: str = ""


class QuantumGame:
    """
    Finite N-player quantum game.

    The per-player payoff observables W_i = sum_w w_i(w) P_w are aggregated once
    at construction; every payoff and gradient evaluation contracts against them.
    """

    def __init__(
        self,
        player_dims: Sequence[int],
        outcomes: Sequence[PovmOutcome],
        zero_sum: bool = False,
        name: str = "game",
    ):
        self.player_dims = [int(d) for d in player_dims]
        if not self.player_dims or any(d <= 0 for d in self.player_dims):
            raise DimensionMismatchError(f"Player dimensions must be positive integers, got {list(player_dims)}")
        self.n_players = len(self.player_dims)
        self.joint_dim = int(np.prod(self.player_dims))
        self.name = name
        self.zero_sum = bool(zero_sum)

        if not outcomes:
            raise SpecValidationError("A quantum game needs at least one POVM outcome")

        checked = []
        for k, outcome in enumerate(outcomes):
            label = outcome.label or f"outcome_{k}"
            operator = as_hermitian(outcome.operator)
            if operator.shape != (self.joint_dim, self.joint_dim):
                raise DimensionMismatchError(
                    f"POVM operator {label} has shape {operator.shape}, expected joint dimension {self.joint_dim}"
                )
            if float(la.eigvalsh(operator)[0]) < -PSD_TOL:
                raise SpecValidationError(f"POVM operator {label} is not positive semi-definite")
            if len(outcome.payoffs) != self.n_players:
                raise DimensionMismatchError(
                    f"POVM outcome {label} has {len(outcome.payoffs)} payoffs, expected {self.n_players}"
                )
            checked.append(PovmOutcome(operator=operator, payoffs=tuple(float(w) for w in outcome.payoffs), label=label))
        self.outcomes: List[PovmOutcome] = checked

        total = sum(o.operator for o in self.outcomes)
        gap = float(np.linalg.norm(total - identity(self.joint_dim), "fro"))
        if gap > COMPLETENESS_TOL:
            raise SpecValidationError(f"POVM operators do not sum to the identity (Frobenius gap {gap:.3e})")

        self.aggregates: List[np.ndarray] = []
        for i in range(self.n_players):
            W = sum(o.payoffs[i] * o.operator for o in self.outcomes)
            W = hermitize(W)
            W.setflags(write=False)
            self.aggregates.append(W)

        if self.zero_sum:
            residue = float(np.linalg.norm(sum(self.aggregates), "fro"))
            if residue > ZERO_SUM_TOL * max(1.0, max(np.linalg.norm(W, "fro") for W in self.aggregates)):
                raise SpecValidationError(f"Game declared zero-sum but payoffs sum to a nonzero observable ({residue:.3e})")

        logger.debug(
            f"Built quantum game '{self.name}': dims={self.player_dims}, outcomes={len(self.outcomes)}, zero_sum={self.zero_sum}"
        )

    def __repr__(self) -> str:
        return f"QuantumGame(name={self.name!r}, player_dims={self.player_dims}, outcomes={len(self.outcomes)})"

    def check_profile(self, profile: Sequence[np.ndarray]) -> None:
        if len(profile) != self.n_players:
            raise DimensionMismatchError(f"Profile has {len(profile)} states, game has {self.n_players} players")
        for i, (state, d) in enumerate(zip(profile, self.player_dims)):
            if np.shape(state) != (d, d):
                raise DimensionMismatchError(f"State of player {i} has shape {np.shape(state)}, expected ({d}, {d})")

    def as_profile(self, states: Sequence) -> List[np.ndarray]:
        """Validate a list of density matrices against the player dimensions."""
        profile = [as_density(s) for s in states]
        self.check_profile(profile)
        return profile

    def _check_player(self, player: int) -> None:
        if not 0 <= player < self.n_players:
            raise DimensionMismatchError(f"Player index {player} out of range for {self.n_players} players")

    def payoff(self, player: int, profile: Sequence[np.ndarray]) -> float:
        """tr[(rho_1 x ... x rho_N) W_player]."""
        self._check_player(player)
        self.check_profile(profile)
        joint = tensor_product_all(profile)
        value = np.vdot(joint.conj().T, self.aggregates[player])
        scale = max(1.0, float(np.max(np.abs(self.aggregates[player]))))
        if abs(value.imag) > IMAG_TOL * scale:
            raise DomainError(f"Payoff has imaginary residue {value.imag:.3e}; profile is not Hermitian")
        return float(value.real)

    def payoffs(self, profile: Sequence[np.ndarray]) -> List[float]:
        return [self.payoff(i, profile) for i in range(self.n_players)]

    def gradient_field(self, player: int, profile: Sequence[np.ndarray]) -> np.ndarray:
        """
        Individual payoff gradient V_i with u_i(X_i; rho_-i) = tr(X_i V_i).

        Only the opponents' states enter: the factor of player i is replaced by
        the identity before contracting against W_i.
        """
        self._check_player(player)
        self.check_profile(profile)
        factors = [identity(d) if j == player else np.asarray(s, dtype=complex)
                   for j, (s, d) in enumerate(zip(profile, self.player_dims))]
        contracted = tensor_product_all(factors) @ self.aggregates[player]
        return hermitize(partial_trace(contracted, self.player_dims, player))

    def gradient_fields(self, profile: Sequence[np.ndarray]) -> List[np.ndarray]:
        return [self.gradient_field(i, profile) for i in range(self.n_players)]

    def outcome_probabilities(self, profile: Sequence[np.ndarray]) -> np.ndarray:
        self.check_profile(profile)
        joint = tensor_product_all(profile)
        return np.array([float(np.vdot(joint.conj().T, o.operator).real) for o in self.outcomes])

    def exploitability(self, profile: Sequence[np.ndarray]) -> float:
        """sum_i [lambda_max(V_i) - tr(rho_i V_i)]; zero exactly at Nash equilibria."""
        gap = 0.0
        for i, V in enumerate(self.gradient_fields(profile)):
            best = float(la.eigvalsh(V)[-1])
            realized = float(np.vdot(np.asarray(profile[i]).conj().T, V).real)
            gap += best - realized
        return max(gap, 0.0)


def from_classical(tables: Sequence, zero_sum: Optional[bool] = None, name: str = "classical") -> QuantumGame:
    """
    Lift a classical normal-form game to a quantum game.

    One outcome per joint pure action, with the rank-1 projector onto the joint
    computational-basis vector as its POVM element.
    """
    arrays = [np.asarray(t, dtype=float) for t in tables]
    if not arrays:
        raise SpecValidationError("At least one payoff table is required")
    shape = arrays[0].shape
    if any(a.shape != shape for a in arrays):
        raise DimensionMismatchError(f"Payoff tables have mismatched shapes: {[a.shape for a in arrays]}")
    if len(shape) != len(arrays):
        raise DimensionMismatchError(
            f"{len(arrays)} players need {len(arrays)}-dimensional tables, got shape {shape}"
        )
    if not all(np.all(np.isfinite(a)) for a in arrays):
        raise SpecValidationError("Payoff tables contain NaN or Inf")

    joint_dim = int(np.prod(shape))
    outcomes = []
    for flat, action in enumerate(np.ndindex(*shape)):
        P = np.zeros((joint_dim, joint_dim), dtype=complex)
        P[flat, flat] = 1.0
        outcomes.append(PovmOutcome(
            operator=P,
            payoffs=tuple(float(a[action]) for a in arrays),
            label="(" + ",".join(str(k) for k in action) + ")",
        ))

    if zero_sum is None:
        zero_sum = bool(np.allclose(sum(arrays), 0.0, atol=ZERO_SUM_TOL))
    return QuantumGame(list(shape), outcomes, zero_sum=zero_sum, name=name)


def constant_game(player_dims: Sequence[int], value: float = 0.0) -> QuantumGame:
    """Single-outcome game paying ``value`` to everybody regardless of play."""
    joint_dim = int(np.prod(player_dims))
    outcome = PovmOutcome(operator=identity(joint_dim), payoffs=tuple(float(value) for _ in player_dims), label="all")
    return QuantumGame(player_dims, [outcome], zero_sum=(value == 0.0 and len(player_dims) > 0), name="constant")


def random_povm_game(
    rng: np.random.Generator,
    player_dims: Sequence[int],
    n_outcomes: int = 4,
    name: str = "random_povm",
) -> QuantumGame:
    """
    Game with a random full-rank POVM and payoffs uniform in [-1, 1].

    Random PSD operators A_w are normalized as S^{-1/2} A_w S^{-1/2} with
    S = sum_w A_w, so the elements sum to the identity.
    """
    joint_dim = int(np.prod(player_dims))
    raw = []
    for _ in range(n_outcomes):
        G = rng.standard_normal((joint_dim, joint_dim)) + 1j * rng.standard_normal((joint_dim, joint_dim))
        raw.append(G @ G.conj().T)
    total = hermitize(sum(raw))
    evals, evecs = la.eigh(total)
    inv_sqrt = (evecs / np.sqrt(evals)) @ evecs.conj().T
    outcomes = [
        PovmOutcome(
            operator=hermitize(inv_sqrt @ A @ inv_sqrt),
            payoffs=tuple(float(w) for w in rng.uniform(-1.0, 1.0, size=len(player_dims))),
            label=f"w{k}",
        )
        for k, A in enumerate(raw)
    ]
    return QuantumGame(player_dims, outcomes, name=name)
