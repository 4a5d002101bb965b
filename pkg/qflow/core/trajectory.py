from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from qflow.core.errors import MissingDataError, SpecValidationError
from qflow.core.kernels import RegularizerKernel
from qflow.core.kernels_registry import builtin_kernel
from qflow.utils.serialization import decode_matrices, encode_matrices


@dataclass
class Trajectory:
    """
    Time-indexed record of one simulation run.

    Per-player arrays are stacked over record times: ``states[i][k]`` is the
    state of player i at ``times[k]``.
    """
    times: np.ndarray
    states: List[np.ndarray]
    gradients: Optional[List[np.ndarray]] = None
    dual_scores: Optional[List[np.ndarray]] = None
    kernels: List[str] = field(default_factory=list)
    space: str = "dual"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or self.times.size == 0:
            raise SpecValidationError("Trajectory needs a non-empty 1-D time vector")
        if np.any(np.diff(self.times) <= 0.0):
            raise SpecValidationError("Trajectory times must be strictly increasing")
        for stack in self.states:
            if stack.shape[0] != self.times.size:
                raise SpecValidationError("Every state stack must have one entry per record time")

    @property
    def n_players(self) -> int:
        return len(self.states)

    @property
    def n_times(self) -> int:
        return int(self.times.size)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    def profile_at(self, k: int) -> List[np.ndarray]:
        return [stack[k] for stack in self.states]

    def scores_at(self, k: int) -> List[np.ndarray]:
        return [stack[k] for stack in self.require_dual_scores()]

    def require_gradients(self) -> List[np.ndarray]:
        if self.gradients is None:
            raise MissingDataError("Trajectory carries no payoff gradients")
        return self.gradients

    def require_dual_scores(self) -> List[np.ndarray]:
        if self.dual_scores is None:
            raise MissingDataError(f"Trajectory integrated in the {self.space} space carries no dual scores")
        return self.dual_scores

    def kernel_objects(self) -> List[RegularizerKernel]:
        return [builtin_kernel(name) for name in self.kernels]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "space": self.space,
            "kernels": list(self.kernels),
            "times": [float(t) for t in self.times],
            "states": [encode_matrices(stack) for stack in self.states],
            "gradients": None if self.gradients is None else [encode_matrices(s) for s in self.gradients],
            "dual_scores": None if self.dual_scores is None else [encode_matrices(s) for s in self.dual_scores],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Trajectory":
        try:
            gradients = data.get("gradients")
            dual_scores = data.get("dual_scores")
            return cls(
                times=np.asarray(data["times"], dtype=float),
                states=[decode_matrices(s) for s in data["states"]],
                gradients=None if gradients is None else [decode_matrices(s) for s in gradients],
                dual_scores=None if dual_scores is None else [decode_matrices(s) for s in dual_scores],
                kernels=list(data.get("kernels", [])),
                space=data.get("space", "dual"),
            )
        except KeyError as e:
            raise SpecValidationError(f"Trajectory document is missing field {e}")
