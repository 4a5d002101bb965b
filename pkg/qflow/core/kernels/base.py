from abc import ABC, abstractmethod
from typing import Optional
import logging

import numpy as np

logger = logging.getLogger(__name__)


class RegularizerKernel(ABC):
    """
    Scalar convex kernel theta on [0, 1] inducing the trace regularizer h(X) = tr theta(X).

    Subclasses provide theta and its first two derivatives, plus the inverse of the
    first derivative. All four act elementwise on numpy arrays.
    """

    name: str = "kernel"
    steep: bool = False
    strong_convexity: float = 1.0

    @abstractmethod
    def theta(self, x: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def dtheta(self, x: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def ddtheta(self, x: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def inv_dtheta(self, y: np.ndarray) -> np.ndarray:
        pass

    def closed_form_argmax(self, y: np.ndarray) -> Optional[np.ndarray]:
        """Simplex maximizer in closed form, or None to fall back on root-finding."""
        return None

    def closed_form_conjugate(self, y: np.ndarray) -> Optional[float]:
        return None

    def trace_theta(self, eigenvalues: np.ndarray) -> float:
        """tr theta(X) from the spectrum of X, with round-off negatives clipped to zero."""
        x = np.clip(np.asarray(eigenvalues, dtype=float), 0.0, None)
        return float(np.sum(self.theta(x)))

    def regret_bound(self, d: int) -> float:
        return float(abs(d * self.theta(np.array(1.0 / d)) - self.theta(np.array(1.0))))

    def label(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.label()!r})"
