import numpy as np
from qflow.core.errors import DomainError
from qflow.core.kernels.base import RegularizerKernel

# Grid used to evaluate the strong convexity modulus inf theta'' at construction
_CONVEXITY_GRID = np.geomspace(1e-14, 1.0, 2001)


class TsallisKernel(RegularizerKernel):
    """theta(x) = (x - x^q) / (q (1 - q)), steep for q < 1."""

    name = "tsallis"

    def __init__(self, q: float):
        q = float(q)
        if not (0.0 < q < 1.0 or 1.0 < q <= 2.0):
            raise DomainError(f"Tsallis exponent must lie in (0,1) or (1,2], got q={q}")
        self.q = q
        self.steep = q < 1.0
        self._scale = q * (1.0 - q)
        self.strong_convexity = float(np.min(self.ddtheta(_CONVEXITY_GRID)))

    def label(self) -> str:
        return f"tsallis:{self.q!r}"

    def theta(self, x):
        x = np.asarray(x, dtype=float)
        return (x - np.power(x, self.q)) / self._scale

    def dtheta(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return (1.0 - self.q * np.power(x, self.q - 1.0)) / self._scale

    def ddtheta(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.power(x, self.q - 2.0)

    def inv_dtheta(self, y):
        y = np.asarray(y, dtype=float)
        base = (1.0 - self._scale * y) / self.q
        # Outside the range of theta': +inf above it when steep, 0 below theta'(0) otherwise
        beyond = np.inf if self.q < 1.0 else 0.0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            x = np.power(np.where(base > 0.0, base, 1.0), 1.0 / (self.q - 1.0))
        return np.where(base > 0.0, x, beyond)
