import numpy as np
from qflow.core.kernels.base import RegularizerKernel


class EuclideanKernel(RegularizerKernel):
    """theta(x) = x^2/2: the mirror map is the Frobenius projection onto the spectraplex."""

    name = "euclidean"
    steep = False
    strong_convexity = 1.0

    def theta(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * x * x

    def dtheta(self, x):
        return np.asarray(x, dtype=float)

    def ddtheta(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def inv_dtheta(self, y):
        return np.asarray(y, dtype=float)
