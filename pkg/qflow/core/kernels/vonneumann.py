import numpy as np
from scipy.special import logsumexp, softmax, xlogy
from qflow.core.kernels.base import RegularizerKernel


class VonNeumannKernel(RegularizerKernel):
    """theta(x) = x log x (negative von Neumann entropy); the mirror map is the matrix softmax."""

    name = "vonneumann"
    steep = True
    strong_convexity = 1.0

    def theta(self, x):
        x = np.asarray(x, dtype=float)
        return xlogy(x, x)

    def dtheta(self, x):
        with np.errstate(divide="ignore"):
            return 1.0 + np.log(np.asarray(x, dtype=float))

    def ddtheta(self, x):
        with np.errstate(divide="ignore"):
            return 1.0 / np.asarray(x, dtype=float)

    def inv_dtheta(self, y):
        with np.errstate(over="ignore"):
            return np.exp(np.asarray(y, dtype=float) - 1.0)

    def closed_form_argmax(self, y):
        return softmax(np.asarray(y, dtype=float))

    def closed_form_conjugate(self, y):
        return float(logsumexp(np.asarray(y, dtype=float)))
