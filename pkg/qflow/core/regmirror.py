"""
Mirror maps (regularized best responses) on the spectraplex, convex conjugates
and the Fenchel coupling.

The spectraplex problem max_X {tr(YX) - tr theta(X)} shares an eigenbasis with
Y, so every operation reduces to the probability simplex over the eigenvalues
of Y.
"""
from typing import List, Optional, Tuple
import logging

import numpy as np
import scipy.linalg as la
from scipy.optimize import brentq

from qflow.config import settings
from qflow.core.errors import ConvergenceError, DomainError
from qflow.core.kernels import RegularizerKernel
from qflow.core.kernels_registry import builtin_kernel
from qflow.core.matrixcore import EigenDecomposition, hermitian_eig, spectral_apply

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-12
ROOT_MAX_ITER = 500
BRACKET_MAX_EXPANSIONS = 60

__all__ = [
    "builtin_kernel",
    "simplex_argmax",
    "mirror",
    "conjugate",
    "fenchel_coupling",
    "dual_preimage",
    "validate_kernel",
]


def simplex_argmax(kernel: RegularizerKernel, y, max_iter: int = ROOT_MAX_ITER) -> np.ndarray:
    """
    argmax over the unit simplex of sum_k [y_k x_k - theta(x_k)].

    Solves theta'(x_k) = y_k - lam on the support by bisection-type root finding
    on g(lam) = sum_k clip(inv_dtheta(y_k - lam), 0, 1) - 1, which is monotone
    decreasing. Coordinates pushed below zero are clipped, which is the
    active-set rule for non-steep kernels.
    """
    y = np.asarray(y, dtype=float).ravel()
    if y.size == 0:
        raise DomainError("simplex_argmax needs at least one coordinate")
    if not np.all(np.isfinite(y)):
        raise DomainError("Score vector contains NaN or Inf")
    d = y.size
    if d == 1:
        return np.ones(1)

    closed = kernel.closed_form_argmax(y)
    if closed is not None:
        return np.asarray(closed, dtype=float)

    def g(lam: float) -> float:
        with np.errstate(all="ignore"):
            x = np.clip(kernel.inv_dtheta(y - lam), 0.0, 1.0)
        return float(np.sum(x)) - 1.0

    lo = float(y.min() - kernel.dtheta(1.0))
    hi = float(y.max() - kernel.dtheta(1e-6 / d))
    width = max(hi - lo, 1.0)
    for _ in range(BRACKET_MAX_EXPANSIONS):
        if g(lo) >= 0.0:
            break
        logger.debug(f"Expanding lower bracket for {kernel.label()}: lo={lo:.6g}")
        lo -= width
        width *= 2.0
    for _ in range(BRACKET_MAX_EXPANSIONS):
        if g(hi) <= 0.0:
            break
        logger.debug(f"Expanding upper bracket for {kernel.label()}: hi={hi:.6g}")
        hi += width
        width *= 2.0
    if g(lo) < 0.0 or g(hi) > 0.0:
        raise ConvergenceError(f"Could not bracket the simplex multiplier for kernel {kernel.label()}")

    try:
        lam = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=max_iter)
    except (RuntimeError, ValueError) as e:
        raise ConvergenceError(f"Simplex multiplier root-finding failed for kernel {kernel.label()}: {e}")

    with np.errstate(all="ignore"):
        x = np.clip(kernel.inv_dtheta(y - lam), 0.0, 1.0)
    total = float(np.sum(x))
    if not np.isfinite(total) or total <= 0.0:
        raise ConvergenceError(f"Degenerate simplex solution for kernel {kernel.label()}")
    if abs(total - 1.0) > ROOT_TOL:
        logger.debug(f"Simplex residual {total - 1.0:.3e} for kernel {kernel.label()}, renormalizing")
    if abs(total - 1.0) > 1e-6:
        raise ConvergenceError(
            f"Simplex multiplier did not converge for kernel {kernel.label()} (residual {total - 1.0:.3e})"
        )
    return x / total


def mirror_spectrum(kernel: RegularizerKernel, Y) -> Tuple[EigenDecomposition, np.ndarray]:
    eig = hermitian_eig(Y)
    return eig, simplex_argmax(kernel, eig.eigenvalues)


def mirror(kernel: RegularizerKernel, Y) -> np.ndarray:
    """Regularized best response Q(Y) as a density matrix commuting with Y."""
    eig, x = mirror_spectrum(kernel, Y)
    return spectral_apply(eig, x)


def conjugate(kernel: RegularizerKernel, Y) -> float:
    """h*(Y) = tr(Y Q(Y)) - tr theta(Q(Y))."""
    eig, x = mirror_spectrum(kernel, Y)
    closed = kernel.closed_form_conjugate(eig.eigenvalues)
    if closed is not None:
        return closed
    return float(np.dot(eig.eigenvalues, x) - kernel.trace_theta(x))


def fenchel_coupling(kernel: RegularizerKernel, P, Y) -> float:
    """F(P, Y) = tr theta(P) + h*(Y) - tr(PY); non-negative, zero iff P = Q(Y)."""
    P = np.asarray(P, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    p = la.eigvalsh(0.5 * (P + P.conj().T))
    pairing = float(np.real(np.vdot(P.conj().T, Y)))
    return kernel.trace_theta(p) + conjugate(kernel, Y) - pairing


def dual_preimage(kernel: RegularizerKernel, X, floor: Optional[float] = None) -> np.ndarray:
    """A score matrix Y with Q(Y) = X, namely theta'(X) on the floored spectrum."""
    floor = settings.EIGEN_FLOOR if floor is None else floor
    eig = hermitian_eig(X)
    x = np.clip(eig.eigenvalues, 0.0, None)
    if kernel.steep:
        x = np.maximum(x, floor)
    with np.errstate(divide="ignore"):
        values = kernel.dtheta(x)
    if not np.all(np.isfinite(values)):
        raise DomainError(f"theta' undefined on the spectrum of the state for kernel {kernel.label()}")
    return spectral_apply(eig, values)


def validate_kernel(kernel: RegularizerKernel, grid: Optional[np.ndarray] = None) -> List[str]:
    """Check the kernel invariants on a grid of (0, 1]; returns the violated properties."""
    grid = np.geomspace(1e-6, 1.0, 400) if grid is None else np.asarray(grid, dtype=float)
    violations = []

    if abs(float(kernel.theta(np.array(0.0)))) > 1e-12:
        violations.append("theta(0) = 0")
    if float(np.min(kernel.ddtheta(grid))) < kernel.strong_convexity * (1.0 - 1e-9):
        violations.append("inf theta'' >= K")
    roundtrip = kernel.inv_dtheta(kernel.dtheta(grid))
    if not np.allclose(roundtrip, grid, rtol=1e-9, atol=1e-9):
        violations.append("inv_dtheta(dtheta(x)) = x")
    # theta' must keep falling without bound; x log x only diverges logarithmically
    with np.errstate(divide="ignore", over="ignore"):
        steep_now = bool(kernel.dtheta(np.array(1e-300)) < kernel.dtheta(np.array(1e-150)) - 100.0)
    if steep_now != bool(kernel.steep):
        violations.append("steep flag")

    for violation in violations:
        logger.warning(f"Kernel {kernel.label()} violates invariant: {violation}")
    return violations
