"""
Built-in oracle suite behind ``qflow verify``.

Each oracle checks one numerical property of the engine against an
independent computation (brute-force optimization, quadrature, finite
differences, long-horizon runs) and reports a VerifyResult. ``loose`` scales
every tolerance by LOOSE_FACTOR.
"""
from typing import Callable, Dict, List, Optional, Sequence
import logging
import time

import numpy as np
import scipy.linalg as la
from numpy.polynomial.legendre import leggauss

from qflow.core.analysis import (
    bloch_coords,
    fenchel_rate,
    fenchel_series,
    purity,
    recurrence_stats,
    regret,
    stationarity_residual,
    vs_probe,
)
from qflow.core.dynamics import qd_field, qrd_field, quotient_field
from qflow.core.errors import QflowError, SpecValidationError
from qflow.core.game import QuantumGame, from_classical, random_povm_game
from qflow.core.integrator import InitialState, SimulationConfig, integrate
from qflow.core.kernels import EuclideanKernel, RegularizerKernel, TsallisKernel, VonNeumannKernel
from qflow.core.matrixcore import (
    func_calculus,
    frobenius,
    hermitian_eig,
    hermitize,
    maximally_mixed,
    partial_trace,
    random_density,
    random_hermitian,
    spectral_apply,
    tensor_product,
    traceless_basis,
    traceless_part,
)
from qflow.core.regmirror import conjugate, dual_preimage, fenchel_coupling, mirror, validate_kernel
from qflow.models.report import VerifyResult
from qflow.utils.thread_pool import parallel_map

logger = logging.getLogger(__name__)

LOOSE_FACTOR = 10.0

_CURVATURE_GRID = np.geomspace(1e-14, 1.0, 200)
FIXED_STEP_MAX_CURVATURE = 1e3

DOMINANT_PAYOFF = np.array([[2.0, 1.0], [-2.0, -1.0]])
MATCHING_PENNIES_PAYOFF = np.array([[1.0, -1.0], [-1.0, 1.0]])


def dominant_game() -> QuantumGame:
    """2x2 zero-sum game whose classical strict equilibrium is (row 1, column 2)."""
    return from_classical([DOMINANT_PAYOFF, -DOMINANT_PAYOFF], name="dominant")


def dominant_initial() -> List[InitialState]:
    return [
        InitialState(kind="primal", matrix=np.diag([0.2, 0.8]).astype(complex)),
        InitialState(kind="primal", matrix=np.diag([0.8, 0.2]).astype(complex)),
    ]


def dominant_equilibrium() -> List[np.ndarray]:
    return [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]


def matching_pennies_game() -> QuantumGame:
    return from_classical([MATCHING_PENNIES_PAYOFF, -MATCHING_PENNIES_PAYOFF], name="matching_pennies")


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the unit simplex by sorting."""
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.count_nonzero(u - cssv / ind > 0)
    return np.maximum(v - cssv[rho - 1] / rho, 0.0)


def project_spectraplex(M: np.ndarray) -> np.ndarray:
    eig = hermitian_eig(hermitize(M))
    return spectral_apply(eig, project_simplex(eig.eigenvalues))


def brute_force_mirror(kernel: RegularizerKernel, Y: np.ndarray, max_iter: int = 5000, tol: float = 1e-8) -> np.ndarray:
    """
    Maximize tr(YX) - tr theta(X) over the spectraplex by accelerated projected
    gradient ascent (FISTA with adaptive restart), using theta and theta' only.

    Kernels whose curvature stays bounded on [0, 1] take the fixed step 1/L;
    the others backtrack.
    """
    floor = 1e-14
    Y = hermitize(Y)

    def objective(X):
        return float(np.real(np.trace(Y @ X))) - kernel.trace_theta(la.eigvalsh(hermitize(X)))

    def gradient(X):
        return Y - func_calculus(X, lambda x: kernel.dtheta(np.maximum(x, floor)))

    with np.errstate(divide="ignore", over="ignore"):
        curvature = float(np.max(kernel.ddtheta(_CURVATURE_GRID)))
    fixed = np.isfinite(curvature) and curvature <= FIXED_STEP_MAX_CURVATURE
    step = 1.0 / curvature if fixed else 1.0

    X = maximally_mixed(Y.shape[0])
    f_X = objective(X)
    Z, t = X, 1.0
    for _ in range(max_iter):
        G = gradient(Z)
        f_Z = objective(Z)
        while True:
            X_new = project_spectraplex(Z + step * G)
            D = X_new - Z
            f_new = objective(X_new)
            if fixed:
                break
            if f_new >= f_Z + float(np.real(np.vdot(D, G))) - frobenius(D) ** 2 / (2.0 * step) - 1e-13 * max(1.0, abs(f_Z)):
                break
            step *= 0.5
            if step < 1e-14:
                return X if f_X >= f_Z else Z
        # Gradient mapping norm at Z; bounds the distance to the maximizer by strong concavity
        if frobenius(D) / step < tol:
            return X_new

        if f_new < f_X:
            t_next, Z = 1.0, X_new
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            momentum = (t - 1.0) / t_next
            Z = X_new if momentum == 0.0 else project_spectraplex(X_new + momentum * (X_new - X))
        X, f_X, t = X_new, f_new, t_next
        if not fixed:
            step = min(step * 1.25, 1.0)
    logger.debug(f"brute_force_mirror hit max_iter={max_iter} for kernel {kernel.label()}")
    return X


def _fenchel_drift(game: QuantumGame, equilibrium, rtol: float, atol: float, seed: int) -> float:
    config = SimulationConfig(
        kernels=[VonNeumannKernel(), VonNeumannKernel()],
        horizon=100.0,
        initial=[InitialState(kind="random", seed=seed), InitialState(kind="random", seed=seed + 1)],
        rtol=rtol,
        atol=atol,
        record_stride=0.1,
    )
    return fenchel_series(None, equilibrium, integrate(game, config)).max_drift


class VerifyService:
    """
    Runs the oracle suite.

    ``mirror_kernels`` replaces the kernels exercised by the mirror-optimality
    oracle, which is how a deliberately broken kernel is checked to fail.
    """

    def __init__(self, loose: bool = False, seed: int = 0,
                 mirror_kernels: Optional[Sequence[RegularizerKernel]] = None):
        self.scale = LOOSE_FACTOR if loose else 1.0
        self.seed = seed
        self.mirror_kernels = list(mirror_kernels) if mirror_kernels is not None else None
        self.oracles: Dict[str, Callable[[], VerifyResult]] = {
            "kernel_invariants": self.kernel_invariants,
            "mirror_optimality": self.mirror_optimality,
            "qrd_quadrature": self.qrd_quadrature,
            "gradient_finite_difference": self.gradient_finite_difference,
            "quotient_divergence": self.quotient_divergence,
            "state_dynamics_consistency": self.state_dynamics_consistency,
            "fenchel_derivative": self.fenchel_derivative,
            "fenchel_conservation": self.fenchel_conservation,
            "regret_bound": self.regret_bound,
            "recurrence": self.recurrence,
            "pure_convergence": self.pure_convergence,
            "variational_stability": self.variational_stability,
            "stationarity": self.stationarity,
            "matrixcore_invariants": self.matrixcore_invariants,
            "game_invariants": self.game_invariants,
            "mirror_invariants": self.mirror_invariants,
            "vonneumann_specialization": self.vonneumann_specialization,
            "primal_rank": self.primal_rank,
            "bloch_norm_bound": self.bloch_norm_bound,
        }

    def _rng(self, offset: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, offset])

    def _result(self, name: str, value: float, tolerance: float, detail: Optional[str] = None,
                passed: Optional[bool] = None) -> VerifyResult:
        passed = bool(value <= tolerance) if passed is None else bool(passed)
        return VerifyResult(name=name, passed=passed, value=float(value), tolerance=tolerance, detail=detail)

    def run(self, only: Optional[str] = None) -> List[VerifyResult]:
        if only is not None and only not in self.oracles:
            raise SpecValidationError(f"Unknown oracle {only!r}; available: {', '.join(self.oracles)}")
        names = [only] if only is not None else list(self.oracles)

        results = []
        for name in names:
            start = time.perf_counter()
            try:
                result = self.oracles[name]()
            except QflowError as e:
                logger.warning(f"Oracle {name} raised {e.error_code}: {e.message}")
                result = VerifyResult(name=name, passed=False, value=float("nan"), tolerance=0.0,
                                      detail=f"{e.error_code}: {e.message}")
            except Exception as e:
                logger.error(f"Oracle {name} crashed: {e}", exc_info=True)
                result = VerifyResult(name=name, passed=False, value=float("nan"), tolerance=0.0,
                                      detail=f"{type(e).__name__}: {e}")
            result.elapsed = time.perf_counter() - start
            status = "PASS" if result.passed else "FAIL"
            logger.info(f"[{status}] {name}: value={result.value:.3e} tol={result.tolerance:.1e} ({result.elapsed:.2f}s)")
            results.append(result)
        return results

    # regmirror

    def kernel_invariants(self) -> VerifyResult:
        kernels = [EuclideanKernel(), VonNeumannKernel(), TsallisKernel(0.5), TsallisKernel(1.5)]
        violations = {k.label(): validate_kernel(k) for k in kernels}
        broken = {label: v for label, v in violations.items() if v}
        return self._result("kernel_invariants", float(len(broken)), 0.0,
                            detail=str(broken) if broken else None)

    def mirror_optimality(self) -> VerifyResult:
        rng = self._rng(1)
        kernels = self.mirror_kernels or [EuclideanKernel(), VonNeumannKernel(), TsallisKernel(0.5)]
        worst, worst_case = 0.0, ""
        for case in range(50):
            kernel = kernels[case % len(kernels)]
            d = int(rng.integers(2, 5))
            Y = random_hermitian(rng, d, float(rng.uniform(0.5, 3.0)))
            gap = frobenius(mirror(kernel, Y) - brute_force_mirror(kernel, Y))
            if gap > worst:
                worst, worst_case = gap, f"{kernel.label()}, d={d}"
        return self._result("mirror_optimality", worst, 1e-5 * self.scale, detail=f"worst case {worst_case}")

    # dynamics

    def qrd_quadrature(self) -> VerifyResult:
        rng = self._rng(2)
        nodes, weights = leggauss(32)
        s_values = 0.5 * (nodes + 1.0)
        worst = 0.0
        for _ in range(100):
            d = int(rng.integers(2, 6))
            X = random_density(rng, d, min_eigenvalue=0.02)
            V = random_hermitian(rng, d, float(rng.uniform(0.5, 2.0)))
            eig = hermitian_eig(X)
            integral = np.zeros((d, d), dtype=complex)
            for s, w in zip(s_values, weights):
                left = spectral_apply(eig, eig.eigenvalues ** (1.0 - s))
                right = spectral_apply(eig, eig.eigenvalues ** s)
                integral += 0.5 * w * (left @ V @ right)
            expected = integral - np.real(np.trace(X @ V)) * X
            worst = max(worst, float(np.max(np.abs(qrd_field(X, V) - expected))))
        return self._result("qrd_quadrature", worst, 1e-8 * self.scale)

    def gradient_finite_difference(self) -> VerifyResult:
        rng = self._rng(3)
        games = [random_povm_game(rng, [2, 3]), random_povm_game(rng, [2, 2, 2], n_outcomes=6), dominant_game()]
        eps = 1e-6
        worst = 0.0
        for game in games:
            for _ in range(5):
                profile = [random_density(rng, d, 0.01) for d in game.player_dims]
                for i, d in enumerate(game.player_dims):
                    V = game.gradient_field(i, profile)
                    H = random_hermitian(rng, d)
                    plus = list(profile)
                    minus = list(profile)
                    plus[i] = profile[i] + eps * H
                    minus[i] = profile[i] - eps * H
                    fd = (game.payoff(i, plus) - game.payoff(i, minus)) / (2.0 * eps)
                    worst = max(worst, abs(fd - float(np.real(np.trace(V @ H)))))
        return self._result("gradient_finite_difference", worst, 1e-8 * self.scale)

    def quotient_divergence(self) -> VerifyResult:
        rng = self._rng(4)
        games = [matching_pennies_game(), random_povm_game(rng, [2, 3])]
        eps = 1e-5
        worst = 0.0
        for game in games:
            kernels = [VonNeumannKernel() for _ in game.player_dims]
            bases = [traceless_basis(d) for d in game.player_dims]
            for _ in range(10):
                Z = [traceless_part(random_hermitian(rng, d, 1.5)) for d in game.player_dims]
                magnitude = max(sum(frobenius(F) for F in quotient_field(game, kernels, Z)), 1e-12)
                divergence = 0.0
                for i, basis in enumerate(bases):
                    for E in basis:
                        plus = list(Z)
                        minus = list(Z)
                        plus[i] = Z[i] + eps * E
                        minus[i] = Z[i] - eps * E
                        dF = quotient_field(game, kernels, plus)[i] - quotient_field(game, kernels, minus)[i]
                        divergence += float(np.real(np.vdot(E, dF))) / (2.0 * eps)
                worst = max(worst, abs(divergence) / magnitude)
        return self._result("quotient_divergence", worst, 1e-6 * self.scale)

    def state_dynamics_consistency(self) -> VerifyResult:
        """Central differences of Q along the dual flow against the state dynamics."""
        game = dominant_game()
        kernel = VonNeumannKernel()
        config = SimulationConfig(kernels=[kernel, kernel], horizon=20.0, initial=dominant_initial())
        trajectory = integrate(game, config)
        scores = trajectory.require_dual_scores()
        gradients = trajectory.require_gradients()
        h = 1e-5
        worst = 0.0
        for k in np.linspace(0, trajectory.n_times - 1, 100).astype(int):
            for i in range(game.n_players):
                Y, V, X = scores[i][k], gradients[i][k], trajectory.states[i][k]
                fd = (mirror(kernel, Y + h * V) - mirror(kernel, Y - h * V)) / (2.0 * h)
                worst = max(worst, float(np.max(np.abs(fd - qd_field(kernel, X, V)))))
        return self._result("state_dynamics_consistency", worst, 1e-5 * self.scale)

    # analysis

    def fenchel_derivative(self) -> VerifyResult:
        rng = self._rng(5)
        game = random_povm_game(rng, [2, 3])
        kernels = [VonNeumannKernel(), TsallisKernel(0.5)]
        config = SimulationConfig(
            kernels=kernels, horizon=5.0, record_stride=0.05,
            initial=[InitialState(kind="random", seed=self.seed), InitialState(kind="random", seed=self.seed + 1)],
        )
        trajectory = integrate(game, config)
        P = [random_density(rng, d, 0.05) for d in game.player_dims]
        h = 1e-5
        worst = 0.0
        for k in range(0, trajectory.n_times, 10):
            Y = trajectory.scores_at(k)
            V = game.gradient_fields(trajectory.profile_at(k))
            F_plus = sum(fenchel_coupling(kern, Pi, Yi + h * Vi) for kern, Pi, Yi, Vi in zip(kernels, P, Y, V))
            F_minus = sum(fenchel_coupling(kern, Pi, Yi - h * Vi) for kern, Pi, Yi, Vi in zip(kernels, P, Y, V))
            fd = (F_plus - F_minus) / (2.0 * h)
            worst = max(worst, abs(fd - fenchel_rate(game, P, trajectory.profile_at(k))))
        return self._result("fenchel_derivative", worst, 1e-5 * self.scale)

    def fenchel_conservation(self) -> VerifyResult:
        game = matching_pennies_game()
        equilibrium = [maximally_mixed(2), maximally_mixed(2)]
        drift = _fenchel_drift(game, equilibrium, 1e-9, 1e-11, self.seed)
        tight = _fenchel_drift(game, equilibrium, 1e-11, 1e-13, self.seed)
        # Once the drift is at roundoff level there is nothing left to shrink
        shrinks = tight <= drift / 10.0 or drift <= 1e-12
        detail = f"drift {drift:.3e} at rtol=1e-9, {tight:.3e} at rtol=1e-11"
        tolerance = 1e-6 * self.scale
        return self._result("fenchel_conservation", drift, tolerance, detail=detail,
                            passed=drift <= tolerance and shrinks)

    def regret_bound(self) -> VerifyResult:
        rng = self._rng(6)
        specs = []
        for g in range(20):
            dims = [int(rng.choice([2, 3])), int(rng.choice([2, 3]))]
            tables = [rng.uniform(-1.0, 1.0, size=dims) for _ in dims]
            specs.append((g, tables))

        def excess(spec) -> float:
            g, tables = spec
            game = from_classical(tables, name=f"random_{g}")
            config = SimulationConfig(
                kernels=[VonNeumannKernel(), VonNeumannKernel()], horizon=100.0,
                initial=[InitialState(kind="uniform"), InitialState(kind="uniform")],
            )
            trajectory = integrate(game, config)
            reports = [regret(game, i, trajectory) for i in range(game.n_players)]
            return max(r.realized_regret - np.log(d) for r, d in zip(reports, game.player_dims))

        worst = max(parallel_map(excess, specs))
        bound_gap = abs(VonNeumannKernel().regret_bound(2) - np.log(2.0))
        tolerance = 1e-4 * self.scale
        return self._result("regret_bound", worst, tolerance, detail=f"log 2 bound error {bound_gap:.1e}",
                            passed=worst <= tolerance and bound_gap <= 1e-12)

    def recurrence(self) -> VerifyResult:
        game = matching_pennies_game()

        def closest_return(start: int) -> float:
            config = SimulationConfig(
                kernels=[VonNeumannKernel(), VonNeumannKernel()], horizon=200.0,
                initial=[InitialState(kind="random", seed=self.seed + 100 + 2 * start, scale=2.0),
                         InitialState(kind="random", seed=self.seed + 101 + 2 * start, scale=2.0)],
            )
            report = recurrence_stats(integrate(game, config), r_out=0.1)
            return report.return_distance if report.departed else float("inf")

        worst = max(parallel_map(closest_return, range(10)))
        return self._result("recurrence", worst, 0.05 * self.scale)

    def pure_convergence(self) -> VerifyResult:
        game = dominant_game()
        kernel = VonNeumannKernel()
        config = SimulationConfig(kernels=[kernel, kernel], horizon=100.0, initial=dominant_initial())
        trajectory = integrate(game, config)
        final = trajectory.profile_at(trajectory.n_times - 1)
        fidelities = [float(np.real(final[0][0, 0])), float(np.real(final[1][1, 1]))]
        purities = [purity(X) for X in final]
        series = fenchel_series(None, dominant_equilibrium(), trajectory).series
        increase = float(np.max(np.diff(series)))
        shortfall = 1.0 - min(fidelities + purities)
        detail = f"fidelities {fidelities}, purities {purities}, largest Fenchel increase {increase:.2e}"
        tolerance = 0.01
        return self._result("pure_convergence", shortfall, tolerance, detail=detail,
                            passed=shortfall <= tolerance and increase <= 1e-9 * self.scale)

    def variational_stability(self) -> VerifyResult:
        strict = vs_probe(dominant_game(), dominant_equilibrium(), radius=0.1, samples=500, rng_seed=self.seed)
        mixed = vs_probe(matching_pennies_game(), [maximally_mixed(2), maximally_mixed(2)],
                         radius=0.1, samples=200, rng_seed=self.seed)
        tolerance = 1e-10 * self.scale
        return self._result("variational_stability", abs(mixed), tolerance,
                            detail=f"strict equilibrium margin {strict:.3e}, mixed equilibrium margin {mixed:.3e}",
                            passed=strict < 0.0 and abs(mixed) <= tolerance)

    def stationarity(self) -> VerifyResult:
        kernels = [VonNeumannKernel(), VonNeumannKernel()]
        uniform = [maximally_mixed(2), maximally_mixed(2)]
        at_equilibrium = stationarity_residual(matching_pennies_game(), kernels, uniform)

        game = dominant_game()
        pure = [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
        at_pure = max(stationarity_residual(game, kernels, [a, b]) for a in pure for b in pure)
        interior = stationarity_residual(game, kernels, [np.diag([0.6, 0.4]).astype(complex),
                                                         np.diag([0.3, 0.7]).astype(complex)])
        passed = at_equilibrium <= 1e-10 * self.scale and at_pure <= 1e-8 * self.scale and interior > 1e-3
        return self._result("stationarity", at_pure, 1e-8 * self.scale,
                            detail=f"equilibrium {at_equilibrium:.2e}, pure {at_pure:.2e}, interior {interior:.2e}",
                            passed=passed)

    # invariant suites

    def _ratio_result(self, name: str, errors: Dict[str, float], tolerances: Dict[str, float]) -> VerifyResult:
        """Worst error measured in units of its own tolerance."""
        ratios = {key: errors[key] / tolerances[key] for key in errors}
        worst = max(ratios, key=ratios.get)
        detail = ", ".join(f"{key} {errors[key]:.1e}" for key in errors)
        return self._result(name, ratios[worst], self.scale, detail=f"worst {worst}; {detail}")

    def matrixcore_invariants(self) -> VerifyResult:
        rng = self._rng(7)
        errors = dict.fromkeys(["reconstruction", "unitarity", "partial_trace", "exp_log", "kron"], 0.0)
        tolerances = {"reconstruction": 1e-10, "unitarity": 1e-10, "partial_trace": 1e-12, "exp_log": 1e-9,
                      "kron": np.finfo(float).tiny}
        for _ in range(20):
            d = int(rng.integers(2, 7))
            H = random_hermitian(rng, d, float(rng.uniform(0.5, 5.0)))
            eig = hermitian_eig(H)
            U = eig.eigenvectors
            errors["reconstruction"] = max(errors["reconstruction"], frobenius(eig.reconstruct() - H) / frobenius(H))
            errors["unitarity"] = max(errors["unitarity"], frobenius(U.conj().T @ U - np.eye(d)))

            dims = [int(n) for n in rng.integers(2, 4, size=int(rng.integers(2, 4)))]
            total = int(np.prod(dims))
            M = rng.standard_normal((total, total)) + 1j * rng.standard_normal((total, total))
            reduced = partial_trace(M, dims, int(rng.integers(len(dims))))
            errors["partial_trace"] = max(errors["partial_trace"],
                                          abs(np.trace(reduced) - np.trace(M)) / max(abs(np.trace(M)), 1.0))

            P = random_density(rng, d, min_eigenvalue=0.01)
            errors["exp_log"] = max(errors["exp_log"], frobenius(func_calculus(func_calculus(P, np.log), np.exp) - P))

            # integer entries keep every product exact
            A, B, C = (rng.integers(-5, 6, size=(n, n)) + 1j * rng.integers(-5, 6, size=(n, n))
                       for n in rng.integers(1, 4, size=3))
            left = tensor_product(tensor_product(A, B), C)
            right = tensor_product(A, tensor_product(B, C))
            errors["kron"] = max(errors["kron"], frobenius(left - right))
        return self._ratio_result("matrixcore_invariants", errors, tolerances)

    def game_invariants(self) -> VerifyResult:
        rng = self._rng(8)
        games = [random_povm_game(rng, [2, 3]), random_povm_game(rng, [2, 2, 2], n_outcomes=6),
                 matching_pennies_game(), dominant_game()]
        errors = dict.fromkeys(["linearity", "normalization", "negativity", "zero_sum"], 0.0)
        for game in games:
            for _ in range(10):
                profile = [random_density(rng, d) for d in game.player_dims]
                probabilities = game.outcome_probabilities(profile)
                errors["normalization"] = max(errors["normalization"], abs(float(np.sum(probabilities)) - 1.0))
                errors["negativity"] = max(errors["negativity"], float(-np.min(probabilities)))
                if game.zero_sum:
                    errors["zero_sum"] = max(errors["zero_sum"], abs(sum(game.payoffs(profile))))

                i = int(rng.integers(game.n_players))
                alpha = float(rng.uniform())
                swapped = list(profile)
                swapped[i] = random_density(rng, game.player_dims[i])
                mixed = list(profile)
                mixed[i] = alpha * profile[i] + (1.0 - alpha) * swapped[i]
                expected = alpha * game.payoff(i, profile) + (1.0 - alpha) * game.payoff(i, swapped)
                errors["linearity"] = max(errors["linearity"], abs(game.payoff(i, mixed) - expected))
        return self._ratio_result("game_invariants", errors, dict.fromkeys(errors, 1e-10))

    def mirror_invariants(self) -> VerifyResult:
        rng = self._rng(9)
        kernels = [EuclideanKernel(), VonNeumannKernel(), TsallisKernel(0.5), TsallisKernel(1.5)]
        errors = dict.fromkeys(["shift", "commutation", "lipschitz", "fenchel_bound", "reciprocity", "envelope"], 0.0)
        tolerances = dict.fromkeys(errors, 1e-9)
        tolerances["envelope"] = 1e-6
        h = 1e-5
        for case in range(20):
            kernel = kernels[case % len(kernels)]
            K = kernel.strong_convexity
            d = int(rng.integers(2, 5))
            identity = np.eye(d, dtype=complex)
            Y = random_hermitian(rng, d, float(rng.uniform(0.5, 3.0)))
            Q = mirror(kernel, Y)

            for c in (-10.0, 0.3, 7.0):
                errors["shift"] = max(errors["shift"], frobenius(mirror(kernel, Y + c * identity) - Q))
            errors["commutation"] = max(errors["commutation"], frobenius(Q @ Y - Y @ Q))

            Y_other = Y + random_hermitian(rng, d, float(rng.uniform(0.01, 1.0)))
            excess = frobenius(Q - mirror(kernel, Y_other)) - frobenius(Y - Y_other) / K
            errors["lipschitz"] = max(errors["lipschitz"], excess)

            P = random_density(rng, d, min_eigenvalue=0.01)
            bound = 0.5 * K * frobenius(Q - P) ** 2
            errors["fenchel_bound"] = max(errors["fenchel_bound"], bound - fenchel_coupling(kernel, P, Y))

            # F(P, Y_n) along preimages of states approaching P
            target = random_density(rng, d, min_eigenvalue=0.05)
            couplings = []
            for eps in np.geomspace(1e-1, 1e-6, 6):
                P_n = (1.0 - eps) * target + eps * maximally_mixed(d)
                Y_n = dual_preimage(kernel, P_n) + float(rng.normal()) * identity
                couplings.append(fenchel_coupling(kernel, target, Y_n))
            errors["reciprocity"] = max(errors["reciprocity"], abs(couplings[-1]))

            for E in traceless_basis(d) + [identity / np.sqrt(d)]:
                fd = (conjugate(kernel, Y + h * E) - conjugate(kernel, Y - h * E)) / (2.0 * h)
                errors["envelope"] = max(errors["envelope"], abs(fd - float(np.real(np.vdot(E, Q)))))
        return self._ratio_result("mirror_invariants", errors, tolerances)

    def vonneumann_specialization(self) -> VerifyResult:
        rng = self._rng(10)
        kernel = VonNeumannKernel()
        worst = 0.0
        for _ in range(50):
            d = int(rng.integers(2, 6))
            X = random_density(rng, d, min_eigenvalue=0.01)
            V = random_hermitian(rng, d, float(rng.uniform(0.5, 2.0)))
            worst = max(worst, float(np.max(np.abs(qd_field(kernel, X, V) - qrd_field(X, V)))))
        return self._result("vonneumann_specialization", worst, 1e-12 * self.scale)

    def primal_rank(self) -> VerifyResult:
        """Full-rank states stay full rank under primal integration with steep kernels."""
        rng = self._rng(11)
        lowest = np.inf
        for dims in ([2, 3], [2, 2], [3, 3]):
            game = random_povm_game(rng, dims)
            config = SimulationConfig(
                kernels=[VonNeumannKernel(), TsallisKernel(0.5)], horizon=10.0, space="primal",
                initial=[InitialState(kind="primal", matrix=random_density(rng, d, min_eigenvalue=1e-3))
                         for d in dims],
            )
            trajectory = integrate(game, config)
            lowest = min(lowest, min(float(np.min(np.linalg.eigvalsh(stack))) for stack in trajectory.states))
        return self._result("primal_rank", -lowest, 0.0, detail=f"smallest eigenvalue {lowest:.3e}",
                            passed=lowest > 0.0)

    def bloch_norm_bound(self) -> VerifyResult:
        rng = self._rng(12)
        mixed = max(float(np.linalg.norm(bloch_coords(random_density(rng, 2)))) for _ in range(200))
        pure_gap = 0.0
        for _ in range(50):
            psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            psi /= np.linalg.norm(psi)
            pure_gap = max(pure_gap, abs(float(np.linalg.norm(bloch_coords(np.outer(psi, psi.conj())))) - 1.0))
        tolerance = 1e-10 * self.scale
        return self._result("bloch_norm_bound", mixed - 1.0, tolerance,
                            detail=f"largest mixed norm {mixed:.12f}, pure-state deviation {pure_gap:.1e}",
                            passed=mixed <= 1.0 + tolerance and pure_gap <= tolerance)
