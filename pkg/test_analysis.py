import numpy as np
import pytest
from numpy.testing import assert_allclose

from qflow.core.analysis import (
    bloch_coords,
    bloch_series,
    exploitability_series,
    fenchel_series,
    purity,
    recurrence_stats,
    regret,
    stationarity_residual,
    support_rank,
    time_average,
    vs_probe,
)
from qflow.core.errors import DimensionMismatchError, MissingDataError
from qflow.core.game import constant_game, from_classical
from qflow.core.integrator import InitialState, SimulationConfig, integrate
from qflow.core.kernels import EuclideanKernel, VonNeumannKernel
from qflow.core.matrixcore import maximally_mixed
from qflow.core.trajectory import Trajectory
from qflow.utils.thread_pool import max_workers, parallel_map

DOMINANT = np.array([[2.0, 1.0], [-2.0, -1.0]])
PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])
VN = VonNeumannKernel()


@pytest.fixture
def dominant():
    return from_classical([DOMINANT, -DOMINANT])


@pytest.fixture
def pennies():
    return from_classical([PENNIES, -PENNIES])


def _run(game, kernels, initial, horizon, stride=0.1, space="dual"):
    config = SimulationConfig(kernels=kernels, horizon=horizon, record_stride=stride, initial=initial, space=space)
    return integrate(game, config)


def test_purity_examples():
    assert purity(maximally_mixed(2)) == pytest.approx(0.5)
    assert purity(maximally_mixed(4)) == pytest.approx(0.25)
    assert purity(np.diag([1.0, 0.0, 0.0])) == pytest.approx(1.0)


def test_bloch_examples():
    assert_allclose(bloch_coords(np.diag([1.0, 0.0])), [0.0, 0.0, 1.0])
    assert_allclose(bloch_coords(maximally_mixed(2)), [0.0, 0.0, 0.0])
    plus = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
    assert_allclose(bloch_coords(plus), [1.0, 0.0, 0.0])
    plus_i = 0.5 * np.array([[1, -1j], [1j, 1]], dtype=complex)
    assert_allclose(bloch_coords(plus_i), [0.0, 1.0, 0.0])
    with pytest.raises(DimensionMismatchError):
        bloch_coords(maximally_mixed(3))


def test_bloch_series_matches_pointwise(pennies):
    trajectory = _run(pennies, [VN, VN], [InitialState(kind="random", seed=1), InitialState()], 2.0, 0.5)
    series = bloch_series(trajectory, 0)
    for k in range(trajectory.n_times):
        assert_allclose(series[k], bloch_coords(trajectory.states[0][k]), atol=1e-15)
        assert np.linalg.norm(series[k]) <= 1.0 + 1e-12


def test_support_rank():
    assert support_rank(np.diag([1.0, 0.0])) == 1
    assert support_rank(maximally_mixed(3)) == 3
    assert support_rank(np.diag([0.5, 0.5, 1e-12])) == 2


@pytest.mark.parametrize("kernel, bound", [(VN, np.log(2.0)), (EuclideanKernel(), 0.25)], ids=["vonneumann", "euclidean"])
def test_regret_within_bound(dominant, kernel, bound):
    trajectory = _run(dominant, [kernel, kernel], [InitialState(), InitialState()], 50.0, 0.01)
    for player in range(2):
        report = regret(dominant, player, trajectory)
        assert report.bound == pytest.approx(bound)
        assert report.within_bound
        assert report.realized_regret <= bound + 1e-4
        assert_allclose(np.trace(report.best_fixed_state), 1.0, atol=1e-12)


def test_regret_of_constant_game_is_zero():
    game = constant_game([2, 3], value=1.0)
    trajectory = _run(game, [VN, VN], [InitialState(kind="random", seed=2), InitialState()], 5.0, 0.5)
    for player in range(2):
        assert abs(regret(game, player, trajectory).realized_regret) <= 1e-9


def test_fenchel_series_is_conserved_in_pennies(pennies):
    initial = [InitialState(kind="random", seed=3, scale=2.0), InitialState(kind="random", seed=4, scale=2.0)]
    trajectory = _run(pennies, [VN, VN], initial, 20.0)
    report = fenchel_series(None, [maximally_mixed(2), maximally_mixed(2)], trajectory)
    assert report.initial_value > 0.0
    assert report.max_drift <= 1e-6
    assert len(report.series) == trajectory.n_times


def test_fenchel_series_from_own_start_begins_at_zero(pennies):
    trajectory = _run(pennies, [VN, VN], [InitialState(kind="random", seed=5), InitialState()], 2.0, 0.5)
    report = fenchel_series([VN, VN], trajectory.profile_at(0), trajectory)
    assert abs(report.initial_value) <= 1e-10


def test_fenchel_series_decreases_in_dominant(dominant):
    initial = [InitialState(kind="primal", matrix=np.diag([0.2, 0.8])),
               InitialState(kind="primal", matrix=np.diag([0.8, 0.2]))]
    trajectory = _run(dominant, [VN, VN], initial, 20.0)
    P_star = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    series = np.array(fenchel_series([VN, VN], P_star, trajectory).series)
    assert np.all(np.diff(series) <= 1e-9)


def test_fenchel_series_needs_dual_scores(dominant):
    trajectory = _run(dominant, [VN, VN], [InitialState(), InitialState()], 1.0, 0.5, space="primal")
    with pytest.raises(MissingDataError):
        fenchel_series(None, [maximally_mixed(2), maximally_mixed(2)], trajectory)


def test_recurrence_of_constant_trajectory():
    stack = np.repeat(maximally_mixed(2)[None], 5, axis=0)
    trajectory = Trajectory(times=np.arange(5.0), states=[stack, stack.copy()])
    report = recurrence_stats(trajectory, r_out=0.1)
    assert not report.departed
    assert report.return_distance == 0.0
    assert report.departure_time is None


def test_pennies_orbits_return(pennies):
    initial = [InitialState(kind="random", seed=7, scale=2.0), InitialState(kind="random", seed=8, scale=2.0)]
    trajectory = _run(pennies, [VN, VN], initial, 200.0)
    report = recurrence_stats(trajectory, r_out=0.1)
    assert report.departed
    assert report.returned
    assert report.return_distance < 0.05


def test_vs_probe_pennies_is_neutral(pennies):
    margin = vs_probe(pennies, [maximally_mixed(2), maximally_mixed(2)], radius=0.1, samples=50, rng_seed=0)
    assert abs(margin) <= 1e-10


def test_vs_probe_dominant_is_strict(dominant):
    P_star = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    margin = vs_probe(dominant, P_star, radius=0.1, samples=50, rng_seed=0)
    assert margin < 0.0


def test_vs_probe_is_reproducible(dominant):
    P_star = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    first = vs_probe(dominant, P_star, radius=0.2, samples=20, rng_seed=11)
    second = vs_probe(dominant, P_star, radius=0.2, samples=20, rng_seed=11)
    assert first == second


def test_stationarity_residual(dominant, pennies):
    P_star = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    assert stationarity_residual(dominant, [VN, VN], P_star) <= 1e-8
    uniform = [maximally_mixed(2), maximally_mixed(2)]
    assert stationarity_residual(pennies, [VN, VN], uniform) <= 1e-10
    assert stationarity_residual(dominant, [VN, VN], uniform) > 1e-3


def test_exploitability_series_and_time_average(pennies):
    initial = [InitialState(kind="random", seed=9, scale=2.0), InitialState(kind="random", seed=10, scale=2.0)]
    trajectory = _run(pennies, [VN, VN], initial, 50.0)
    series = exploitability_series(pennies, trajectory)
    assert series.shape == (trajectory.n_times,)
    assert np.all(series >= -1e-12)

    averages = time_average(trajectory)
    for X in averages:
        assert_allclose(np.trace(X), 1.0, atol=1e-9)
        assert np.all(np.linalg.eigvalsh(X) >= -1e-12)


def test_time_average_of_single_sample():
    stack = maximally_mixed(2)[None]
    trajectory = Trajectory(times=np.array([0.0]), states=[stack])
    assert_allclose(time_average(trajectory)[0], maximally_mixed(2))


def test_parallel_map_preserves_order():
    assert parallel_map(lambda x: x * x, range(20), workers=3) == [x * x for x in range(20)]
    assert parallel_map(lambda x: x, []) == []
    assert max_workers(10_000) >= 1
