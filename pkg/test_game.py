import numpy as np
import pytest
from numpy.testing import assert_allclose

from qflow.core.errors import DimensionMismatchError, SpecValidationError
from qflow.core.game import PovmOutcome, QuantumGame, constant_game, from_classical, random_povm_game
from qflow.core.matrixcore import identity, maximally_mixed, random_density, random_hermitian, traceless_part
from qflow.models.common import parse_document
from qflow.models.game import GameSpec

DOMINANT = np.array([[2.0, 1.0], [-2.0, -1.0]])
PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])


def diag(*values):
    return np.diag(values).astype(complex)


@pytest.fixture
def dominant():
    return from_classical([DOMINANT, -DOMINANT])


@pytest.fixture
def pennies():
    return from_classical([PENNIES, -PENNIES])


def test_constant_game_payoff_and_gradient():
    game = constant_game([2, 3], value=2.5)
    rng = np.random.default_rng(0)
    profile = [random_density(rng, 2), random_density(rng, 3)]
    assert game.payoff(0, profile) == pytest.approx(2.5, abs=1e-12)
    assert_allclose(game.gradient_field(1, profile), 2.5 * identity(3), atol=1e-12)


def test_dominant_payoffs(dominant):
    assert dominant.n_players == 2
    assert len(dominant.outcomes) == 4
    assert dominant.zero_sum
    assert dominant.payoff(0, [diag(1, 0), diag(0, 1)]) == pytest.approx(1.0, abs=1e-12)
    assert dominant.payoff(0, [diag(0.2, 0.8), diag(0.8, 0.2)]) == pytest.approx(-1.08, abs=1e-12)


def test_dominant_gradient(dominant):
    V1 = dominant.gradient_field(0, [diag(0.5, 0.5), diag(0.8, 0.2)])
    assert_allclose(V1, diag(1.8, -1.8), atol=1e-12)


def test_pennies_gradient_vanishes_at_uniform(pennies):
    uniform = [maximally_mixed(2), maximally_mixed(2)]
    for V in pennies.gradient_fields(uniform):
        assert_allclose(V, np.zeros((2, 2)), atol=1e-15)
    assert pennies.exploitability(uniform) <= 1e-12


def test_exploitability(dominant):
    assert dominant.exploitability([diag(1, 0), diag(0, 1)]) <= 1e-12
    assert dominant.exploitability([maximally_mixed(2), maximally_mixed(2)]) > 0.1


def test_one_by_one_table():
    game = from_classical([[3.0]])
    assert game.player_dims == [1]
    assert game.payoff(0, [np.ones((1, 1))]) == pytest.approx(3.0)


def test_table_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        from_classical([np.zeros((2, 2)), np.zeros((2, 3))])


def test_incomplete_povm_rejected():
    outcome = PovmOutcome(operator=0.5 * identity(4), payoffs=(1.0, -1.0))
    with pytest.raises(SpecValidationError):
        QuantumGame([2, 2], [outcome])


def test_non_psd_povm_rejected():
    bad = np.diag([1.5, -0.5, 1.0, 1.0])
    with pytest.raises(SpecValidationError):
        QuantumGame([2, 2], [PovmOutcome(operator=bad, payoffs=(0.0, 0.0))])


def test_profile_dimension_mismatch(dominant):
    with pytest.raises(DimensionMismatchError):
        dominant.payoff(0, [maximally_mixed(3), maximally_mixed(2)])
    with pytest.raises(DimensionMismatchError):
        dominant.payoff(2, [maximally_mixed(2), maximally_mixed(2)])


def test_gradient_consistency_and_independence():
    rng = np.random.default_rng(5)
    game = random_povm_game(rng, [2, 3], n_outcomes=5)
    for _ in range(100):
        profile = [random_density(rng, 2), random_density(rng, 3)]
        for i in range(2):
            V = game.gradient_field(i, profile)
            assert np.real(np.trace(profile[i] @ V)) == pytest.approx(game.payoff(i, profile), abs=1e-10)
            other = list(profile)
            other[i] = random_density(rng, game.player_dims[i])
            assert np.array_equal(V, game.gradient_field(i, other))


def test_payoff_linearity():
    rng = np.random.default_rng(6)
    game = random_povm_game(rng, [3, 2])
    rest = random_density(rng, 2)
    X, X_prime = random_density(rng, 3), random_density(rng, 3)
    alpha = 0.3
    mixed = game.payoff(0, [alpha * X + (1 - alpha) * X_prime, rest])
    split = alpha * game.payoff(0, [X, rest]) + (1 - alpha) * game.payoff(0, [X_prime, rest])
    assert mixed == pytest.approx(split, abs=1e-10)


def test_payoff_finite_difference():
    rng = np.random.default_rng(7)
    game = random_povm_game(rng, [2, 2, 2], n_outcomes=6)
    profile = [random_density(rng, 2, 0.1) for _ in range(3)]
    h = 1e-4
    for i in range(3):
        direction = traceless_part(random_hermitian(rng, 2))
        plus, minus = list(profile), list(profile)
        plus[i] = profile[i] + h * direction
        minus[i] = profile[i] - h * direction
        fd = (game.payoff(i, plus) - game.payoff(i, minus)) / (2 * h)
        assert fd == pytest.approx(np.real(np.trace(direction @ game.gradient_field(i, profile))), abs=1e-6)


def test_outcome_probabilities_normalized():
    rng = np.random.default_rng(8)
    game = random_povm_game(rng, [2, 3])
    probabilities = game.outcome_probabilities([random_density(rng, 2), random_density(rng, 3)])
    assert probabilities.sum() == pytest.approx(1.0, abs=1e-10)
    assert np.all(probabilities >= -1e-10)


def test_zero_sum_payoffs_cancel(pennies):
    rng = np.random.default_rng(9)
    profile = [random_density(rng, 2), random_density(rng, 2)]
    assert sum(pennies.payoffs(profile)) == pytest.approx(0.0, abs=1e-10)


def test_false_zero_sum_declaration_rejected():
    with pytest.raises(SpecValidationError):
        from_classical([PENNIES, PENNIES], zero_sum=True)


def test_game_spec_classical_shortcut():
    spec = parse_document(GameSpec, {"classical_tables": [DOMINANT.tolist(), (-DOMINANT).tolist()]})
    game = spec.to_game()
    assert game.player_dims == [2, 2]
    assert game.zero_sum


def test_game_spec_povm_outcomes():
    same = np.zeros((4, 4))
    same[0, 0] = same[3, 3] = 1.0
    data = {
        "player_dims": [2, 2],
        "outcomes": [
            {"operator": [[[v, 0.0] for v in row] for row in same], "payoffs": [1, -1]},
            {"operator": (np.eye(4) - same).tolist(), "payoffs": [-1, 1]},
        ],
        "zero_sum": True,
    }
    game = parse_document(GameSpec, data).to_game()
    assert game.payoff(0, [diag(1, 0), diag(1, 0)]) == pytest.approx(1.0)
    assert game.payoff(0, [diag(1, 0), diag(0, 1)]) == pytest.approx(-1.0)


def test_game_spec_needs_one_payoff_source():
    with pytest.raises(SpecValidationError, match="player_dims|outcomes"):
        parse_document(GameSpec, {"outcomes": [{"operator": [[1]], "payoffs": [0]}]})
    with pytest.raises(SpecValidationError):
        parse_document(GameSpec, {"name": "empty"})
