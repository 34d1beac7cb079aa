"""Tests for the benchmark domains, weightings and the environment handle."""
import numpy as np
import pytest
from scipy import stats

from src.core.errors import (
    AssumptionViolationError,
    EnvStepError,
    InvalidModelError,
    InvalidParameterError,
)
from src.core.rng import SeedTree
from src.envs.chain import (
    BACK,
    FORWARD,
    build_chain_mdp,
    build_chain_uncertainty_set,
    chain_rewards,
    sample_chain_slips,
)
from src.envs.handle import env_step, make_env, reset
from src.envs.single_step import (
    S0,
    SELF_LOOP,
    average_success_probability,
    build_single_step_mdp,
    build_uncertainty_set_single_step,
    closed_form_step_value,
    failure_state,
    per_cycle_action_values,
    sample_success_probabilities,
    sample_uncertainty_set_single_step,
    single_step_transitions,
    success_probability_of,
    success_state,
    worst_case_action_values,
)
from src.envs.weights import DIST1, DIST2, named_weights, sample_dirichlet_weights


def test_single_step_layout() -> None:
    """Test states, rewards and transitions of the single-step MDP."""
    mdp, model = build_single_step_mdp(0.8)
    assert (mdp.n_states, mdp.n_actions) == (7, 3)
    assert success_state(0) == 2 and failure_state(2) == 5
    np.testing.assert_array_equal(mdp.rewards[S0], 0.0)
    assert mdp.rewards[success_state(0), 1] == 1e5
    assert mdp.rewards[failure_state(2), 0] == -100.0
    assert model.probs[S0, 1, success_state(1)] == pytest.approx(0.8 * (1 - SELF_LOOP))
    assert model.probs[S0, 1, S0] == SELF_LOOP
    np.testing.assert_array_equal(model.probs[1:, :, S0], 1.0)


def test_single_step_is_affine() -> None:
    """Test that transition tables are affine in the success probability."""
    mixed = 0.5 * single_step_transitions(0.1).probs + 0.5 * single_step_transitions(0.5).probs
    np.testing.assert_allclose(single_step_transitions(0.3).probs, mixed, atol=1e-15)
    assert success_probability_of(single_step_transitions(0.37)) == pytest.approx(0.37)


def test_single_step_invalid_probability() -> None:
    """Test argument validation."""
    with pytest.raises(InvalidParameterError):
        single_step_transitions(1.5)
    with pytest.raises(InvalidModelError, match="at least one"):
        build_uncertainty_set_single_step([])
    with pytest.raises(AssumptionViolationError, match="not irreducible"):
        build_uncertainty_set_single_step([0.5, 1.0])


def test_per_cycle_values() -> None:
    """Test the nominal, soft-robust and worst-case per-cycle values."""
    np.testing.assert_allclose(per_cycle_action_values(0.8), [6e4, 1600.0, 3980.0])
    np.testing.assert_allclose(per_cycle_action_values(0.368), [-26400.0, 736.0, 1776.8])
    worst = worst_case_action_values([0.1, 0.7, 0.8, 0.3, 0.5])
    np.testing.assert_allclose(worst, [-8e4, 200.0, 410.0])
    assert closed_form_step_value(0, 0.8) == pytest.approx(3e4)


def test_nominal_member_is_closest() -> None:
    """Test nominal selection by distance to the nominal probability."""
    uncertainty = build_uncertainty_set_single_step([0.1, 0.75, 0.3], nominal=0.8)
    assert uncertainty.nominal_index == 1


def test_sampled_single_step_set() -> None:
    """Test that sampling is seeded and stays away from 0 and 1."""
    probs, uncertainty = sample_uncertainty_set_single_step(6, seed=3)
    assert len(uncertainty) == 6
    assert all(0.01 <= p <= 0.99 for p in probs)
    assert probs == sample_success_probabilities(6, SeedTree(3))
    with pytest.raises(InvalidParameterError):
        sample_success_probabilities(0, SeedTree(3))


def test_chain_layout() -> None:
    """Test chain rewards, moves and walls."""
    mdp, model = build_chain_mdp(4, 0.2)
    np.testing.assert_allclose(mdp.rewards[:, 0], [0.0, 1 / 3, 2 / 3, 1.0])
    assert model.probs[0, BACK, 0] == pytest.approx(1.0)
    assert model.probs[1, FORWARD, 2] == pytest.approx(0.8)
    assert model.probs[1, FORWARD, 1] == pytest.approx(0.2)
    assert model.probs[3, FORWARD, 3] == pytest.approx(1.0)
    assert model.probs[2, BACK, 1] == pytest.approx(0.8)


def test_chain_invalid_arguments() -> None:
    """Test chain argument validation."""
    with pytest.raises(InvalidParameterError, match="slip"):
        build_chain_mdp(4, 0.6)
    with pytest.raises(InvalidParameterError, match="two states"):
        build_chain_mdp(1, 0.1)
    with pytest.raises(InvalidParameterError, match="entries"):
        chain_rewards(3, [0.0, 1.0])
    with pytest.raises(InvalidParameterError):
        build_chain_uncertainty_set(4, [])


def test_chain_custom_rewards() -> None:
    """Test a custom reward profile."""
    mdp = chain_rewards(3, [1.0, 0.0, 5.0])
    np.testing.assert_array_equal(mdp.rewards[:, 1], [1.0, 0.0, 5.0])


def test_chain_slip_sampling() -> None:
    """Test seeded slip draws and clipping."""
    slips = sample_chain_slips(50, 0.1, 0.5, SeedTree(1))
    assert slips == sample_chain_slips(50, 0.1, 0.5, SeedTree(1))
    assert min(slips) >= 1e-3
    assert max(slips) <= 0.5
    uncertainty = build_chain_uncertainty_set(5, slips[:3], nominal_slip=0.1)
    assert len(uncertainty) == 3
    with pytest.raises(InvalidParameterError, match="scale"):
        sample_chain_slips(3, 0.1, -1.0, SeedTree(1))


def test_named_weights() -> None:
    """Test the shipped weighting distributions."""
    np.testing.assert_allclose(named_weights("dist1").weights, DIST1)
    np.testing.assert_allclose(named_weights("dist2").weights, DIST2)
    with pytest.raises(InvalidParameterError, match="Unknown weighting"):
        named_weights("dist3")


def test_dist2_average_probability_and_cycle_values() -> None:
    """Test the second weighting: its average model and the per-cycle action values."""
    success = average_success_probability([0.1, 0.7, 0.8, 0.3, 0.5], named_weights("dist2"))
    # 0.63 * 0.1 + 0.04 * 0.7 + 0.05 * 0.8 + 0.02 * 0.3 + 0.26 * 0.5
    assert success == pytest.approx(0.267)
    np.testing.assert_allclose(per_cycle_action_values(success), [-46600.0, 534.0, 1261.7])


def test_dirichlet_weights() -> None:
    """Test seeded Dirichlet weightings."""
    first = sample_dirichlet_weights(5, seed=4).weights
    np.testing.assert_array_equal(first, sample_dirichlet_weights(5, seed=4).weights)
    assert not np.allclose(first, sample_dirichlet_weights(5, seed=5).weights)
    assert first.sum() == pytest.approx(1.0)
    with pytest.raises(InvalidParameterError):
        sample_dirichlet_weights(3, concentration=[1.0, 1.0])
    with pytest.raises(InvalidParameterError):
        sample_dirichlet_weights(0)


def test_dirichlet_concentration_limit() -> None:
    """Test that a huge concentration gives nearly uniform weights."""
    weights = sample_dirichlet_weights(4, concentration=[1e6] * 4, seed=0).weights
    np.testing.assert_allclose(weights, 0.25, atol=1e-2)


def test_env_step_reward_and_state(chain_mdp) -> None:
    """Test that a step pays r(x, a) and moves the handle."""
    mdp, model = chain_mdp
    env = make_env(mdp, model, SeedTree(0).stream(), start_state=3)
    next_state, reward = env_step(env, FORWARD)
    assert reward == pytest.approx(0.75)
    assert next_state in (3, 4)
    assert env.current_state == next_state


def test_env_rejects_bad_action_and_state(chain_mdp) -> None:
    """Test handle validation."""
    mdp, model = chain_mdp
    env = make_env(mdp, model, SeedTree(0).stream())
    with pytest.raises(EnvStepError, match="not valid"):
        env_step(env, 2)
    with pytest.raises(EnvStepError):
        make_env(mdp, model, SeedTree(0).stream(), start_state=9)
    with pytest.raises(EnvStepError):
        reset(env, -1)


def test_reset(chain_mdp) -> None:
    """Test that reset moves without drawing."""
    mdp, model = chain_mdp
    env = make_env(mdp, model, SeedTree(0).stream(), start_state=2)
    state_before = env.stream.state
    assert reset(env) == 0
    assert reset(env, 4) == 4
    assert env.stream.state == state_before


def test_env_next_state_frequencies(single_step_mdp) -> None:
    """Test sampled successors against the model with a chi-square test."""
    model = single_step_transitions(0.7)
    env = make_env(single_step_mdp, model, SeedTree(12).stream())
    n = 20000
    counts = np.zeros(7)
    for _ in range(n):
        reset(env, S0)
        next_state, _ = env_step(env, 1)
        counts[next_state] += 1
    row = model.probs[S0, 1]
    fail, success = failure_state(1), success_state(1)
    observed = [counts[fail] + counts[S0], counts[success]]
    expected = [(row[fail] + row[S0]) * n, row[success] * n]
    result = stats.chisquare(observed, expected)
    assert result.pvalue > 1e-3


def test_env_deterministic_given_stream(chain_mdp) -> None:
    """Test that identical streams give identical trajectories."""
    mdp, model = chain_mdp

    def trajectory() -> list[int]:
        env = make_env(mdp, model, SeedTree(8).derive("env").stream())
        return [env_step(env, FORWARD)[0] for _ in range(30)]

    assert trajectory() == trajectory()
