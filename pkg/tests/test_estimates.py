"""Tests for Monte-Carlo estimates of the TD actor update."""
from unittest.mock import patch

import numpy as np
import pytest

from src.agents.estimates import sample_gradient_estimates
from src.agents.td import sr_td_error
from src.core.errors import InvalidParameterError
from src.core.rng import SeedTree
from src.envs.handle import make_env
from src.mdp.chains import average_model
from src.mdp.features import coarse_features
from src.mdp.models import (
    MdpSpec,
    SoftmaxPolicy,
    TransitionModel,
    UncertaintySet,
    WeightingDistribution,
)
from src.oracle.evaluation import evaluate_policy
from src.oracle.gradient import (
    critic_fixed_point,
    exact_policy_gradient,
    expected_td_errors,
    gradient_bias,
)


@pytest.fixture
def biased_problem():
    """Three states, two actions, two models and a one-column critic that cannot represent V_bar."""
    rng = np.random.default_rng(2024)
    mdp = MdpSpec(3, 2, rng.uniform(-1.0, 1.0, (3, 2)))
    models = tuple(TransitionModel(rng.dirichlet(np.ones(3), size=(3, 2))) for _ in range(2))
    p_bar = average_model(UncertaintySet(models), WeightingDistribution(np.array([0.3, 0.7])))
    policy = SoftmaxPolicy(np.array([0.4, -0.2, 0.0, 0.9, -0.6, 0.1]), 3, 2)
    features = coarse_features(np.array([0.0, 1.0, 3.0]))
    return mdp, p_bar, policy, features


def _estimate(problem, steps: int, seed: int):
    mdp, p_bar, policy, features = problem
    ev = evaluate_policy(mdp, p_bar, policy)
    v = critic_fixed_point(mdp, p_bar, policy, features, ev)
    tree = SeedTree(seed)
    env = make_env(mdp, p_bar, tree.derive("env").stream())
    return sample_gradient_estimates(
        mdp, p_bar, policy, features, v, ev.j_bar, env, tree.derive("actions").stream(), steps
    )


def test_estimate_is_gradient_plus_bias(biased_problem) -> None:
    """Test that the sampled update averages to the exact gradient plus the critic bias."""
    mdp, p_bar, policy, features = biased_problem
    target = exact_policy_gradient(mdp, p_bar, policy) + gradient_bias(mdp, p_bar, policy, features)
    assert np.linalg.norm(gradient_bias(mdp, p_bar, policy, features)) > 1e-6

    estimate = _estimate(biased_problem, steps=100_000, seed=1)
    assert np.all(np.abs(estimate.mean - target) <= 4.0 * estimate.stderr + 1e-12)
    assert estimate.steps == 100_000
    assert estimate.batches == 100


@pytest.mark.slow
def test_estimate_is_gradient_plus_bias_long_run(biased_problem) -> None:
    """Test the bias identity over a long run at three standard errors."""
    mdp, p_bar, policy, features = biased_problem
    target = exact_policy_gradient(mdp, p_bar, policy) + gradient_bias(mdp, p_bar, policy, features)
    estimate = _estimate(biased_problem, steps=1_000_000, seed=5)
    assert np.all(np.abs(estimate.mean - target) <= 3.0 * estimate.stderr + 1e-12)


def test_estimate_validation(biased_problem) -> None:
    """Test the batch layout checks."""
    with pytest.raises(InvalidParameterError, match="multiple"):
        _estimate(biased_problem, steps=1_050, seed=0)


def test_estimate_uses_agent_td_error(biased_problem) -> None:
    """Test that every recorded step goes through sr_td_error and matches the exact TD error."""
    mdp, p_bar, policy, features = biased_problem
    ev = evaluate_policy(mdp, p_bar, policy)
    v = critic_fixed_point(mdp, p_bar, policy, features, ev)
    exact = expected_td_errors(mdp, p_bar, features, v, ev.j_bar)

    with patch("src.agents.estimates.sr_td_error", wraps=sr_td_error) as spy:
        _estimate(biased_problem, steps=200, seed=3)
    assert spy.call_count == 200
    for call in spy.call_args_list:
        state, transition = call.args[0], call.args[1]
        assert state.j_hat == ev.j_bar
        assert sr_td_error(state, transition, p_bar, features) == pytest.approx(
            exact[transition.state, transition.action], abs=1e-12
        )
