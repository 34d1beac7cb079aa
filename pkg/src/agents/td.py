"""Temporal-difference errors with expected bootstraps over the next state."""
from dataclasses import dataclass
from typing import Literal

import numpy as np

from src.agents.state import TrainState
from src.core.errors import InvalidParameterError
from src.mdp.features import FeatureMap
from src.mdp.models import TransitionModel, UncertaintySet, WeightingDistribution

Variant = Literal["sr", "robust", "nominal"]


@dataclass(frozen=True)
class Transition:
    """One observed step (x_t, a_t, r_{t+1}, x_{t+1})."""

    state: int
    action: int
    reward: float
    next_state: int


def _expected_next_value(
    model: TransitionModel, state: int, action: int, values: np.ndarray
) -> float:
    return float(model.probs[state, action] @ values)


def average_reward_td_error(
    state: TrainState, transition: Transition, bootstrap: float, features: FeatureMap
) -> float:
    """r - J_hat + bootstrap - phi_x^T v."""
    current = float(features.state_features[transition.state] @ state.v)
    return transition.reward - state.j_hat + bootstrap - current


def sr_td_error(
    state: TrainState, transition: Transition, p_bar: TransitionModel, features: FeatureMap
) -> float:
    """
    Soft-robust TD error with the full expectation under the average model.

    delta = r - J_hat + sum_y p_bar(x, a, y) phi_y^T v - phi_x^T v, where J_hat
    has already been updated for this step.
    """
    values = features.values(state.v)
    bootstrap = _expected_next_value(p_bar, transition.state, transition.action, values)
    return average_reward_td_error(state, transition, bootstrap, features)


def robust_td_error(
    state: TrainState, transition: Transition, uncertainty: UncertaintySet, features: FeatureMap
) -> float:
    """TD error bootstrapping through the worst member: min_k sum_y p_k(x, a, y) phi_y^T v."""
    values = features.values(state.v)
    bootstrap = robust_bootstrap(uncertainty, transition.state, transition.action, values)
    return average_reward_td_error(state, transition, bootstrap, features)


def nominal_td_error(
    state: TrainState, transition: Transition, nominal: TransitionModel, features: FeatureMap
) -> float:
    """TD error bootstrapping through the nominal model."""
    values = features.values(state.v)
    bootstrap = _expected_next_value(nominal, transition.state, transition.action, values)
    return average_reward_td_error(state, transition, bootstrap, features)


def member_bootstraps(
    uncertainty: UncertaintySet, state: int, action: int, values: np.ndarray
) -> np.ndarray:
    """Expected next value under each member, shape (K,)."""
    return uncertainty.stacked[:, state, action, :] @ values


def robust_bootstrap(
    uncertainty: UncertaintySet, state: int, action: int, values: np.ndarray
) -> float:
    return float(np.min(member_bootstraps(uncertainty, state, action, values)))


def soft_robust_bootstrap(
    uncertainty: UncertaintySet,
    omega: WeightingDistribution,
    state: int,
    action: int,
    values: np.ndarray,
) -> float:
    return float(omega.weights @ member_bootstraps(uncertainty, state, action, values))


def q_td_error(
    variant: Variant,
    q_table: np.ndarray,
    transition: Transition,
    uncertainty: UncertaintySet,
    omega: WeightingDistribution,
    gamma: float,
) -> float:
    """
    Discounted Q-learning TD error with an expected bootstrap.

    delta = r - Q(x, a) + gamma * B, where B is sum_y p(x, a, y) max_a' Q(y, a')
    under the average model (sr), the worst member (robust) or the nominal model.

    Args:
        variant: Which bootstrap to use
        q_table: Current Q values, shape (S, A)
        transition: Observed step (next_state is unused by the expected bootstrap)
        uncertainty: Uncertainty set
        omega: Weighting over the set
        gamma: Discount factor in [0, 1)

    Returns:
        TD error

    Raises:
        InvalidParameterError: On an unknown variant or gamma outside [0, 1)
    """
    if not 0.0 <= gamma < 1.0:
        raise InvalidParameterError(f"gamma must lie in [0, 1), got {gamma}")
    x, a = transition.state, transition.action
    greedy_values = q_table.max(axis=1)
    if variant == "sr":
        bootstrap = soft_robust_bootstrap(uncertainty, omega, x, a, greedy_values)
    elif variant == "robust":
        bootstrap = robust_bootstrap(uncertainty, x, a, greedy_values)
    elif variant == "nominal":
        bootstrap = _expected_next_value(uncertainty.nominal, x, a, greedy_values)
    else:
        raise InvalidParameterError(f"Unknown TD variant {variant!r}")
    return float(transition.reward - q_table[x, a] + gamma * bootstrap)
