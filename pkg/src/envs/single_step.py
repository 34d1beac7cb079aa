"""
Single-step decision benchmark in recurrent form.

States: s0, then one failure/success pair per action (F1, S1, F2, S2, F3, S3).
From s0 action i reaches S_i with the success probability and F_i otherwise;
every outcome state returns to s0. Outcome rewards sit on the exit step of the
outcome state, so one s0 -> outcome -> s0 cycle (two steps) collects exactly the
outcome reward. A small self-loop at s0 keeps the chain aperiodic.
"""
from collections.abc import Sequence

import numpy as np

from src.core.errors import InvalidParameterError, InvalidModelError
from src.core.logging import get_logger
from src.core.rng import SeedTree
from src.mdp.models import MdpSpec, TransitionModel, UncertaintySet, WeightingDistribution
from src.mdp.validation import check_ergodic

logger = get_logger(__name__)

S0 = 0
N_STATES = 7
N_ACTIONS = 3
SUCCESS_REWARDS = np.array([1e5, 2000.0, 5000.0])
FAILURE_REWARDS = np.array([-1e5, 0.0, -100.0])
SELF_LOOP = 1e-6
NOMINAL_SUCCESS = 0.8
SAMPLE_CLIP = (0.01, 0.99)
CYCLE_LENGTH = 2


def failure_state(action: int) -> int:
    return 1 + 2 * action


def success_state(action: int) -> int:
    return 2 + 2 * action


def _check_probability(success_prob: float) -> float:
    p = float(success_prob)
    if not 0.0 <= p <= 1.0 or not np.isfinite(p):
        raise InvalidParameterError(f"Success probability must lie in [0, 1], got {success_prob}")
    return p


def single_step_rewards() -> MdpSpec:
    """Reward table shared by every member of the family; r(s0, .) = 0."""
    rewards = np.zeros((N_STATES, N_ACTIONS))
    for i in range(N_ACTIONS):
        rewards[failure_state(i), :] = FAILURE_REWARDS[i]
        rewards[success_state(i), :] = SUCCESS_REWARDS[i]
    return MdpSpec(N_STATES, N_ACTIONS, rewards)


def single_step_transitions(success_prob: float) -> TransitionModel:
    """Transition table for one success probability; affine in ``success_prob``."""
    p = _check_probability(success_prob)
    probs = np.zeros((N_STATES, N_ACTIONS, N_STATES))
    for i in range(N_ACTIONS):
        probs[S0, i, S0] = SELF_LOOP
        probs[S0, i, success_state(i)] = (1.0 - SELF_LOOP) * p
        probs[S0, i, failure_state(i)] = (1.0 - SELF_LOOP) * (1.0 - p)
    probs[1:, :, S0] = 1.0
    return TransitionModel(probs)


def build_single_step_mdp(success_prob: float) -> tuple[MdpSpec, TransitionModel]:
    """
    Build the single-step MDP for one probability of success.

    Args:
        success_prob: Probability that any action at s0 succeeds

    Returns:
        (MdpSpec, TransitionModel) tuple

    Raises:
        InvalidParameterError: If success_prob is outside [0, 1]
    """
    return single_step_rewards(), single_step_transitions(success_prob)


def build_uncertainty_set_single_step(
    probs: Sequence[float], nominal: float = NOMINAL_SUCCESS
) -> UncertaintySet:
    """
    One member per success probability; the nominal member is the one closest to ``nominal``.

    Raises:
        InvalidModelError: If ``probs`` is empty
        AssumptionViolationError: If a member probability is 0 or 1 (reducible chain)
    """
    values = [_check_probability(p) for p in probs]
    if not values:
        raise InvalidModelError("Uncertainty set needs at least one success probability")
    models = tuple(single_step_transitions(p) for p in values)
    for k, model in enumerate(models):
        check_ergodic(model.uniform_policy_chain(), f"single-step member {k} (p={values[k]})")
    nominal_index = int(np.argmin(np.abs(np.asarray(values) - nominal)))
    logger.debug(f"Single-step uncertainty set {values}, nominal index {nominal_index}")
    return UncertaintySet(models, nominal_index)


def success_probability_of(model: TransitionModel) -> float:
    """Recover the success probability from a single-step transition table."""
    return float(model.probs[S0, 0, success_state(0)] / (1.0 - SELF_LOOP))


def average_success_probability(probs: Sequence[float], omega: WeightingDistribution) -> float:
    """
    omega-weighted mean success probability.

    The average model is the single-step MDP at this value.
    """
    values = np.asarray(probs, dtype=float)
    if values.size != len(omega):
        raise InvalidModelError(f"{values.size} probabilities for {len(omega)} weights")
    return float(values @ omega.weights)


def per_cycle_action_values(success_prob: float) -> np.ndarray:
    """Expected reward of one s0 -> outcome -> s0 cycle for each action."""
    p = _check_probability(success_prob)
    return p * SUCCESS_REWARDS + (1.0 - p) * FAILURE_REWARDS


def worst_case_action_values(probs: Sequence[float]) -> np.ndarray:
    """Per-action minimum of the per-cycle values across the set."""
    return np.min([per_cycle_action_values(p) for p in probs], axis=0)


def closed_form_step_value(action: int, success_prob: float) -> float:
    """Per-step reward of always playing ``action`` at s0, ignoring the self-loop."""
    return float(per_cycle_action_values(success_prob)[action] / CYCLE_LENGTH)


def sample_success_probabilities(k: int, tree: SeedTree) -> list[float]:
    """
    Draw ``k`` success probabilities uniformly on [0, 1], clipped away from the endpoints.

    Args:
        k: Number of members
        tree: Seed tree for the draw

    Returns:
        List of probabilities
    """
    if k < 1:
        raise InvalidParameterError(f"Need at least one sample, got k={k}")
    draws = tree.derive("single_step_uncertainty").stream().next_uniform(k)
    return [float(p) for p in np.clip(draws, *SAMPLE_CLIP)]


def sample_uncertainty_set_single_step(
    k: int, seed: int, nominal: float = NOMINAL_SUCCESS
) -> tuple[list[float], UncertaintySet]:
    """Sampled success probabilities and the uncertainty set they induce."""
    probs = sample_success_probabilities(k, SeedTree(seed))
    return probs, build_uncertainty_set_single_step(probs, nominal)
