"""Average-reward actor-critic with soft-robust, robust and nominal TD targets."""
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from src.agents.schedules import StepSizeSchedule
from src.agents.state import AgentConfig, AverageReward, TrainState
from src.agents.td import Transition, nominal_td_error, robust_td_error, sr_td_error
from src.core.errors import DivergenceError, InvalidParameterError
from src.core.logging import get_logger
from src.core.rng import SeedTree
from src.envs.handle import EnvHandle, env_step
from src.mdp.chains import average_model
from src.mdp.features import FeatureMap, score_vector
from src.mdp.models import (
    SoftmaxPolicy,
    TransitionModel,
    UncertaintySet,
    WeightingDistribution,
    softmax_rows,
)

logger = get_logger(__name__)

TdError = Callable[[TrainState, Transition], float]
StepCallback = Callable[[TrainState], Optional[dict[str, Any]]]


@dataclass
class TrainResult:
    """Outcome of one actor-critic run."""

    state: TrainState
    diverged: bool = False
    steps_completed: int = 0
    records: list[dict[str, Any]] = field(default_factory=list)
    message: str = ""

    def policy(self, n_states: int, n_actions: int) -> SoftmaxPolicy:
        return SoftmaxPolicy(self.state.theta, n_states, n_actions)


def _actor_critic_step(
    state: TrainState,
    env: EnvHandle,
    features: FeatureMap,
    schedule: StepSizeSchedule,
    td_error: TdError,
    average_reward: AverageReward = "sampled",
) -> TrainState:
    """
    One iteration: act, update J_hat, compute delta, then critic and actor.

    The TD error sees the updated J_hat together with the pre-update critic.
    With ``average_reward="sampled"`` J_hat averages the observed rewards; with
    ``"td"`` it moves by xi_t times the TD error taken at the old J_hat, which
    makes it track the average reward of the bootstrap model instead of the
    sampling one.
    """
    n_states, n_actions = env.mdp.n_states, env.mdp.n_actions
    x = env.current_state
    action_probs = softmax_rows(state.theta[x * n_actions : (x + 1) * n_actions])
    a = state.rng.next_categorical(action_probs)
    next_state, reward = env_step(env, a)
    transition = Transition(x, a, reward, next_state)

    t = state.t
    xi = schedule.xi(t)
    if average_reward == "td":
        j_next = state.j_hat + xi * td_error(state, transition)
    else:
        j_next = (1.0 - xi) * state.j_hat + xi * reward
    updated = TrainState(state.theta, state.v, j_next, t, state.rng)
    delta = td_error(updated, transition)

    v_next = state.v + schedule.alpha(t) * delta * features.state_features[x]
    theta_next = state.theta + schedule.beta(t) * delta * score_vector(action_probs, x, a, n_states)
    return TrainState(theta=theta_next, v=v_next, j_hat=j_next, t=t + 1, rng=state.rng)


def sr_ac_step(
    state: TrainState,
    env: EnvHandle,
    p_bar: TransitionModel,
    features: FeatureMap,
    schedule: StepSizeSchedule,
    average_reward: AverageReward = "sampled",
) -> TrainState:
    """
    Soft-robust actor-critic step; the environment samples from the nominal model.

    Args:
        state: Current learner state (its action stream is advanced)
        env: Environment handle (advanced in place)
        p_bar: Average transition model used by the TD target
        features: Critic features
        schedule: Step sizes
        average_reward: How J_hat is updated, "sampled" or "td"

    Returns:
        The next TrainState
    """
    return _actor_critic_step(
        state,
        env,
        features,
        schedule,
        lambda s, tr: sr_td_error(s, tr, p_bar, features),
        average_reward,
    )


def robust_ac_step(
    state: TrainState,
    env: EnvHandle,
    uncertainty: UncertaintySet,
    features: FeatureMap,
    schedule: StepSizeSchedule,
    average_reward: AverageReward = "sampled",
) -> TrainState:
    """Actor-critic step with the worst-member bootstrap."""
    return _actor_critic_step(
        state,
        env,
        features,
        schedule,
        lambda s, tr: robust_td_error(s, tr, uncertainty, features),
        average_reward,
    )


def nominal_ac_step(
    state: TrainState,
    env: EnvHandle,
    nominal: TransitionModel,
    features: FeatureMap,
    schedule: StepSizeSchedule,
    average_reward: AverageReward = "sampled",
) -> TrainState:
    """Actor-critic step bootstrapping through the nominal model."""
    return _actor_critic_step(
        state,
        env,
        features,
        schedule,
        lambda s, tr: nominal_td_error(s, tr, nominal, features),
        average_reward,
    )


def check_divergence(state: TrainState, threshold: float) -> None:
    """
    Raises:
        DivergenceError: If ||theta|| exceeds ``threshold`` or a parameter is not finite
    """
    finite = np.all(np.isfinite(state.theta)) and np.all(np.isfinite(state.v))
    if not (finite and np.isfinite(state.j_hat)):
        raise DivergenceError(f"Non-finite parameters at step {state.t}")
    if state.theta_norm > threshold:
        raise DivergenceError(
            f"||theta|| = {state.theta_norm:.3e} exceeds {threshold:.3e} at step {state.t}"
        )


def run_actor_critic(
    config: AgentConfig,
    env: EnvHandle,
    uncertainty: UncertaintySet,
    omega: WeightingDistribution,
    features: FeatureMap,
    callback: Optional[StepCallback] = None,
    log_interval: int = 1,
    initial_state: Optional[TrainState] = None,
) -> TrainResult:
    """
    Run an actor-critic agent for ``config.max_steps`` steps.

    Args:
        config: Agent configuration (algorithm selects the TD target)
        env: Environment handle sampling from the nominal model
        uncertainty: Uncertainty set
        omega: Weighting over the set
        features: Critic features
        callback: Called with the state every ``log_interval`` steps; non-None returns
            are kept as records
        log_interval: Steps between callbacks
        initial_state: Resume from this state instead of theta_0 = v_0 = 0

    Returns:
        TrainResult; divergence stops the run and sets ``diverged`` instead of raising

    Raises:
        InvalidParameterError: If the algorithm is not an actor-critic variant
    """
    if config.is_q_learning:
        raise InvalidParameterError(f"{config.algorithm} is not an actor-critic algorithm")
    if log_interval < 1:
        raise InvalidParameterError(f"log_interval must be >= 1, got {log_interval}")
    if features.n_states != env.mdp.n_states:
        raise InvalidParameterError(
            f"Features cover {features.n_states} states, MDP has {env.mdp.n_states}"
        )

    schedule = config.schedule
    mode = config.average_reward
    if config.algorithm == "sr_ac":
        p_bar = average_model(uncertainty, omega)

        def step(s: TrainState) -> TrainState:
            return sr_ac_step(s, env, p_bar, features, schedule, mode)

    elif config.algorithm == "robust_ac":

        def step(s: TrainState) -> TrainState:
            return robust_ac_step(s, env, uncertainty, features, schedule, mode)

    else:
        nominal = uncertainty.nominal

        def step(s: TrainState) -> TrainState:
            return nominal_ac_step(s, env, nominal, features, schedule, mode)

    state = initial_state
    if state is None:
        rng = SeedTree(config.seed).derive("actions").stream()
        state = TrainState.initial(env.mdp.n_states * env.mdp.n_actions, features.d2, rng)

    result = TrainResult(state=state)
    start = state.t
    for _ in range(config.max_steps):
        state = step(state)
        result.state = state
        result.steps_completed = state.t - start
        try:
            check_divergence(state, config.divergence_threshold)
        except DivergenceError as e:
            logger.warning(f"{config.algorithm} seed={config.seed} diverged: {e}")
            result.diverged = True
            result.message = str(e)
            break
        if callback is not None and result.steps_completed % log_interval == 0:
            record = callback(state)
            if record is not None:
                result.records.append(record)

    logger.debug(
        f"{config.algorithm} seed={config.seed} finished {result.steps_completed} steps, "
        f"J_hat={state.j_hat:.4f}, ||theta||={state.theta_norm:.3f}"
    )
    return result
