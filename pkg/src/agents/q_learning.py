"""Tabular discounted Q-learning with soft-robust, robust and nominal expected bootstraps."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.agents.state import AgentConfig
from src.agents.td import Transition, Variant, q_td_error
from src.core.errors import DivergenceError, InvalidParameterError
from src.core.logging import get_logger
from src.core.rng import RandomStream, SeedTree
from src.envs.handle import EnvHandle, env_step
from src.mdp.models import UncertaintySet, WeightingDistribution

logger = get_logger(__name__)

VARIANTS: dict[str, Variant] = {"sr_q": "sr", "robust_q": "robust", "nominal_q": "nominal"}


@dataclass
class QLearningResult:
    """Learned Q table and its greedy policy."""

    q_table: np.ndarray
    greedy: np.ndarray
    steps_completed: int = 0
    td_errors: list[float] = field(default_factory=list)
    diverged: bool = False


def epsilon_at(
    t: int, max_steps: int, start: float = 1.0, final: float = 1e-5, fraction: float = 0.5
) -> float:
    """Linear anneal from ``start`` to ``final`` over the first ``fraction`` of the run."""
    horizon = max(1, int(fraction * max_steps))
    if t >= horizon:
        return final
    return start + (final - start) * t / horizon


def epsilon_greedy_action(q_row: np.ndarray, epsilon: float, rng: RandomStream) -> int:
    """Uniform action with probability epsilon, else argmax (lowest index on ties)."""
    if rng.next_uniform() < epsilon:
        return rng.next_integer(q_row.size)
    return int(np.argmax(q_row))


def q_learning_run(
    config: AgentConfig,
    env: EnvHandle,
    uncertainty: UncertaintySet,
    omega: WeightingDistribution,
    rng: Optional[RandomStream] = None,
    record_td_errors: bool = False,
) -> QLearningResult:
    """
    Run tabular Q-learning on the environment for ``config.max_steps`` steps.

    Q(x, a) <- Q(x, a) + alpha_t * delta_t with delta_t from :func:`q_td_error`.

    Args:
        config: Q-learning agent configuration (gamma required)
        env: Environment handle sampling from the nominal model
        uncertainty: Uncertainty set
        omega: Weighting over the set
        rng: Behaviour-policy stream (default: derived from config.seed)
        record_td_errors: Keep every TD error on the result

    Returns:
        QLearningResult with the Q table and greedy policy

    Raises:
        InvalidParameterError: If the algorithm is not a Q-learning variant
    """
    if not config.is_q_learning:
        raise InvalidParameterError(f"{config.algorithm} is not a Q-learning algorithm")
    assert config.gamma is not None
    variant = VARIANTS[config.algorithm]
    if rng is None:
        rng = SeedTree(config.seed).derive("actions").stream()

    q_table = np.zeros((env.mdp.n_states, env.mdp.n_actions))
    result = QLearningResult(q_table=q_table, greedy=np.zeros(env.mdp.n_states, dtype=int))
    for t in range(config.max_steps):
        x = env.current_state
        epsilon = epsilon_at(
            t, config.max_steps, config.epsilon_start, config.epsilon_final, config.epsilon_fraction
        )
        a = epsilon_greedy_action(q_table[x], epsilon, rng)
        next_state, reward = env_step(env, a)

        transition = Transition(x, a, reward, next_state)
        delta = q_td_error(variant, q_table, transition, uncertainty, omega, config.gamma)
        q_table[x, a] += config.schedule.alpha(t) * delta
        result.steps_completed = t + 1
        if record_td_errors:
            result.td_errors.append(delta)
        if not np.isfinite(q_table[x, a]):
            e = DivergenceError(f"Q({x}, {a}) is not finite at step {t}")
            logger.warning(f"{config.algorithm} seed={config.seed} diverged: {e}")
            result.diverged = True
            break

    result.greedy = np.argmax(q_table, axis=1)
    logger.debug(f"{config.algorithm} seed={config.seed} greedy policy {result.greedy.tolist()}")
    return result
