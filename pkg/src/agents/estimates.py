"""Monte-Carlo estimates of the TD actor update under a frozen policy and critic."""
from dataclasses import dataclass

import numpy as np

from src.agents.state import TrainState
from src.agents.td import Transition, sr_td_error
from src.core.errors import InvalidParameterError
from src.core.logging import get_logger
from src.core.rng import RandomStream
from src.envs.handle import EnvHandle, env_step
from src.mdp.features import FeatureMap, score_vector
from src.mdp.models import MdpSpec, SoftmaxPolicy, TransitionModel

logger = get_logger(__name__)


@dataclass(frozen=True)
class GradientEstimate:
    """Batch-means estimate of E[delta_t psi_{x_t a_t}]."""

    mean: np.ndarray
    stderr: np.ndarray
    steps: int
    batches: int


def sample_gradient_estimates(
    mdp: MdpSpec,
    p_bar: TransitionModel,
    policy: SoftmaxPolicy,
    features: FeatureMap,
    v: np.ndarray,
    j_value: float,
    env: EnvHandle,
    action_stream: RandomStream,
    steps: int,
    batches: int = 100,
    burn_in: int = 1000,
) -> GradientEstimate:
    """
    Long-run average of delta_t psi_{x_t a_t} with a fixed critic ``v`` and
    average-reward estimate ``j_value``.

    Each step is sampled from ``env``; delta_t is the soft-robust TD error of a
    frozen learner state, i.e. a training step with alpha = beta = xi = 0.

    Args:
        mdp: Rewards and dimensions
        p_bar: Model of the TD bootstrap
        policy: Frozen policy
        features: Critic features
        v: Frozen critic weights
        j_value: Frozen average-reward estimate
        env: Environment handle (advanced in place)
        action_stream: Stream for action draws
        steps: Number of recorded steps (must be a multiple of ``batches``)
        batches: Number of batch means used for the standard error
        burn_in: Unrecorded steps run first

    Returns:
        GradientEstimate with per-coordinate mean and standard error
    """
    if batches < 2 or steps < batches or steps % batches:
        raise InvalidParameterError(
            f"steps={steps} must be a positive multiple of batches={batches} >= 2"
        )
    probs = policy.probabilities()
    cdf = np.cumsum(probs, axis=1)
    frozen = TrainState(theta=policy.theta, v=np.asarray(v, dtype=float), j_hat=j_value)

    for _ in range(burn_in):
        env_step(env, action_stream.next_index(cdf[env.current_state]))

    samples = np.empty((steps, policy.theta.size))
    for i in range(steps):
        x = env.current_state
        a = action_stream.next_index(cdf[x])
        next_state, reward = env_step(env, a)
        delta = sr_td_error(frozen, Transition(x, a, reward, next_state), p_bar, features)
        samples[i] = delta * score_vector(probs[x], x, a, mdp.n_states)

    batch_means = samples.reshape(batches, steps // batches, -1).mean(axis=1)
    mean = batch_means.mean(axis=0)
    stderr = batch_means.std(axis=0, ddof=1) / np.sqrt(batches)
    logger.debug(f"Gradient estimate over {steps} steps: max stderr {float(stderr.max()):.3e}")
    return GradientEstimate(mean=mean, stderr=stderr, steps=steps, batches=batches)
