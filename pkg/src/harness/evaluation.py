"""Exact and Monte-Carlo evaluation of learned policies across test models."""
from dataclasses import dataclass

import numpy as np

from src.core.config import ExperimentConfig
from src.core.errors import AssumptionViolationError, SoftRobustError
from src.core.logging import get_logger, log_evaluation_event
from src.core.rng import RandomStream, SeedTree
from src.envs.handle import env_step, make_env
from src.harness.results import PolicyRecord, ResultRow
from src.harness.training import Domain, build_domain
from src.mdp.models import MdpSpec, SoftmaxPolicy, TransitionModel
from src.mdp.validation import check_ergodic_safe
from src.oracle.evaluation import evaluate_policy

logger = get_logger(__name__)

SIGMA_BAND = 3.0


@dataclass(frozen=True)
class RolloutEstimate:
    """Per-step reward estimated from consecutive rollout episodes."""

    mean: float
    std: float
    stderr: float
    episodes: int

    def within(self, exact: float, sigmas: float = SIGMA_BAND) -> bool:
        tolerance = max(sigmas * self.stderr, 1e-9 * max(1.0, abs(exact)))
        return abs(self.mean - exact) <= tolerance


def rollout_estimate(
    mdp: MdpSpec,
    model: TransitionModel,
    policy: SoftmaxPolicy,
    episodes: int,
    steps_per_episode: int,
    env_stream: RandomStream,
    action_stream: RandomStream,
    start_state: int = 0,
) -> RolloutEstimate:
    """
    Roll the policy out for ``episodes`` consecutive episodes without resets.

    Args:
        mdp: Rewards and dimensions
        model: Test transition model
        policy: Policy to roll out
        episodes: Number of episodes (>= 2)
        steps_per_episode: Steps per episode
        env_stream: Stream for next-state draws
        action_stream: Stream for action draws
        start_state: Initial state

    Returns:
        RolloutEstimate over per-episode mean rewards
    """
    env = make_env(mdp, model, env_stream, start_state)
    cdf = np.cumsum(policy.probabilities(), axis=1)
    per_episode = np.empty(episodes)
    for i in range(episodes):
        total = 0.0
        for _ in range(steps_per_episode):
            _, reward = env_step(env, action_stream.next_index(cdf[env.current_state]))
            total += reward
        per_episode[i] = total / steps_per_episode
    std = float(per_episode.std(ddof=1))
    return RolloutEstimate(
        mean=float(per_episode.mean()), std=std, stderr=std / np.sqrt(episodes), episodes=episodes
    )


def evaluate_record(
    config: ExperimentConfig, domain: Domain, record: PolicyRecord
) -> list[ResultRow]:
    """
    Exact value plus rollout cross-check of one learned policy at every grid point.

    A grid model that breaks irreducibility or aperiodicity, or whose solve
    fails, yields an ``eval_failed`` row for that point instead of raising.
    """
    policy = SoftmaxPolicy(np.asarray(record.theta), record.n_states, record.n_actions)
    tree = SeedTree(record.seed).derive(record.agent).derive("eval")
    rows: list[ResultRow] = []

    def row(param: float, metric: str, value: float) -> ResultRow:
        return ResultRow(record.run_id, record.seed, record.agent, "eval", param, metric, value)

    for param in config.evaluation.grid:
        try:
            model = domain.model_for(param)
            ok, message = check_ergodic_safe(
                model.uniform_policy_chain(), label=f"test model {param}"
            )
            if not ok:
                raise AssumptionViolationError(message)
            exact = evaluate_policy(domain.mdp, model, policy).j_bar
        except SoftRobustError as e:
            logger.warning(f"{record.run_id} param={param}: evaluation failed: {e}")
            rows.append(row(param, "eval_failed", 1.0))
            continue

        point = tree.derive(repr(float(param)))
        estimate = rollout_estimate(
            domain.mdp,
            model,
            policy,
            config.evaluation.test_episodes,
            config.training.steps_per_episode,
            point.derive("env").stream(),
            point.derive("actions").stream(),
        )
        log_evaluation_event(
            logger, record.agent, record.seed, param, exact, estimate.mean, estimate.stderr
        )
        rows.extend(
            [
                row(param, "exact_reward", exact),
                row(param, "mc_reward", estimate.mean),
                row(param, "mc_stderr", estimate.stderr),
                row(param, "mc_within_3sigma", 1.0 if estimate.within(exact) else 0.0),
            ]
        )
    return rows


def run_evaluation(config: ExperimentConfig, policies: list[PolicyRecord]) -> list[ResultRow]:
    """
    Evaluate every usable learned policy on every grid model.

    Args:
        config: Experiment configuration (grid, test episodes, domain)
        policies: Learned policies

    Returns:
        Eval rows ordered by (agent, seed) then grid order
    """
    domain = build_domain(config)
    rows: list[ResultRow] = []
    for record in sorted(policies, key=lambda r: (r.agent, r.seed)):
        if not record.usable:
            logger.warning(f"Skipping {record.run_id}: no usable policy ({record.status})")
            continue
        if (record.n_states, record.n_actions) != (domain.mdp.n_states, domain.mdp.n_actions):
            logger.warning(f"Skipping {record.run_id}: policy shape does not match the domain")
            continue
        rows.extend(evaluate_record(config, domain, record))
    logger.info(f"Evaluated {len(policies)} policies on {len(config.evaluation.grid)} grid points")
    return rows
