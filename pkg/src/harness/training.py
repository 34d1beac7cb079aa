"""Domain construction and seeded training runs."""
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Literal, Optional, TypeVar

import numpy as np

from src.agents.actor_critic import run_actor_critic
from src.agents.q_learning import q_learning_run
from src.agents.state import AgentConfig, TrainState
from src.core.config import Q_ALGORITHMS, AgentSpec, ExperimentConfig
from src.core.errors import (
    AssumptionViolationError,
    ConfigError,
    InvalidParameterError,
    SoftRobustError,
)
from src.core.logging import get_logger, log_training_event
from src.core.rng import SeedTree
from src.envs.chain import (
    build_chain_uncertainty_set,
    chain_rewards,
    chain_transitions,
    sample_chain_slips,
)
from src.envs.handle import make_env
from src.envs.single_step import (
    S0,
    build_uncertainty_set_single_step,
    sample_success_probabilities,
    single_step_rewards,
    single_step_transitions,
)
from src.envs.weights import named_weights, sample_dirichlet_weights
from src.harness.results import PolicyRecord, ResultRow, make_run_id
from src.mdp.chains import average_model
from src.mdp.features import FeatureMap, tabular_minus_one_features
from src.mdp.models import (
    MdpSpec,
    SoftmaxPolicy,
    TransitionModel,
    UncertaintySet,
    WeightingDistribution,
)
from src.oracle.evaluation import evaluate_policy

logger = get_logger(__name__)

GREEDY_LOGIT = 40.0

R = TypeVar("R")


@dataclass(frozen=True, eq=False)
class Domain:
    """Everything the agents and oracles need about one experiment's MDP family."""

    kind: Literal["single_step", "chain"]
    mdp: MdpSpec
    params: tuple[float, ...]
    uncertainty: UncertaintySet
    omega: WeightingDistribution
    features: FeatureMap
    p_bar: TransitionModel

    @property
    def nominal_param(self) -> float:
        return self.params[self.uncertainty.nominal_index]

    def model_for(self, param: float) -> TransitionModel:
        """Test model at a success probability (single step) or slip (chain)."""
        if self.kind == "single_step":
            return single_step_transitions(param)
        return chain_transitions(self.mdp.n_states, param)


def _uncertainty_params(config: ExperimentConfig) -> list[float]:
    spec = config.uncertainty
    if spec.params is not None:
        return [float(p) for p in spec.params]
    assert spec.sample_count is not None
    tree = SeedTree(spec.sample_seed)
    if config.domain.kind == "single_step":
        return sample_success_probabilities(spec.sample_count, tree)
    return sample_chain_slips(spec.sample_count, spec.nominal, spec.sample_scale, tree)


def _weighting(config: ExperimentConfig, k: int) -> WeightingDistribution:
    spec = config.weighting
    if spec.source == "named":
        return named_weights(spec.name)
    if spec.source == "dirichlet":
        return sample_dirichlet_weights(k, spec.concentration, spec.seed)
    assert spec.weights is not None
    return WeightingDistribution(np.asarray(spec.weights, dtype=float))


def build_domain(config: ExperimentConfig) -> Domain:
    """
    Build the MDP, uncertainty set, weighting and features an experiment describes.

    Raises:
        ConfigError: If the described models or features are invalid
    """
    try:
        params = _uncertainty_params(config)
        if config.domain.kind == "single_step":
            mdp = single_step_rewards()
            uncertainty = build_uncertainty_set_single_step(params, config.uncertainty.nominal)
        else:
            n = config.domain.n_states
            mdp = chain_rewards(n, config.domain.rewards)
            uncertainty = build_chain_uncertainty_set(n, params, config.uncertainty.nominal)
        omega = _weighting(config, len(uncertainty))
        features = tabular_minus_one_features(mdp.n_states, config.features.drop_state)
        p_bar = average_model(uncertainty, omega)
    except (InvalidParameterError, AssumptionViolationError) as e:
        raise ConfigError(f"Invalid experiment domain: {e}") from e
    return Domain(config.domain.kind, mdp, tuple(params), uncertainty, omega, features, p_bar)


@dataclass
class TrainOutcome:
    """Rows and learned policy of one (agent, seed) job."""

    agent: str
    seed: int
    rows: list[ResultRow] = field(default_factory=list)
    policy: Optional[PolicyRecord] = None
    status: Literal["ok", "diverged", "failed"] = "ok"
    message: str = ""


def _checkpoint_rows(
    run_id: str, seed: int, agent: str, episode: int, metrics: dict[str, float]
) -> list[ResultRow]:
    return [
        ResultRow(run_id, seed, agent, "train", episode, name, value)
        for name, value in metrics.items()
    ]


def _policy_metrics(domain: Domain, policy: SoftmaxPolicy) -> dict[str, float]:
    metrics = {
        "j_bar": evaluate_policy(domain.mdp, domain.p_bar, policy).j_bar,
        "j_nominal": evaluate_policy(domain.mdp, domain.uncertainty.nominal, policy).j_bar,
    }
    for a, prob in enumerate(policy.probabilities()[S0]):
        metrics[f"prob_s0_a{a}"] = float(prob)
    return metrics


def _train_actor_critic(
    config: ExperimentConfig, domain: Domain, spec: AgentSpec, seed: int, tree: SeedTree
) -> TrainOutcome:
    run_id = make_run_id(spec.name, seed)
    warmup = config.warmup_steps
    agent_config = AgentConfig.from_spec(
        spec, warmup + config.max_steps, seed, config.training.divergence_threshold
    )
    if warmup:
        agent_config = replace(
            agent_config, schedule=agent_config.schedule.with_actor_delay(warmup)
        )
    env = make_env(
        domain.mdp, domain.uncertainty.nominal, tree.derive("env").stream(), start_state=S0
    )
    initial = TrainState.initial(
        domain.mdp.n_states * domain.mdp.n_actions,
        domain.features.d2,
        tree.derive("actions").stream(),
    )
    steps_per_episode = config.training.steps_per_episode

    def checkpoint(state: TrainState) -> Optional[dict[str, Any]]:
        if state.t <= warmup:
            return None
        episode = (state.t - warmup) // steps_per_episode
        policy = SoftmaxPolicy(state.theta, domain.mdp.n_states, domain.mdp.n_actions)
        metrics = {
            "j_hat": state.j_hat,
            **_policy_metrics(domain, policy),
            "theta_norm": state.theta_norm,
        }
        start_probs = [metrics[f"prob_s0_a{a}"] for a in range(domain.mdp.n_actions)]
        log_training_event(
            logger,
            spec.name,
            seed,
            episode,
            state.j_hat,
            metrics["j_bar"],
            metrics["j_nominal"],
            state.theta_norm,
            start_probs,
        )
        return {"episode": episode, "metrics": metrics}

    result = run_actor_critic(
        agent_config,
        env,
        domain.uncertainty,
        domain.omega,
        domain.features,
        callback=checkpoint,
        log_interval=config.training.log_interval_episodes * steps_per_episode,
        initial_state=initial,
    )
    outcome = TrainOutcome(agent=spec.name, seed=seed)
    for record in result.records:
        outcome.rows.extend(
            _checkpoint_rows(run_id, seed, spec.name, record["episode"], record["metrics"])
        )
    if result.diverged:
        outcome.status = "diverged"
        outcome.message = result.message
        final_episode = max(0, result.state.t - warmup) // steps_per_episode
        outcome.rows.append(
            ResultRow(run_id, seed, spec.name, "train", final_episode, "diverged", 1.0)
        )
    outcome.policy = PolicyRecord(
        agent=spec.name,
        seed=seed,
        algorithm=spec.algorithm,
        n_states=domain.mdp.n_states,
        n_actions=domain.mdp.n_actions,
        theta=[float(x) for x in result.state.theta],
        status=outcome.status,
        message=outcome.message,
    )
    return outcome


def _train_q_learning(
    config: ExperimentConfig, domain: Domain, spec: AgentSpec, seed: int, tree: SeedTree
) -> TrainOutcome:
    run_id = make_run_id(spec.name, seed)
    agent_config = AgentConfig.from_spec(
        spec, config.max_steps, seed, config.training.divergence_threshold
    )
    env = make_env(
        domain.mdp, domain.uncertainty.nominal, tree.derive("env").stream(), start_state=S0
    )
    result = q_learning_run(
        agent_config, env, domain.uncertainty, domain.omega, rng=tree.derive("actions").stream()
    )

    outcome = TrainOutcome(agent=spec.name, seed=seed)
    final_episode = result.steps_completed // config.training.steps_per_episode
    if result.diverged:
        outcome.status = "diverged"
        outcome.message = "non-finite Q value"
        outcome.rows.append(
            ResultRow(run_id, seed, spec.name, "train", final_episode, "diverged", 1.0)
        )
    policy = SoftmaxPolicy.near_deterministic(
        result.greedy.tolist(), domain.mdp.n_actions, GREEDY_LOGIT
    )
    if not result.diverged:
        metrics = _policy_metrics(domain, policy)
        outcome.rows.extend(_checkpoint_rows(run_id, seed, spec.name, final_episode, metrics))
    q_table = None if result.diverged else [[float(q) for q in row] for row in result.q_table]
    outcome.policy = PolicyRecord(
        agent=spec.name,
        seed=seed,
        algorithm=spec.algorithm,
        n_states=domain.mdp.n_states,
        n_actions=domain.mdp.n_actions,
        theta=[float(x) for x in policy.theta],
        status=outcome.status,
        message=outcome.message,
        q_table=q_table,
    )
    return outcome


def train_single(config: ExperimentConfig, spec: AgentSpec, seed: int) -> TrainOutcome:
    """
    Train one agent with one seed on the nominal model.

    Top-level so it can run in a worker process. A failure inside the run is
    returned as a failed outcome with a ``run_failed`` row rather than raised.

    Args:
        config: Experiment configuration
        spec: Agent to train
        seed: Root seed of the run

    Returns:
        TrainOutcome with training-curve rows and the learned policy
    """
    domain = build_domain(config)
    tree = SeedTree(seed).derive(spec.name)
    logger.info(f"Training {spec.name} ({spec.algorithm}) seed={seed} for {config.max_steps} steps")
    try:
        if spec.algorithm in Q_ALGORITHMS:
            return _train_q_learning(config, domain, spec, seed, tree)
        return _train_actor_critic(config, domain, spec, seed, tree)
    except SoftRobustError as e:
        run_id = make_run_id(spec.name, seed)
        logger.error(f"Run {run_id} failed: {e}")
        return TrainOutcome(
            agent=spec.name,
            seed=seed,
            rows=[ResultRow(run_id, seed, spec.name, "train", 0.0, "run_failed", 1.0)],
            policy=PolicyRecord(
                agent=spec.name,
                seed=seed,
                algorithm=spec.algorithm,
                n_states=domain.mdp.n_states,
                n_actions=domain.mdp.n_actions,
                theta=[],
                status="failed",
                message=str(e),
            ),
            status="failed",
            message=str(e),
        )


def run_jobs(fn: Callable[..., R], jobs: list[tuple[Any, ...]], workers: int = 1) -> list[R]:
    """
    Run ``fn(*args)`` for every argument tuple, in order.

    With ``workers > 1`` the jobs fan out over a process pool; results come back
    in submission order regardless of completion order.
    """
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*args) for args in jobs]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(fn, *args) for args in jobs]
        return [future.result() for future in futures]


def run_training(config: ExperimentConfig, seed_offset: int = 0) -> list[TrainOutcome]:
    """
    Train every configured agent with every seed.

    Args:
        config: Experiment configuration
        seed_offset: Added to every configured seed

    Returns:
        Outcomes sorted by (agent, seed)
    """
    build_domain(config)  # surface config errors before fanning out
    jobs = [
        (config, spec, seed + seed_offset)
        for spec in sorted(config.agents, key=lambda s: s.name)
        for seed in sorted(config.seeds)
    ]
    logger.info(f"Running {len(jobs)} training jobs on {config.workers} worker(s)")
    outcomes = run_jobs(train_single, jobs, config.workers)
    outcomes.sort(key=lambda o: (o.agent, o.seed))
    for outcome in outcomes:
        if outcome.status != "ok":
            run_id = make_run_id(outcome.agent, outcome.seed)
            logger.warning(f"{run_id}: {outcome.status} ({outcome.message})")
    return outcomes
