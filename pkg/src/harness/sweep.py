"""Train-then-evaluate sweeps and the exact oracle report."""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from src.core.config import ExperimentConfig, dump_config
from src.core.logging import get_logger
from src.envs.single_step import (
    average_success_probability,
    per_cycle_action_values,
    worst_case_action_values,
)
from src.harness.evaluation import run_evaluation
from src.harness.results import PolicyRecord, ResultRow, emit_results, save_policies
from src.harness.training import TrainOutcome, build_domain, run_training
from src.mdp.models import SoftmaxPolicy
from src.oracle.evaluation import evaluate_policy, objective_gap
from src.oracle.gradient import exact_policy_gradient, gradient_bias

logger = get_logger(__name__)


@dataclass
class SweepResult:
    """Files and rows produced by one sweep."""

    outcomes: list[TrainOutcome]
    rows: list[ResultRow]
    csv_path: Path
    json_path: Path
    policy_paths: list[Path] = field(default_factory=list)

    @property
    def failed_runs(self) -> list[TrainOutcome]:
        return [o for o in self.outcomes if o.status == "failed"]


def training_rows(outcomes: list[TrainOutcome]) -> list[ResultRow]:
    return [row for outcome in outcomes for row in outcome.rows]


def policy_records(outcomes: list[TrainOutcome]) -> list[PolicyRecord]:
    return [outcome.policy for outcome in outcomes if outcome.policy is not None]


def run_sweep(config: ExperimentConfig, output_dir: Path, seed_offset: int = 0) -> SweepResult:
    """
    Train every (agent, seed), evaluate the learned policies, and write all artifacts.

    Writes ``config.yaml``, ``policies/``, ``results.csv`` and ``results_summary.json``
    under ``output_dir``.

    Args:
        config: Experiment configuration
        output_dir: Output directory
        seed_offset: Added to every configured seed

    Returns:
        SweepResult
    """
    output_dir = Path(output_dir)
    outcomes = run_training(config, seed_offset)
    records = policy_records(outcomes)
    rows = training_rows(outcomes) + run_evaluation(config, records)

    dump_config(config, output_dir / "config.yaml")
    policy_paths = save_policies(records, output_dir / "policies")
    csv_path, json_path = emit_results(rows, output_dir)
    logger.info(
        f"Sweep {config.name}: {len(outcomes)} runs, {len(rows)} rows written to {output_dir}"
    )
    return SweepResult(outcomes, rows, csv_path, json_path, policy_paths)


def oracle_report(config: ExperimentConfig) -> dict[str, Any]:
    """
    Exact quantities for the policy with ``evaluation.oracle_theta`` (uniform policy when unset).

    Returns:
        Mapping with J_bar, J on the nominal model, the fixed-model objective gap,
        the exact gradient and the gradient bias of the configured critic features
    """
    domain = build_domain(config)
    n_states, n_actions = domain.mdp.n_states, domain.mdp.n_actions
    theta = config.evaluation.oracle_theta
    if theta is None:
        policy = SoftmaxPolicy.uniform(n_states, n_actions)
    else:
        policy = SoftmaxPolicy(np.asarray(theta, dtype=float), n_states, n_actions)

    evaluation = evaluate_policy(domain.mdp, domain.p_bar, policy)
    gradient = exact_policy_gradient(domain.mdp, domain.p_bar, policy, evaluation)
    bias = gradient_bias(domain.mdp, domain.p_bar, policy, domain.features)
    report: dict[str, Any] = {
        "j_bar": evaluation.j_bar,
        "j_nominal": evaluate_policy(domain.mdp, domain.uncertainty.nominal, policy).j_bar,
        "objective_gap": objective_gap(domain.mdp, domain.uncertainty, domain.omega, policy),
        "d_bar": evaluation.d_bar.tolist(),
        "gradient": gradient.tolist(),
        "bias": bias.tolist(),
        "bias_norm": float(np.linalg.norm(bias)),
    }
    if domain.kind == "single_step":
        success = average_success_probability(domain.params, domain.omega)
        report["average_success_probability"] = success
        report["soft_robust_cycle_values"] = per_cycle_action_values(success).tolist()
        report["nominal_cycle_values"] = per_cycle_action_values(domain.nominal_param).tolist()
        report["worst_case_cycle_values"] = worst_case_action_values(domain.params).tolist()
    return report
