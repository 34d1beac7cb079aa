"""Tests for train-then-evaluate sweeps and the oracle report."""
import json
from pathlib import Path

import pytest
import yaml
from pydantic import ValidationError

from src.core.config import (
    DomainConfig,
    EvaluationConfig,
    ExperimentConfig,
    TrainingConfig,
    UncertaintyConfig,
    WeightingConfig,
    load_config,
)
from src.envs.single_step import closed_form_step_value
from src.harness.results import load_policies, load_results
from src.harness.sweep import oracle_report, run_sweep
from src.mdp.models import SoftmaxPolicy


def tiny_config() -> ExperimentConfig:
    return ExperimentConfig(
        training=TrainingConfig(episodes=20, steps_per_episode=2, log_interval_episodes=10),
        evaluation=EvaluationConfig(grid=[0.3, 0.8], test_episodes=10),
        seeds=[0],
    )


def test_sweep_writes_all_artifacts(tmp_path: Path) -> None:
    """Test the output layout and the train/eval rows of a sweep."""
    result = run_sweep(tiny_config(), tmp_path)

    assert (tmp_path / "config.yaml").exists()
    assert yaml.safe_load((tmp_path / "config.yaml").read_text())["seeds"] == [0]
    assert [p.name for p in result.policy_paths] == [
        "aggressive__seed0.json",
        "robust__seed0.json",
        "soft_robust__seed0.json",
    ]
    assert len(load_policies(tmp_path / "policies")) == 3
    assert result.failed_runs == []

    frame = load_results(result.csv_path)
    assert set(frame["phase"]) == {"train", "eval"}
    assert set(frame.loc[frame["phase"] == "eval", "param"]) == {0.3, 0.8}
    summary = json.loads(result.json_path.read_text())
    assert set(summary) == {"aggressive", "robust", "soft_robust"}
    assert summary["robust"]["0.3"]["exact_reward"]["n"] == 1


def test_sweep_is_byte_reproducible(tmp_path: Path) -> None:
    """Test that repeating a sweep reproduces the CSV and summary exactly."""
    first = run_sweep(tiny_config(), tmp_path / "first")
    second = run_sweep(tiny_config(), tmp_path / "second")
    assert first.csv_path.read_bytes() == second.csv_path.read_bytes()
    assert first.json_path.read_bytes() == second.json_path.read_bytes()


def test_seed_offset_changes_results(tmp_path: Path) -> None:
    """Test that the seed offset is applied to every run."""
    result = run_sweep(tiny_config(), tmp_path, seed_offset=5)
    assert {outcome.seed for outcome in result.outcomes} == {5}
    assert (tmp_path / "policies" / "robust__seed5.json").exists()


def test_oracle_report_single_step() -> None:
    """Test per-cycle values and the zero objective gap of the single-step setup."""
    report = oracle_report(ExperimentConfig())
    assert report["average_success_probability"] == pytest.approx(0.368)
    assert report["soft_robust_cycle_values"] == pytest.approx([-26400.0, 736.0, 1776.8])
    assert report["nominal_cycle_values"] == pytest.approx([60000.0, 1600.0, 3980.0])
    assert report["worst_case_cycle_values"] == pytest.approx([-80000.0, 200.0, 410.0])
    assert sum(report["d_bar"]) == pytest.approx(1.0)
    assert len(report["gradient"]) == 21
    assert report["bias_norm"] == pytest.approx(0.0, abs=1e-6)
    assert report["objective_gap"] == pytest.approx(0.0, abs=1e-4)


def test_oracle_report_with_theta() -> None:
    """Test that a near-deterministic a1 policy gets the average-model value."""
    theta = SoftmaxPolicy.near_deterministic([0] * 7, 3).theta.ravel().tolist()
    config = ExperimentConfig(evaluation=EvaluationConfig(oracle_theta=theta))
    report = oracle_report(config)
    assert report["j_bar"] == pytest.approx(closed_form_step_value(0, 0.368), rel=1e-4)
    assert report["j_nominal"] == pytest.approx(closed_form_step_value(0, 0.8), rel=1e-4)
    assert report["bias_norm"] == pytest.approx(0.0, abs=1e-6)


def test_oracle_report_dist2(monkeypatch) -> None:
    """Test the oracle report of the shipped second-weighting experiment."""
    monkeypatch.delenv("SRAC_OUTPUT_DIR", raising=False)
    config = load_config(Path(__file__).parent.parent / "config" / "experiment_dist2.yaml")
    report = oracle_report(config)
    assert report["average_success_probability"] == pytest.approx(0.267)
    assert report["soft_robust_cycle_values"] == pytest.approx([-46600.0, 534.0, 1261.7])
    assert report["worst_case_cycle_values"] == pytest.approx([-8e4, 200.0, 410.0])
    # uniform policy: one third of each cycle value per two-step cycle
    assert report["j_bar"] == pytest.approx((-46600.0 + 534.0 + 1261.7) / 6, rel=1e-5)


def test_oracle_report_chain() -> None:
    """Test that chain reports omit the single-step extras."""
    config = ExperimentConfig(
        domain=DomainConfig(kind="chain", n_states=4),
        uncertainty=UncertaintyConfig(params=[0.1, 0.3], nominal=0.1),
        weighting=WeightingConfig(weights=[0.5, 0.5]),
    )
    report = oracle_report(config)
    assert "average_success_probability" not in report
    assert len(report["gradient"]) == 8


def test_oracle_theta_length_checked() -> None:
    """Test that a wrongly sized oracle_theta never reaches the oracle report."""
    with pytest.raises(ValidationError, match="21 entries"):
        ExperimentConfig(evaluation=EvaluationConfig(oracle_theta=[0.0, 1.0]))
