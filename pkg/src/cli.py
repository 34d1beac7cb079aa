"""CLI entry point."""
import json
import sys
from pathlib import Path
from typing import NoReturn, Optional

import click

from src.core.config import ExperimentConfig, load_config
from src.core.errors import ConfigError, SoftRobustError
from src.core.logging import setup_logging
from src.harness.evaluation import run_evaluation
from src.harness.results import emit_results, load_policies, save_policies
from src.harness.sweep import oracle_report, policy_records, run_sweep, training_rows
from src.harness.training import run_training

EXIT_CONFIG_ERROR = 1
EXIT_RUN_FAILURE = 2


def _load(
    ctx: click.Context, config_path: Optional[str], out: Optional[str]
) -> tuple[ExperimentConfig, Path]:
    """Load the config, apply ``--out``, and point the JSONL log at the output directory."""
    try:
        config = load_config(Path(config_path) if config_path else None)
    except ConfigError as e:
        click.echo(f"Config error: {e}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    if out is not None:
        output = config.output.model_copy(update={"path": out})
        config = config.model_copy(update={"output": output})
    output_dir = Path(config.output.path)
    setup_logging(log_level=ctx.obj["log_level"], log_dir=output_dir / "logs")
    return config, output_dir


def _fail(e: Exception) -> NoReturn:
    if isinstance(e, ConfigError):
        click.echo(f"Config error: {e}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    click.echo(f"Run failed: {e}", err=True)
    sys.exit(EXIT_RUN_FAILURE)


@click.group()
@click.option("--log-level", default="INFO", help="Logging level")
@click.pass_context
def main(ctx: click.Context, log_level: str) -> None:
    """Soft-robust actor-critic experiments and exact oracles."""
    ctx.ensure_object(dict)
    ctx.obj["log_level"] = log_level
    setup_logging(log_level=log_level, enable_file=False)


@main.command()
@click.option("--config", "config_path", type=click.Path(), help="Experiment YAML file")
@click.option("--seed-offset", default=0, type=int, help="Added to every configured seed")
@click.option("--out", type=click.Path(), help="Output directory (overrides SRAC_OUTPUT_DIR)")
@click.pass_context
def train(
    ctx: click.Context, config_path: Optional[str], seed_offset: int, out: Optional[str]
) -> None:
    """Train every configured agent and seed on the nominal model."""
    config, output_dir = _load(ctx, config_path, out)
    try:
        outcomes = run_training(config, seed_offset)
        save_policies(policy_records(outcomes), output_dir / "policies")
        csv_path, _ = emit_results(training_rows(outcomes), output_dir, stem="train")
    except (SoftRobustError, OSError) as e:
        _fail(e)

    for outcome in outcomes:
        click.echo(f"{outcome.agent} seed={outcome.seed}: {outcome.status}")
    click.echo(f"Training results written to {csv_path}")
    if any(o.status == "failed" for o in outcomes):
        sys.exit(EXIT_RUN_FAILURE)


@main.command(name="eval")
@click.option("--config", "config_path", type=click.Path(), help="Experiment YAML file")
@click.option(
    "--policies",
    "policies_dir",
    required=True,
    type=click.Path(),
    help="Directory of learned policies",
)
@click.option("--out", type=click.Path(), help="Output directory (overrides SRAC_OUTPUT_DIR)")
@click.pass_context
def evaluate(
    ctx: click.Context, config_path: Optional[str], policies_dir: str, out: Optional[str]
) -> None:
    """Evaluate learned policies exactly and by rollouts over the test grid."""
    config, output_dir = _load(ctx, config_path, out)
    try:
        records = load_policies(Path(policies_dir))
        rows = run_evaluation(config, records)
        csv_path, json_path = emit_results(rows, output_dir, stem="eval")
    except (SoftRobustError, OSError) as e:
        _fail(e)
    click.echo(f"Evaluated {len(records)} policies; results in {csv_path} and {json_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), help="Experiment YAML file")
def oracle(config_path: Optional[str]) -> None:
    """Print exact J_bar, gradient and bias for evaluation.oracle_theta."""
    try:
        config = load_config(Path(config_path) if config_path else None)
        report = oracle_report(config)
    except SoftRobustError as e:
        _fail(e)
    click.echo(json.dumps(report, indent=2, sort_keys=True))


@main.command()
@click.option("--config", "config_path", type=click.Path(), help="Experiment YAML file")
@click.option("--seed-offset", default=0, type=int, help="Added to every configured seed")
@click.option("--out", type=click.Path(), help="Output directory (overrides SRAC_OUTPUT_DIR)")
@click.pass_context
def sweep(
    ctx: click.Context, config_path: Optional[str], seed_offset: int, out: Optional[str]
) -> None:
    """Train and evaluate in one go."""
    config, output_dir = _load(ctx, config_path, out)
    try:
        result = run_sweep(config, output_dir, seed_offset)
    except (SoftRobustError, OSError) as e:
        _fail(e)

    click.echo(f"Sweep finished: {len(result.outcomes)} runs, {len(result.rows)} rows")
    click.echo(f"Results: {result.csv_path}")
    if result.failed_runs:
        click.echo(f"{len(result.failed_runs)} run(s) failed", err=True)
        sys.exit(EXIT_RUN_FAILURE)


if __name__ == "__main__":
    main()
