"""Structured logging and audit trail."""
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional


class JSONLFormatter(logging.Formatter):
    """Formatter that outputs JSONL for audit logs."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON."""
        log_data: dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }

        if hasattr(record, "extra_fields"):
            log_data.update(record.extra_fields)

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_data, default=_json_default)


def _json_default(value: Any) -> Any:
    """Serialise numpy scalars and arrays that end up in extra fields."""
    if hasattr(value, "tolist"):
        return value.tolist()
    return str(value)


def setup_logging(
    log_level: str = "INFO",
    log_dir: Optional[Path] = None,
    enable_console: bool = True,
    enable_file: bool = True,
) -> None:
    """
    Set up structured logging with console and JSONL file outputs.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_dir: Directory for log files (default: artifacts/logs)
        enable_console: Enable console output
        enable_file: Enable JSONL file output
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, log_level.upper()))
    root_logger.handlers.clear()

    if enable_console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(getattr(logging, log_level.upper()))
        console_formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        console_handler.setFormatter(console_formatter)
        root_logger.addHandler(console_handler)

    if enable_file:
        if log_dir is None:
            log_dir = Path("artifacts/logs")
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = log_dir / f"audit_{datetime.now().strftime('%Y%m%d')}.jsonl"
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)  # File gets all levels
        file_handler.setFormatter(JSONLFormatter())
        root_logger.addHandler(file_handler)


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger instance.

    Args:
        name: Logger name (typically __name__)

    Returns:
        Logger instance
    """
    return logging.getLogger(name)


def log_training_event(
    logger: logging.Logger,
    agent: str,
    seed: int,
    episode: int,
    j_hat: float,
    j_bar: float,
    j_nominal: float,
    theta_norm: float,
    start_probs: Optional[list[float]] = None,
) -> None:
    """
    Log one training checkpoint with structured data.

    Args:
        logger: Logger instance
        agent: Agent name
        seed: Run seed
        episode: Episode index
        j_hat: Online average-reward estimate
        j_bar: Exact soft-robust average reward of the current policy
        j_nominal: Exact average reward of the current policy on the nominal model
        theta_norm: Euclidean norm of the actor parameters
        start_probs: Action probabilities at the start state
    """
    event_data: dict[str, Any] = {
        "event_type": "training",
        "agent": agent,
        "seed": seed,
        "episode": episode,
        "j_hat": j_hat,
        "j_bar": j_bar,
        "j_nominal": j_nominal,
        "theta_norm": theta_norm,
    }
    if start_probs is not None:
        event_data["start_probs"] = start_probs

    logger.debug("Training checkpoint", extra={"extra_fields": event_data})


def log_evaluation_event(
    logger: logging.Logger,
    agent: str,
    seed: int,
    param: float,
    exact: float,
    monte_carlo: Optional[float] = None,
    stderr: Optional[float] = None,
) -> None:
    """
    Log one evaluation grid point.

    Args:
        logger: Logger instance
        agent: Agent name
        seed: Run seed
        param: Test-model parameter
        exact: Exact per-step reward on the test model
        monte_carlo: Rollout estimate (if computed)
        stderr: Standard error of the rollout estimate
    """
    event_data: dict[str, Any] = {
        "event_type": "evaluation",
        "agent": agent,
        "seed": seed,
        "param": param,
        "exact": exact,
    }
    if monte_carlo is not None:
        event_data["monte_carlo"] = monte_carlo
        event_data["stderr"] = stderr

    logger.info(
        f"{agent} seed={seed} param={param:.3f}: exact={exact:.4f}",
        extra={"extra_fields": event_data},
    )
