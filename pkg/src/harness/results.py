"""Result rows, CSV/JSON emission and learned-policy files."""
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Literal, Optional

import pandas as pd

from src.core.errors import ResultsIOError
from src.core.logging import get_logger

logger = get_logger(__name__)

CSV_HEADER = ["run_id", "seed", "agent", "phase", "param", "metric", "value"]
FLOAT_FORMAT = "%.17g"


def make_run_id(agent: str, seed: int) -> str:
    return f"{agent}__seed{seed}"


@dataclass(frozen=True)
class ResultRow:
    """
    One metric value.

    ``param`` is the episode for train rows and the test-model parameter for eval rows.
    """

    run_id: str
    seed: int
    agent: str
    phase: Literal["train", "eval"]
    param: float
    metric: str
    value: float

    def __post_init__(self) -> None:
        if self.phase not in ("train", "eval"):
            raise ValueError(f"phase must be 'train' or 'eval', got {self.phase!r}")
        if not math.isfinite(self.value):
            raise ValueError(f"{self.run_id} {self.metric}: value {self.value} is not finite")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "param", float(self.param))
        object.__setattr__(self, "value", float(self.value))


def rows_to_frame(rows: list[ResultRow]) -> pd.DataFrame:
    """Rows as a DataFrame with the CSV column order."""
    if not rows:
        return pd.DataFrame(columns=CSV_HEADER)
    return pd.DataFrame([asdict(row) for row in rows], columns=CSV_HEADER)


def summarize(rows: list[ResultRow]) -> dict[str, Any]:
    """
    Eval rows aggregated across seeds.

    Returns:
        {agent: {param: {metric: {"mean", "std", "n"}}}}; std is the population std
    """
    df = rows_to_frame([row for row in rows if row.phase == "eval"])
    summary: dict[str, Any] = {}
    if df.empty:
        return summary
    grouped = df.groupby(["agent", "param", "metric"], sort=True)["value"]
    stats = grouped.agg(mean="mean", std=lambda s: float(s.std(ddof=0)), n="count")
    for (agent, param, metric), row in stats.iterrows():
        summary.setdefault(agent, {}).setdefault(repr(float(param)), {})[metric] = {
            "mean": float(row["mean"]),
            "std": float(row["std"]),
            "n": int(row["n"]),
        }
    return summary


def emit_results(rows: list[ResultRow], path: Path, stem: str = "results") -> tuple[Path, Path]:
    """
    Write ``<stem>.csv`` and ``<stem>_summary.json`` under ``path``.

    Identical rows always give identical bytes.

    Args:
        rows: Rows in the order they should appear
        path: Output directory
        stem: File name stem

    Returns:
        (csv_path, json_path) tuple

    Raises:
        ResultsIOError: If a file cannot be written
    """
    path = Path(path)
    csv_path = path / f"{stem}.csv"
    json_path = path / f"{stem}_summary.json"
    try:
        path.mkdir(parents=True, exist_ok=True)
        rows_to_frame(rows).to_csv(
            csv_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
        )
    except OSError as e:
        raise ResultsIOError(csv_path, f"cannot write results CSV: {e}") from e
    try:
        with open(json_path, "w") as f:
            json.dump(summarize(rows), f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise ResultsIOError(json_path, f"cannot write results summary: {e}") from e

    logger.info(f"Saved {len(rows)} result rows to {csv_path}")
    return csv_path, json_path


def load_results(csv_path: Path) -> pd.DataFrame:
    """Read a results CSV back."""
    try:
        return pd.read_csv(csv_path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as e:
        raise ResultsIOError(Path(csv_path), f"cannot read results CSV: {e}") from e


@dataclass
class PolicyRecord:
    """Learned policy of one (agent, seed) run."""

    agent: str
    seed: int
    algorithm: str
    n_states: int
    n_actions: int
    theta: list[float]
    status: Literal["ok", "diverged", "failed"] = "ok"
    message: str = ""
    q_table: Optional[list[list[float]]] = field(default=None)

    @property
    def run_id(self) -> str:
        return make_run_id(self.agent, self.seed)

    @property
    def usable(self) -> bool:
        return self.status != "failed" and len(self.theta) == self.n_states * self.n_actions

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PolicyRecord":
        return cls(**data)


def save_policies(records: list[PolicyRecord], directory: Path) -> list[Path]:
    """
    Write one ``<agent>__seed<k>.json`` per record.

    Raises:
        ResultsIOError: If a file cannot be written
    """
    directory = Path(directory)
    paths = []
    for record in records:
        path = directory / f"{record.run_id}.json"
        try:
            directory.mkdir(parents=True, exist_ok=True)
            with open(path, "w") as f:
                json.dump(record.to_dict(), f, indent=2, sort_keys=True)
                f.write("\n")
        except OSError as e:
            raise ResultsIOError(path, f"cannot write policy: {e}") from e
        paths.append(path)
    logger.info(f"Saved {len(paths)} policies to {directory}")
    return paths


def load_policies(directory: Path) -> list[PolicyRecord]:
    """
    Read every policy file in ``directory``, sorted by (agent, seed).

    Raises:
        ResultsIOError: If the directory is missing or a file is malformed
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ResultsIOError(directory, "policy directory does not exist")
    records = []
    for path in sorted(directory.glob("*.json")):
        try:
            with open(path) as f:
                records.append(PolicyRecord.from_dict(json.load(f)))
        except (OSError, json.JSONDecodeError, TypeError) as e:
            raise ResultsIOError(path, f"malformed policy file: {e}") from e
    records.sort(key=lambda r: (r.agent, r.seed))
    return records
