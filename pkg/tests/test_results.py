"""Tests for result rows, CSV/JSON output and policy files."""
import json
from pathlib import Path

import pytest

from src.core.errors import ResultsIOError
from src.harness.results import (
    CSV_HEADER,
    PolicyRecord,
    ResultRow,
    emit_results,
    load_policies,
    load_results,
    make_run_id,
    save_policies,
    summarize,
)


def eval_row(agent: str, seed: int, param: float, value: float) -> ResultRow:
    return ResultRow(make_run_id(agent, seed), seed, agent, "eval", param, "exact_reward", value)


def test_run_id() -> None:
    """Test the run identifier format."""
    assert make_run_id("soft_robust", 3) == "soft_robust__seed3"


def test_row_validation() -> None:
    """Test that bad phases and non-finite values are rejected."""
    with pytest.raises(ValueError, match="phase"):
        ResultRow("r", 0, "a", "test", 0.1, "m", 1.0)  # type: ignore[arg-type]
    with pytest.raises(ValueError, match="not finite"):
        ResultRow("r", 0, "a", "eval", 0.1, "m", float("nan"))


def test_summary_statistics() -> None:
    """Test mean, population std and count across seeds."""
    rows = [eval_row("sr", 0, 0.5, 1.0), eval_row("sr", 1, 0.5, 3.0), eval_row("sr", 0, 0.9, 2.0)]
    rows.append(ResultRow("sr__seed0", 0, "sr", "train", 10, "j_hat", 99.0))
    summary = summarize(rows)
    assert summary["sr"]["0.5"]["exact_reward"] == {"mean": 2.0, "std": 1.0, "n": 2}
    assert summary["sr"]["0.9"]["exact_reward"]["std"] == 0.0
    assert "10.0" not in summary["sr"]


def test_emit_results_format(tmp_path: Path) -> None:
    """Test the CSV header, float precision and line endings."""
    rows = [
        eval_row("sr", 0, 0.1, 1 / 3),
        ResultRow("sr__seed0", 0, "sr", "train", 5, "j_hat", 2.5),
    ]
    csv_path, json_path = emit_results(rows, tmp_path / "out")

    raw = csv_path.read_bytes()
    assert b"\r\n" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1] == "sr__seed0,0,sr,eval,0.10000000000000001,exact_reward,0.33333333333333331"
    assert lines[2] == "sr__seed0,0,sr,train,5,j_hat,2.5"
    assert json.loads(json_path.read_text())["sr"]["0.1"]["exact_reward"]["n"] == 1

    frame = load_results(csv_path)
    assert list(frame.columns) == CSV_HEADER
    assert frame["value"].iloc[0] == pytest.approx(1 / 3, rel=1e-15)


@pytest.mark.parametrize("value", [0.3, 0.1 + 0.2, 1 / 3, -26400.0 / 7, 1e-17])
def test_load_results_round_trips_floats(tmp_path: Path, value: float) -> None:
    """Test that 17-digit CSV values read back as the same doubles."""
    csv_path, _ = emit_results([eval_row("sr", 0, value, value)], tmp_path)
    frame = load_results(csv_path)
    assert frame["param"].iloc[0] == value
    assert frame["value"].iloc[0] == value


def test_emit_results_is_byte_stable(tmp_path: Path) -> None:
    """Test that the same rows always produce identical files."""
    rows = [eval_row("a", s, p, s * p + 0.1) for s in range(3) for p in (0.2, 0.7)]
    first = emit_results(rows, tmp_path / "one")
    second = emit_results(rows, tmp_path / "two")
    assert first[0].read_bytes() == second[0].read_bytes()
    assert first[1].read_bytes() == second[1].read_bytes()


def test_emit_empty(tmp_path: Path) -> None:
    """Test that no rows still gives a header-only CSV and an empty summary."""
    csv_path, json_path = emit_results([], tmp_path)
    assert csv_path.read_text().strip() == ",".join(CSV_HEADER)
    assert json.loads(json_path.read_text()) == {}


def test_emit_results_unwritable(tmp_path: Path) -> None:
    """Test that an output path blocked by a file raises ResultsIOError."""
    blocker = tmp_path / "blocked"
    blocker.write_text("not a directory")
    with pytest.raises(ResultsIOError, match="cannot write"):
        emit_results([], blocker)


def test_policy_files_roundtrip(tmp_path: Path) -> None:
    """Test saving and loading learned policies, sorted by agent and seed."""
    records = [
        PolicyRecord("robust", 1, "robust_ac", 1, 2, [0.0, 1.0]),
        PolicyRecord("robust", 0, "robust_ac", 1, 2, [0.5, 0.5], q_table=None),
        PolicyRecord("q", 0, "sr_q", 1, 2, [40.0, 0.0], q_table=[[1.0, 0.5]]),
    ]
    paths = save_policies(records, tmp_path / "policies")
    assert [p.name for p in paths] == ["robust__seed1.json", "robust__seed0.json", "q__seed0.json"]

    loaded = load_policies(tmp_path / "policies")
    assert [(r.agent, r.seed) for r in loaded] == [("q", 0), ("robust", 0), ("robust", 1)]
    assert loaded[0].q_table == [[1.0, 0.5]]
    assert all(r.usable for r in loaded)


def test_unusable_records() -> None:
    """Test that failed or mis-sized records are not usable."""
    assert not PolicyRecord("a", 0, "sr_ac", 2, 2, [], status="failed").usable
    assert not PolicyRecord("a", 0, "sr_ac", 2, 2, [0.0, 0.0]).usable


def test_load_policies_errors(tmp_path: Path) -> None:
    """Test missing directories and malformed files."""
    with pytest.raises(ResultsIOError, match="does not exist"):
        load_policies(tmp_path / "missing")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ResultsIOError, match="malformed"):
        load_policies(tmp_path)
