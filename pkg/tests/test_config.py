"""Test core configuration loading."""
from pathlib import Path

import pytest
from pydantic import ValidationError

from src.core.config import ExperimentConfig, ScheduleConfig, dump_config, load_config
from src.core.errors import ConfigError


def write_yaml(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def test_config_loads(monkeypatch) -> None:
    """Test that the shipped experiment configuration loads."""
    monkeypatch.delenv("SRAC_OUTPUT_DIR", raising=False)
    config = load_config()
    assert config.domain.kind == "single_step"
    assert config.uncertainty.params == [0.1, 0.7, 0.8, 0.3, 0.5]
    assert config.weighting.weights == [0.47, 0.22, 0.10, 0.09, 0.12]
    assert {agent.algorithm for agent in config.agents} == {"sr_ac", "robust_ac", "nominal_ac"}
    assert config.max_steps == 6000
    assert config.warmup_steps == 6000
    assert {agent.average_reward for agent in config.agents} == {"td"}


def test_shipped_chain_config_loads(monkeypatch) -> None:
    """Test that the chain example configuration validates."""
    monkeypatch.delenv("SRAC_OUTPUT_DIR", raising=False)
    path = Path(__file__).parent.parent / "config" / "chain.yaml"
    config = load_config(path)
    assert config.domain.kind == "chain"
    assert config.n_states == 6
    assert config.uncertainty.size == 5


def test_shipped_dist2_config_loads(monkeypatch) -> None:
    """Test that the second-weighting experiment validates."""
    monkeypatch.delenv("SRAC_OUTPUT_DIR", raising=False)
    config = load_config(Path(__file__).parent.parent / "config" / "experiment_dist2.yaml")
    assert (config.weighting.source, config.weighting.name) == ("named", "dist2")
    assert config.max_steps == 20000
    assert config.warmup_steps == 6000


def test_defaults_without_files() -> None:
    """Test built-in defaults."""
    config = ExperimentConfig()
    assert config.n_states == 7
    assert config.seeds == [0, 1, 2, 3, 4]
    assert config.training.steps_per_episode == 2
    assert config.evaluation.grid[0] == pytest.approx(0.1)
    assert config.evaluation.grid[-1] == pytest.approx(0.9)


def test_missing_explicit_file(tmp_path) -> None:
    """Test that a named config file must exist."""
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.yaml")


def test_unparseable_yaml(tmp_path) -> None:
    """Test that broken YAML becomes a ConfigError."""
    path = write_yaml(tmp_path / "bad.yaml", "name: [unclosed\n")
    with pytest.raises(ConfigError, match="Cannot read config"):
        load_config(path)


def test_top_level_must_be_mapping(tmp_path) -> None:
    """Test that a list document is rejected."""
    path = write_yaml(tmp_path / "list.yaml", "- a\n- b\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(path)


def test_gamma_rejected_for_actor_critic(tmp_path) -> None:
    """Test that gamma only applies to Q-learning agents."""
    path = write_yaml(
        tmp_path / "gamma.yaml",
        "agents:\n  - name: sr\n    algorithm: sr_ac\n    gamma: 0.9\n",
    )
    with pytest.raises(ConfigError, match="gamma only applies"):
        load_config(path)


def test_gamma_required_for_q_learning(tmp_path) -> None:
    """Test that Q-learning agents need a discount factor."""
    path = write_yaml(tmp_path / "q.yaml", "agents:\n  - name: q\n    algorithm: sr_q\n")
    with pytest.raises(ConfigError, match="gamma is required"):
        load_config(path)


def test_weight_count_must_match_set(tmp_path) -> None:
    """Test that explicit weights need one entry per model."""
    path = write_yaml(tmp_path / "w.yaml", "weighting:\n  weights: [0.5, 0.5]\n")
    with pytest.raises(ConfigError, match="one per model"):
        load_config(path)


def test_duplicate_agent_names(tmp_path) -> None:
    """Test that agent names must be unique."""
    path = write_yaml(
        tmp_path / "dup.yaml",
        "agents:\n  - {name: a, algorithm: sr_ac}\n  - {name: a, algorithm: robust_ac}\n",
    )
    with pytest.raises(ConfigError, match="unique"):
        load_config(path)


def test_negative_seed_rejected() -> None:
    """Test that seeds must be non-negative."""
    with pytest.raises(ValidationError, match="non-negative"):
        ExperimentConfig(seeds=[0, -1])


def test_decaying_schedule_exponents() -> None:
    """Test that the critic must run on the faster timescale."""
    with pytest.raises(ValidationError, match="e_alpha < e_beta"):
        ScheduleConfig(mode="decaying", e_alpha=0.9, e_beta=0.6)
    assert ScheduleConfig(mode="decaying", e_alpha=0.6, e_beta=0.9).mode == "decaying"


def test_local_override_merges(tmp_path, monkeypatch) -> None:
    """Test that the local file overrides top-level sections."""
    monkeypatch.delenv("SRAC_OUTPUT_DIR", raising=False)
    base = write_yaml(tmp_path / "base.yaml", "name: base\nseeds: [0, 1]\n")
    local = write_yaml(tmp_path / "local.yaml", "seeds: [7]\n")
    config = load_config(base, local)
    assert config.name == "base"
    assert config.seeds == [7]


def test_env_overrides_output_dir(tmp_path, monkeypatch) -> None:
    """Test that SRAC_OUTPUT_DIR wins over the YAML output path."""
    path = write_yaml(tmp_path / "out.yaml", "output:\n  path: from_yaml\n")
    monkeypatch.setenv("SRAC_OUTPUT_DIR", str(tmp_path / "from_env"))
    config = load_config(path)
    assert config.output.path == str(tmp_path / "from_env")


def test_dump_config_reloads(tmp_path, monkeypatch) -> None:
    """Test that a dumped configuration loads back unchanged."""
    monkeypatch.delenv("SRAC_OUTPUT_DIR", raising=False)
    config = ExperimentConfig(name="roundtrip", seeds=[3])
    path = tmp_path / "nested" / "config.yaml"
    dump_config(config, path)
    assert load_config(path) == config


def test_average_reward_mode_is_actor_critic_only(tmp_path) -> None:
    """Test that Q-learning agents cannot select the TD average-reward update."""
    path = write_yaml(
        tmp_path / "q.yaml",
        "agents:\n  - {name: q, algorithm: sr_q, gamma: 0.9, average_reward: td}\n",
    )
    with pytest.raises(ConfigError, match="only applies to actor-critic"):
        load_config(path)


def test_negative_warmup_rejected() -> None:
    """Test that the critic warm-up length must be non-negative."""
    with pytest.raises(ValidationError, match="critic_warmup_episodes"):
        ExperimentConfig(training={"critic_warmup_episodes": -1})
    config = ExperimentConfig(training={"critic_warmup_episodes": 10, "steps_per_episode": 2})
    assert config.warmup_steps == 20


@pytest.mark.parametrize(
    ("domain", "length"),
    [({"kind": "single_step"}, 21), ({"kind": "chain", "n_states": 4}, 8)],
)
def test_oracle_theta_length_checked_on_load(domain, length) -> None:
    """Test that a mis-sized oracle theta fails config validation."""
    with pytest.raises(ValidationError, match="oracle_theta needs"):
        ExperimentConfig(domain=domain, evaluation={"oracle_theta": [0.0] * (length - 1)})
    config = ExperimentConfig(domain=domain, evaluation={"oracle_theta": [0.0] * length})
    assert config.n_states * config.n_actions == length
