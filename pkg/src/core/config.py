"""Core configuration management."""
from pathlib import Path
from typing import Any, Literal, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.core.errors import ConfigError

AC_ALGORITHMS = ("sr_ac", "robust_ac", "nominal_ac")
Q_ALGORITHMS = ("sr_q", "robust_q", "nominal_q")

DEFAULT_SUCCESS_PROBS = [0.1, 0.7, 0.8, 0.3, 0.5]
DEFAULT_WEIGHTS = [0.47, 0.22, 0.10, 0.09, 0.12]


class DomainConfig(BaseModel):
    """Benchmark domain configuration."""

    kind: Literal["single_step", "chain"] = "single_step"
    n_states: int = 6  # chain only
    rewards: Optional[list[float]] = None  # chain only, one reward per state


class UncertaintyConfig(BaseModel):
    """Uncertainty set: explicit parameters or a seeded sample around the nominal one."""

    params: Optional[list[float]] = Field(default_factory=lambda: list(DEFAULT_SUCCESS_PROBS))
    nominal: float = 0.8
    sample_count: Optional[int] = None
    sample_seed: int = 0
    sample_scale: float = 0.1  # chain only, std of the slip perturbation

    @model_validator(mode="after")
    def _check_source(self) -> "UncertaintyConfig":
        if self.params is None and self.sample_count is None:
            raise ValueError("uncertainty needs either params or sample_count")
        if self.params is not None and len(self.params) == 0:
            raise ValueError("uncertainty.params must not be empty")
        if self.sample_count is not None and self.sample_count < 1:
            raise ValueError("uncertainty.sample_count must be >= 1")
        return self

    @property
    def size(self) -> int:
        if self.params is not None:
            return len(self.params)
        assert self.sample_count is not None
        return self.sample_count


class WeightingConfig(BaseModel):
    """Weighting distribution over the uncertainty set."""

    source: Literal["explicit", "named", "dirichlet"] = "explicit"
    weights: Optional[list[float]] = Field(default_factory=lambda: list(DEFAULT_WEIGHTS))
    name: str = "dist1"
    concentration: Optional[list[float]] = None
    seed: int = 0


class ScheduleConfig(BaseModel):
    """Step-size schedule (alpha critic, beta actor, xi = c * alpha)."""

    mode: Literal["constant", "decaying"] = "constant"
    c_alpha: float = 5e-3
    c_beta: float = 5e-5
    c: float = 3.0
    e_alpha: float = 0.6
    e_beta: float = 0.9

    @model_validator(mode="after")
    def _check_timescales(self) -> "ScheduleConfig":
        if self.c_alpha <= 0 or self.c_beta < 0 or self.c <= 0:
            raise ValueError("schedule constants must be positive")
        if self.mode == "decaying" and not 0.5 < self.e_alpha < self.e_beta <= 1.0:
            raise ValueError("decaying schedule needs 0.5 < e_alpha < e_beta <= 1")
        return self


class AgentSpec(BaseModel):
    """One agent to train and compare."""

    name: str
    algorithm: Literal["sr_ac", "robust_ac", "nominal_ac", "sr_q", "robust_q", "nominal_q"]
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    gamma: Optional[float] = None
    epsilon_start: float = 1.0
    epsilon_final: float = 1e-5
    epsilon_fraction: float = 0.5
    # actor-critic only: "sampled" averages observed rewards, "td" moves J_hat along delta
    average_reward: Literal["sampled", "td"] = "sampled"

    @model_validator(mode="after")
    def _check_gamma(self) -> "AgentSpec":
        is_q = self.algorithm in Q_ALGORITHMS
        if is_q and self.gamma is None:
            raise ValueError(f"agent {self.name}: gamma is required for {self.algorithm}")
        if not is_q and self.gamma is not None:
            raise ValueError(f"agent {self.name}: gamma only applies to Q-learning agents")
        if is_q and self.average_reward != "sampled":
            raise ValueError(f"agent {self.name}: average_reward only applies to actor-critic")
        if self.gamma is not None and not 0.0 < self.gamma < 1.0:
            raise ValueError(f"agent {self.name}: gamma must lie in (0, 1)")
        return self


def _default_agents() -> list[AgentSpec]:
    return [
        AgentSpec(name="soft_robust", algorithm="sr_ac"),
        AgentSpec(name="robust", algorithm="robust_ac"),
        AgentSpec(name="aggressive", algorithm="nominal_ac"),
    ]


class FeaturesConfig(BaseModel):
    """Critic feature map."""

    kind: Literal["tabular_minus_one"] = "tabular_minus_one"
    drop_state: int = 0


class TrainingConfig(BaseModel):
    """Training length and logging cadence."""

    episodes: int = 3000
    steps_per_episode: int = 2
    log_interval_episodes: int = 1
    divergence_threshold: float = 1e6
    critic_warmup_episodes: int = 0  # actor frozen, not counted in episodes


class EvaluationConfig(BaseModel):
    """Evaluation grid and rollout budget."""

    grid: list[float] = Field(default_factory=lambda: [round(0.1 * i, 1) for i in range(1, 10)])
    test_episodes: int = 600
    oracle_theta: Optional[list[float]] = None


class OutputConfig(BaseModel):
    """Output location."""

    path: str = "artifacts/experiment"


class ExperimentConfig(BaseModel):
    """Main experiment configuration."""

    name: str = "single_step"
    domain: DomainConfig = Field(default_factory=DomainConfig)
    uncertainty: UncertaintyConfig = Field(default_factory=UncertaintyConfig)
    weighting: WeightingConfig = Field(default_factory=WeightingConfig)
    features: FeaturesConfig = Field(default_factory=FeaturesConfig)
    agents: list[AgentSpec] = Field(default_factory=_default_agents)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    workers: int = 1
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def _check_consistency(self) -> "ExperimentConfig":
        if not self.agents:
            raise ValueError("at least one agent is required")
        names = [agent.name for agent in self.agents]
        if len(set(names)) != len(names):
            raise ValueError(f"agent names must be unique: {names}")
        if not self.evaluation.grid:
            raise ValueError("evaluation.grid must not be empty")
        if self.evaluation.test_episodes < 2:
            raise ValueError("evaluation.test_episodes must be >= 2")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if any(seed < 0 for seed in self.seeds):
            raise ValueError("seeds must be non-negative")
        if self.training.episodes < 1 or self.training.steps_per_episode < 1:
            raise ValueError("training.episodes and training.steps_per_episode must be >= 1")
        if self.training.log_interval_episodes < 1:
            raise ValueError("training.log_interval_episodes must be >= 1")
        if self.training.critic_warmup_episodes < 0:
            raise ValueError("training.critic_warmup_episodes must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

        k = self.uncertainty.size
        if self.weighting.source == "explicit":
            if self.weighting.weights is None or len(self.weighting.weights) != k:
                raise ValueError(f"weighting.weights must have {k} entries (one per model)")
        if self.weighting.source == "dirichlet":
            if self.weighting.concentration is not None and len(self.weighting.concentration) != k:
                raise ValueError(f"weighting.concentration must have {k} entries")
        if self.weighting.source == "named" and k != 5:
            raise ValueError("named weighting distributions are defined for five models")

        if self.domain.kind == "chain":
            if self.domain.n_states < 2:
                raise ValueError("chain domain needs at least two states")
            if self.domain.rewards is not None and len(self.domain.rewards) != self.domain.n_states:
                raise ValueError("domain.rewards must have one entry per state")
        if not 0 <= self.features.drop_state < self.n_states:
            raise ValueError("features.drop_state is not a valid state index")
        theta = self.evaluation.oracle_theta
        if theta is not None and len(theta) != self.n_states * self.n_actions:
            raise ValueError(
                f"evaluation.oracle_theta needs {self.n_states * self.n_actions} entries "
                f"({self.n_states} states x {self.n_actions} actions), got {len(theta)}"
            )
        return self

    @property
    def n_states(self) -> int:
        return 7 if self.domain.kind == "single_step" else self.domain.n_states

    @property
    def n_actions(self) -> int:
        return 3 if self.domain.kind == "single_step" else 2

    @property
    def warmup_steps(self) -> int:
        return self.training.critic_warmup_episodes * self.training.steps_per_episode

    @property
    def max_steps(self) -> int:
        """Training steps after the critic warm-up."""
        return self.training.episodes * self.training.steps_per_episode


class EnvSettings(BaseSettings):
    """Environment variable settings."""

    output_dir: Optional[str] = Field(default=None, alias="SRAC_OUTPUT_DIR")

    model_config = SettingsConfigDict(env_file=".env", env_file_encoding="utf-8", extra="ignore")


def _read_yaml(path: Path) -> dict[str, Any]:
    try:
        with open(path) as f:
            data = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must be a mapping at top level")
    return data


def load_config(
    config_path: Optional[Path] = None, local_config_path: Optional[Path] = None
) -> ExperimentConfig:
    """
    Load and merge configuration files.

    Priority: env vars > experiment.local.yaml > experiment.yaml > defaults

    Args:
        config_path: Path to the experiment YAML (missing default file means built-in defaults)
        local_config_path: Path to a local override file

    Returns:
        Merged ExperimentConfig instance

    Raises:
        ConfigError: If a file cannot be parsed or the merged config is invalid
    """
    default_dir = Path(__file__).parent.parent.parent / "config"
    explicit = config_path is not None
    if config_path is None:
        config_path = default_dir / "experiment.yaml"
    if local_config_path is None and not explicit:
        local_config_path = default_dir / "experiment.local.yaml"

    base_config: dict[str, Any] = {}
    if config_path.exists():
        base_config = _read_yaml(config_path)
    elif explicit:
        raise ConfigError(f"Config file not found: {config_path}")

    local_config: dict[str, Any] = {}
    if local_config_path is not None and local_config_path.exists():
        local_config = _read_yaml(local_config_path)

    merged_config = {**base_config, **local_config}

    env_settings = EnvSettings()
    if env_settings.output_dir is not None:
        output = merged_config.get("output", {})
        merged_config["output"] = {**output, "path": env_settings.output_dir}

    try:
        return ExperimentConfig(**merged_config)
    except ValidationError as e:
        raise ConfigError(f"Invalid config {config_path}: {e}") from e


def dump_config(config: ExperimentConfig, path: Path) -> None:
    """
    Write a resolved configuration as YAML.

    Args:
        config: Configuration to write
        path: Destination file
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        yaml.safe_dump(config.model_dump(mode="json"), f, sort_keys=False)
