"""Learner configuration and the state carried between steps."""
from dataclasses import dataclass, field
from typing import Any, Literal, Optional

import numpy as np

from src.agents.schedules import StepSizeSchedule
from src.core.config import Q_ALGORITHMS, AgentSpec
from src.core.errors import InvalidParameterError
from src.core.rng import RandomStream, SeedTree

Algorithm = Literal["sr_ac", "robust_ac", "nominal_ac", "sr_q", "robust_q", "nominal_q"]
AverageReward = Literal["sampled", "td"]


@dataclass(frozen=True)
class AgentConfig:
    """Everything one learning run needs besides the environment and the models."""

    algorithm: Algorithm
    schedule: StepSizeSchedule = field(default_factory=StepSizeSchedule)
    gamma: Optional[float] = None
    max_steps: int = 6000
    seed: int = 0
    epsilon_start: float = 1.0
    epsilon_final: float = 1e-5
    epsilon_fraction: float = 0.5
    divergence_threshold: float = 1e6
    average_reward: AverageReward = "sampled"

    def __post_init__(self) -> None:
        if self.algorithm not in ("sr_ac", "robust_ac", "nominal_ac", *Q_ALGORITHMS):
            raise InvalidParameterError(f"Unknown algorithm {self.algorithm!r}")
        if self.average_reward not in ("sampled", "td"):
            raise InvalidParameterError(f"Unknown average_reward mode {self.average_reward!r}")
        if self.max_steps < 1:
            raise InvalidParameterError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.is_q_learning != (self.gamma is not None):
            raise InvalidParameterError(
                f"gamma must be set exactly for Q-learning agents ({self.algorithm})"
            )
        if self.gamma is not None and not 0.0 < self.gamma < 1.0:
            raise InvalidParameterError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0.0 <= self.epsilon_final <= self.epsilon_start <= 1.0:
            raise InvalidParameterError("Need 0 <= epsilon_final <= epsilon_start <= 1")
        if not 0.0 < self.epsilon_fraction <= 1.0:
            raise InvalidParameterError("epsilon_fraction must lie in (0, 1]")

    @property
    def is_q_learning(self) -> bool:
        return self.algorithm in Q_ALGORITHMS

    @classmethod
    def from_spec(
        cls, spec: AgentSpec, max_steps: int, seed: int, divergence_threshold: float = 1e6
    ) -> "AgentConfig":
        return cls(
            algorithm=spec.algorithm,
            schedule=StepSizeSchedule.from_config(spec.schedule),
            gamma=spec.gamma,
            max_steps=max_steps,
            seed=seed,
            epsilon_start=spec.epsilon_start,
            epsilon_final=spec.epsilon_final,
            epsilon_fraction=spec.epsilon_fraction,
            divergence_threshold=divergence_threshold,
            average_reward=spec.average_reward,
        )


@dataclass
class TrainState:
    """
    Actor-critic parameters and the action-sampling stream of one run.

    Attributes:
        theta: Actor parameters, length S * A
        v: Critic parameters, length d2
        j_hat: Running average-reward estimate
        t: Number of completed steps
        rng: Stream used to sample actions (separate from the environment stream)
    """

    theta: np.ndarray
    v: np.ndarray
    j_hat: float = 0.0
    t: int = 0
    rng: RandomStream = field(default_factory=lambda: SeedTree(0).stream(), repr=False)

    @classmethod
    def initial(cls, n_theta: int, n_critic: int, rng: RandomStream) -> "TrainState":
        """theta_0 = 0, v_0 = 0, J_hat_0 = 0."""
        return cls(theta=np.zeros(n_theta), v=np.zeros(n_critic), j_hat=0.0, t=0, rng=rng)

    @property
    def theta_norm(self) -> float:
        return float(np.linalg.norm(self.theta))

    def to_dict(self) -> dict[str, Any]:
        """JSON-friendly snapshot, including the generator state."""
        return {
            "theta": [float(x) for x in self.theta],
            "v": [float(x) for x in self.v],
            "j_hat": float(self.j_hat),
            "t": int(self.t),
            "rng_state": self.rng.state,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TrainState":
        return cls(
            theta=np.asarray(data["theta"], dtype=float),
            v=np.asarray(data["v"], dtype=float),
            j_hat=float(data["j_hat"]),
            t=int(data["t"]),
            rng=RandomStream.from_state(data["rng_state"]),
        )
