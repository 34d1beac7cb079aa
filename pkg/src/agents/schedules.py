"""Two-timescale step-size schedules."""
from dataclasses import dataclass, replace
from typing import Literal

from src.core.config import ScheduleConfig
from src.core.errors import InvalidParameterError


@dataclass(frozen=True)
class StepSizeSchedule:
    """
    Critic step alpha_t, actor step beta_t and average-reward step xi_t = c * alpha_t.

    Decaying mode uses alpha_t = c_alpha / (1 + t)^e_alpha and
    beta_t = c_beta / (1 + t)^e_beta with 0.5 < e_alpha < e_beta <= 1.
    beta_t is zero for the first ``actor_delay`` steps (critic warm-up).
    """

    mode: Literal["constant", "decaying"] = "constant"
    c_alpha: float = 5e-3
    c_beta: float = 5e-5
    c: float = 3.0
    e_alpha: float = 0.6
    e_beta: float = 0.9
    actor_delay: int = 0

    def __post_init__(self) -> None:
        if self.mode not in ("constant", "decaying"):
            raise InvalidParameterError(f"Unknown schedule mode {self.mode!r}")
        if self.actor_delay < 0:
            raise InvalidParameterError(f"actor_delay must be >= 0, got {self.actor_delay}")
        if self.c_alpha <= 0 or self.c_beta < 0 or self.c <= 0:
            raise InvalidParameterError(
                "Schedule constants must be positive "
                f"(c_alpha={self.c_alpha}, c_beta={self.c_beta}, c={self.c})"
            )
        if self.mode == "decaying":
            if not (0.5 < self.e_alpha <= 1.0 and 0.5 < self.e_beta <= 1.0):
                raise InvalidParameterError("Decaying exponents must lie in (0.5, 1]")
            if not self.e_alpha < self.e_beta:
                raise InvalidParameterError(
                    "Critic must run on the faster timescale: "
                    f"e_alpha={self.e_alpha} >= e_beta={self.e_beta}"
                )

    @classmethod
    def from_config(cls, config: ScheduleConfig) -> "StepSizeSchedule":
        return cls(
            mode=config.mode,
            c_alpha=config.c_alpha,
            c_beta=config.c_beta,
            c=config.c,
            e_alpha=config.e_alpha,
            e_beta=config.e_beta,
        )

    def alpha(self, t: int) -> float:
        if self.mode == "constant":
            return self.c_alpha
        return self.c_alpha / (1.0 + t) ** self.e_alpha

    def beta(self, t: int) -> float:
        if t < self.actor_delay:
            return 0.0
        if self.mode == "constant":
            return self.c_beta
        return self.c_beta / (1.0 + t) ** self.e_beta

    def xi(self, t: int) -> float:
        """Average-reward step, capped at 1 so the update stays a convex combination."""
        return min(1.0, self.c * self.alpha(t))

    def with_frozen_actor(self) -> "StepSizeSchedule":
        """Same critic schedule with beta identically zero."""
        return replace(self, c_beta=0.0)

    def with_actor_delay(self, steps: int) -> "StepSizeSchedule":
        """Same schedule with the actor frozen for the first ``steps`` steps."""
        return replace(self, actor_delay=steps)
