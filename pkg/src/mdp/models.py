"""Immutable data model for finite MDPs, uncertainty sets, weightings and softmax policies."""
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from src.core.errors import InvalidModelError
from src.mdp.validation import (
    PROB_TOL,
    check_ergodic,
    validate_probability_table,
    validate_rewards,
)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class MdpSpec:
    """State space, action space and deterministic rewards r(x, a)."""

    n_states: int
    n_actions: int
    rewards: np.ndarray

    def __post_init__(self) -> None:
        table = validate_rewards(self.rewards, int(self.n_states), int(self.n_actions))
        object.__setattr__(self, "n_states", int(self.n_states))
        object.__setattr__(self, "n_actions", int(self.n_actions))
        object.__setattr__(self, "rewards", _frozen(table))

    @property
    def max_abs_reward(self) -> float:
        return float(np.max(np.abs(self.rewards)))


@dataclass(frozen=True, eq=False)
class TransitionModel:
    """Next-state probabilities p(x, a, y) for one MDP realisation."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        table = np.asarray(self.probs, dtype=float)
        if table.ndim != 3 or table.shape[0] != table.shape[2]:
            raise InvalidModelError(
                f"Transition table must have shape (S, A, S), got {table.shape}"
            )
        object.__setattr__(self, "probs", _frozen(validate_probability_table(table)))

    @property
    def n_states(self) -> int:
        return int(self.probs.shape[0])

    @property
    def n_actions(self) -> int:
        return int(self.probs.shape[1])

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n_states, self.n_actions, self.n_states)

    def matches(self, mdp: MdpSpec) -> bool:
        return self.n_states == mdp.n_states and self.n_actions == mdp.n_actions

    def require_matches(self, mdp: MdpSpec) -> None:
        if not self.matches(mdp):
            raise InvalidModelError(
                f"Transition model shape {self.shape} "
                f"does not match MDP ({mdp.n_states}, {mdp.n_actions})"
            )

    def uniform_policy_chain(self) -> np.ndarray:
        return self.probs.mean(axis=1)


@dataclass(frozen=True, eq=False)
class UncertaintySet:
    """Finite family of transition models sharing one shape, with a nominal member."""

    models: tuple[TransitionModel, ...]
    nominal_index: int = 0

    def __post_init__(self) -> None:
        models = tuple(self.models)
        if not models:
            raise InvalidModelError("Uncertainty set needs at least one model")
        shape = models[0].shape
        for k, model in enumerate(models):
            if model.shape != shape:
                raise InvalidModelError(f"Model {k} has shape {model.shape}, expected {shape}")
            # softmax policies keep every action at positive probability, so the
            # uniform-policy chain has the same connectivity as any policy's chain
            check_ergodic(model.uniform_policy_chain(), label=f"uncertainty-set model {k}")
        if not 0 <= int(self.nominal_index) < len(models):
            raise InvalidModelError(
                f"nominal_index {self.nominal_index} out of range for {len(models)} models"
            )
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "nominal_index", int(self.nominal_index))

    def __len__(self) -> int:
        return len(self.models)

    @property
    def nominal(self) -> TransitionModel:
        return self.models[self.nominal_index]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.models[0].shape

    @cached_property
    def stacked(self) -> np.ndarray:
        """Member tables stacked along a leading model axis, shape (K, S, A, S)."""
        return _frozen(np.stack([model.probs for model in self.models]))


@dataclass(frozen=True, eq=False)
class WeightingDistribution:
    """Probability vector omega over the members of an uncertainty set."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InvalidModelError("Weighting distribution must be a non-empty vector")
        if not np.all(np.isfinite(w)) or np.any(w < 0.0):
            raise InvalidModelError(f"Weights must be finite and non-negative: {w}")
        total = w.sum()
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidModelError(f"Weights sum to {total!r}, expected 1 within {PROB_TOL}")
        if not np.any(w > 0.0):
            raise InvalidModelError("Weighting distribution must put mass on at least one model")
        object.__setattr__(self, "weights", _frozen(w / total))

    def __len__(self) -> int:
        return int(self.weights.size)

    @classmethod
    def uniform(cls, k: int) -> "WeightingDistribution":
        return cls(np.full(k, 1.0 / k))

    @classmethod
    def point_mass(cls, index: int, k: int) -> "WeightingDistribution":
        w = np.zeros(k)
        w[index] = 1.0
        return cls(w)


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row maximum for stability."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    weights = np.exp(shifted)
    return weights / weights.sum(axis=-1, keepdims=True)


@dataclass(frozen=True, eq=False)
class SoftmaxPolicy:
    """Tabular softmax policy pi(x, a) proportional to exp(theta[x, a])."""

    theta: np.ndarray
    n_states: int
    n_actions: int

    def __post_init__(self) -> None:
        theta = np.array(self.theta, dtype=float).reshape(-1)
        if theta.size != int(self.n_states) * int(self.n_actions):
            raise InvalidModelError(
                f"theta has {theta.size} entries, expected {self.n_states} x {self.n_actions}"
            )
        if not np.all(np.isfinite(theta)):
            raise InvalidModelError("theta contains NaN or infinite entries")
        object.__setattr__(self, "theta", _frozen(theta))
        object.__setattr__(self, "n_states", int(self.n_states))
        object.__setattr__(self, "n_actions", int(self.n_actions))

    @classmethod
    def uniform(cls, n_states: int, n_actions: int) -> "SoftmaxPolicy":
        return cls(np.zeros(n_states * n_actions), n_states, n_actions)

    @classmethod
    def near_deterministic(
        cls, actions: Sequence[int], n_actions: int, logit: float = 40.0
    ) -> "SoftmaxPolicy":
        """Policy whose logits favour ``actions[x]`` at every state x by ``logit``."""
        theta = np.zeros((len(actions), n_actions))
        theta[np.arange(len(actions)), np.asarray(actions, dtype=int)] = logit
        return cls(theta, len(actions), n_actions)

    @classmethod
    def from_probabilities(cls, probs: np.ndarray) -> "SoftmaxPolicy":
        table = validate_probability_table(probs)
        if np.any(table <= 0.0):
            raise InvalidModelError("Softmax policies need strictly positive probabilities")
        return cls(np.log(table), table.shape[0], table.shape[1])

    def with_theta(self, theta: np.ndarray) -> "SoftmaxPolicy":
        return SoftmaxPolicy(theta, self.n_states, self.n_actions)

    def logits(self) -> np.ndarray:
        return self.theta.reshape(self.n_states, self.n_actions)

    def probabilities(self) -> np.ndarray:
        return softmax_rows(self.logits())

    def greedy_actions(self) -> np.ndarray:
        """Most likely action per state, lowest index on ties."""
        return np.argmax(self.logits(), axis=1)
