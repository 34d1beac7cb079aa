"""Critic state features and compatible actor features."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.errors import InvalidModelError
from src.mdp.models import SoftmaxPolicy
from src.mdp.validation import check_feature_assumptions


def compatible_features(policy: SoftmaxPolicy) -> np.ndarray:
    """
    Score-function features psi_xa = grad_theta log pi(x, a) of a tabular softmax.

    Returns:
        Array of shape (S, A, S * A); block x of psi_xa holds 1{a = a'} - pi(x, a')
    """
    n_states, n_actions = policy.n_states, policy.n_actions
    probs = policy.probabilities()
    psi = np.zeros((n_states, n_actions, n_states * n_actions))
    eye = np.eye(n_actions)
    for x in range(n_states):
        psi[x, :, x * n_actions : (x + 1) * n_actions] = eye - probs[x][None, :]
    return psi


def score_vector(action_probs: np.ndarray, state: int, action: int, n_states: int) -> np.ndarray:
    """Single psi_xa, given the policy row pi(x, .) at ``state``."""
    n_actions = action_probs.size
    psi = np.zeros(n_states * n_actions)
    block = -np.asarray(action_probs, dtype=float)
    block[action] += 1.0
    psi[state * n_actions : (state + 1) * n_actions] = block
    return psi


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Critic features phi_x (rows of Phi) plus, once bound to a policy, actor features psi_xa."""

    state_features: np.ndarray
    actor_features: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        phi = np.array(self.state_features, dtype=float)
        if phi.ndim == 1:
            phi = phi[:, None]
        check_feature_assumptions(phi)
        phi.setflags(write=False)
        object.__setattr__(self, "state_features", phi)
        if self.actor_features is not None:
            psi = np.array(self.actor_features, dtype=float)
            if psi.ndim != 3 or psi.shape[0] != phi.shape[0]:
                raise InvalidModelError(
                    f"Actor features have shape {psi.shape}, expected (S, A, d1)"
                )
            psi.setflags(write=False)
            object.__setattr__(self, "actor_features", psi)

    @property
    def n_states(self) -> int:
        return int(self.state_features.shape[0])

    @property
    def d2(self) -> int:
        return int(self.state_features.shape[1])

    @property
    def d1(self) -> Optional[int]:
        return None if self.actor_features is None else int(self.actor_features.shape[2])

    def bind(self, policy: SoftmaxPolicy) -> "FeatureMap":
        """Return a copy whose actor features are compatible with ``policy``."""
        if policy.n_states != self.n_states:
            raise InvalidModelError(
                f"Policy has {policy.n_states} states, features have {self.n_states}"
            )
        return FeatureMap(self.state_features, compatible_features(policy))

    def values(self, v: np.ndarray) -> np.ndarray:
        """Approximate differential values Phi v."""
        return self.state_features @ v

    def scaled(self, factor: float) -> "FeatureMap":
        return FeatureMap(self.state_features * factor, self.actor_features)


def tabular_minus_one_features(n_states: int, drop: int = 0) -> FeatureMap:
    """One-hot state features with the ``drop`` column removed, so e stays out of the span."""
    if n_states < 2:
        raise InvalidModelError("Tabular-minus-one features need at least two states")
    if not 0 <= drop < n_states:
        raise InvalidModelError(f"drop={drop} is not a state index")
    return FeatureMap(np.delete(np.eye(n_states), drop, axis=1))


def coarse_features(values: np.ndarray) -> FeatureMap:
    """Single-column feature map phi_x = values[x]; values must not be constant."""
    return FeatureMap(np.asarray(values, dtype=float).reshape(-1, 1))
