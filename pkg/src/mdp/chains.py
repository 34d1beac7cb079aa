"""Mixtures of transition models and the Markov chains a policy induces on them."""
import numpy as np

from src.core.errors import InvalidModelError
from src.mdp.models import (
    MdpSpec,
    SoftmaxPolicy,
    TransitionModel,
    UncertaintySet,
    WeightingDistribution,
)


def average_model(uncertainty: UncertaintySet, omega: WeightingDistribution) -> TransitionModel:
    """
    Average transition model p_bar = sum_k omega_k p_k.

    Args:
        uncertainty: Uncertainty set with K members
        omega: Weighting over the K members

    Returns:
        The mixture as a TransitionModel

    Raises:
        InvalidModelError: If omega does not have one weight per member
    """
    if len(omega) != len(uncertainty):
        raise InvalidModelError(f"omega has {len(omega)} weights for {len(uncertainty)} models")
    return TransitionModel(np.tensordot(omega.weights, uncertainty.stacked, axes=1))


def _require_policy_shape(model: TransitionModel, policy: SoftmaxPolicy) -> None:
    if (policy.n_states, policy.n_actions) != (model.n_states, model.n_actions):
        raise InvalidModelError(
            f"Policy shape ({policy.n_states}, {policy.n_actions}) "
            f"does not match model {model.shape}"
        )


def policy_matrix(model: TransitionModel, policy: SoftmaxPolicy) -> np.ndarray:
    """
    State-to-state matrix P(x, y) = sum_a pi(x, a) p(x, a, y).

    Raises:
        InvalidModelError: On a shape mismatch
    """
    _require_policy_shape(model, policy)
    return np.einsum("xa,xay->xy", policy.probabilities(), model.probs)


def policy_rewards(mdp: MdpSpec, policy: SoftmaxPolicy) -> np.ndarray:
    """Expected one-step reward per state, R(x) = sum_a pi(x, a) r(x, a)."""
    if (policy.n_states, policy.n_actions) != (mdp.n_states, mdp.n_actions):
        raise InvalidModelError("Policy shape does not match MDP")
    return np.sum(policy.probabilities() * mdp.rewards, axis=1)
