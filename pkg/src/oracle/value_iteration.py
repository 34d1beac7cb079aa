"""Discounted value iteration oracles for the Q-learning family."""
from collections.abc import Callable

import numpy as np

from src.core.errors import InvalidParameterError, NumericalFailureError
from src.mdp.models import MdpSpec, TransitionModel, UncertaintySet


def _iterate(
    rewards: np.ndarray,
    bootstrap: Callable[[np.ndarray], np.ndarray],
    gamma: float,
    tol: float,
    max_iter: int,
) -> np.ndarray:
    if not 0.0 <= gamma < 1.0:
        raise InvalidParameterError(f"gamma must lie in [0, 1), got {gamma}")
    q = np.zeros_like(rewards)
    for _ in range(max_iter):
        updated = rewards + gamma * bootstrap(q.max(axis=1))
        if np.max(np.abs(updated - q)) <= tol * max(1.0, float(np.max(np.abs(updated)))):
            return updated
        q = updated
    raise NumericalFailureError(f"Value iteration did not converge in {max_iter} sweeps")


def value_iteration(
    mdp: MdpSpec,
    model: TransitionModel,
    gamma: float,
    tol: float = 1e-12,
    max_iter: int = 100_000,
) -> np.ndarray:
    """
    Optimal discounted Q under a single model, Q = r + gamma p max_a' Q.

    Args:
        mdp: Rewards and dimensions
        model: Transition model (pass the average model for the soft-robust oracle)
        gamma: Discount factor in [0, 1)
        tol: Sup-norm stopping threshold between sweeps, relative to max |Q| once above one
        max_iter: Sweep limit

    Returns:
        Q table of shape (S, A)
    """
    model.require_matches(mdp)
    return _iterate(mdp.rewards, lambda values: model.probs @ values, gamma, tol, max_iter)


def robust_value_iteration(
    mdp: MdpSpec,
    uncertainty: UncertaintySet,
    gamma: float,
    tol: float = 1e-12,
    max_iter: int = 100_000,
) -> np.ndarray:
    """Optimal discounted Q when each bootstrap takes the worst member, min_k p_k max_a' Q."""
    uncertainty.nominal.require_matches(mdp)
    stacked = uncertainty.stacked
    def worst_case(values: np.ndarray) -> np.ndarray:
        return (stacked @ values).min(axis=0)

    return _iterate(mdp.rewards, worst_case, gamma, tol, max_iter)


def greedy_policy(q_table: np.ndarray) -> np.ndarray:
    """Greedy action per state, lowest index on ties."""
    return np.argmax(q_table, axis=1)
