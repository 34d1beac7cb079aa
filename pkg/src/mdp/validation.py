"""Numeric validation for MDP tables, Markov chains and feature matrices."""
from math import gcd

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from src.core.errors import AssumptionViolationError, InvalidModelError
from src.core.logging import get_logger

logger = get_logger(__name__)

PROB_TOL = 1e-12
SPAN_TOL = 1e-9


def validate_rewards(rewards: np.ndarray, n_states: int, n_actions: int) -> np.ndarray:
    """
    Validate a reward table.

    Args:
        rewards: Table indexed (state, action)
        n_states: Expected number of states
        n_actions: Expected number of actions

    Returns:
        Float copy of the table

    Raises:
        InvalidModelError: If the shape is wrong or an entry is not finite
    """
    if n_states < 1 or n_actions < 1:
        raise InvalidModelError(
            f"Need at least one state and one action, got ({n_states}, {n_actions})"
        )
    table = np.array(rewards, dtype=float)
    if table.shape != (n_states, n_actions):
        raise InvalidModelError(
            f"Reward table has shape {table.shape}, expected {(n_states, n_actions)}"
        )
    if not np.all(np.isfinite(table)):
        raise InvalidModelError("Reward table contains NaN or infinite entries")
    return table


def validate_probability_table(probs: np.ndarray, tol: float = PROB_TOL) -> np.ndarray:
    """
    Validate a table whose last axis holds probability vectors.

    Rows off by less than ``tol`` are renormalised; anything further off is rejected.

    Args:
        probs: Array with probability vectors along the last axis
        tol: Allowed deviation of each row sum from one

    Returns:
        Renormalised float copy

    Raises:
        InvalidModelError: If an entry is outside [0, 1] or a row sum is off by more than tol
    """
    table = np.array(probs, dtype=float)
    if table.ndim < 1 or table.size == 0:
        raise InvalidModelError("Probability table is empty")
    if not np.all(np.isfinite(table)):
        raise InvalidModelError("Probability table contains NaN or infinite entries")
    if np.any(table < -tol) or np.any(table > 1.0 + tol):
        raise InvalidModelError(
            f"Probability entries must lie in [0, 1] (min={table.min()}, max={table.max()})"
        )
    table = np.clip(table, 0.0, 1.0)
    sums = table.sum(axis=-1)
    worst = float(np.max(np.abs(sums - 1.0)))
    if worst > tol:
        bad = np.argwhere(np.abs(sums - 1.0) > tol)
        raise InvalidModelError(
            f"{len(bad)} probability rows do not sum to 1 "
            f"(worst deviation {worst:.3e}), first at {tuple(bad[0])}"
        )
    return table / sums[..., None]


def strong_components(chain: np.ndarray) -> np.ndarray:
    """
    Strongly connected component label of every state in the positive-probability graph.

    Args:
        chain: Square state-to-state matrix

    Returns:
        Integer label per state; two states share a label when each reaches the other
    """
    _, labels = connected_components(csr_matrix(chain > 0.0), directed=True, connection="strong")
    return labels


def is_irreducible(chain: np.ndarray) -> bool:
    """True when every state reaches every other state."""
    return bool(np.all(strong_components(chain) == 0))


def chain_period(chain: np.ndarray) -> int:
    """
    Period of an irreducible chain.

    Breadth-first levels from state 0; the period is the gcd of
    ``level[u] + 1 - level[v]`` over all edges u -> v.
    """
    adjacency = chain > 0.0
    level = shortest_path(csr_matrix(adjacency), unweighted=True, indices=0)

    period = 0
    for u, v in np.argwhere(adjacency):
        if np.isfinite(level[u]) and np.isfinite(level[v]):
            period = gcd(period, int(abs(level[u] + 1 - level[v])))
    return period


def is_aperiodic(chain: np.ndarray) -> bool:
    """True when the (irreducible) chain has period one."""
    return chain_period(chain) == 1


def check_ergodic(chain: np.ndarray, label: str = "chain") -> None:
    """
    Require an irreducible, aperiodic chain.

    Raises:
        AssumptionViolationError: If the chain is reducible or periodic
    """
    if not is_irreducible(chain):
        raise AssumptionViolationError(f"{label} is not irreducible")
    period = chain_period(chain)
    if period != 1:
        raise AssumptionViolationError(f"{label} is periodic with period {period}")


def check_ergodic_safe(chain: np.ndarray, label: str = "chain") -> tuple[bool, str]:
    """
    Safe wrapper for check_ergodic that catches the violation.

    Returns:
        (is_valid, error_message) tuple
    """
    try:
        check_ergodic(chain, label)
        return (True, "")
    except AssumptionViolationError as e:
        logger.warning(f"Ergodicity check failed: {e}")
        return (False, str(e))


def check_feature_assumptions(state_features: np.ndarray) -> None:
    """
    Require linearly independent critic features whose span excludes the all-ones vector.

    Args:
        state_features: Matrix Phi with one row per state

    Raises:
        AssumptionViolationError: If Phi is rank deficient or e lies in its column span
    """
    phi = np.asarray(state_features, dtype=float)
    if phi.ndim != 2 or phi.shape[1] == 0:
        raise AssumptionViolationError(
            f"Feature matrix must be 2-d with at least one column, got {phi.shape}"
        )
    if not np.all(np.isfinite(phi)):
        raise AssumptionViolationError("Feature matrix contains NaN or infinite entries")
    rank = int(np.linalg.matrix_rank(phi))
    if rank < phi.shape[1]:
        raise AssumptionViolationError(f"Feature matrix has rank {rank} < {phi.shape[1]} columns")

    ones = np.ones(phi.shape[0])
    coef, *_ = np.linalg.lstsq(phi, ones, rcond=None)
    residual = float(np.linalg.norm(phi @ coef - ones))
    if residual < SPAN_TOL * np.sqrt(phi.shape[0]):
        raise AssumptionViolationError("The all-ones vector lies in the span of the feature matrix")
