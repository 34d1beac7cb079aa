"""Stationary distributions by direct linear solve."""
import numpy as np
import scipy.linalg

from src.core.errors import InvalidModelError, NoUniqueStationaryError, NumericalFailureError
from src.mdp.validation import is_irreducible

MAX_CONDITION = 1e12
RESIDUAL_TOL = 1e-12
NEGATIVE_TOL = 1e-15


def stationary_distribution(chain: np.ndarray) -> np.ndarray:
    """
    Unique stationary distribution d with d^T P = d^T and sum(d) = 1.

    Solves (P^T - I) d = 0 with the last equation replaced by the
    normalisation row. Only irreducible chains are accepted, so every
    entry of d is positive.

    Args:
        chain: Row-stochastic state-to-state matrix

    Returns:
        Stationary distribution vector

    Raises:
        InvalidModelError: If the matrix is not square and row-stochastic
        NoUniqueStationaryError: If the chain is not irreducible
        NumericalFailureError: If the solution fails the residual check
    """
    p = np.asarray(chain, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise InvalidModelError(f"Chain must be a square matrix, got shape {p.shape}")
    if np.any(p < 0) or np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-10:
        raise InvalidModelError("Chain is not row-stochastic")
    if not is_irreducible(p):
        raise NoUniqueStationaryError("Chain is not irreducible")

    n = p.shape[0]
    system = p.T - np.eye(n)
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0

    if np.linalg.cond(system) > MAX_CONDITION:
        raise NoUniqueStationaryError("Chain has no unique stationary distribution")
    d = scipy.linalg.solve(system, rhs)

    residual = float(np.max(np.abs(d @ p - d)))
    if np.any(d < -NEGATIVE_TOL) or residual > RESIDUAL_TOL:
        raise NumericalFailureError(
            f"Stationary solve inaccurate (residual {residual:.3e}, min {d.min():.3e})"
        )
    # states visited with probability below rounding can come back as -0 or -1e-17
    d = np.clip(d, 0.0, None)
    return d / d.sum()
