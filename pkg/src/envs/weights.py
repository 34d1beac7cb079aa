"""Weighting distributions over uncertainty-set members."""
from collections.abc import Sequence
from typing import Optional

import numpy as np

from src.core.errors import InvalidParameterError
from src.core.rng import SeedTree
from src.mdp.models import WeightingDistribution

DIST1 = (0.47, 0.22, 0.10, 0.09, 0.12)
DIST2 = (0.63, 0.04, 0.05, 0.02, 0.26)

NAMED_WEIGHTS: dict[str, tuple[float, ...]] = {"dist1": DIST1, "dist2": DIST2}


def named_weights(name: str) -> WeightingDistribution:
    """Look up a shipped weighting distribution by name."""
    try:
        return WeightingDistribution(np.asarray(NAMED_WEIGHTS[name]))
    except KeyError:
        raise InvalidParameterError(
            f"Unknown weighting distribution {name!r}; choose from {sorted(NAMED_WEIGHTS)}"
        ) from None


def sample_dirichlet_weights(
    k: int, concentration: Optional[Sequence[float]] = None, seed: int = 0
) -> WeightingDistribution:
    """
    Fix omega as one Dirichlet draw.

    Args:
        k: Number of members
        concentration: Dirichlet parameters (default: all ones)
        seed: Root seed of the draw

    Returns:
        WeightingDistribution

    Raises:
        InvalidParameterError: If k < 1 or a concentration entry is not positive
    """
    if k < 1:
        raise InvalidParameterError(f"Need k >= 1, got {k}")
    alpha = np.ones(k) if concentration is None else np.asarray(concentration, dtype=float)
    if alpha.shape != (k,):
        raise InvalidParameterError(f"concentration must have {k} entries, got {alpha.shape}")
    draw = SeedTree(seed).derive("dirichlet_weights").stream().next_dirichlet(alpha)
    return WeightingDistribution(draw)
