"""Synthetic birth-death chain domain."""
from collections.abc import Sequence
from typing import Optional

import numpy as np

from src.core.errors import InvalidParameterError
from src.core.logging import get_logger
from src.core.rng import SeedTree
from src.mdp.models import MdpSpec, TransitionModel, UncertaintySet
from src.mdp.validation import check_ergodic

logger = get_logger(__name__)

BACK = 0
FORWARD = 1
MAX_SLIP = 0.5
SLIP_CLIP = (1e-3, MAX_SLIP)


def _check_chain_args(n: int, slip: float) -> None:
    if n < 2:
        raise InvalidParameterError(f"Chain needs at least two states, got n={n}")
    if not 0.0 <= slip <= MAX_SLIP:
        raise InvalidParameterError(f"slip must lie in [0, {MAX_SLIP}], got {slip}")


def chain_rewards(n: int, rewards: Optional[Sequence[float]] = None) -> MdpSpec:
    """State-based rewards r(x, a) = rewards[x]; defaults to an even ramp from 0 to 1."""
    profile = np.linspace(0.0, 1.0, n) if rewards is None else np.asarray(rewards, dtype=float)
    if profile.shape != (n,):
        raise InvalidParameterError(f"Reward profile needs {n} entries, got {profile.shape}")
    return MdpSpec(n, 2, np.repeat(profile[:, None], 2, axis=1))


def chain_transitions(n: int, slip: float) -> TransitionModel:
    """Forward advances and back retreats with probability 1 - slip, otherwise stay; walls hold."""
    _check_chain_args(n, slip)
    probs = np.zeros((n, 2, n))
    for x in range(n):
        back, forward = max(x - 1, 0), min(x + 1, n - 1)
        probs[x, BACK, back] += 1.0 - slip
        probs[x, BACK, x] += slip
        probs[x, FORWARD, forward] += 1.0 - slip
        probs[x, FORWARD, x] += slip
    return TransitionModel(probs)


def build_chain_mdp(
    n: int, slip: float, rewards: Optional[Sequence[float]] = None
) -> tuple[MdpSpec, TransitionModel]:
    """
    Build an n-state birth-death chain.

    Args:
        n: Number of states (>= 2)
        slip: Probability that a move fails and the state stays put, in [0, 0.5]
        rewards: Reward per state (default: linspace(0, 1, n))

    Returns:
        (MdpSpec, TransitionModel) tuple

    Raises:
        InvalidParameterError: On an out-of-range argument
    """
    return chain_rewards(n, rewards), chain_transitions(n, slip)


def sample_chain_slips(k: int, nominal_slip: float, scale: float, tree: SeedTree) -> list[float]:
    """Draw ``k`` slips from a normal centred on the nominal slip, clipped into (0, 0.5]."""
    if k < 1:
        raise InvalidParameterError(f"Need at least one sample, got k={k}")
    if scale < 0:
        raise InvalidParameterError(f"scale must be non-negative, got {scale}")
    draws = tree.derive("chain_uncertainty").stream().next_gaussian(nominal_slip, scale, k)
    return [float(s) for s in np.clip(draws, *SLIP_CLIP)]


def build_chain_uncertainty_set(
    n: int, slips: Sequence[float], nominal_slip: Optional[float] = None
) -> UncertaintySet:
    """
    One chain member per slip; the nominal member is the slip closest to ``nominal_slip``.

    Raises:
        InvalidParameterError: If ``slips`` is empty or a slip is out of range
        AssumptionViolationError: If a member is periodic or reducible (slip = 0 on some chains)
    """
    values = [float(s) for s in slips]
    if not values:
        raise InvalidParameterError("Chain uncertainty set needs at least one slip")
    target = values[0] if nominal_slip is None else float(nominal_slip)
    nominal_index = int(np.argmin(np.abs(np.asarray(values) - target)))
    models = tuple(chain_transitions(n, s) for s in values)
    for k, model in enumerate(models):
        check_ergodic(model.uniform_policy_chain(), f"chain member {k} (slip={values[k]})")
    logger.debug(f"Chain uncertainty set n={n} slips={values}, nominal index {nominal_index}")
    return UncertaintySet(models, nominal_index)
