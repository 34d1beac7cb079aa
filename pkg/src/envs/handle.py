"""Sampling front-end that agents step through."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.core.errors import EnvStepError
from src.core.rng import RandomStream
from src.mdp.models import MdpSpec, TransitionModel


@dataclass
class EnvHandle:
    """
    Single-owner environment: the current state plus a stream that draws
    successors from ``sampling_model``.

    The reward of a step is r(x, a) from the MDP; the successor is drawn by
    inverse CDF from the precomputed row of ``sampling_model``.
    """

    mdp: MdpSpec
    sampling_model: TransitionModel
    stream: RandomStream
    current_state: int = 0
    cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.sampling_model.require_matches(self.mdp)
        if not 0 <= self.current_state < self.mdp.n_states:
            raise EnvStepError(f"Start state {self.current_state} is not a state index")
        self.cdf = np.cumsum(self.sampling_model.probs, axis=2)


def make_env(
    mdp: MdpSpec, sampling_model: TransitionModel, stream: RandomStream, start_state: int = 0
) -> EnvHandle:
    """Create an environment handle starting at ``start_state``."""
    return EnvHandle(
        mdp=mdp, sampling_model=sampling_model, stream=stream, current_state=start_state
    )


def env_step(handle: EnvHandle, action: int) -> tuple[int, float]:
    """
    Take ``action`` in the current state.

    Args:
        handle: Environment handle (advanced in place)
        action: Action index

    Returns:
        (next_state, reward) tuple

    Raises:
        EnvStepError: If the action is not a valid index
    """
    if not 0 <= action < handle.mdp.n_actions:
        raise EnvStepError(f"Action {action} is not valid for {handle.mdp.n_actions} actions")
    state = handle.current_state
    reward = float(handle.mdp.rewards[state, action])
    next_state = handle.stream.next_index(handle.cdf[state, action])
    handle.current_state = next_state
    return next_state, reward


def reset(handle: EnvHandle, state: Optional[int] = None) -> int:
    """Move the handle to ``state`` (default 0) without consuming randomness."""
    target = 0 if state is None else int(state)
    if not 0 <= target < handle.mdp.n_states:
        raise EnvStepError(f"Reset state {target} is not a state index")
    handle.current_state = target
    return target
