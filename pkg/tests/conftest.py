"""Shared fixtures."""
import logging

import pytest

from src.envs.chain import build_chain_mdp, build_chain_uncertainty_set
from src.envs.single_step import build_uncertainty_set_single_step, single_step_rewards
from src.envs.weights import named_weights
from src.mdp.chains import average_model
from src.mdp.features import tabular_minus_one_features

BENCHMARK_PROBS = [0.1, 0.7, 0.8, 0.3, 0.5]


@pytest.fixture
def single_step_mdp():
    return single_step_rewards()


@pytest.fixture
def single_step_set():
    return build_uncertainty_set_single_step(BENCHMARK_PROBS, nominal=0.8)


@pytest.fixture
def dist1():
    return named_weights("dist1")


@pytest.fixture
def single_step_p_bar(single_step_set, dist1):
    return average_model(single_step_set, dist1)


@pytest.fixture
def chain_mdp():
    """Five-state chain with slip 0.2."""
    return build_chain_mdp(5, 0.2)


@pytest.fixture
def chain_set():
    return build_chain_uncertainty_set(5, [0.05, 0.2, 0.4], nominal_slip=0.2)


@pytest.fixture
def chain_features():
    return tabular_minus_one_features(5)


@pytest.fixture
def restore_logging():
    """Put the root logger back after a test that calls setup_logging."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)
