"""Exact soft-robust evaluation of a policy: average reward, differential values, advantages."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from src.core.errors import NumericalFailureError
from src.core.logging import get_logger
from src.mdp.chains import average_model, policy_matrix, policy_rewards
from src.mdp.models import (
    MdpSpec,
    SoftmaxPolicy,
    TransitionModel,
    UncertaintySet,
    WeightingDistribution,
)
from src.oracle.stationary import MAX_CONDITION, stationary_distribution

logger = get_logger(__name__)

POISSON_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SoftRobustEvaluation:
    """Exact quantities of one policy on one (average) transition model."""

    d_bar: np.ndarray
    j_bar: float
    v_bar: np.ndarray
    q_bar: np.ndarray
    a_bar: np.ndarray


def poisson_residual(
    mdp: MdpSpec, model: TransitionModel, policy: SoftmaxPolicy, evaluation: SoftRobustEvaluation
) -> float:
    """
    Largest violation of the Poisson equation
    J + V(x) = sum_a pi(x,a) (r(x,a) + sum_y p(x,a,y) V(y)).

    Returns:
        max_x of the absolute residual
    """
    probs = policy.probabilities()
    backup = mdp.rewards + np.einsum("xay,y->xa", model.probs, evaluation.v_bar)
    rhs = np.sum(probs * backup, axis=1)
    return float(np.max(np.abs(evaluation.j_bar + evaluation.v_bar - rhs)))


def evaluate_policy(
    mdp: MdpSpec, p_bar: TransitionModel, policy: SoftmaxPolicy
) -> SoftRobustEvaluation:
    """
    Evaluate a policy exactly on a transition model.

    The differential values are pinned by sum_x d(x) V(x) = 0, solving
    (I - P + e d^T) V = R - J e.

    Args:
        mdp: Rewards and dimensions
        p_bar: Transition model (usually the average model)
        policy: Softmax policy

    Returns:
        SoftRobustEvaluation with d_bar, j_bar, v_bar, q_bar, a_bar

    Raises:
        NumericalFailureError: If the Poisson system is singular or its residual is too large
    """
    p_bar.require_matches(mdp)
    chain = policy_matrix(p_bar, policy)
    d_bar = stationary_distribution(chain)
    rewards = policy_rewards(mdp, policy)
    j_bar = float(d_bar @ rewards)

    n = mdp.n_states
    system = np.eye(n) - chain + np.outer(np.ones(n), d_bar)
    if np.linalg.cond(system) > MAX_CONDITION:
        raise NumericalFailureError("Poisson system is singular")
    v_bar = scipy.linalg.solve(system, rewards - j_bar)

    q_bar = mdp.rewards - j_bar + np.einsum("xay,y->xa", p_bar.probs, v_bar)
    a_bar = q_bar - v_bar[:, None]
    evaluation = SoftRobustEvaluation(
        d_bar=d_bar, j_bar=j_bar, v_bar=v_bar, q_bar=q_bar, a_bar=a_bar
    )

    residual = poisson_residual(mdp, p_bar, policy, evaluation)
    scale = max(1.0, mdp.max_abs_reward)
    if residual > POISSON_TOL * scale:
        raise NumericalFailureError(f"Poisson residual {residual:.3e} exceeds tolerance")
    return evaluation


def fixed_model_objective(
    mdp: MdpSpec, uncertainty: UncertaintySet, omega: WeightingDistribution, policy: SoftmaxPolicy
) -> float:
    """
    Mixture of per-model average rewards, sum_k omega_k J_{p_k}(pi).

    This is the objective when one model is drawn once and kept; it generally
    differs from the average-model value on multi-step chains.
    """
    values = [evaluate_policy(mdp, model, policy).j_bar for model in uncertainty.models]
    return float(np.dot(omega.weights, values))


def objective_gap(
    mdp: MdpSpec, uncertainty: UncertaintySet, omega: WeightingDistribution, policy: SoftmaxPolicy
) -> float:
    """Fixed-model mixture objective minus the average-model average reward."""
    p_bar = average_model(uncertainty, omega)
    soft_robust = evaluate_policy(mdp, p_bar, policy).j_bar
    gap = fixed_model_objective(mdp, uncertainty, omega, policy) - soft_robust
    logger.debug(f"Objective gap (fixed-model minus average-model): {gap:.6g}")
    return gap
