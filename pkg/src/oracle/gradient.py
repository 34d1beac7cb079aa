"""Exact policy gradients, the linear-TD critic fixed point and the gradient bias it induces."""
from typing import Optional

import numpy as np
import scipy.linalg

from src.core.errors import AssumptionViolationError, NumericalFailureError
from src.core.logging import get_logger
from src.mdp.chains import policy_matrix, policy_rewards
from src.mdp.features import FeatureMap, compatible_features
from src.mdp.models import MdpSpec, SoftmaxPolicy, TransitionModel
from src.oracle.evaluation import SoftRobustEvaluation, evaluate_policy

logger = get_logger(__name__)

FD_STEP = 1e-5
FIXED_POINT_TOL = 1e-10


def _weighted_score_sum(
    policy: SoftmaxPolicy, d_bar: np.ndarray, action_values: np.ndarray
) -> np.ndarray:
    """sum_x d(x) sum_a pi(x,a) psi_xa * action_values(x,a)."""
    psi = compatible_features(policy)
    weights = d_bar[:, None] * policy.probabilities() * action_values
    return np.einsum("xa,xak->k", weights, psi)


def exact_policy_gradient(
    mdp: MdpSpec,
    p_bar: TransitionModel,
    policy: SoftmaxPolicy,
    evaluation: Optional[SoftRobustEvaluation] = None,
) -> np.ndarray:
    """
    Gradient of the average-model average reward with respect to theta.

    sum_x d_bar(x) sum_a grad pi(x,a) Q_bar(x,a), with grad pi = pi * psi.

    Args:
        mdp: Rewards and dimensions
        p_bar: Average transition model
        policy: Softmax policy
        evaluation: Precomputed evaluation of ``policy`` on ``p_bar`` (optional)

    Returns:
        Gradient vector of length S * A
    """
    ev = evaluation if evaluation is not None else evaluate_policy(mdp, p_bar, policy)
    return _weighted_score_sum(policy, ev.d_bar, ev.q_bar)


def policy_gradient_advantage_form(
    mdp: MdpSpec,
    p_bar: TransitionModel,
    policy: SoftmaxPolicy,
    evaluation: Optional[SoftRobustEvaluation] = None,
) -> np.ndarray:
    """Same gradient written with the advantage, sum_x d_bar sum_a pi psi A_bar."""
    ev = evaluation if evaluation is not None else evaluate_policy(mdp, p_bar, policy)
    return _weighted_score_sum(policy, ev.d_bar, ev.a_bar)


def policy_gradient_with_baseline(
    mdp: MdpSpec,
    p_bar: TransitionModel,
    policy: SoftmaxPolicy,
    baseline: np.ndarray,
    evaluation: Optional[SoftRobustEvaluation] = None,
) -> np.ndarray:
    """Gradient with Q_bar(x, a) replaced by Q_bar(x, a) + baseline(x)."""
    ev = evaluation if evaluation is not None else evaluate_policy(mdp, p_bar, policy)
    shifted = ev.q_bar + np.asarray(baseline, dtype=float)[:, None]
    return _weighted_score_sum(policy, ev.d_bar, shifted)


def finite_difference_gradient(
    mdp: MdpSpec, p_bar: TransitionModel, policy: SoftmaxPolicy, step: float = FD_STEP
) -> np.ndarray:
    """
    Central finite differences of the exact average reward in each theta coordinate.

    Args:
        mdp: Rewards and dimensions
        p_bar: Average transition model
        policy: Softmax policy
        step: Perturbation size

    Returns:
        Gradient estimate of length S * A
    """
    theta = policy.theta
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        bump = np.zeros_like(theta)
        bump[i] = step
        upper = evaluate_policy(mdp, p_bar, policy.with_theta(theta + bump)).j_bar
        lower = evaluate_policy(mdp, p_bar, policy.with_theta(theta - bump)).j_bar
        grad[i] = (upper - lower) / (2.0 * step)
    return grad


def critic_fixed_point(
    mdp: MdpSpec,
    p_bar: TransitionModel,
    policy: SoftmaxPolicy,
    features: FeatureMap,
    evaluation: Optional[SoftRobustEvaluation] = None,
) -> np.ndarray:
    """
    Solution v of Phi^T D Phi v = Phi^T D T(Phi v), T(J) = R - J_bar e + P_bar J.

    Rows of the projected system are rescaled to unit max-norm before a
    least-squares solve, and the result is accepted on its residual. Features
    with no stationary weight leave the system undetermined; the minimum-norm
    solution is returned for them.

    Args:
        mdp: Rewards and dimensions
        p_bar: Average transition model
        policy: Softmax policy
        features: Critic feature map
        evaluation: Precomputed evaluation (optional)

    Returns:
        Critic weights of length d2

    Raises:
        AssumptionViolationError: If no feature carries stationary weight
        NumericalFailureError: If the solve residual is out of tolerance
    """
    ev = evaluation if evaluation is not None else evaluate_policy(mdp, p_bar, policy)
    phi = features.state_features
    chain = policy_matrix(p_bar, policy)
    rewards = policy_rewards(mdp, policy)
    weighted = phi.T * ev.d_bar[None, :]

    system = weighted @ (phi - chain @ phi)
    rhs = weighted @ (rewards - ev.j_bar)
    row_scale = np.max(np.abs(system), axis=1)
    if not np.any(row_scale > 0.0):
        raise AssumptionViolationError("Projected Bellman system is singular for these features")
    row_scale[row_scale == 0.0] = 1.0
    system = system / row_scale[:, None]
    rhs = rhs / row_scale

    v, _, rank, _ = scipy.linalg.lstsq(system, rhs)
    if rank < features.d2:
        logger.debug(f"Projected Bellman system has rank {rank} < {features.d2}, minimum-norm v")

    residual = float(np.max(np.abs(system @ v - rhs)))
    if residual > FIXED_POINT_TOL * max(1.0, float(np.max(np.abs(rhs)))):
        raise NumericalFailureError(f"Critic fixed point residual {residual:.3e} exceeds tolerance")
    return v


def expected_td_errors(
    mdp: MdpSpec,
    p_bar: TransitionModel,
    features: FeatureMap,
    v: np.ndarray,
    j_value: float,
) -> np.ndarray:
    """
    Expected-next-state TD error for every (x, a) with a fixed critic.

    delta(x, a) = r(x, a) - J + sum_y p_bar(x, a, y) phi_y^T v - phi_x^T v
    """
    values = features.values(v)
    return mdp.rewards - j_value + np.einsum("xay,y->xa", p_bar.probs, values) - values[:, None]


def expected_actor_update(
    mdp: MdpSpec,
    p_bar: TransitionModel,
    policy: SoftmaxPolicy,
    features: FeatureMap,
    evaluation: Optional[SoftRobustEvaluation] = None,
) -> np.ndarray:
    """Stationary expectation of delta_t psi_{x_t a_t} under d_bar and pi, converged critic."""
    ev = evaluation if evaluation is not None else evaluate_policy(mdp, p_bar, policy)
    v = critic_fixed_point(mdp, p_bar, policy, features, ev)
    deltas = expected_td_errors(mdp, p_bar, features, v, ev.j_bar)
    return _weighted_score_sum(policy, ev.d_bar, deltas)


def gradient_bias(
    mdp: MdpSpec, p_bar: TransitionModel, policy: SoftmaxPolicy, features: FeatureMap
) -> np.ndarray:
    """
    Bias e of the TD actor update: expected update minus the exact gradient.

    Zero whenever Phi v reproduces V_bar up to an additive constant.
    """
    ev = evaluate_policy(mdp, p_bar, policy)
    return expected_actor_update(mdp, p_bar, policy, features, ev) - exact_policy_gradient(
        mdp, p_bar, policy, ev
    )
