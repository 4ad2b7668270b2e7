"""Closed-form constants and finite-class performance bounds.

Everything here is a direct formula evaluation: the high-probability
deviation envelope for the empirical objective over finite classes, the
resulting performance-gap bound, its error-robust extension, the behavior
cloning bound, and the alpha selection rules. No universal constants are
estimated or fabricated; what is reported is exactly what is computable.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence


def value_bound(alpha: float, b_fprime: float, gamma: float) -> float:
    """Bound on ||v*_alpha||_inf: (alpha * B_f' + 1) / (1 - gamma)."""
    return (alpha * b_fprime + 1.0) / (1.0 - gamma)


def residual_bound(b_v: float, gamma: float) -> float:
    """Bound on |e_v|: (1 + gamma) * B_v + 1 for ||v||_inf <= B_v."""
    return (1.0 + gamma) * b_v + 1.0


def stat_error(
    n: int,
    n0: int,
    alpha: float,
    b_w: float,
    b_f: float,
    b_v: float,
    b_e: float,
    sizes: tuple[int, int],
    delta: float,
    gamma: float = 0.0,
) -> float:
    """Deviation envelope for |L_hat - L| over |V| x |W| candidate pairs.

    (1-gamma) B_v sqrt(2 log(4|V|/delta) / n0)
      + (alpha B_f + B_w B_e) sqrt(2 log(4|V||W|/delta) / n),

    which holds simultaneously for every pair with probability 1 - delta.
    """
    if n < 1 or n0 < 1:
        raise ValueError(f"need n, n0 >= 1, got n={n}, n0={n0}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if alpha < 0.0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    num_v, num_w = sizes
    if num_v < 1 or num_w < 1:
        raise ValueError("class sizes must be at least 1")
    init_term = (1.0 - gamma) * b_v * math.sqrt(2.0 * math.log(4.0 * num_v / delta) / n0)
    data_term = (alpha * b_f + b_w * b_e) * math.sqrt(
        2.0 * math.log(4.0 * num_v * num_w / delta) / n
    )
    return init_term + data_term


@dataclass(frozen=True)
class BoundConstants:
    b_v: float
    b_e: float
    b_f: float
    b_fprime: float
    b_w: float
    alpha: float
    m_f: float
    gamma: float
    n: int
    n0: int
    delta: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class BoundReport:
    """Statistical error and gap bounds for one experiment run."""

    eps_stat: float
    rhs_perf_bound: float
    rhs_bc_bound: Optional[float]
    constants: BoundConstants

    def to_dict(self) -> dict:
        out = {
            "eps_stat": self.eps_stat,
            "rhs_perf_bound": self.rhs_perf_bound,
            "rhs_bc_bound": self.rhs_bc_bound,
        }
        out.update(self.constants.to_dict())
        return out


def performance_gap_bound(eps_stat: float, alpha: float, m_f: float, gamma: float) -> float:
    """Gap bound (4 / (1-gamma)) * sqrt(eps_stat / (alpha * m_f))."""
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if m_f <= 0.0:
        raise ValueError(f"m_f must be positive, got {m_f}")
    if eps_stat < 0.0:
        raise ValueError(f"eps_stat must be nonnegative, got {eps_stat}")
    return 4.0 / (1.0 - gamma) * math.sqrt(eps_stat / (alpha * m_f))


def optimization_approximation_slack(
    eps_opt: float, eps_app: float, alpha: float, m_f: float, gamma: float
) -> float:
    """Extra gap term (2/(1-gamma)) sqrt(2 (eps_opt + eps_app) / (alpha m_f))."""
    if alpha <= 0.0 or m_f <= 0.0:
        raise ValueError("alpha and m_f must be positive")
    return 2.0 / (1.0 - gamma) * math.sqrt(2.0 * (eps_opt + eps_app) / (alpha * m_f))


def robust_gap_bound(
    eps_stat: float,
    eps_opt: float,
    eps_app: float,
    alpha: float,
    m_f: float,
    gamma: float,
) -> float:
    """Gap bound tolerating optimization slack and class misspecification."""
    return performance_gap_bound(eps_stat, alpha, m_f, gamma) + optimization_approximation_slack(
        eps_opt, eps_app, alpha, m_f, gamma
    )


def approximation_error_combination(
    eps_rv: float,
    eps_rw: float,
    b_w: float,
    b_e: float,
    b_fprime: float,
    alpha: float,
) -> float:
    """eps_app = (B_w + 1) eps_rv + (B_e + alpha B_f') eps_rw."""
    return (b_w + 1.0) * eps_rv + (b_e + alpha * b_fprime) * eps_rw


def bc_sample_term(b_w: float, num_policies: int, delta: float, n2: int) -> float:
    """Cloning deviation term 4 B_w sqrt(6 log(4 |Pi| / delta) / n2)."""
    if n2 <= 0:
        raise ValueError("n2 must be positive")
    return 4.0 * b_w * math.sqrt(6.0 * math.log(4.0 * num_policies / delta) / n2)


def bc_gap_bound(
    eps_stat: float,
    alpha: float,
    m_f: float,
    gamma: float,
    b_w: float,
    num_policies: int,
    delta: float,
    n2: int,
) -> float:
    """Value-gap bound for the cloned policy.

    (1/(1-gamma)) * (4 B_w sqrt(6 log(4|Pi|/delta)/n2) + 50 sqrt(eps_stat/(alpha m_f))).
    """
    if alpha <= 0.0 or m_f <= 0.0:
        raise ValueError("alpha and m_f must be positive")
    inner = bc_sample_term(b_w, num_policies, delta, n2) + 50.0 * math.sqrt(
        eps_stat / (alpha * m_f)
    )
    return inner / (1.0 - gamma)


def recommended_alpha(kind: str, eps: float, b_f: float) -> float:
    """Regularization weight for a target accuracy eps.

    kind "unregularized": eps / (2 B_f0) to compete with the unregularized
    optimum; kind "constrained": eps / (4 B_f) for the capped-weight setting.
    """
    if eps <= 0.0 or b_f <= 0.0:
        raise ValueError("eps and b_f must be positive")
    if kind == "unregularized":
        return eps / (2.0 * b_f)
    if kind == "constrained":
        return eps / (4.0 * b_f)
    raise ValueError(f"unknown kind {kind!r}, expected 'unregularized' or 'constrained'")


def alpha_un_selector(
    eps_opt: float,
    eps_app: float,
    b_f0: float,
    m_f: float,
    gamma: float,
    grid: Sequence[float],
) -> float:
    """Pick alpha from a grid minimizing the competing-with-pi*_0 budget.

    Objective: alpha * B_f0 + (2/(1-gamma)) sqrt(2 (eps_opt + eps_app) / (alpha m_f)).
    Ties go to the smallest alpha.
    """
    if not grid:
        raise ValueError("alpha grid must be nonempty")
    best_alpha, best_val = None, None
    for alpha in sorted(grid):
        if alpha <= 0.0:
            raise ValueError("grid entries must be positive")
        val = alpha * b_f0 + optimization_approximation_slack(eps_opt, eps_app, alpha, m_f, gamma)
        if best_val is None or val < best_val - 1e-15:
            best_alpha, best_val = alpha, val
    return best_alpha


def unregularized_competition_slack(alpha: float, b_f0: float) -> float:
    """Value sacrificed by regularizing: J(pi*_0) - J(pi*_alpha) <= alpha * B_f0."""
    return alpha * b_f0


def make_bound_report(
    n: int,
    n0: int,
    alpha: float,
    m_f: float,
    gamma: float,
    b_w: float,
    b_f: float,
    b_v: float,
    b_e: float,
    sizes: tuple[int, int],
    delta: float,
    num_policies: Optional[int] = None,
    n2: Optional[int] = None,
) -> BoundReport:
    """Assemble the statistical error and the gap bounds for one run."""
    eps = stat_error(n, n0, alpha, b_w, b_f, b_v, b_e, sizes, delta, gamma=gamma)
    rhs = performance_gap_bound(eps, alpha, m_f, gamma) if alpha > 0.0 else float("inf")
    rhs_bc = None
    if num_policies is not None and n2 is not None and alpha > 0.0:
        rhs_bc = bc_gap_bound(eps, alpha, m_f, gamma, b_w, num_policies, delta, n2)
    constants = BoundConstants(
        b_v=b_v,
        b_e=b_e,
        b_f=b_f,
        b_fprime=m_f * b_w,
        b_w=b_w,
        alpha=alpha,
        m_f=m_f,
        gamma=gamma,
        n=n,
        n0=n0,
        delta=delta,
    )
    return BoundReport(eps_stat=eps, rhs_perf_bound=rhs, rhs_bc_bound=rhs_bc, constants=constants)
