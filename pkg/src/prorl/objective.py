"""The regularized linear-programming Lagrangian, population and empirical.

For a value candidate v and weight candidate w the objective is

    L_alpha(v, w) = (1-gamma) E_mu0[v]
                    + E_dD[ -alpha f(w) + w * e_v ]

with Bellman residual e_v(s,a) = r(s,a) + gamma E_{s'}[v(s')] - v(s). The
empirical version replaces the two expectations with sample means over the
initial-state draws and the transition tuples. Cells without data mass are
excluded everywhere; candidate weights are treated as zero there.
"""

from __future__ import annotations

import numpy as np

from .datasets import OfflineDataset
from .mdp import Occupancy, TabularMdp
from .regularizers import Regularizer


def _mass(d) -> np.ndarray:
    return d.mass if isinstance(d, Occupancy) else np.asarray(d, dtype=float)


def residual_ev(mdp: TabularMdp, v: np.ndarray) -> np.ndarray:
    """Population Bellman residual matrix e_v(s, a), shape (S, A)."""
    v = np.asarray(v, dtype=float)
    return mdp.reward + mdp.gamma * np.einsum("sat,t->sa", mdp.transition, v) - v[:, None]


def sampled_residuals(dataset: OfflineDataset, v: np.ndarray) -> np.ndarray:
    """Per-transition residuals r_i + gamma v(s'_i) - v(s_i)."""
    v = np.asarray(v, dtype=float)
    return dataset.rewards + dataset.gamma * v[dataset.next_states] - v[dataset.states]


def population_lagrangian(
    mdp: TabularMdp,
    data_dist,
    reg: Regularizer,
    alpha: float,
    v: np.ndarray,
    w: np.ndarray,
) -> float:
    """Exact L_alpha(v, w) under the data distribution."""
    if alpha < 0.0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    dd = _mass(data_dist)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    e = residual_ev(mdp, v)
    pos = dd > 0.0
    init_term = (1.0 - mdp.gamma) * float(mdp.init_dist @ v)
    data_term = float(np.sum(dd[pos] * (-alpha * reg.eval(w[pos]) + w[pos] * e[pos])))
    return init_term + data_term


def empirical_lagrangian(
    dataset: OfflineDataset,
    reg: Regularizer,
    alpha: float,
    v: np.ndarray,
    w: np.ndarray,
) -> float:
    """Sample estimate of L_alpha(v, w) from an offline dataset."""
    if alpha < 0.0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    if dataset.n == 0 or dataset.n0 == 0:
        raise ValueError(
            f"empirical objective needs transitions and initial states, "
            f"got n={dataset.n}, n0={dataset.n0}"
        )
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    w_i = w[dataset.states, dataset.actions]
    e_i = sampled_residuals(dataset, v)
    init_term = (1.0 - dataset.gamma) * float(np.mean(v[dataset.init_states]))
    data_term = float(np.mean(-alpha * reg.eval(w_i) + w_i * e_i))
    return init_term + data_term


def empirical_lagrangian_members(
    dataset: OfflineDataset,
    reg: Regularizer,
    alpha: float,
    v_members,
    w_members,
) -> np.ndarray:
    """Payoff matrix L_hat[w_index, v_index] over finite candidate classes.

    Vectorized across members so enumeration over |W| x |V| pairs touches the
    dataset once per member rather than once per pair.
    """
    if dataset.n == 0 or dataset.n0 == 0:
        raise ValueError("empirical objective needs a nonempty dataset")
    v_stack = np.stack([np.asarray(v, dtype=float) for v in v_members])
    w_stack = np.stack([np.asarray(w, dtype=float) for w in w_members])
    # (n_v, n): residuals per value member; (n_w, n): weights per weight member
    e_rows = (
        dataset.rewards[None, :]
        + dataset.gamma * v_stack[:, dataset.next_states]
        - v_stack[:, dataset.states]
    )
    w_rows = w_stack[:, dataset.states, dataset.actions]
    init_terms = (1.0 - dataset.gamma) * v_stack[:, dataset.init_states].mean(axis=1)
    f_terms = -alpha * reg.eval(w_rows).mean(axis=1)
    coupling = w_rows @ e_rows.T / dataset.n
    return init_terms[None, :] + f_terms[:, None] + coupling


def population_lagrangian_members(
    mdp: TabularMdp,
    data_dist,
    reg: Regularizer,
    alpha: float,
    v_members,
    w_members,
) -> np.ndarray:
    """Population payoff matrix L[w_index, v_index] over finite classes."""
    dd = _mass(data_dist)
    pos = dd > 0.0
    v_stack = np.stack([np.asarray(v, dtype=float) for v in v_members])
    w_stack = np.stack([np.asarray(w, dtype=float) for w in w_members])
    e_cells = np.stack([residual_ev(mdp, v)[pos] for v in v_stack])  # (n_v, m)
    w_cells = w_stack[:, pos]  # (n_w, m)
    weights = dd[pos]
    init_terms = (1.0 - mdp.gamma) * (v_stack @ mdp.init_dist)
    f_terms = -alpha * (reg.eval(w_cells) @ weights)
    coupling = (w_cells * weights[None, :]) @ e_cells.T
    return init_terms[None, :] + f_terms[:, None] + coupling


def weighted_l2(w_a: np.ndarray, w_b: np.ndarray, data_dist) -> float:
    """||w_a - w_b||_{2, d^D} = sqrt( E_dD[(w_a - w_b)^2] ), support cells only."""
    dd = _mass(data_dist)
    pos = dd > 0.0
    diff = np.asarray(w_a, dtype=float)[pos] - np.asarray(w_b, dtype=float)[pos]
    return float(np.sqrt(np.sum(dd[pos] * diff**2)))


def approximation_errors(
    mdp: TabularMdp,
    data_dist,
    v_star: np.ndarray,
    w_star: np.ndarray,
    v_members,
    w_members,
) -> tuple[float, float]:
    """Best-in-class approximation errors (eps_rv, eps_rw) for misspecified classes.

    eps_rv weighs value deviations under three laws: the initial distribution,
    the data state marginal, and the data's one-step pushforward. eps_rw is
    the d^D-weighted L1 distance to the target weight.
    """
    dd = _mass(data_dist)
    dd_state = dd.sum(axis=1)
    push = np.einsum("sa,sat->t", dd, mdp.transition)
    v_star = np.asarray(v_star, dtype=float)
    w_star = np.asarray(w_star, dtype=float)
    eps_rv = min(
        float(
            mdp.init_dist @ np.abs(v - v_star)
            + dd_state @ np.abs(v - v_star)
            + push @ np.abs(v - v_star)
        )
        for v in (np.asarray(v, dtype=float) for v in v_members)
    )
    eps_rw = min(
        float(np.sum(dd * np.abs(np.asarray(w, dtype=float) - w_star)))
        for w in w_members
    )
    return eps_rv, eps_rw
