"""Max-min estimation over finite classes.

The estimator enumerates the empirical objective over every (weight,
value) pair: each weight candidate is scored by its worst-case value
candidate, and the best-scoring weight wins. Enumeration keeps the
optimization error exactly zero in the default mode; the inexact mode
instead samples uniformly among pairs within declared slacks, which is
how optimization error enters the robustness experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .classes import ValueClass, WeightClass
from .datasets import OfflineDataset
from .mdp import TabularMdp
from .objective import (
    empirical_lagrangian_members,
    population_lagrangian_members,
)
from .oracle import solve_regularized
from .regularizers import Regularizer


@dataclass(frozen=True)
class SaddleSolution:
    """Selected pair with its empirical objective value and realized slacks.

    eps_ov bounds how far v_hat sits above the best response to w_hat;
    eps_ow bounds how far w_hat's worst case sits below the max-min value.
    Exact mode reports both as 0.0.
    """

    w_hat: np.ndarray
    v_hat: np.ndarray
    value: float
    eps_ov: float
    eps_ow: float
    w_index: int
    v_index: int

    def to_dict(self) -> dict:
        return {
            "w_hat": self.w_hat.tolist(),
            "v_hat": self.v_hat.tolist(),
            "value": self.value,
            "eps_ov": self.eps_ov,
            "eps_ow": self.eps_ow,
            "w_index": self.w_index,
            "v_index": self.v_index,
        }


def _inner_minima(l_matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-weight worst-case values and the minimizing value indices."""
    v_idx = l_matrix.argmin(axis=1)  # argmin takes the first (lowest) index
    return l_matrix[np.arange(l_matrix.shape[0]), v_idx], v_idx


def solve_exact(
    data: OfflineDataset,
    classes: tuple[ValueClass, WeightClass],
    reg: Regularizer,
    alpha: float,
    w_order: Optional[Sequence[int]] = None,
) -> SaddleSolution:
    """Enumerate all pairs; ties at both levels go to the first index.

    w_order optionally reorders the outer tie-break: among weights whose
    worst-case values tie, the one listed earliest wins. Indices in the
    returned solution always refer to the original class order.
    """
    value_class, weight_class = classes
    l_matrix = empirical_lagrangian_members(
        data, reg, alpha, value_class.members, weight_class.members
    )
    inner, v_indices = _inner_minima(l_matrix)
    order = np.arange(len(weight_class)) if w_order is None else np.asarray(w_order, dtype=int)
    if sorted(order.tolist()) != list(range(len(weight_class))):
        raise ValueError("w_order must be a permutation of the weight indices")
    w_pos = order[inner[order].argmax()]
    return SaddleSolution(
        w_hat=weight_class.members[w_pos],
        v_hat=value_class.members[v_indices[w_pos]],
        value=float(inner[w_pos]),
        eps_ov=0.0,
        eps_ow=0.0,
        w_index=int(w_pos),
        v_index=int(v_indices[w_pos]),
    )


def solve_inexact(
    data: OfflineDataset,
    classes: tuple[ValueClass, WeightClass],
    reg: Regularizer,
    alpha: float,
    eps_ov: float,
    eps_ow: float,
    seed: int,
) -> SaddleSolution:
    """Pick uniformly among pairs within the declared optimization slacks.

    A pair (v, w) qualifies when v is an eps_ov-approximate best response
    to w and w's worst case sits within eps_ow of the max-min value. The
    exact solution always qualifies, so the pool is never empty. Achieved
    slacks of the selected pair are reported (they are at most the
    requested ones).
    """
    if eps_ov < 0 or eps_ow < 0:
        raise ValueError("slacks must be nonnegative")
    value_class, weight_class = classes
    l_matrix = empirical_lagrangian_members(
        data, reg, alpha, value_class.members, weight_class.members
    )
    inner, _ = _inner_minima(l_matrix)
    maxmin = inner.max()
    w_ok = maxmin - inner <= eps_ow
    pair_ok = w_ok[:, None] & (l_matrix - inner[:, None] <= eps_ov)
    pool = np.argwhere(pair_ok)
    rng = np.random.default_rng(seed)
    w_pos, v_pos = pool[rng.integers(len(pool))]
    return SaddleSolution(
        w_hat=weight_class.members[w_pos],
        v_hat=value_class.members[v_pos],
        value=float(l_matrix[w_pos, v_pos]),
        eps_ov=float(l_matrix[w_pos, v_pos] - inner[w_pos]),
        eps_ow=float(maxmin - inner[w_pos]),
        w_index=int(w_pos),
        v_index=int(v_pos),
    )


@dataclass(frozen=True)
class PopulationSaddleReport:
    """Outcome of checking the exact pair against the population objective."""

    status: str  # "pass", "fail", or "not realizable"
    margin: float  # min over w of inner(w*) - inner(w); >= -tol on pass
    w_star_index: int  # -1 when the class misses w*


def population_saddle_check(
    mdp: TabularMdp,
    data_dist,
    reg: Regularizer,
    alpha: float,
    classes: tuple[ValueClass, WeightClass],
    tol: float = 1e-10,
    match_tol: float = 1e-8,
) -> PopulationSaddleReport:
    """Confirm the exact solver's pair is a max-min point of the population objective.

    Solves the instance exactly, locates w* in the weight class (sup-norm
    match within match_tol; missing w* yields status "not realizable"),
    then requires min_v L(v, w*) >= min_v L(v, w) - tol for every class
    member w.
    """
    value_class, weight_class = classes
    sol = solve_regularized(mdp, data_dist, reg, alpha)
    w_star_index = -1
    for i, w in enumerate(weight_class.members):
        if np.abs(w - sol.w_star).max() <= match_tol:
            w_star_index = i
            break
    if w_star_index < 0:
        return PopulationSaddleReport(status="not realizable", margin=float("nan"), w_star_index=-1)
    l_matrix = population_lagrangian_members(
        mdp, data_dist, reg, alpha, value_class.members, weight_class.members
    )
    inner, _ = _inner_minima(l_matrix)
    margin = float(inner[w_star_index] - inner.max())
    status = "pass" if margin >= -tol else "fail"
    return PopulationSaddleReport(status=status, margin=margin, w_star_index=w_star_index)
