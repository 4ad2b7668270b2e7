"""Offline transition datasets: generation, validation, JSONL serialization.

A dataset is n i.i.d. transitions (s, a, r, s') with (s, a) ~ d^D and
s' ~ P(.|s, a), plus n0 i.i.d. initial states ~ mu0. Sampling uses inverse-CDF
lookups against a single PCG64 stream, so a (config, seed) pair pins the
dataset bytes exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .mdp import Occupancy, TabularMdp


@dataclass(frozen=True, eq=False)
class OfflineDataset:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    init_states: np.ndarray
    gamma: float
    generating_dd: Optional[Occupancy] = None
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "states", np.asarray(self.states, dtype=int))
        object.__setattr__(self, "actions", np.asarray(self.actions, dtype=int))
        object.__setattr__(self, "rewards", np.asarray(self.rewards, dtype=float))
        object.__setattr__(self, "next_states", np.asarray(self.next_states, dtype=int))
        object.__setattr__(self, "init_states", np.asarray(self.init_states, dtype=int))
        n = self.states.shape[0]
        for name in ("actions", "rewards", "next_states"):
            if getattr(self, name).shape[0] != n:
                raise ValueError(f"{name} length does not match states length {n}")
        if self.generating_dd is not None and n > 0:
            dd = self.generating_dd.mass
            if np.any(dd[self.states, self.actions] <= 0.0):
                bad = int(np.argmax(dd[self.states, self.actions] <= 0.0))
                raise ValueError(
                    f"transition {bad} drawn at a zero-probability cell "
                    f"({self.states[bad]}, {self.actions[bad]})"
                )

    @property
    def n(self) -> int:
        return int(self.states.shape[0])

    @property
    def n0(self) -> int:
        return int(self.init_states.shape[0])

    def take(self, start: int, stop: int, keep_inits: bool = True) -> "OfflineDataset":
        """Transitions[start:stop], with or without the initial-state samples."""
        inits = self.init_states if keep_inits else np.empty(0, dtype=int)
        return OfflineDataset(
            states=self.states[start:stop],
            actions=self.actions[start:stop],
            rewards=self.rewards[start:stop],
            next_states=self.next_states[start:stop],
            init_states=inits,
            gamma=self.gamma,
            generating_dd=self.generating_dd,
            seed=self.seed,
        )

    def save(self, transitions_path: str, inits_path: str) -> None:
        with open(transitions_path, "w") as fh:
            for s, a, r, sp in zip(self.states, self.actions, self.rewards, self.next_states):
                fh.write(json.dumps({"s": int(s), "a": int(a), "r": float(r), "sp": int(sp)}))
                fh.write("\n")
        with open(inits_path, "w") as fh:
            for s0 in self.init_states:
                fh.write(f"{int(s0)}\n")

    @staticmethod
    def load(transitions_path: str, inits_path: str, gamma: float) -> "OfflineDataset":
        s, a, r, sp = [], [], [], []
        with open(transitions_path) as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                s.append(row["s"])
                a.append(row["a"])
                r.append(row["r"])
                sp.append(row["sp"])
        with open(inits_path) as fh:
            inits = [int(line) for line in fh if line.strip()]
        return OfflineDataset(
            states=np.array(s, dtype=int),
            actions=np.array(a, dtype=int),
            rewards=np.array(r, dtype=float),
            next_states=np.array(sp, dtype=int),
            init_states=np.array(inits, dtype=int),
            gamma=gamma,
        )


def _inverse_cdf(cumulative: np.ndarray, draws: np.ndarray) -> np.ndarray:
    return np.searchsorted(cumulative, draws, side="right")


def generate_dataset(
    mdp: TabularMdp,
    data_dist,
    n: int,
    n0: int,
    seed,
) -> OfflineDataset:
    """Sample an offline dataset of n transitions and n0 initial states.

    data_dist is a distribution over state-action pairs (Occupancy or (S, A)
    array summing to one). Cells are drawn by inverse CDF over the flattened
    pairs, next states by inverse CDF over the matching transition row, and
    rewards are read off the MDP's reward table.
    """
    dd = data_dist.mass if isinstance(data_dist, Occupancy) else np.asarray(data_dist, dtype=float)
    if dd.shape != (mdp.num_states, mdp.num_actions):
        raise ValueError(f"data distribution shape {dd.shape} does not match the MDP")
    total = dd.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"data distribution must sum to 1, got {total}")
    if n < 0 or n0 < 0:
        raise ValueError("sample counts must be nonnegative")

    rng = np.random.default_rng(seed)
    flat_cum = np.cumsum(dd.ravel())
    flat_cum[-1] = 1.0
    cells = _inverse_cdf(flat_cum, rng.random(n))
    states, actions = np.unravel_index(cells, dd.shape)

    trans_cum = np.cumsum(mdp.transition, axis=2)
    row_cum = trans_cum[states, actions]
    next_states = (rng.random(n)[:, None] < row_cum).argmax(axis=1)

    init_cum = np.cumsum(mdp.init_dist)
    init_cum[-1] = 1.0
    init_states = _inverse_cdf(init_cum, rng.random(n0))

    return OfflineDataset(
        states=states,
        actions=actions,
        rewards=mdp.reward[states, actions],
        next_states=next_states,
        init_states=init_states,
        gamma=mdp.gamma,
        generating_dd=Occupancy(dd),
        seed=None if seed is None else int(seed),
    )


def exact_frequency_dataset(mdp: TabularMdp, data_dist, repeats: int = 1) -> OfflineDataset:
    """Deterministic dataset whose empirical frequencies equal data_dist exactly.

    Requires every covered cell's probability to be an integer multiple of the
    smallest covered probability, and a deterministic transition row at every
    covered cell (otherwise no finite sample reproduces the population law).
    Initial states require a deterministic mu0. Used for the infinite-data
    counterexample runs.
    """
    dd = data_dist.mass if isinstance(data_dist, Occupancy) else np.asarray(data_dist, dtype=float)
    pos = dd > 0.0
    base = dd[pos].min()
    counts = dd / base
    if not np.allclose(counts[pos], np.round(counts[pos]), atol=1e-9):
        raise ValueError("data distribution is not commensurable; no exact dataset exists")
    counts = np.round(counts).astype(int) * repeats
    states, actions, next_states = [], [], []
    for s in range(mdp.num_states):
        for a in range(mdp.num_actions):
            if counts[s, a] == 0:
                continue
            row = mdp.transition[s, a]
            if row.max() < 1.0 - 1e-12:
                raise ValueError(f"transition at ({s}, {a}) is stochastic; cannot be exact")
            sp = int(row.argmax())
            states += [s] * counts[s, a]
            actions += [a] * counts[s, a]
            next_states += [sp] * counts[s, a]
    if mdp.init_dist.max() < 1.0 - 1e-12:
        raise ValueError("initial distribution is stochastic; cannot be exact")
    init_states = np.full(max(1, repeats), int(mdp.init_dist.argmax()))
    states = np.array(states, dtype=int)
    actions = np.array(actions, dtype=int)
    return OfflineDataset(
        states=states,
        actions=actions,
        rewards=mdp.reward[states, actions],
        next_states=np.array(next_states, dtype=int),
        init_states=init_states,
        gamma=mdp.gamma,
        generating_dd=Occupancy(dd),
        seed=None,
    )
