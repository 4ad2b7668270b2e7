"""Policy extraction from estimated weights.

Two routes: direct reweighting of a known behavior policy, and a
behavior-cloning stage for when the behavior policy is unknown. The
cloning stage fits a policy from a finite class by minimizing the worst
witnessed disagreement with the weighted data, which needs no density
estimate of the behavior policy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .classes import PolicyClass, witness_class
from .datasets import OfflineDataset
from .mdp import Policy


@dataclass(frozen=True)
class ExtractionResult:
    """Extracted policy plus the states where the weighted mass vanished.

    Rows at flagged states fall back to uniform; every row sums to one.
    """

    policy: Policy
    zero_mass_states: tuple

    def to_dict(self) -> dict:
        return {
            "policy": self.policy.probs.tolist(),
            "zero_mass_states": list(self.zero_mass_states),
        }


def extract_policy(w, pi_d: Policy, threshold: float = 1e-12) -> ExtractionResult:
    """Reweight the behavior policy: pi(a|s) proportional to w(s,a) pi_d(a|s).

    States whose normalizer falls at or below the threshold get a uniform
    row and are reported in zero_mass_states.
    """
    w = np.asarray(w, dtype=float)
    if w.min() < 0:
        raise ValueError("weights must be nonnegative")
    raw = w * pi_d.probs
    mass = raw.sum(axis=1)
    flagged = np.flatnonzero(mass <= threshold)
    probs = np.empty_like(raw)
    ok = mass > threshold
    probs[ok] = raw[ok] / mass[ok, None]
    probs[~ok] = 1.0 / w.shape[1]
    return ExtractionResult(policy=Policy(probs), zero_mass_states=tuple(int(s) for s in flagged))


def split_dataset(data: OfflineDataset, n1: int) -> tuple[OfflineDataset, OfflineDataset]:
    """Prefix/suffix split: the first part keeps the initial-state samples.

    The draws are exchangeable, so a deterministic split preserves their
    distribution. The second part carries no initial-state samples (the
    cloning stage never looks at them).
    """
    if n1 < 0 or n1 > data.n:
        raise ValueError(f"n1 must lie in [0, {data.n}]")
    return data.take(0, n1, keep_inits=True), data.take(n1, data.n, keep_inits=False)


def bc_objective_matrix(
    w_hat,
    data: OfflineDataset,
    policies: PolicyClass,
    witnesses: Optional[Sequence[np.ndarray]] = None,
) -> np.ndarray:
    """Empirical cloning objective for every (policy, witness) pair.

    Entry [i, j] averages w_hat(s, a) * (h_j^{pi_i}(s) - h_j(s, a)) over the
    dataset transitions, where h^pi(s) is the policy's expected witness
    value at s. The witness set defaults to the one generated from the
    policy class itself.
    """
    if data.n == 0:
        raise ValueError("cloning needs a nonempty dataset (n=0)")
    w_hat = np.asarray(w_hat, dtype=float)
    hs = witness_class(policies) if witnesses is None else tuple(witnesses)
    weights = w_hat[data.states, data.actions]  # (n,)
    h_stack = np.stack(hs)  # (H, S, A)
    h_at_sa = h_stack[:, data.states, data.actions]  # (H, n)
    out = np.empty((len(policies), len(hs)))
    for i, pi in enumerate(policies.members):
        h_pi = np.einsum("hsa,sa->hs", h_stack, pi.probs)  # (H, S)
        diffs = h_pi[:, data.states] - h_at_sa  # (H, n)
        out[i] = (diffs * weights[None, :]).mean(axis=1)
    return out


def clone_policy(
    w_hat,
    data: OfflineDataset,
    policies: PolicyClass,
    witnesses: Optional[Sequence[np.ndarray]] = None,
) -> Policy:
    """Pick the class policy with the smallest worst-case witnessed disagreement.

    Exact enumeration over the policy class and the witness set; the inner
    maximum runs over witnesses, the outer minimum over policies, and ties
    go to the lowest index at both levels.
    """
    scores = bc_objective_matrix(w_hat, data, policies, witnesses).max(axis=1)
    return policies.members[int(scores.argmin())]
