"""Finite candidate classes for values, weights, and policies.

The estimator searches over explicit finite collections: a ValueClass of
state vectors, a WeightClass of nonnegative (s, a) matrices, and a
PolicyClass for the cloning stage. Builders here inject a known-good
anchor pair (taken from the exact solver) and surround it with seeded
distractors, either drawn uniformly over the bound box or perturbed off
the anchor at a chosen scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bounds import value_bound
from .mdp import Policy
from .objective import approximation_errors
from .oracle import RegularizedSolution
from .regularizers import Regularizer

_BOX_TOL = 1e-9


@dataclass(frozen=True)
class ValueClass:
    """Finite set of candidate state-value vectors inside a box.

    Every member satisfies lower <= v <= b_v entrywise (default box is
    [-b_v, b_v], so ||v||_inf <= b_v). `clipped` records which member
    indices were modified by the factory to land inside the box.
    """

    members: tuple
    b_v: float
    lower: float
    clipped: tuple = ()

    def __post_init__(self):
        if not self.members:
            raise ValueError("value class needs at least one member")
        if self.b_v <= 0 or self.lower >= self.b_v:
            raise ValueError("value box must have lower < b_v with b_v > 0")
        for i, v in enumerate(self.members):
            if v.ndim != 1:
                raise ValueError(f"member {i} is not a state vector")
            if v.min() < self.lower - _BOX_TOL or v.max() > self.b_v + _BOX_TOL:
                raise ValueError(f"member {i} leaves the box [{self.lower}, {self.b_v}]")

    def __len__(self):
        return len(self.members)

    def to_config(self) -> dict:
        return {
            "members": [v.tolist() for v in self.members],
            "b_v": self.b_v,
            "lower": self.lower,
            "clipped": list(self.clipped),
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "ValueClass":
        return cls(
            members=tuple(np.asarray(v, dtype=float) for v in cfg["members"]),
            b_v=float(cfg["b_v"]),
            lower=float(cfg["lower"]),
            clipped=tuple(cfg.get("clipped", ())),
        )


@dataclass(frozen=True)
class WeightClass:
    """Finite set of candidate weight matrices inside [0, b_w].

    When `floor` is set to (b_wl, pi_d), every member additionally keeps
    sum_a pi_d(a|s) w(s, a) >= b_wl at every state (the lower coverage
    constraint used by the capped variant).
    """

    members: tuple
    b_w: float
    floor: Optional[tuple] = None
    clipped: tuple = ()

    def __post_init__(self):
        if not self.members:
            raise ValueError("weight class needs at least one member")
        if self.b_w <= 0:
            raise ValueError("b_w must be positive")
        for i, w in enumerate(self.members):
            if w.ndim != 2:
                raise ValueError(f"member {i} is not an (s, a) matrix")
            if w.min() < -_BOX_TOL or w.max() > self.b_w + _BOX_TOL:
                raise ValueError(f"member {i} leaves the box [0, {self.b_w}]")
        if self.floor is not None:
            b_wl, pi_d = self.floor
            if b_wl < 0:
                raise ValueError("floor level must be nonnegative")
            for i, w in enumerate(self.members):
                mix = (pi_d.probs * w).sum(axis=1)
                if mix.min() < b_wl - 1e-8:
                    raise ValueError(
                        f"member {i} breaks the coverage floor at state {int(mix.argmin())}"
                    )

    def __len__(self):
        return len(self.members)

    def to_config(self) -> dict:
        cfg = {
            "members": [w.tolist() for w in self.members],
            "b_w": self.b_w,
            "clipped": list(self.clipped),
        }
        if self.floor is not None:
            cfg["floor"] = {"b_wl": self.floor[0], "pi_d": self.floor[1].probs.tolist()}
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "WeightClass":
        floor = None
        if cfg.get("floor") is not None:
            floor = (
                float(cfg["floor"]["b_wl"]),
                Policy(np.asarray(cfg["floor"]["pi_d"], dtype=float)),
            )
        return cls(
            members=tuple(np.asarray(w, dtype=float) for w in cfg["members"]),
            b_w=float(cfg["b_w"]),
            floor=floor,
            clipped=tuple(cfg.get("clipped", ())),
        )


@dataclass(frozen=True)
class PolicyClass:
    members: tuple

    def __post_init__(self):
        if not self.members:
            raise ValueError("policy class needs at least one member")

    def __len__(self):
        return len(self.members)

    def to_config(self) -> dict:
        return {"members": [p.probs.tolist() for p in self.members]}

    @classmethod
    def from_config(cls, cfg: dict) -> "PolicyClass":
        return cls(tuple(Policy(np.asarray(p, dtype=float)) for p in cfg["members"]))


def make_value_class(
    members: Sequence[np.ndarray],
    b_v: float,
    lower: Optional[float] = None,
    on_violation: str = "reject",
) -> ValueClass:
    """Validate members against the box, clipping when asked.

    on_violation="reject" raises on the first out-of-box member;
    "clip" projects offenders into the box and records their indices.
    """
    if on_violation not in ("reject", "clip"):
        raise ValueError("on_violation must be 'reject' or 'clip'")
    lo = -b_v if lower is None else lower
    kept, clipped = [], []
    for i, raw in enumerate(members):
        v = np.asarray(raw, dtype=float)
        inside = v.min() >= lo - _BOX_TOL and v.max() <= b_v + _BOX_TOL
        if not inside:
            if on_violation == "reject":
                raise ValueError(f"member {i} leaves the box [{lo}, {b_v}]")
            v = np.clip(v, lo, b_v)
            clipped.append(i)
        kept.append(v)
    return ValueClass(tuple(kept), float(b_v), float(lo), tuple(clipped))


def make_weight_class(
    members: Sequence[np.ndarray],
    b_w: float,
    floor: Optional[tuple] = None,
    on_violation: str = "reject",
) -> WeightClass:
    """Same enforcement policy as make_value_class for the box [0, b_w].

    The coverage floor is validated but never auto-repaired; repairing
    requires an anchor to blend toward (see build_constrained_classes).
    """
    if on_violation not in ("reject", "clip"):
        raise ValueError("on_violation must be 'reject' or 'clip'")
    kept, clipped = [], []
    for i, raw in enumerate(members):
        w = np.asarray(raw, dtype=float)
        inside = w.min() >= -_BOX_TOL and w.max() <= b_w + _BOX_TOL
        if not inside:
            if on_violation == "reject":
                raise ValueError(f"member {i} leaves the box [0, {b_w}]")
            w = np.clip(w, 0.0, b_w)
            clipped.append(i)
        kept.append(w)
    return WeightClass(tuple(kept), float(b_w), floor, tuple(clipped))


def _distractor_scales(num: int, scale) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(scale, dtype=float))
    if arr.size == 1:
        return np.full(num, float(arr[0]))
    if arr.size != num:
        raise ValueError(f"need one scale per distractor ({num}), got {arr.size}")
    return arr


def build_realizable(
    solution: RegularizedSolution,
    num_distractors: int,
    seed: int,
    reg: Regularizer,
    gamma: float,
    mode: str = "box",
    scale=1.0,
) -> tuple[ValueClass, WeightClass]:
    """Classes containing the exact pair (index 0) plus seeded distractors.

    Bounds come from the solution itself: b_w = max(1, ||w*||_inf) and b_v
    is the closed-form sup-norm bound at that b_w. Distractor modes:
    "box" draws uniformly over the bound box, "near" perturbs the anchor
    by scale * standard normal noise (clipped back in), "mixed" alternates.
    `scale` may be a single float or one value per distractor.
    """
    if num_distractors < 0:
        raise ValueError("num_distractors must be nonnegative")
    if mode not in ("box", "near", "mixed"):
        raise ValueError("mode must be 'box', 'near', or 'mixed'")
    v_star, w_star = solution.v_star, solution.w_star
    b_w = max(1.0, float(w_star.max()))
    b_v = value_bound(solution.alpha, reg.bounds(b_w)[1], gamma)
    scales = _distractor_scales(num_distractors, scale)
    rng = np.random.default_rng(seed)
    v_members, w_members = [v_star.copy()], [w_star.copy()]
    v_clipped, w_clipped = [], []
    for k in range(num_distractors):
        near = mode == "near" or (mode == "mixed" and k % 2 == 1)
        if near:
            v_raw = v_star + scales[k] * rng.standard_normal(v_star.shape)
            w_raw = w_star + scales[k] * rng.standard_normal(w_star.shape)
        else:
            v_raw = rng.uniform(-b_v, b_v, size=v_star.shape)
            w_raw = rng.uniform(0.0, b_w, size=w_star.shape)
        v = np.clip(v_raw, -b_v, b_v)
        w = np.clip(w_raw, 0.0, b_w)
        if not np.array_equal(v, v_raw):
            v_clipped.append(k + 1)
        if not np.array_equal(w, w_raw):
            w_clipped.append(k + 1)
        v_members.append(v)
        w_members.append(w)
    vc = ValueClass(tuple(v_members), b_v, -b_v, tuple(v_clipped))
    wc = WeightClass(tuple(w_members), b_w, None, tuple(w_clipped))
    return vc, wc


def build_constrained_classes(
    v_anchor: np.ndarray,
    w_anchor: np.ndarray,
    pi_d: Policy,
    b_w: float,
    b_wl: float,
    gamma: float,
    num_distractors: int,
    seed: int,
    mode: str = "box",
    scale: float = 1.0,
) -> tuple[ValueClass, WeightClass]:
    """Classes for the capped variant: value box [0, 1/(1-gamma)], floored weights.

    Distractors that land under the coverage floor are blended toward the
    anchor just enough to restore it (the floor is linear in the blend, and
    the box is convex, so the blend stays valid); blended or clipped draws
    are recorded in `clipped`.
    """
    if mode not in ("box", "near", "mixed"):
        raise ValueError("mode must be 'box', 'near', or 'mixed'")
    anchor_mix = (pi_d.probs * w_anchor).sum(axis=1)
    if anchor_mix.min() < b_wl - 1e-10:
        raise ValueError("anchor weight breaks the requested coverage floor")
    b_v = 1.0 / (1.0 - gamma)
    scales = _distractor_scales(num_distractors, scale)
    rng = np.random.default_rng(seed)
    v_members, w_members = [np.asarray(v_anchor, dtype=float)], [np.asarray(w_anchor, dtype=float)]
    v_clipped, w_clipped = [], []
    for k in range(num_distractors):
        near = mode == "near" or (mode == "mixed" and k % 2 == 1)
        if near:
            v_raw = v_anchor + scales[k] * rng.standard_normal(v_anchor.shape)
            w_raw = w_anchor + scales[k] * rng.standard_normal(w_anchor.shape)
        else:
            v_raw = rng.uniform(0.0, b_v, size=v_anchor.shape)
            w_raw = rng.uniform(0.0, b_w, size=w_anchor.shape)
        v = np.clip(v_raw, 0.0, b_v)
        w = np.clip(w_raw, 0.0, b_w)
        adjusted = not np.array_equal(w, w_raw)
        mix = (pi_d.probs * w).sum(axis=1)
        if mix.min() < b_wl:
            # blend w <- t w + (1-t) anchor with the largest feasible t
            t = 1.0
            for s in np.flatnonzero(mix < b_wl):
                denom = anchor_mix[s] - mix[s]
                if denom > 1e-15:
                    t = min(t, (anchor_mix[s] - b_wl) / denom)
            t = max(t, 0.0)
            w = t * w + (1.0 - t) * w_anchor
            adjusted = True
        if not np.array_equal(v, v_raw):
            v_clipped.append(k + 1)
        if adjusted:
            w_clipped.append(k + 1)
        v_members.append(v)
        w_members.append(w)
    vc = ValueClass(tuple(v_members), b_v, 0.0, tuple(v_clipped))
    wc = WeightClass(tuple(w_members), float(b_w), (float(b_wl), pi_d), tuple(w_clipped))
    return vc, wc


def build_misspecified(
    solution: RegularizedSolution,
    perturbation: float,
    mdp,
    data_dist,
    reg: Regularizer,
    gamma: float,
    num_distractors: int = 0,
    seed: int = 0,
) -> tuple[ValueClass, WeightClass, float, float]:
    """Classes whose best members sit a controlled distance off the exact pair.

    The anchor members are the exact pair shifted by the perturbation
    constant (values shifted everywhere, weights shifted up on every cell),
    so at perturbation 0 the classes are realizable. Box distractors pad
    the classes; the realized best-in-class errors are recomputed by
    enumeration and returned alongside the classes.
    """
    if perturbation < 0:
        raise ValueError("perturbation must be nonnegative")
    v_star, w_star = solution.v_star, solution.w_star
    b_w = max(1.0, float(w_star.max())) + perturbation
    b_v = value_bound(solution.alpha, reg.bounds(b_w)[1], gamma) + perturbation
    rng = np.random.default_rng(seed)
    v_members = [v_star + perturbation]
    w_members = [w_star + perturbation]
    for _ in range(num_distractors):
        v_members.append(rng.uniform(-b_v, b_v, size=v_star.shape))
        w_members.append(rng.uniform(0.0, b_w, size=w_star.shape))
    eps_rv, eps_rw = approximation_errors(mdp, data_dist, v_star, w_star, v_members, w_members)
    vc = ValueClass(tuple(v_members), b_v, -b_v)
    wc = WeightClass(tuple(w_members), b_w)
    return vc, wc, eps_rv, eps_rw


def witness_class(policies: PolicyClass) -> tuple:
    """Sign witnesses h for every ordered policy pair, deduplicated.

    h(s, a) is +1 where pi(a|s) > pi'(a|s), -1 where it is smaller, and +1
    on ties (ties contribute nothing to the witnessed distance, so any
    value attains the max; +1 keeps the set deterministic). At most
    |Pi|^2 distinct matrices come back, in first-seen order.
    """
    members = policies.members
    seen = {}
    for pi in members:
        for pi_prime in members:
            h = np.where(pi.probs >= pi_prime.probs, 1.0, -1.0)
            key = h.tobytes()
            if key not in seen:
                seen[key] = h
    return tuple(seen.values())
