"""End-to-end estimation pipelines driven by JSON-friendly configs.

A run goes: resolve the MDP and data distribution, solve the instance
exactly for reference quantities, build candidate classes around the
exact pair, draw the offline dataset, run the max-min estimator, extract
a policy, and evaluate everything in closed form on the MDP. Every
random choice is keyed by seeds carried in the config, so a config fully
determines the report.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .bounds import (
    bc_sample_term,
    make_bound_report,
    performance_gap_bound,
    residual_bound,
)
from .classes import (
    PolicyClass,
    ValueClass,
    WeightClass,
    build_constrained_classes,
    build_misspecified,
    build_realizable,
)
from .datasets import exact_frequency_dataset, generate_dataset
from .extraction import clone_policy, extract_policy, split_dataset
from .mdp import (
    Policy,
    TabularMdp,
    build_counterexample,
    build_mixing_mdp,
    exact_occupancy,
    policy_return,
    random_mdp,
    uniform_policy,
)
from .objective import (
    empirical_lagrangian_members,
    population_lagrangian_members,
    weighted_l2,
)
from .oracle import capped_unregularized_value, solve_regularized, solve_unregularized
from .regularizers import Regularizer
from .saddle import solve_exact, solve_inexact

PIPELINE_STAGES = (
    "config",
    "mdp",
    "data_dist",
    "oracle",
    "classes",
    "dataset",
    "saddle",
    "extraction",
    "evaluation",
)

_VARIANT_KINDS = ("plain", "inexact", "capped", "alpha_zero")
_CLASS_KINDS = ("realizable", "misspecified", "constrained", "explicit")


class PipelineError(RuntimeError):
    """Failure wrapper that names the pipeline stage it came from."""

    def __init__(self, stage: str, message: str):
        if stage not in PIPELINE_STAGES:
            raise ValueError(f"unknown stage {stage!r}")
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def _canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one estimation run.

    mdp / data_dist / reg / classes / variant are small dicts with a
    "kind" discriminator (see the resolver functions); bc, when present,
    configures the cloning stage. The config hash keys report rows.
    """

    mdp: dict
    data_dist: dict
    reg: dict
    alpha: float
    n: int
    n0: int
    seed: int
    classes: dict
    variant: dict = field(default_factory=lambda: {"kind": "plain"})
    dataset: dict = field(default_factory=lambda: {"kind": "sampled"})
    delta: float = 0.1
    bc: Optional[dict] = None
    w_order: Optional[tuple] = None

    def __post_init__(self):
        variant_kind = self.variant.get("kind")
        if variant_kind not in _VARIANT_KINDS:
            raise PipelineError("config", f"unknown variant kind {variant_kind!r}")
        class_kind = self.classes.get("kind")
        if class_kind not in _CLASS_KINDS:
            raise PipelineError("config", f"unknown classes kind {class_kind!r}")
        if self.dataset.get("kind") not in ("sampled", "exact_frequency"):
            raise PipelineError(
                "config", f"unknown dataset kind {self.dataset.get('kind')!r}"
            )
        if self.alpha < 0:
            raise PipelineError("config", "alpha must be nonnegative")
        if (self.alpha == 0) != (variant_kind == "alpha_zero"):
            raise PipelineError(
                "config", "alpha=0 exactly when the variant kind is 'alpha_zero'"
            )
        if variant_kind == "alpha_zero" and class_kind not in ("constrained", "explicit"):
            raise PipelineError(
                "config",
                "the alpha=0 variant needs floor/box constrained classes "
                "(kind 'constrained' or 'explicit' with a floor)",
            )
        if variant_kind == "capped" and self.data_dist.get("kind") not in (
            "uniform_policy",
            "policy",
        ):
            raise PipelineError(
                "config", "the capped variant needs a behavior-policy data distribution"
            )
        if variant_kind == "capped" and "cap" not in self.variant:
            raise PipelineError("config", "capped variant needs a 'cap' value")
        if variant_kind == "inexact":
            if "eps_ov" not in self.variant or "eps_ow" not in self.variant:
                raise PipelineError("config", "inexact variant needs eps_ov and eps_ow")
        if self.n < 1:
            raise PipelineError("config", "n must be at least 1")
        if self.n0 < 0:
            raise PipelineError("config", "n0 must be nonnegative")
        if not (0.0 < self.delta < 1.0):
            raise PipelineError("config", "delta must lie in (0, 1)")

    def to_dict(self) -> dict:
        payload = {
            "mdp": self.mdp,
            "data_dist": self.data_dist,
            "reg": self.reg,
            "alpha": self.alpha,
            "n": self.n,
            "n0": self.n0,
            "seed": self.seed,
            "classes": self.classes,
            "variant": self.variant,
            "dataset": self.dataset,
            "delta": self.delta,
        }
        if self.bc is not None:
            payload["bc"] = self.bc
        if self.w_order is not None:
            payload["w_order"] = list(self.w_order)
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        known = {
            "mdp",
            "data_dist",
            "reg",
            "alpha",
            "n",
            "n0",
            "seed",
            "classes",
            "variant",
            "dataset",
            "delta",
            "bc",
            "w_order",
        }
        unknown = set(payload) - known
        if unknown:
            raise PipelineError("config", f"unknown config keys {sorted(unknown)}")
        try:
            return cls(
                mdp=payload["mdp"],
                data_dist=payload["data_dist"],
                reg=payload["reg"],
                alpha=float(payload["alpha"]),
                n=int(payload["n"]),
                n0=int(payload["n0"]),
                seed=int(payload["seed"]),
                classes=payload["classes"],
                variant=payload.get("variant", {"kind": "plain"}),
                dataset=payload.get("dataset", {"kind": "sampled"}),
                delta=float(payload.get("delta", 0.1)),
                bc=payload.get("bc"),
                w_order=tuple(payload["w_order"]) if payload.get("w_order") else None,
            )
        except KeyError as err:
            raise PipelineError("config", f"missing config key {err.args[0]!r}") from err

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(_canonical_json(self.to_dict()).encode()).hexdigest()[:12]


def resolve_mdp(spec: dict) -> TabularMdp:
    """Instantiate the MDP named by a config dict."""
    kind = spec.get("kind")
    if kind == "random":
        return random_mdp(
            spec["num_states"],
            spec["num_actions"],
            spec["gamma"],
            seed=spec["seed"],
            transition_concentration=spec.get("transition_concentration", 0.4),
            init_uniform_mix=spec.get("init_uniform_mix", 0.1),
        )
    if kind == "mixing":
        return build_mixing_mdp(
            spec["num_states"],
            spec["num_actions"],
            spec["gamma"],
            seed=spec["seed"],
            mixing=spec.get("mixing", 0.5),
        )
    if kind == "counterexample":
        return build_counterexample(spec["gamma"], spec.get("instance", 1)).mdp
    if kind == "inline":
        body = {k: v for k, v in spec.items() if k != "kind"}
        return TabularMdp.from_dict(body)
    raise PipelineError("mdp", f"unknown mdp kind {kind!r}")


def resolve_data_dist(mdp: TabularMdp, spec: dict) -> tuple[np.ndarray, Policy]:
    """Data distribution mass and the behavior policy it defines.

    For explicit masses the behavior policy is the conditional action
    distribution with a uniform fallback on zero-mass states.
    """
    kind = spec.get("kind")
    if kind == "uniform_policy":
        pi_d = uniform_policy(mdp.num_states, mdp.num_actions)
        return exact_occupancy(mdp, pi_d).mass, pi_d
    if kind == "policy":
        pi_d = Policy(np.asarray(spec["probs"], dtype=float))
        return exact_occupancy(mdp, pi_d).mass, pi_d
    if kind == "explicit":
        mass = np.asarray(spec["mass"], dtype=float)
        if mass.shape != (mdp.num_states, mdp.num_actions):
            raise PipelineError("data_dist", "explicit mass has the wrong shape")
        if mass.min() < 0 or abs(mass.sum() - 1.0) > 1e-9:
            raise PipelineError("data_dist", "explicit mass must be a distribution")
        state = mass.sum(axis=1)
        probs = np.full_like(mass, 1.0 / mdp.num_actions)
        ok = state > 0
        probs[ok] = mass[ok] / state[ok, None]
        return mass, Policy(probs)
    if kind == "counterexample":
        bundle = build_counterexample(mdp.gamma)
        if bundle.mdp.num_states != mdp.num_states:
            raise PipelineError("data_dist", "counterexample data needs the counterexample mdp")
        mass = bundle.data_occupancy.mass
        state = mass.sum(axis=1)
        probs = np.full_like(mass, 1.0 / mdp.num_actions)
        ok = state > 0
        probs[ok] = mass[ok] / state[ok, None]
        return mass, Policy(probs)
    raise PipelineError("data_dist", f"unknown data_dist kind {kind!r}")


@dataclass(frozen=True)
class ReferenceSolutions:
    """Exact quantities the run is scored against.

    w_ref is None only transiently, when no ratio anchor exists and the
    run supplies explicit classes; it is then patched to class member 0.
    """

    w_ref: Optional[np.ndarray]  # target weight the class anchors on
    v_ref: np.ndarray
    pi_ref: Policy
    d_ref_state: np.ndarray  # state marginal weighting the policy distance
    j_ref: float  # return the estimator competes with
    j_star_alpha: float
    j_star_zero: float
    kkt_residual: float


def _alpha_zero_anchor(mdp: TabularMdp, dd: np.ndarray):
    """Exact ratio d*_0 / d^D, or None where the optimum leaves the support."""
    unreg = solve_unregularized(mdp)
    if np.any((dd <= 0) & (unreg.d_star.mass > 1e-12)):
        return unreg, None
    w0 = np.zeros_like(dd)
    pos = dd > 0
    w0[pos] = unreg.d_star.mass[pos] / dd[pos]
    return unreg, w0


def _resolve_references(mdp, dd, reg, alpha, variant, classes_kind) -> ReferenceSolutions:
    unreg = solve_unregularized(mdp)
    j_zero = float(mdp.reward.flatten() @ unreg.d_star.mass.flatten())
    kind = variant["kind"]
    if kind == "alpha_zero":
        _, w0 = _alpha_zero_anchor(mdp, dd)
        if w0 is None and classes_kind != "explicit":
            raise PipelineError(
                "oracle",
                "the optimal occupancy leaves the data support, so no ratio "
                "anchor exists; provide explicit classes",
            )
        return ReferenceSolutions(
            w_ref=w0,
            v_ref=unreg.v_star,
            pi_ref=unreg.pi_star,
            d_ref_state=unreg.d_star.state_marginal,
            j_ref=j_zero,
            j_star_alpha=float("nan"),
            j_star_zero=j_zero,
            kkt_residual=0.0,
        )
    cap = variant.get("cap") if kind == "capped" else None
    sol = solve_regularized(mdp, dd, reg, alpha, cap=cap)
    j_alpha = float(mdp.reward.flatten() @ sol.d_star.mass.flatten())
    if kind == "capped":
        j_ref, _ = capped_unregularized_value(mdp, dd, cap)
    else:
        j_ref = j_alpha
    return ReferenceSolutions(
        w_ref=sol.w_star,
        v_ref=sol.v_star,
        pi_ref=sol.pi_star,
        d_ref_state=sol.d_star.state_marginal,
        j_ref=j_ref,
        j_star_alpha=j_alpha,
        j_star_zero=j_zero,
        kkt_residual=sol.kkt_residual,
    )


def _build_classes(cfg: ExperimentConfig, mdp, dd, reg, refs):
    kind = cfg.classes["kind"]
    spec = cfg.classes
    eps_rv = eps_rw = 0.0
    if kind == "explicit":
        vc = ValueClass.from_config(spec["value_class"])
        wc = WeightClass.from_config(spec["weight_class"])
        if cfg.variant["kind"] == "alpha_zero" and wc.floor is None:
            raise PipelineError("classes", "alpha=0 explicit classes need a floor")
        return vc, wc, eps_rv, eps_rw
    if kind == "misspecified":
        sol = solve_regularized(mdp, dd, reg, cfg.alpha, cap=cfg.variant.get("cap"))
        vc, wc, eps_rv, eps_rw = build_misspecified(
            sol,
            spec["perturbation"],
            mdp,
            dd,
            reg=reg,
            gamma=mdp.gamma,
            num_distractors=spec.get("num_distractors", 0),
            seed=spec.get("seed", 0),
        )
        return vc, wc, eps_rv, eps_rw
    if kind == "constrained":
        pi_d_probs = spec.get("pi_d")
        if cfg.variant["kind"] == "alpha_zero":
            _, anchor_w = _alpha_zero_anchor(mdp, dd)
            if anchor_w is None:
                raise PipelineError(
                    "classes",
                    "constrained alpha=0 classes need the optimal occupancy "
                    "inside the data support",
                )
            anchor_v = np.clip(refs.v_ref, 0.0, 1.0 / (1.0 - mdp.gamma))
        else:
            anchor_w, anchor_v = refs.w_ref, refs.v_ref
        pi_d = (
            Policy(np.asarray(pi_d_probs, dtype=float))
            if pi_d_probs is not None
            else _conditional_policy(dd, mdp.num_actions)
        )
        mix = (pi_d.probs * anchor_w).sum(axis=1)
        b_wl = spec.get("b_wl", float(mix.min()))
        if cfg.variant["kind"] == "capped":
            b_w = spec.get("b_w", float(cfg.variant["cap"]))
        else:
            b_w = spec.get("b_w", max(1.0, float(anchor_w.max())))
        vc, wc = build_constrained_classes(
            anchor_v,
            anchor_w,
            pi_d,
            b_w=b_w,
            b_wl=b_wl,
            gamma=mdp.gamma,
            num_distractors=spec.get("num_distractors", 8),
            seed=spec.get("seed", 0),
            mode=spec.get("mode", "box"),
            scale=spec.get("scale", 1.0),
        )
        return vc, wc, eps_rv, eps_rw
    # realizable
    sol = solve_regularized(mdp, dd, reg, cfg.alpha, cap=cfg.variant.get("cap"))
    vc, wc = build_realizable(
        sol,
        spec.get("num_distractors", 8),
        seed=spec.get("seed", 0),
        reg=reg,
        gamma=mdp.gamma,
        mode=spec.get("mode", "box"),
        scale=spec.get("scale", 1.0),
    )
    return vc, wc, eps_rv, eps_rw


def _conditional_policy(dd: np.ndarray, num_actions: int) -> Policy:
    state = dd.sum(axis=1)
    probs = np.full_like(dd, 1.0 / num_actions)
    ok = state > 0
    probs[ok] = dd[ok] / state[ok, None]
    return Policy(probs)


CSV_HEADER = (
    "config_hash",
    "seed",
    "variant",
    "alpha",
    "n",
    "n0",
    "n2",
    "j_hat",
    "j_star_alpha",
    "j_star_zero",
    "j_ref",
    "gap_ref",
    "pi_l1",
    "pi_l1_bc",
    "w_dev",
    "eps_hat",
    "eps_stat",
    "rhs_perf_bound",
    "rhs_realized",
    "rhs_capped",
    "bc_sample_term",
    "eps_rv",
    "eps_rw",
    "eps_ov",
    "eps_ow",
    "w_index",
    "v_index",
    "w_max",
    "b_v",
    "b_w",
    "kkt_residual",
)


@dataclass(frozen=True)
class RunReport:
    """Everything a single run produced, in closed form where possible."""

    config_hash: str
    seed: int
    variant: str
    alpha: float
    n: int
    n0: int
    n2: Optional[int]
    j_hat: float
    j_star_alpha: float
    j_star_zero: float
    j_ref: float
    gap_ref: float
    pi_l1: float
    pi_l1_bc: Optional[float]
    w_dev: float
    eps_hat: float
    eps_stat: float
    rhs_perf_bound: float
    rhs_realized: float
    rhs_capped: Optional[float]
    bc_sample_term: Optional[float]
    eps_rv: float
    eps_rw: float
    eps_ov: float
    eps_ow: float
    w_index: int
    v_index: int
    w_max: float
    b_v: float
    b_w: float
    kkt_residual: float

    def to_row(self) -> tuple:
        return tuple(getattr(self, name) for name in CSV_HEADER)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in CSV_HEADER}


def _evaluate(cfg, mdp, dd, reg, refs, vc, wc, sol_hat, pi_hat, extra):
    j_hat = policy_return(mdp, pi_hat)
    pi_l1 = float(
        refs.d_ref_state @ np.abs(refs.pi_ref.probs - pi_hat.probs).sum(axis=1)
    )
    w_dev = weighted_l2(sol_hat.w_hat, refs.w_ref, dd)
    emp = extra["emp_matrix"]
    pop = population_lagrangian_members(mdp, dd, reg, cfg.alpha, vc.members, wc.members)
    eps_hat = float(np.abs(emp - pop).max())
    n_eff = extra.get("n_eff", cfg.n)
    b_w = wc.b_w
    b_v = vc.b_v
    report = make_bound_report(
        n=extra.get("n_fit", n_eff),
        n0=max(cfg.n0, 1),
        alpha=cfg.alpha,
        m_f=reg.m_f,
        gamma=mdp.gamma,
        b_w=b_w,
        b_v=b_v,
        b_f=reg.bounds(b_w)[0],
        b_e=residual_bound(b_v, mdp.gamma),
        sizes=(len(vc), len(wc)),
        delta=cfg.delta,
        n2=extra.get("n2"),
        num_policies=extra.get("num_policies"),
    )
    if cfg.alpha > 0:
        rhs_realized = performance_gap_bound(eps_hat, cfg.alpha, reg.m_f, mdp.gamma)
    else:
        rhs_realized = float("inf")
    rhs_capped = None
    if cfg.variant["kind"] == "capped":
        rhs_capped = 2.0 * cfg.alpha * reg.bounds(b_w)[0] + rhs_realized
    return RunReport(
        config_hash=cfg.config_hash,
        seed=cfg.seed,
        variant=cfg.variant["kind"],
        alpha=cfg.alpha,
        n=n_eff,
        n0=cfg.n0,
        n2=extra.get("n2"),
        j_hat=j_hat,
        j_star_alpha=refs.j_star_alpha,
        j_star_zero=refs.j_star_zero,
        j_ref=refs.j_ref,
        gap_ref=refs.j_ref - j_hat,
        pi_l1=pi_l1,
        pi_l1_bc=extra.get("pi_l1_bc"),
        w_dev=w_dev,
        eps_hat=eps_hat,
        eps_stat=report.eps_stat,
        rhs_perf_bound=report.rhs_perf_bound,
        rhs_realized=rhs_realized,
        rhs_capped=rhs_capped,
        bc_sample_term=extra.get("bc_sample_term"),
        eps_rv=extra.get("eps_rv", 0.0),
        eps_rw=extra.get("eps_rw", 0.0),
        eps_ov=sol_hat.eps_ov,
        eps_ow=sol_hat.eps_ow,
        w_index=sol_hat.w_index,
        v_index=sol_hat.v_index,
        w_max=float(np.asarray(sol_hat.w_hat).max()),
        b_v=b_v,
        b_w=b_w,
        kkt_residual=refs.kkt_residual,
    )


def _staged(stage):
    """Decorator-free stage wrapper: re-raise anything as a PipelineError."""

    class _Ctx:
        def __init__(self, name):
            self.name = name

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, PipelineError):
                raise PipelineError(self.name, str(exc)) from exc
            return False

    return _Ctx(stage)


def _make_dataset(cfg: ExperimentConfig, mdp, dd):
    if cfg.dataset["kind"] == "exact_frequency":
        return exact_frequency_dataset(mdp, dd, repeats=cfg.dataset.get("repeats", 1))
    return generate_dataset(mdp, dd, cfg.n, cfg.n0, cfg.seed)


def run_pro_rl(cfg: ExperimentConfig) -> RunReport:
    """Full pipeline with direct policy extraction."""
    with _staged("mdp"):
        mdp = resolve_mdp(cfg.mdp)
    with _staged("data_dist"):
        dd, pi_d = resolve_data_dist(mdp, cfg.data_dist)
    reg = Regularizer.from_config(cfg.reg)
    with _staged("oracle"):
        refs = _resolve_references(mdp, dd, reg, cfg.alpha, cfg.variant, cfg.classes["kind"])
    with _staged("classes"):
        vc, wc, eps_rv, eps_rw = _build_classes(cfg, mdp, dd, reg, refs)
        if refs.w_ref is None:
            refs = replace(refs, w_ref=wc.members[0])
    with _staged("dataset"):
        data = _make_dataset(cfg, mdp, dd)
    with _staged("saddle"):
        emp = empirical_lagrangian_members(data, reg, cfg.alpha, vc.members, wc.members)
        if cfg.variant["kind"] == "inexact":
            sol_hat = solve_inexact(
                data,
                (vc, wc),
                reg,
                cfg.alpha,
                eps_ov=cfg.variant["eps_ov"],
                eps_ow=cfg.variant["eps_ow"],
                seed=cfg.seed + 1,
            )
        else:
            sol_hat = solve_exact(data, (vc, wc), reg, cfg.alpha, w_order=cfg.w_order)
    with _staged("extraction"):
        pi_hat = extract_policy(sol_hat.w_hat, pi_d).policy
    with _staged("evaluation"):
        return _evaluate(
            cfg,
            mdp,
            dd,
            reg,
            refs,
            vc,
            wc,
            sol_hat,
            pi_hat,
            {"emp_matrix": emp, "eps_rv": eps_rv, "eps_rw": eps_rw, "n_eff": data.n},
        )


def _resolve_policy_class(spec: dict, pi_ref: Policy, num_actions: int) -> PolicyClass:
    kind = spec.get("kind", "target_plus_mixes")
    if kind == "explicit":
        return PolicyClass(
            tuple(Policy(np.asarray(p, dtype=float)) for p in spec["probs"])
        )
    if kind == "target_plus_mixes":
        mixes = spec.get("mix_grid", [0.25, 0.5, 1.0])
        members = [pi_ref]
        for name in spec.get("directions", ["uniform"]):
            toward = _mix_direction(name, pi_ref, num_actions)
            for u in mixes:
                members.append(Policy((1.0 - u) * pi_ref.probs + u * toward))
        return PolicyClass(tuple(members))
    raise PipelineError("config", f"unknown policy class kind {kind!r}")


def _mix_direction(name: str, pi_ref: Policy, num_actions: int) -> np.ndarray:
    """Target distribution for one family of mixtures away from pi_ref.

    "uniform" heads toward the uniform policy, "rollK" cyclically shifts
    the reference probabilities by K action slots, and "complement"
    reweights toward the actions the reference avoids.
    """
    if name == "uniform":
        return np.full_like(pi_ref.probs, 1.0 / num_actions)
    if name.startswith("roll"):
        return np.roll(pi_ref.probs, int(name[4:]), axis=1)
    if name == "complement":
        raw = 1.0 - pi_ref.probs
        return raw / raw.sum(axis=1, keepdims=True)
    raise PipelineError("config", f"unknown mix direction {name!r}")


def run_pro_rl_bc(cfg: ExperimentConfig) -> RunReport:
    """Pipeline variant that clones the policy from held-out data.

    The dataset splits into a fitting part and a cloning part; the
    estimator runs on the first, the witnessed-disagreement cloner on the
    second. The report carries both the direct-extraction distance and
    the cloned one, so paired comparisons need a single run.
    """
    if cfg.bc is None:
        raise PipelineError("config", "bc settings are required for the cloning pipeline")
    with _staged("mdp"):
        mdp = resolve_mdp(cfg.mdp)
    with _staged("data_dist"):
        dd, pi_d = resolve_data_dist(mdp, cfg.data_dist)
    reg = Regularizer.from_config(cfg.reg)
    with _staged("oracle"):
        refs = _resolve_references(mdp, dd, reg, cfg.alpha, cfg.variant, cfg.classes["kind"])
    with _staged("classes"):
        vc, wc, eps_rv, eps_rw = _build_classes(cfg, mdp, dd, reg, refs)
        if refs.w_ref is None:
            refs = replace(refs, w_ref=wc.members[0])
    with _staged("dataset"):
        data = _make_dataset(cfg, mdp, dd)
        n1 = int(cfg.bc.get("n1", round(0.9 * data.n)))
        d1, d2 = split_dataset(data, n1)
        if d2.n == 0:
            raise PipelineError("dataset", "the cloning split is empty; lower n1")
    with _staged("saddle"):
        emp = empirical_lagrangian_members(d1, reg, cfg.alpha, vc.members, wc.members)
        sol_hat = solve_exact(d1, (vc, wc), reg, cfg.alpha, w_order=cfg.w_order)
    with _staged("extraction"):
        pi_hat = extract_policy(sol_hat.w_hat, pi_d).policy
        policies = _resolve_policy_class(cfg.bc, refs.pi_ref, mdp.num_actions)
        pi_bar = clone_policy(sol_hat.w_hat, d2, policies)
    with _staged("evaluation"):
        pi_l1_bc = float(
            refs.d_ref_state @ np.abs(refs.pi_ref.probs - pi_bar.probs).sum(axis=1)
        )
        term = bc_sample_term(wc.b_w, len(policies), cfg.delta, d2.n)
        return _evaluate(
            cfg,
            mdp,
            dd,
            reg,
            refs,
            vc,
            wc,
            sol_hat,
            pi_hat,
            {
                "emp_matrix": emp,
                "eps_rv": eps_rv,
                "eps_rw": eps_rw,
                "n_eff": data.n,
                "n_fit": d1.n,
                "n2": d2.n,
                "num_policies": len(policies),
                "pi_l1_bc": pi_l1_bc,
                "bc_sample_term": term,
            },
        )
