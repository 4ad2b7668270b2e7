"""Exact solutions of the regularized occupancy problem, plus diagnostics.

The regularized problem (for a data distribution d^D with support cells c):

    max_d  r.d - alpha * sum_c d^D_c f(d_c / d^D_c)
    s.t.   flow constraints  B^T d = (1-gamma) mu0,   0 <= d_c <= cap * d^D_c

two independent solution paths are provided:

  "saddle"  extragradient on the Lagrangian saddle point followed by a damped
            semismooth Newton refinement of the dual optimality map; the
            weight is always the clipped stationarity form of the dual
            variable, so the returned pair is machine-accurate on both the
            flow constraints and the stationarity conditions.

  "qp"      the primal quadratic program by ADMM (alternating exact
            minimization of the augmented Lagrangian: an equality-constrained
            QP step and a box projection step) with an active-set polish;
            shares no iteration logic with the saddle path.

Both paths run a phase-1 feasibility check first and raise FlowInfeasibleError
naming the most violated state when the covered flow polytope is empty.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import linprog

from .mdp import Occupancy, Policy, TabularMdp, exact_occupancy, policy_return
from .regularizers import Regularizer

_MASS_EPS = 1e-12


class FlowInfeasibleError(ValueError):
    """The flow polytope restricted to the data support is empty."""

    def __init__(self, state: int, violation: float):
        self.state = state
        self.violation = violation
        super().__init__(
            f"no occupancy supported on the data distribution satisfies the flow "
            f"constraints; worst violation {violation:.3e} at state {state}"
        )


class SolverConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class _Support:
    """Dense operators restricted to the covered state-action cells."""

    states: np.ndarray  # (m,) cell states
    actions: np.ndarray  # (m,) cell actions
    weights: np.ndarray  # (m,) d^D mass per cell
    b_mat: np.ndarray  # (m, S): row_c = 1_{s_c} - gamma P(s_c, a_c, .)
    rewards: np.ndarray  # (m,)
    num_states: int
    num_actions: int

    @property
    def num_cells(self) -> int:
        return self.states.shape[0]

    def expand(self, cell_values: np.ndarray) -> np.ndarray:
        """Scatter per-cell values back to a dense (S, A) matrix."""
        out = np.zeros((self.num_states, self.num_actions))
        out[self.states, self.actions] = cell_values
        return out


def _build_support(mdp: TabularMdp, data_mass: np.ndarray) -> _Support:
    states, actions = np.nonzero(data_mass > 0.0)
    b_mat = np.zeros((states.shape[0], mdp.num_states))
    b_mat[np.arange(states.shape[0]), states] = 1.0
    b_mat -= mdp.gamma * mdp.transition[states, actions]
    return _Support(
        states=states,
        actions=actions,
        weights=data_mass[states, actions],
        b_mat=b_mat,
        rewards=mdp.reward[states, actions],
        num_states=mdp.num_states,
        num_actions=mdp.num_actions,
    )


@dataclass(frozen=True, eq=False)
class RegularizedSolution:
    """Saddle point of the regularized problem with its optimality certificate."""

    v_star: np.ndarray
    w_star: np.ndarray
    d_star: Occupancy
    pi_star: Policy
    alpha: float
    kkt_residual: float
    cap: Optional[float]
    clip_residual: float
    flow_residual: float
    zero_occupancy_states: tuple[int, ...]
    method: str
    iterations: int

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "v_star": self.v_star.tolist(),
            "w_star": self.w_star.tolist(),
            "pi_star": self.pi_star.probs.tolist(),
            "kkt_residual": self.kkt_residual,
        }


class UnregularizedSolution(NamedTuple):
    v_star: np.ndarray
    pi_star: Policy
    d_star: Occupancy


class ConcentrabilityResult(NamedTuple):
    b_w: float
    feasible: bool


@dataclass(frozen=True)
class StrongConcentrability:
    b_wu: float
    b_wl: float
    holds: bool
    method: str  # "enumerated" or "sampled"


def _data_mass(data_dist) -> np.ndarray:
    dd = data_dist.mass if isinstance(data_dist, Occupancy) else np.asarray(data_dist, dtype=float)
    total = dd.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"data distribution must sum to 1, got {total}")
    if dd.min() < 0.0:
        raise ValueError("data distribution must be nonnegative")
    return dd


def _check_flow_feasible(sup: _Support, mdp: TabularMdp, upper: np.ndarray) -> None:
    """Phase-1 linear program; raises FlowInfeasibleError when empty."""
    m, s = sup.num_cells, sup.num_states
    # variables: [d (m), slack+ (S), slack- (S)]
    c = np.concatenate([np.zeros(m), np.ones(2 * s)])
    a_eq = np.hstack([sup.b_mat.T, np.eye(s), -np.eye(s)])
    b_eq = (1.0 - mdp.gamma) * mdp.init_dist
    bounds = [(0.0, float(u)) for u in upper] + [(0.0, None)] * (2 * s)
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if not res.success:
        raise SolverConvergenceError(f"phase-1 feasibility LP failed: {res.message}")
    if res.fun > 1e-9:
        slack = res.x[m : m + s] + res.x[m + s :]
        state = int(np.argmax(slack))
        raise FlowInfeasibleError(state, float(slack[state]))


def _kkt_residuals(
    sup: _Support,
    mdp: TabularMdp,
    reg: Regularizer,
    alpha: float,
    v: np.ndarray,
    w_cells: np.ndarray,
    cap_eff: float,
) -> tuple[float, float]:
    """(clip-form deviation, flow violation) for a candidate pair."""
    e = sup.rewards - sup.b_mat @ v
    w_form = np.clip(reg.deriv_inverse(e / alpha), 0.0, cap_eff)
    clip_dev = float(np.abs(w_cells - w_form).max()) if sup.num_cells else 0.0
    flow = sup.b_mat.T @ (sup.weights * w_cells) - (1.0 - mdp.gamma) * mdp.init_dist
    return clip_dev, float(np.abs(flow).max())


def _extragradient(sup, mdp, reg, alpha, cap_eff, budget, switch_tol):
    """Population extragradient with d^D-weighted ascent geometry.

    Step sizes shrink as 1/sqrt(k) for the first stretch and stay fixed
    afterwards. Returns the iterate when the joint KKT residual falls under
    switch_tol or the budget runs out.
    """
    mu_term = (1.0 - mdp.gamma) * mdp.init_dist
    coupling = np.linalg.norm(sup.b_mat * sup.weights[:, None], 2)
    eta0 = 1.0 / (2.0 * coupling + alpha * reg.m_f + 1.0)
    eta_floor = eta0 / 10.0
    v = np.zeros(sup.num_states)
    w = np.ones(sup.num_cells)

    def grads(v_pt, w_pt):
        e = sup.rewards - sup.b_mat @ v_pt
        g_v = mu_term - sup.b_mat.T @ (sup.weights * w_pt)  # gradient wrt v
        g_w = e - alpha * reg.deriv(w_pt)  # d^D-preconditioned gradient wrt w
        return g_v, g_w

    iterations = 0
    for k in range(budget):
        iterations = k + 1
        eta = max(eta0 / np.sqrt(1.0 + k / 50.0), eta_floor)
        g_v, g_w = grads(v, w)
        v_half = v - eta * g_v
        w_half = np.clip(w + eta * g_w, 0.0, cap_eff)
        g_v2, g_w2 = grads(v_half, w_half)
        v = v - eta * g_v2
        w = np.clip(w + eta * g_w2, 0.0, cap_eff)
        if k % 25 == 0:
            clip_dev, flow_dev = _kkt_residuals(sup, mdp, reg, alpha, v, w, cap_eff)
            if max(clip_dev, flow_dev) < switch_tol:
                break
    return v, w, iterations


def _newton_refine(sup, mdp, reg, alpha, cap_eff, v0, tol, max_iter=200):
    """Damped semismooth Newton on the dual map Phi(v) = B^T(d^D w(v)) - (1-g)mu0."""
    mu_term = (1.0 - mdp.gamma) * mdp.init_dist
    scale = alpha * reg.m_f

    def w_of(v):
        e = sup.rewards - sup.b_mat @ v
        return np.clip(reg.deriv_inverse(e / alpha), 0.0, cap_eff), e

    def phi_of(w_cells):
        return sup.b_mat.T @ (sup.weights * w_cells) - mu_term

    v = v0.copy()
    w, e = w_of(v)
    phi = phi_of(w)
    best_norm = np.abs(phi).max()
    iterations = 0
    ridge = 0.0
    for it in range(max_iter):
        iterations = it + 1
        if best_norm <= tol:
            break
        interior = (e > 0.0) & (e < scale * cap_eff)
        diag = sup.weights * interior
        hess = (sup.b_mat.T * diag) @ sup.b_mat / scale
        step = None
        lam = ridge
        for _ in range(8):
            try:
                step = np.linalg.solve(hess + lam * np.eye(sup.num_states), phi)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and np.all(np.isfinite(step)):
                break
            lam = max(lam * 10.0, 1e-12 * (1.0 + np.trace(hess)))
        if step is None or not np.all(np.isfinite(step)):
            break
        improved = False
        t = 1.0
        for _ in range(40):
            v_try = v + t * step
            w_try, e_try = w_of(v_try)
            phi_try = phi_of(w_try)
            norm_try = np.abs(phi_try).max()
            if norm_try < best_norm * (1.0 - 1e-4 * t) or norm_try < tol:
                v, w, e, phi, best_norm = v_try, w_try, e_try, phi_try, norm_try
                improved = True
                break
            t *= 0.5
        if improved:
            ridge = 0.0
        else:
            # flat direction (degenerate active set): bump the ridge and retry
            ridge = max(ridge * 10.0, 1e-10 * (1.0 + np.trace(hess)))
            if ridge > 1e6:
                break
    return v, w, iterations


def _admm_qp(q_diag, lin, a_mat, b_vec, upper, rho=None, tol=1e-10, max_iter=200_000):
    """min 1/2 x^T diag(q) x - lin^T x  s.t.  a_mat x = b_vec, 0 <= x <= upper.

    Splitting: x carries the equality constraints (solved exactly through a
    cached KKT factorization), z carries the box. Returns (x, z, nu, iters,
    converged) where nu are the equality multipliers of the final x-step.
    """
    m = q_diag.shape[0]
    s = a_mat.shape[0]
    if rho is None:
        rho = float(np.median(q_diag)) + 1e-8
    kkt = np.zeros((m + s, m + s))
    kkt[:m, :m] = np.diag(q_diag + rho)
    kkt[:m, m:] = a_mat.T
    kkt[m:, :m] = a_mat
    kkt[m:, m:] = -1e-10 * np.eye(s)  # keeps the factorization nonsingular
    lu, piv = scipy.linalg.lu_factor(kkt)
    rhs = np.zeros(m + s)
    rhs[m:] = b_vec
    z = np.clip(lin / np.maximum(q_diag, 1e-12), 0.0, upper)
    y = np.zeros(m)
    x = z.copy()
    nu = np.zeros(s)
    converged = False
    iterations = 0
    for it in range(max_iter):
        iterations = it + 1
        rhs[:m] = lin + rho * (z - y)
        sol = scipy.linalg.lu_solve((lu, piv), rhs)
        x, nu = sol[:m], sol[m:]
        z_old = z
        z = np.clip(x + y, 0.0, upper)
        y = y + x - z
        prim = np.abs(x - z).max() if m else 0.0
        dual = rho * np.abs(z - z_old).max() if m else 0.0
        if prim < tol and dual < tol:
            converged = True
            break
    return x, z, nu, iterations, converged


def _active_set_polish(q_diag, lin, a_mat, b_vec, upper, x, band=1e-7):
    """Re-solve the equality-constrained QP with the near-active box rows fixed.

    Returns (x_polished, nu) or None when the guessed active set turns out to
    be inconsistent (wrong signs or out-of-bound free variables).
    """
    m = q_diag.shape[0]
    s = a_mat.shape[0]
    scale = max(float(upper[np.isfinite(upper)].max(initial=1.0)), 1.0)
    at_lo = x <= band * scale
    at_hi = np.isfinite(upper) & (x >= upper - band * scale)
    free = ~(at_lo | at_hi)
    x_fix = np.where(at_hi, upper, 0.0)
    n_free = int(free.sum())
    kkt = np.zeros((n_free + s, n_free + s))
    kkt[:n_free, :n_free] = np.diag(q_diag[free])
    kkt[:n_free, n_free:] = a_mat[:, free].T
    kkt[n_free:, :n_free] = a_mat[:, free]
    rhs = np.concatenate([lin[free], b_vec - a_mat[:, ~free] @ x_fix[~free]])
    sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    x_new = x_fix.copy()
    x_new[free] = sol[:n_free]
    nu = sol[n_free:]
    # verify the guess: free vars inside the box, fixed vars with valid signs
    tol = 1e-8 * scale
    if n_free and (x_new[free].min() < -tol or np.any(x_new[free] > upper[free] + tol)):
        return None
    grad = q_diag * x_new - lin + a_mat.T @ nu
    if np.any(grad[at_lo] < -1e-7) or np.any(grad[at_hi] > 1e-7):
        return None
    resid = np.abs(a_mat @ x_new - b_vec).max() if s else 0.0
    if resid > 1e-8:
        return None
    return np.clip(x_new, 0.0, upper), nu


def solve_regularized(
    mdp: TabularMdp,
    data_dist,
    reg: Regularizer,
    alpha: float,
    cap: Optional[float] = None,
    method: str = "saddle",
    tol: float = 1e-8,
    budget: int = 1_000_000,
) -> RegularizedSolution:
    """Solve the alpha-regularized occupancy problem over the data support.

    Parameters
    ----------
    cap : explicit weight bound B_w, or None for the uncapped problem (a wide
        box ten times the largest feasible ratio is used internally and must
        be inactive at the solution).
    method : "saddle" (extragradient + Newton refinement, default) or "qp"
        (ADMM with active-set polish); the two share no iteration logic.
    tol : required bound on the joint KKT residual (clip-form deviation and
        flow violation); the returned certificate is usually far tighter.
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}; use solve_unregularized")
    if cap is not None and cap <= 0.0:
        raise ValueError("cap must be positive when given")
    dd = _data_mass(data_dist)
    sup = _build_support(mdp, dd)
    b_big = 10.0 / sup.weights.min()
    cap_eff = cap if cap is not None else b_big
    upper = cap_eff * sup.weights
    _check_flow_feasible(sup, mdp, upper)

    if method == "saddle":
        v0, _, it_eg = _extragradient(
            sup, mdp, reg, alpha, cap_eff, budget=min(budget, 20_000), switch_tol=1e-2
        )
        v, w_cells, it_nt = _newton_refine(
            sup, mdp, reg, alpha, cap_eff, v0, tol=min(tol, 1e-12) * 0.1
        )
        iterations = it_eg + it_nt
    elif method == "qp":
        q_diag = alpha * reg.m_f / sup.weights
        x, z, nu, iterations, _ = _admm_qp(
            q_diag, sup.rewards, sup.b_mat.T, (1.0 - mdp.gamma) * mdp.init_dist, upper,
            tol=1e-9, max_iter=min(budget, 200_000),
        )
        polished = _active_set_polish(
            q_diag, sup.rewards, sup.b_mat.T, (1.0 - mdp.gamma) * mdp.init_dist, upper, z
        )
        if polished is not None:
            d_cells, nu = polished
        else:
            d_cells = z
        v = nu
        w_cells = d_cells / sup.weights
    else:
        raise ValueError(f"unknown method {method!r}, expected 'saddle' or 'qp'")

    clip_dev, flow_dev = _kkt_residuals(sup, mdp, reg, alpha, v, w_cells, cap_eff)
    kkt = max(clip_dev, flow_dev)
    if kkt > tol:
        raise SolverConvergenceError(
            f"{method} path stalled at KKT residual {kkt:.3e} (tol {tol:.1e}) "
            f"after {iterations} iterations"
        )
    if cap is None and w_cells.max() > 0.999 * b_big:
        raise SolverConvergenceError(
            "solution pressed against the internal feasibility box; the uncapped "
            "problem looks degenerate"
        )

    w_mat = sup.expand(w_cells)
    d_mat = sup.expand(sup.weights * w_cells)
    d_state = d_mat.sum(axis=1)
    zero_states = tuple(int(s) for s in np.nonzero(d_state <= 1e-10)[0])
    probs = np.full((mdp.num_states, mdp.num_actions), 1.0 / mdp.num_actions)
    pos = d_state > 1e-10
    probs[pos] = d_mat[pos] / d_state[pos, None]
    return RegularizedSolution(
        v_star=v,
        w_star=w_mat,
        d_star=Occupancy(np.maximum(d_mat, 0.0)),
        pi_star=Policy(probs),
        alpha=alpha,
        kkt_residual=kkt,
        cap=cap,
        clip_residual=clip_dev,
        flow_residual=flow_dev,
        zero_occupancy_states=zero_states,
        method=method,
        iterations=iterations,
    )


def solve_unregularized(
    mdp: TabularMdp, tol: float = 1e-12, max_iter: int = 2_000_000
) -> UnregularizedSolution:
    """Optimal value function by value iteration, greedy policy, its occupancy.

    Iterates until the Bellman residual ||T v - v||_inf falls below tol.
    Greedy ties go to the lowest action index.
    """
    v = np.zeros(mdp.num_states)
    for _ in range(max_iter):
        q = mdp.reward + mdp.gamma * np.einsum("sat,t->sa", mdp.transition, v)
        v_next = q.max(axis=1)
        if np.abs(v_next - v).max() <= tol:
            v = v_next
            break
        v = v_next
    else:
        raise SolverConvergenceError("value iteration exceeded its iteration budget")
    q = mdp.reward + mdp.gamma * np.einsum("sat,t->sa", mdp.transition, v)
    greedy = q.argmax(axis=1)  # argmax returns the first (lowest) maximizer
    probs = np.zeros((mdp.num_states, mdp.num_actions))
    probs[np.arange(mdp.num_states), greedy] = 1.0
    pi = Policy(probs)
    return UnregularizedSolution(v_star=v, pi_star=pi, d_star=exact_occupancy(mdp, pi))


def concentrability(d_target, data_dist) -> ConcentrabilityResult:
    """Single-policy concentrability of a target occupancy against the data.

    B_w = max over covered cells of d(s,a) / d^D(s,a); feasible = False when
    the target puts more than 1e-12 mass on an uncovered cell (B_w is then
    infinite).
    """
    d = d_target.mass if isinstance(d_target, Occupancy) else np.asarray(d_target, dtype=float)
    dd = _data_mass(data_dist)
    off = (dd <= 0.0) & (d > _MASS_EPS)
    if off.any():
        return ConcentrabilityResult(b_w=float("inf"), feasible=False)
    pos = dd > 0.0
    ratio = d[pos] / dd[pos]
    return ConcentrabilityResult(b_w=float(ratio.max(initial=0.0)), feasible=True)


def strong_concentrability_check(
    mdp: TabularMdp,
    data_dist,
    d_0,
    enumeration_budget: int = 1_000_000,
    allow_sampling: bool = False,
    num_samples: int = 4096,
    seed: int = 0,
) -> StrongConcentrability:
    """Two-sided state-marginal ratio bounds against the data distribution.

    B_wu bounds d^pi(s) / d^D(s) over all policies (the maximum over the
    occupancy polytope is attained at its vertices, so enumerating
    deterministic policies is exact). B_wl is the realized lower ratio of the
    target occupancy d_0. When |A|^|S| exceeds enumeration_budget the check
    needs allow_sampling=True and reports method="sampled".
    """
    dd = _data_mass(data_dist)
    dd_state = dd.sum(axis=1)
    d0 = d_0.mass if isinstance(d_0, Occupancy) else np.asarray(d_0, dtype=float)
    d0_state = d0.sum(axis=1)
    if np.any(dd_state <= 0.0):
        return StrongConcentrability(
            b_wu=float("inf"), b_wl=0.0, holds=False, method="enumerated"
        )
    count = mdp.num_actions**mdp.num_states
    if count > enumeration_budget:
        if not allow_sampling:
            raise ValueError(
                f"{count} deterministic policies exceed the enumeration budget "
                f"{enumeration_budget}; pass allow_sampling=True for a sampled check"
            )
        rng = np.random.default_rng(seed)
        choices = rng.integers(0, mdp.num_actions, size=(num_samples, mdp.num_states))
        method = "sampled"
    else:
        choices = np.array(
            list(itertools.product(range(mdp.num_actions), repeat=mdp.num_states)), dtype=int
        )
        method = "enumerated"
    rows = np.arange(mdp.num_states)
    p_stack = mdp.transition[rows[None, :], choices]  # (K, S, S)
    lhs = np.eye(mdp.num_states)[None] - mdp.gamma * np.transpose(p_stack, (0, 2, 1))
    rhs = np.broadcast_to((1.0 - mdp.gamma) * mdp.init_dist, (choices.shape[0], mdp.num_states))
    marginals = np.linalg.solve(lhs, rhs[..., None])[..., 0]
    b_wu = float((marginals / dd_state[None, :]).max())
    b_wl = float((d0_state / dd_state).min())
    return StrongConcentrability(b_wu=b_wu, b_wl=b_wl, holds=b_wl > 0.0, method=method)


@dataclass(frozen=True)
class StabilityRow:
    alpha: float
    w_star: np.ndarray
    v_gap: float
    kkt_residual: float


@dataclass(frozen=True)
class StabilitySweep:
    """Per-alpha solutions on a descending grid, read toward alpha -> 0."""

    rows: tuple[StabilityRow, ...]
    constant_prefix_len: int  # trailing run of the descending grid (smallest alphas)
    limit_w: np.ndarray
    v_gap_slope: float
    v_gap_intercept: float
    v_gap_r2: float


def lp_stability_sweep(
    mdp: TabularMdp,
    data_dist,
    reg: Regularizer,
    alphas: Sequence[float],
    w_tol: float = 1e-6,
) -> StabilitySweep:
    """Track w*_alpha and the value-function gap along a descending alpha grid.

    The constant prefix counts how many of the smallest alphas share (within
    w_tol, sup-norm) the weight of the smallest alpha; the line fit of
    ||v*_alpha - v*_0||_{2,d^D} against alpha runs over that prefix.
    """
    alphas = list(alphas)
    if any(a <= 0 for a in alphas) or any(
        a1 <= a2 for a1, a2 in zip(alphas, alphas[1:])
    ):
        raise ValueError("alphas must be positive and strictly descending")
    dd = _data_mass(data_dist)
    dd_state = dd.sum(axis=1)
    v_ref = solve_unregularized(mdp).v_star
    rows = []
    for alpha in alphas:
        sol = solve_regularized(mdp, dd, reg, alpha)
        gap = float(np.sqrt(dd_state @ (sol.v_star - v_ref) ** 2))
        rows.append(
            StabilityRow(
                alpha=alpha, w_star=sol.w_star, v_gap=gap, kkt_residual=sol.kkt_residual
            )
        )
    limit_w = rows[-1].w_star
    prefix = 0
    for row in reversed(rows):
        if np.abs(row.w_star - limit_w).max() <= w_tol:
            prefix += 1
        else:
            break
    xs = np.array([r.alpha for r in rows[len(rows) - prefix :]])
    ys = np.array([r.v_gap for r in rows[len(rows) - prefix :]])
    if prefix >= 2:
        slope, intercept = np.polyfit(xs, ys, 1)
        pred = slope * xs + intercept
        ss_res = float(np.sum((ys - pred) ** 2))
        ss_tot = float(np.sum((ys - ys.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    else:
        slope, intercept, r2 = float("nan"), float("nan"), float("nan")
    return StabilitySweep(
        rows=tuple(rows),
        constant_prefix_len=prefix,
        limit_w=limit_w,
        v_gap_slope=float(slope),
        v_gap_intercept=float(intercept),
        v_gap_r2=float(r2),
    )


def min_f_divergence_weight(
    mdp: TabularMdp, data_dist, reg: Regularizer
) -> tuple[np.ndarray, float]:
    """The minimum-f-divergence weight among unregularized optima.

    Solves the unregularized LP restricted to the data support for its value,
    then minimizes E_dD[f(d/dD)] over the optimal face. Returns (w, J*).
    """
    dd = _data_mass(data_dist)
    sup = _build_support(mdp, dd)
    upper = (10.0 / sup.weights.min()) * sup.weights
    _check_flow_feasible(sup, mdp, upper)
    b_eq = (1.0 - mdp.gamma) * mdp.init_dist
    res = linprog(
        -sup.rewards,
        A_eq=sup.b_mat.T,
        b_eq=b_eq,
        bounds=[(0.0, float(u)) for u in upper],
        method="highs",
    )
    if not res.success:
        raise SolverConvergenceError(f"support-restricted LP failed: {res.message}")
    j_star = float(-res.fun)
    # optimal face: flow constraints plus the value equality
    a_mat = np.vstack([sup.b_mat.T, sup.rewards[None, :]])
    b_vec = np.concatenate([b_eq, [j_star]])
    q_diag = reg.m_f / sup.weights
    x, z, nu, its, _ = _admm_qp(q_diag, np.zeros(sup.num_cells), a_mat, b_vec, upper, tol=1e-11)
    polished = _active_set_polish(q_diag, np.zeros(sup.num_cells), a_mat, b_vec, upper, z)
    d_cells = polished[0] if polished is not None else z
    return sup.expand(d_cells / sup.weights), j_star


def capped_unregularized_value(mdp: TabularMdp, data_dist, cap: float) -> tuple[float, np.ndarray]:
    """Value of the best occupancy with weights capped at B_w: J(pi*_{0, B_w}).

    Returns (value, occupancy mass). Raises FlowInfeasibleError when even the
    capped polytope is empty.
    """
    if cap <= 0.0:
        raise ValueError("cap must be positive")
    dd = _data_mass(data_dist)
    sup = _build_support(mdp, dd)
    upper = cap * sup.weights
    _check_flow_feasible(sup, mdp, upper)
    res = linprog(
        -sup.rewards,
        A_eq=sup.b_mat.T,
        b_eq=(1.0 - mdp.gamma) * mdp.init_dist,
        bounds=[(0.0, float(u)) for u in upper],
        method="highs",
    )
    if not res.success:
        raise SolverConvergenceError(f"capped LP failed: {res.message}")
    return float(-res.fun), sup.expand(res.x)
