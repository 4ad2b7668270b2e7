"""Density-ratio regularizers: the strongly convex f applied to w = d / d^D.

Only the quadratic family is provided. Its curvature constant m_f is what the
performance bounds divide by, and its derivative inverse is what the oracle
solver inverts, so both are exposed in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_KINDS = ("quadratic", "shifted_quadratic")


class AbsoluteContinuityError(ValueError):
    """Raised when a candidate occupancy puts mass where the data has none."""

    def __init__(self, state: int, action: int, mass: float):
        self.state = state
        self.action = action
        self.mass = mass
        super().__init__(
            f"occupancy carries mass {mass:.3e} at state-action ({state}, {action}) "
            "where the data distribution is zero"
        )


@dataclass(frozen=True)
class Regularizer:
    """f(x) = m_f/2 * x^2 (+ shift for the shifted kind), with m_f > 0.

    The shift leaves derivatives untouched; it exists so bound computations
    can be exercised with sup|f| != f-range-from-zero.
    """

    kind: str = "quadratic"
    m_f: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown regularizer kind {self.kind!r}, expected one of {_KINDS}")
        if self.m_f <= 0.0:
            raise ValueError(f"m_f must be positive for strong convexity, got {self.m_f}")
        if self.kind == "quadratic" and self.shift != 0.0:
            raise ValueError("plain quadratic takes no shift; use shifted_quadratic")
        if self.shift < 0.0:
            raise ValueError("shift must be nonnegative so f stays nonnegative")

    def eval(self, x):
        """f(x), elementwise on arrays."""
        return 0.5 * self.m_f * np.square(x) + self.shift

    def deriv(self, x):
        """f'(x) = m_f * x."""
        return self.m_f * np.asarray(x, dtype=float)

    def deriv_inverse(self, y):
        """(f')^{-1}(y) = y / m_f."""
        return np.asarray(y, dtype=float) / self.m_f

    def bounds(self, b_w: float) -> tuple[float, float]:
        """(B_f, B_fprime): sup of |f| and |f'| over the box [0, B_w]."""
        if b_w < 0.0:
            raise ValueError("weight bound must be nonnegative")
        b_f = 0.5 * self.m_f * b_w**2 + self.shift
        b_fprime = self.m_f * b_w
        return b_f, b_fprime

    def to_config(self) -> dict:
        cfg = {"kind": self.kind, "m_f": self.m_f}
        if self.kind == "shifted_quadratic":
            cfg["shift"] = self.shift
        return cfg

    @staticmethod
    def from_config(cfg: dict) -> "Regularizer":
        return Regularizer(
            kind=cfg.get("kind", "quadratic"),
            m_f=float(cfg.get("m_f", 1.0)),
            shift=float(cfg.get("shift", 0.0)),
        )


def f_divergence(reg: Regularizer, d, data_mass) -> float:
    """E_{d^D}[ f(d / d^D) ] over the support of the data distribution.

    Raises AbsoluteContinuityError (naming the first offending pair) if d puts
    more than 1e-12 mass on a zero-data cell.
    """
    from .mdp import Occupancy

    d = d.mass if isinstance(d, Occupancy) else np.asarray(d, dtype=float)
    dd = data_mass.mass if isinstance(data_mass, Occupancy) else np.asarray(data_mass, dtype=float)
    off_support = (dd <= 0.0) & (np.abs(d) > 1e-12)
    if off_support.any():
        s, a = np.argwhere(off_support)[0]
        raise AbsoluteContinuityError(int(s), int(a), float(d[s, a]))
    pos = dd > 0.0
    ratio = np.zeros_like(dd)
    ratio[pos] = d[pos] / dd[pos]
    return float(np.sum(dd[pos] * reg.eval(ratio[pos])))
