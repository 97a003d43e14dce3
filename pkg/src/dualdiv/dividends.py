"""Dividend payout until ruin: optimal barrier and value function.

A barrier strategy at level a skims the surplus overshoot above a as
dividends until the surplus goes negative.  The expected discounted payout
has a closed form in the scale function, and the optimal barrier is the
point where the antiderivative transform Zbar crosses mu/q (zero when the
mean drift is nonpositive).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import LevyModel, PathVariation
from .scale import ScaleFunction, build_scale

_BARRIER_RESIDUAL = 1e-9


def barrier_value_kernel(sf: ScaleFunction, mu: float, barrier, x):
    """mu/q - Zbar(barrier - x): shared closed form of both optimal value functions.

    The ruin-horizon and the capital-injection problem produce value functions
    of this exact shape, differing only in how the barrier is pinned down.
    """
    return mu / sf.q - sf.Zbar(np.asarray(barrier) - np.asarray(x))


def value_offset(sf: ScaleFunction, mu: float, y):
    """Offset term k of the two-term barrier value representation.

    k(y) = Zbar(y) - Z(y)/phi_q - mu/q; continues linearly (slope 1) on the
    negative half-line by the conventions Z = 1, Zbar = identity there.
    """
    y = np.asarray(y, dtype=float)
    out = sf.Zbar(y) - sf.Z(y) / sf.phi_q - mu / sf.q
    return float(out) if np.ndim(out) == 0 else out


def barrier_gap(sf: ScaleFunction, mu: float, a):
    """Pasting defect 1/phi_q + k(a)/Z(a) of the barrier-a value function.

    Vanishes exactly at the optimal barrier (equivalently Zbar(a) = mu/q);
    negative below it, positive above.  Scales both the first-derivative
    defect (bounded variation) and the curvature defect (unbounded variation)
    at the barrier.
    """
    a = np.asarray(a, dtype=float)
    out = 1.0 / sf.phi_q + value_offset(sf, mu, a) / sf.Z(a)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class DividendSolution:
    """Solved dividend problem: optimal barrier and value evaluators."""

    q: float
    a_star: float
    mu: float
    sf: ScaleFunction
    value_at_barrier: float

    def value(self, x):
        """Optimal value function: mu/q - Zbar(a* - x) when mu > 0, else x."""
        x = np.asarray(x, dtype=float)
        if self.mu > 0.0:
            out = barrier_value_kernel(self.sf, self.mu, self.a_star, x)
        else:
            out = x.copy()
        return float(out) if np.ndim(out) == 0 else out

    def barrier_value(self, a: float, x):
        """Value of the barrier-a strategy at x >= 0 (any a >= 0).

        -k(a-x) + Z(a-x) k(a)/Z(a); above the barrier this continues as
        (x - a) + value at the barrier.
        """
        x = np.asarray(x, dtype=float)
        k_at_a = value_offset(self.sf, self.mu, a)
        out = -value_offset(self.sf, self.mu, a - x) + self.sf.Z(a - x) * (
            k_at_a / self.sf.Z(a)
        )
        return float(out) if np.ndim(out) == 0 else out

    def barrier_derivatives(self, a: float, x):
        """(v', v'') of the barrier-a value; v'' only for unbounded variation.

        v'(x) = Z(a-x) - q W(a-x) gap(a); at x = a this is the left limit
        (the scale function contributes its right limit at zero).
        """
        x = np.asarray(x, dtype=float)
        y = a - x
        gap = barrier_gap(self.sf, self.mu, a) if a > 0.0 else -self.mu / self.q
        v1 = self.sf.Z(y) - self.q * self.sf.W(y) * gap
        v1 = float(v1) if np.ndim(v1) == 0 else v1
        if self.sf.model.path_variation() is PathVariation.BOUNDED:
            return v1, None
        v2 = -self.q * self.sf.W(y) + self.q * self.sf.W_prime(y) * gap
        v2 = float(v2) if np.ndim(v2) == 0 else v2
        return v1, v2


def optimal_barrier(model: LevyModel, q: float, sf: ScaleFunction | None = None) -> DividendSolution:
    """Solve the dividend problem: a* = Zbar^{-1}(mu/q) when mu > 0, else 0."""
    if sf is None:
        sf = build_scale(model, q)
    mu = model.drift_mu()
    if mu <= 0.0:
        return DividendSolution(q=q, a_star=0.0, mu=mu, sf=sf, value_at_barrier=0.0)
    target = mu / q
    hi = 1.0
    while sf.Zbar(hi) < target:
        hi *= 2.0
    a = brentq(lambda s: sf.Zbar(s) - target, 1e-8 if sf.Zbar(1e-8) < target else 0.0,
               hi, xtol=1e-14, rtol=1e-15)
    for _ in range(4):  # Newton polish, Zbar' = Z >= 1
        step = (sf.Zbar(a) - target) / sf.Z(a)
        a -= step
        if abs(step) < 1e-16 * (1.0 + a):
            break
    residual = abs(sf.Zbar(a) - target)
    if residual > _BARRIER_RESIDUAL:
        raise ArithmeticError(f"barrier solve residual {residual:.2e} too large")
    return DividendSolution(q=q, a_star=float(a), mu=mu, sf=sf, value_at_barrier=target)
