"""Dividends with mandatory capital injections: doubly reflected surplus.

The surplus is reflected at 0 from below (shareholders inject capital at unit
cost phi_cost > 1) and at an upper barrier b from above (overshoot paid out as
dividends).  The optimal upper barrier solves Z(b) = phi_cost, and the optimal
value function has the same closed form as in the ruin-horizon problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dividends import barrier_value_kernel
from .errors import InvalidCost
from .model import PathVariation
from .scale import ScaleFunction

_BARRIER_RESIDUAL = 1e-9


@dataclass(frozen=True, eq=False)
class InjectionSolution:
    """Solved injection problem: optimal upper barrier and value evaluators."""

    q: float
    phi_cost: float
    b_star: float
    mu: float
    sf: ScaleFunction

    def value(self, x):
        """Optimal value mu/q - Zbar(b* - x) for x >= 0; slope phi_cost below 0."""
        return self.barrier_value(self.b_star, x)

    def _correction(self, b: float) -> float:
        """(Z(b) - phi)/(q W(b)): weight of the Z term away from the optimum."""
        return (self.sf.Z(b) - self.phi_cost) / (self.q * self.sf.W(b))

    def barrier_value(self, b: float, x):
        """Value of the barrier-b policy; valid for any x via the extensions."""
        x = np.asarray(x, dtype=float)
        c = self._correction(b)
        out = barrier_value_kernel(self.sf, self.mu, b, np.maximum(x, 0.0)) + c * self.sf.Z(
            b - np.maximum(x, 0.0)
        )
        neg = x < 0.0
        if np.any(neg):
            at_zero = (
                barrier_value_kernel(self.sf, self.mu, b, 0.0) + c * self.sf.Z(b)
            )
            out = np.where(neg, self.phi_cost * x + at_zero, out)
        return float(out) if np.ndim(out) == 0 else out

    def barrier_derivatives(self, b: float, x):
        """(v', v'') of the barrier-b value; v'' only for unbounded variation.

        For x > 0: v'(x) = Z(b-x) - W(b-x)(Z(b) - phi)/W(b); the correction
        vanishes identically at b = b*.  Below zero the slope is phi_cost.
        """
        x = np.asarray(x, dtype=float)
        y = b - np.maximum(x, 0.0)
        defect = self.sf.Z(b) - self.phi_cost
        v1 = self.sf.Z(y) - self.sf.W(y) * (defect / self.sf.W(b))
        v1 = np.where(x < 0.0, self.phi_cost, v1)
        v1 = float(v1) if np.ndim(v1) == 0 else v1
        if self.sf.model.path_variation() is PathVariation.BOUNDED:
            return v1, None
        v2 = -self.q * self.sf.W(y) + self.sf.W_prime(y) * (defect / self.sf.W(b))
        v2 = np.where(x < 0.0, 0.0, v2)
        v2 = float(v2) if np.ndim(v2) == 0 else v2
        return v1, v2

    def expected_dividends(self, b: float, x):
        """E[discounted dividend stream] under the barrier-b policy."""
        x = np.asarray(x, dtype=float)
        out = barrier_value_kernel(self.sf, self.mu, b, x) + self.sf.Z(b) * self.sf.Z(
            b - x
        ) / (self.q * self.sf.W(b))
        return float(out) if np.ndim(out) == 0 else out

    def expected_injections(self, b: float, x):
        """E[discounted injection stream] under the barrier-b policy."""
        x = np.asarray(x, dtype=float)
        out = self.sf.Z(b - x) / (self.q * self.sf.W(b))
        return float(out) if np.ndim(out) == 0 else out


def optimal_barrier(sf: ScaleFunction, phi_cost: float) -> InjectionSolution:
    """Solve the injection problem: b* is the unique root of Z(b) = phi_cost.

    Z is strictly increasing from Z(0) = 1 to infinity, so a root exists and
    is positive exactly when phi_cost > 1; smaller costs are rejected.
    """
    if phi_cost <= 1.0:
        raise InvalidCost(f"unit injection cost must exceed 1, got {phi_cost}")
    hi = 1.0
    while sf.Z(hi) < phi_cost:
        hi *= 2.0
    b = brentq(lambda s: sf.Z(s) - phi_cost, 1e-12, hi, xtol=1e-14, rtol=1e-15)
    for _ in range(4):  # Newton polish, Z' = q W > 0 on (0, inf)
        step = (sf.Z(b) - phi_cost) / (sf.q * sf.W(b))
        b -= step
        if abs(step) < 1e-16 * (1.0 + b):
            break
    residual = abs(sf.Z(b) - phi_cost)
    if residual > _BARRIER_RESIDUAL:
        raise ArithmeticError(f"barrier solve residual {residual:.2e} too large")
    mu = sf.model.drift_mu()
    return InjectionSolution(q=sf.q, phi_cost=phi_cost, b_star=float(b), mu=mu, sf=sf)
