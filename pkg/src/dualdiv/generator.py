"""Generator checks of the closed-form value functions.

Both candidate value functions are piecewise exponential polynomials: an
exponential-sum piece below the barrier and an exactly linear slope-1 piece
above it.  Applying the integro-differential generator to such a function
reduces the jump integral to resolvent solves and one matrix exponential per
evaluation point, with no truncation error.  The variational inequalities
certifying optimality are then verified pointwise on grids; an adaptive
quadrature route cross-checks the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from .dividends import DividendSolution, barrier_gap
from .errors import KnotEvaluation
from .injections import InjectionSolution
from .model import LevyModel
from .scale import ScaleFunction

_KNOT_WINDOW = 1e-6   # VI grids keep this distance from the barrier
_KNOT_SNAP = 1e-9     # closer than this counts as "at the knot"


@dataclass(frozen=True, eq=False)
class ExpPolySegment:
    """f(x) = sum_j weights[j] exp(rates[j] x) + const + slope * x on [lo, hi]."""

    lo: float
    hi: float
    rates: np.ndarray
    weights: np.ndarray
    const: float
    slope: float

    def value(self, x: float) -> float:
        acc = self.const + self.slope * x
        if len(self.rates):
            acc += (self.weights * np.exp(self.rates * x)).sum().real
        return float(acc)

    def derivative(self, x: float, order: int = 1) -> float:
        if order == 1:
            acc = self.slope
            power = self.rates
        elif order == 2:
            acc = 0.0
            power = self.rates**2
        else:
            raise ValueError("only first and second derivatives are provided")
        if len(self.rates):
            acc += (self.weights * power * np.exp(self.rates * x)).sum().real
        return float(acc)


@dataclass(frozen=True, eq=False)
class PiecewiseExpFunction:
    """Candidate value function: contiguous segments on [0, inf) plus a left rule.

    left_kind is "zero" (ruin absorbs, the function vanishes on the negative
    axis) or "linear" (slope left_slope hinged at f(0), the injection case).
    The final segment must be exactly linear with slope 1.
    """

    segments: tuple[ExpPolySegment, ...]
    barrier: float
    left_kind: str = "zero"
    left_slope: float = 0.0

    def __post_init__(self):
        segs = self.segments
        if not segs or segs[0].lo != 0.0 or not math.isinf(segs[-1].hi):
            raise ValueError("segments must cover [0, inf)")
        if len(segs[-1].rates) != 0 or abs(segs[-1].slope - 1.0) > 1e-10:
            raise ValueError("tail segment must be linear with slope 1")
        for left, right in zip(segs, segs[1:]):
            if left.hi != right.lo:
                raise ValueError("segments must be contiguous")
            gap = abs(left.value(left.hi) - right.value(right.lo))
            if gap > 1e-10 * max(1.0, abs(left.value(left.hi))):
                raise ValueError(f"discontinuity {gap:.2e} at knot {left.hi}")
        if self.left_kind not in ("zero", "linear"):
            raise ValueError("left_kind must be 'zero' or 'linear'")

    @property
    def knots(self) -> np.ndarray:
        return np.array([s.hi for s in self.segments[:-1]])

    def _segment_at(self, x: float, side: str = "left") -> ExpPolySegment:
        for seg in self.segments:
            if seg.lo < x < seg.hi:
                return seg
            if x == seg.hi and side == "left":
                return seg
            if x == seg.lo and side == "right":
                return seg
        return self.segments[0] if x <= 0.0 else self.segments[-1]

    def value(self, x: float) -> float:
        if x < 0.0:
            if self.left_kind == "zero":
                return 0.0
            return self.segments[0].value(0.0) + self.left_slope * x
        return self._segment_at(x).value(x)

    def derivative(self, x: float, order: int = 1, side: str = "left") -> float:
        if x < 0.0:
            if self.left_kind == "zero":
                return 0.0
            return self.left_slope if order == 1 else 0.0
        return self._segment_at(x, side).derivative(x, order)


def _expand_below_barrier(sf: ScaleFunction, mu: float, barrier: float, c: float) -> ExpPolySegment:
    """Exponential-polynomial form of mu/q - Zbar(barrier - x) + c Z(barrier - x)."""
    s = sf.roots
    r = sf.coeffs
    q = sf.q
    qr_s = q * r / s
    qr_s2 = q * r / s**2
    weights = np.exp(s * barrier) * (c * qr_s - qr_s2)
    const = (
        mu / q
        - barrier
        + qr_s2.sum().real
        + barrier * qr_s.sum().real
        + c * (1.0 - qr_s.sum().real)
    )
    slope = 1.0 - qr_s.sum().real
    return ExpPolySegment(0.0, barrier, -s, weights, const, slope)


def _barrier_profile(sf, mu, barrier, c, left_kind, left_slope) -> PiecewiseExpFunction:
    empty = np.array([], dtype=complex)
    tail_const = mu / sf.q + c - barrier
    tail = ExpPolySegment(barrier, math.inf, empty, empty, tail_const, 1.0)
    if barrier <= 0.0:
        # barrier at the origin: the value function is the identity
        whole = ExpPolySegment(0.0, math.inf, empty, empty, 0.0, 1.0)
        return PiecewiseExpFunction((whole,), 0.0, left_kind, left_slope)
    below = _expand_below_barrier(sf, mu, barrier, c)
    return PiecewiseExpFunction((below, tail), barrier, left_kind, left_slope)


def dividend_profile(sol: DividendSolution, barrier: float | None = None) -> PiecewiseExpFunction:
    """Piecewise form of the barrier-a dividend value (optimal a when omitted)."""
    if barrier is None:
        a = sol.a_star
        c = 0.0
    else:
        a = barrier
        c = barrier_gap(sol.sf, sol.mu, a) if a > 0.0 else 0.0
    if a <= 0.0:
        return _barrier_profile(sol.sf, sol.mu, 0.0, 0.0, "zero", 0.0)
    return _barrier_profile(sol.sf, sol.mu, a, c, "zero", 0.0)


def injection_profile(sol: InjectionSolution, barrier: float | None = None) -> PiecewiseExpFunction:
    """Piecewise form of the barrier-b injection value (optimal b when omitted)."""
    if barrier is None:
        b = sol.b_star
        c = 0.0
    else:
        b = barrier
        c = sol._correction(b)
    return _barrier_profile(sol.sf, sol.mu, b, c, "linear", sol.phi_cost)


# ---------------------------------------------------------------------------
# generator application
# ---------------------------------------------------------------------------

def _jump_transform(model: LevyModel, f: PiecewiseExpFunction, x: float) -> float:
    """int_0^inf f(x+z) alpha e^{Tz} t dz in closed form.

    Segment by segment: constant and linear parts reduce to the phase-type
    survival function S(z) = alpha e^{Tz} 1 and the partial mean
    M(z) = alpha e^{Tz} (-T)^{-1} 1 + z S(z); exponential parts reduce to
    resolvent solves against (T + gI).
    """
    ph = model.jumps
    T = ph.T
    ones = np.ones(ph.m)
    t_exit = ph.exit_vector
    inv_mean_vec = np.linalg.solve(-T, ones)

    # offsets where the integrand changes shape
    cuts = [0.0] + [float(k - x) for k in f.knots if k > x]
    mats = [np.eye(ph.m)] + [expm(T * z) for z in cuts[1:]]
    S = [float(ph.alpha @ E @ ones) for E in mats]
    M = [float(ph.alpha @ E @ inv_mean_vec) + z * s for E, z, s in zip(mats, cuts, S)]

    total = 0.0
    segs = [s for s in f.segments if s.hi > x]
    for i, seg in enumerate(segs):
        z0 = cuts[i]
        last = i == len(segs) - 1
        s_lo, m_lo = S[i], M[i]
        s_hi, m_hi = (0.0, 0.0) if last else (S[i + 1], M[i + 1])
        total += seg.const * (s_lo - s_hi)
        total += seg.slope * (x * (s_lo - s_hi) + (m_lo - m_hi))
        if len(seg.rates):
            if last:
                raise ValueError("tail segment with exponential terms is not integrable")
            z1 = cuts[i + 1]
            E0, E1 = mats[i], mats[i + 1]
            for w, g in zip(seg.weights, seg.rates):
                band = np.exp(g * z1) * E1 - np.exp(g * z0) * E0
                vec = np.linalg.solve(T + g * np.eye(ph.m), band @ t_exit.astype(complex))
                total += (w * np.exp(g * x) * (ph.alpha @ vec)).real
    return total


def _jump_transform_quadrature(model: LevyModel, f: PiecewiseExpFunction, x: float) -> float:
    """Same integral by adaptive quadrature, with the linear tail done exactly."""
    ph = model.jumps
    interior = [float(k - x) for k in f.knots if k > x]
    z_cut = (interior[-1] if interior else 0.0) + 40.0
    val, _ = quad(
        lambda z: f.value(x + z) * (model.jump_density(z) / model.lam),
        0.0,
        z_cut,
        points=interior or None,
        epsabs=1e-12,
        epsrel=1e-12,
        limit=300,
    )
    tail_seg = f.segments[-1]
    E = expm(ph.T * z_cut)
    s_cut = float(ph.alpha @ E @ np.ones(ph.m))
    m_cut = float(ph.alpha @ E @ np.linalg.solve(-ph.T, np.ones(ph.m))) + z_cut * s_cut
    val += (tail_seg.const + tail_seg.slope * x) * s_cut + tail_seg.slope * m_cut
    return val


def apply_generator(
    model: LevyModel,
    f: PiecewiseExpFunction,
    x: float,
    method: str = "closed",
    side: str | None = None,
    form: str | None = None,
) -> float:
    """Generator of the surplus process applied to f at x > 0.

    Two algebraically identical forms exist for integrable jumps: the drift
    form -d f' + sigma^2/2 f'' + int [f(x+z) - f(x)] nu(dz), used by default
    for pure-jump models, and the compensated form (cutoff at z = 1, drift
    coefficient c = d - int_0^1 z nu(dz)), used by default when a Gaussian
    component is present.  Pass `form` to force one; tests assert agreement.
    Exactly at a knot the caller must pick a side; elsewhere `side` is ignored.
    """
    if form is None:
        form = "compensated" if model.sigma > 0.0 else "drift"
    if x <= 0.0:
        raise ValueError("generator is evaluated on (0, inf)")
    near_knot = any(abs(x - k) < _KNOT_SNAP for k in f.knots)
    if near_knot and side is None:
        raise KnotEvaluation(
            f"x={x} coincides with a knot; pass side='left' or side='right'"
        )
    side = side or "left"
    f1 = f.derivative(x, 1, side)
    fx = f.value(x)
    if method == "closed":
        transform = _jump_transform(model, f, x)
    elif method == "quadrature":
        transform = _jump_transform_quadrature(model, f, x)
    else:
        raise ValueError(f"unknown method {method!r}")
    jump_part = model.lam * transform - model.lam * fx

    if form == "compensated":
        ph = model.jumps
        E1 = expm(ph.T)
        ones = np.ones(ph.m)
        m1 = float(ph.alpha @ E1 @ np.linalg.solve(-ph.T, ones)) + float(ph.alpha @ E1 @ ones)
        small_mean = ph.mean() - m1  # int_0^1 z nu(dz) / lam
        drift_c = model.drift_d - model.lam * small_mean
        out = -drift_c * f1 + jump_part - model.lam * small_mean * f1
    elif form == "drift":
        out = -model.drift_d * f1 + jump_part
    else:
        raise ValueError(f"unknown form {form!r}")
    if model.sigma > 0.0:
        out += 0.5 * model.sigma**2 * f.derivative(x, 2, side)
    return out


# ---------------------------------------------------------------------------
# variational inequality reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VIReport:
    """Pointwise record of the variational-inequality check.

    margins[i] = tolerance - violation at grid[i]; the verdict is "pass" iff
    the largest violation stays within tolerance.
    """

    grid: np.ndarray
    gen_values: np.ndarray
    deriv_values: np.ndarray
    margins: np.ndarray
    max_violation: float
    tolerance: float
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_csv(self) -> str:
        lines = ["x,gen_value,deriv_value,margin"]
        for x, g, d, m in zip(self.grid, self.gen_values, self.deriv_values, self.margins):
            lines.append(f"{x:.17g},{g:.17g},{d:.17g},{m:.17g}")
        return "\n".join(lines) + "\n"


def _make_report(grid, gens, derivs, viols, tol) -> VIReport:
    viols = np.asarray(viols, dtype=float)
    max_violation = float(viols.max()) if len(viols) else 0.0
    return VIReport(
        grid=np.asarray(grid),
        gen_values=np.asarray(gens),
        deriv_values=np.asarray(derivs),
        margins=tol - viols,
        max_violation=max_violation,
        tolerance=tol,
        verdict="pass" if max_violation <= tol else "fail",
    )


def _vi_grid(barrier: float, x_max: float, n: int) -> np.ndarray:
    if barrier > 1e-12:
        n_in = n // 2
        inner = np.linspace(0.0, barrier, n_in + 2)[1:-1]
        outer = np.linspace(barrier, x_max, n - n_in + 1)[1:]
        grid = np.concatenate([inner, outer])
    else:
        grid = np.linspace(0.0, x_max, n + 1)[1:]
    return grid[np.abs(grid - barrier) >= _KNOT_WINDOW]


def check_vi_dividend(
    sol: DividendSolution,
    n: int = 200,
    x_max: float | None = None,
    tol: float = 1e-6,
    barrier: float | None = None,
) -> VIReport:
    """Verify max{(L - q)v, 1 - v'} = 0 pointwise for the barrier value function.

    Inside the barrier the generator term must vanish and the slope cannot
    fall below one; above it the slope is one and the generator term must be
    nonpositive.  Both conditions compress into |max(gen, 1 - v')| per point.
    A deliberately wrong barrier produces an O(1) violation.
    """
    a = sol.a_star if barrier is None else barrier
    f = dividend_profile(sol, barrier)
    grid = _vi_grid(a, x_max if x_max is not None else a + 20.0, n)
    model = sol.sf.model
    gens, derivs, viols = [], [], []
    for x in grid:
        gen = apply_generator(model, f, float(x)) - sol.q * f.value(float(x))
        d1 = f.derivative(float(x))
        gens.append(gen)
        derivs.append(d1)
        viols.append(abs(max(gen, 1.0 - d1)))
    return _make_report(grid, gens, derivs, viols, tol)


def check_vi_injection(
    sol: InjectionSolution,
    n: int = 200,
    x_max: float | None = None,
    tol: float = 1e-6,
    barrier: float | None = None,
    negative_points: tuple = (-2.0, -1.0, -0.5),
) -> VIReport:
    """Verify the three injection conditions on a grid.

    On x > 0: max{(L - q)v, 1 - v'} = 0 and v' <= phi_cost; on x < 0 the slope
    equals phi_cost exactly.  Negative points carry no generator value (nan).
    """
    b = sol.b_star if barrier is None else barrier
    f = injection_profile(sol, barrier)
    grid = _vi_grid(b, x_max if x_max is not None else b + 20.0, n)
    model = sol.sf.model
    gens, derivs, viols = [], [], []
    for x in negative_points:
        gens.append(math.nan)
        d1 = f.derivative(float(x))
        derivs.append(d1)
        viols.append(abs(d1 - sol.phi_cost))
    for x in grid:
        gen = apply_generator(model, f, float(x)) - sol.q * f.value(float(x))
        d1 = f.derivative(float(x))
        gens.append(gen)
        derivs.append(d1)
        viols.append(max(abs(max(gen, 1.0 - d1)), d1 - sol.phi_cost, 0.0))
    full_grid = np.concatenate([np.asarray(negative_points, float), grid])
    return _make_report(full_grid, gens, derivs, viols, tol)
