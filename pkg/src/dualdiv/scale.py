"""Scale functions of the surplus process.

For phase-type jump models the Laplace transform 1/(psi(s)-q) is rational,
so the q-scale function is a finite exponential sum

    W(x) = sum_k exp(s_k x) / psi'(s_k),   x >= 0,

over the roots s_k of psi(s) = q: one positive real root (the exponential
growth rate of W) plus m or m+1 roots with negative real parts, depending on
whether a Gaussian component is present.  Z and its antiderivative follow in
closed form.  An independent numerical transform-inversion oracle is provided
for cross-checking the expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BracketFailure, ContourTooClose, MultipleRootDetected, SingularResolvent
from .model import LevyModel

_ROOT_RESIDUAL = 1e-9    # acceptance threshold on |psi(s)-q| per kept root
_DISTINCT_RTOL = 1e-7    # pairwise root separation below which we abort


def phi(model: LevyModel, q: float) -> float:
    """Unique positive root of psi(s) = q.

    psi is convex with psi(0) = 0, so for q > 0 the root exists and is unique.
    Found by geometric bracket growth and bracketed solving, then polished by
    Newton iteration on psi directly.
    """
    if q <= 0.0:
        raise ValueError("q must be positive")
    f = lambda s: model.psi(s) - q
    hi = 1.0
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise BracketFailure("no sign change of psi(s)-q below s = 1e6")
    lo = min(1e-12, hi / 2)
    root = brentq(f, lo, hi, xtol=1e-14, rtol=1e-15)
    for _ in range(4):
        step = f(root) / model.psi_prime(root)
        root -= step
        if abs(step) < 1e-16 * (1.0 + abs(root)):
            break
    return float(root)


def _char_polynomials(ph) -> tuple[np.ndarray, np.ndarray]:
    """det(sI-T) and alpha adj(sI-T) t as coefficient arrays (highest power first).

    Faddeev-LeVerrier recursion; exact up to roundoff, trivial for small m.
    """
    T = ph.T
    m = ph.m
    t_exit = ph.exit_vector
    det = np.zeros(m + 1)
    det[0] = 1.0
    num = np.zeros(m)
    B = np.eye(m)
    num[0] = ph.alpha @ B @ t_exit
    for k in range(1, m + 1):
        Ak = T @ B
        det[k] = -np.trace(Ak) / k
        B = Ak + det[k] * np.eye(m)
        if k < m:
            num[k] = ph.alpha @ B @ t_exit
    return det, num


def find_roots(model: LevyModel, q: float) -> np.ndarray:
    """All roots of psi(s) = q, obtained from the cleared-denominator polynomial.

    The polynomial is P(s) = (d*s + sigma^2 s^2/2 - lam - q) det(sI-T)
    + lam * alpha adj(sI-T) t; its roots are computed as companion-matrix
    eigenvalues and refined by Newton steps on psi itself, which also filters
    spurious candidates created by pole-zero cancellation at eigenvalues of T.

    Returns roots sorted by descending real part: the positive real root
    first, then the left-half-plane roots, conjugate pairs made exact.
    Raises MultipleRootDetected when two roots are numerically indistinct;
    the exponential-sum expansion assumes simple roots.
    """
    if q <= 0.0:
        raise ValueError("q must be positive")
    det, num = _char_polynomials(model.jumps)
    if model.sigma > 0.0:
        lead = np.array([0.5 * model.sigma**2, model.drift_d, -(model.lam + q)])
    else:
        lead = np.array([model.drift_d, -(model.lam + q)])
    P = np.polyadd(np.polymul(lead, det), model.lam * num)
    candidates = np.roots(P)

    kept = []
    for s in candidates:
        try:
            for _ in range(8):
                step = (model.psi(s) - q) / model.psi_prime(s)
                s = s - step
                if abs(step) <= 1e-15 * (1.0 + abs(s)):
                    break
            if abs(model.psi(s) - q) < _ROOT_RESIDUAL * (1.0 + abs(q)):
                kept.append(complex(s))
        except SingularResolvent:
            continue  # cancellation artifact sitting on the spectrum of T

    expected = model.jumps.m + (2 if model.sigma > 0.0 else 1)
    roots = np.array(kept, dtype=complex)
    # snap numerically-real roots onto the axis
    real_mask = np.abs(roots.imag) < 1e-10 * (1.0 + np.abs(roots.real))
    roots[real_mask] = roots[real_mask].real

    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            gap = abs(roots[i] - roots[j])
            if gap < _DISTINCT_RTOL * (1.0 + max(abs(roots[i]), abs(roots[j]))):
                raise MultipleRootDetected(
                    f"roots {roots[i]} and {roots[j]} are {gap:.2e} apart; "
                    "the expansion requires simple roots"
                )
    if len(roots) != expected:
        raise MultipleRootDetected(
            f"found {len(roots)} simple roots of psi(s)=q, expected {expected}; "
            "near-multiple roots were likely merged by refinement"
        )

    pos = roots[roots.real > 0.0]
    if len(pos) != 1 or pos[0].imag != 0.0:
        raise BracketFailure(f"expected exactly one positive real root, got {pos}")

    # enforce exact conjugate pairing for the complex roots
    complexes = roots[np.abs(roots.imag) > 0.0]
    uppers = sorted((s for s in complexes if s.imag > 0.0), key=lambda z: (z.real, z.imag))
    lowers = sorted((s for s in complexes if s.imag < 0.0), key=lambda z: (z.real, -z.imag))
    if len(uppers) != len(lowers):
        raise MultipleRootDetected("complex roots do not pair into conjugates")
    paired = []
    for su, sl in zip(uppers, lowers):
        mid = 0.5 * (su + sl.conjugate())
        paired.extend([mid, mid.conjugate()])
    reals = [s for s in roots if s.imag == 0.0]
    out = np.array(reals + paired, dtype=complex)
    order = np.lexsort((out.imag, -out.real))
    return out[order]


@dataclass(frozen=True, eq=False)
class ScaleFunction:
    """Compiled q-scale function: root set and residue coefficients.

    Immutable after construction; evaluators accept scalars or arrays and are
    safe for concurrent use.
    """

    q: float
    model: LevyModel
    roots: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        self.roots.setflags(write=False)
        self.coeffs.setflags(write=False)

    @property
    def phi_q(self) -> float:
        return float(self.roots[0].real)

    def _sum(self, x: np.ndarray, weights: np.ndarray, shifts=None) -> np.ndarray:
        term = weights * np.exp(np.multiply.outer(x, self.roots))
        if shifts is not None:
            term = term + shifts
        return term.sum(axis=-1).real

    def W(self, x):
        """W(x); identically zero on the negative half-line."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        mask = x >= 0.0
        if np.any(mask):
            out[mask] = self._sum(x[mask], self.coeffs)
        return float(out) if out.ndim == 0 else out

    def W_prime(self, x):
        """W'(x); zero on the negative half-line, right limit at x = 0."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        mask = x >= 0.0
        if np.any(mask):
            out[mask] = self._sum(x[mask], self.coeffs * self.roots)
        return float(out) if out.ndim == 0 else out

    def Z(self, x):
        """Z(x) = 1 + q * int_0^x W; equal to 1 for x <= 0."""
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        mask = x > 0.0
        if np.any(mask):
            w = self.q * self.coeffs / self.roots
            out[mask] = 1.0 + self._sum(x[mask], w) - w.sum().real
        return float(out) if out.ndim == 0 else out

    def Zbar(self, x):
        """Antiderivative of Z from 0; equal to x for x <= 0."""
        x = np.asarray(x, dtype=float)
        out = x.copy()
        mask = x > 0.0
        if np.any(mask):
            w = self.q * self.coeffs / self.roots**2
            lin = self.q * self.coeffs / self.roots
            xm = x[mask]
            out[mask] = (
                xm + self._sum(xm, w) - w.sum().real - xm * lin.sum().real
            )
        return float(out) if out.ndim == 0 else out


def build_scale(model: LevyModel, q: float) -> ScaleFunction:
    """Compile the scale function for discount rate q > 0.

    The residue at each root s_k is 1/psi'(s_k).  A single expansion covers
    both the Gaussian and the pure-jump case; with sigma = 0 the atom of W at
    zero is carried by the coefficient sum (W(0) = sum_k 1/psi'(s_k) = 1/d).
    """
    roots = find_roots(model, q)
    coeffs = np.array([1.0 / model.psi_prime(s) for s in roots], dtype=complex)
    return ScaleFunction(q=q, model=model, roots=roots, coeffs=coeffs)


def laplace_inversion_oracle(model: LevyModel, q: float, x: float, terms: int = 18) -> float:
    """Invert 1/(psi(s)-q) numerically at x > 0; test oracle for W.

    Euler-summation inversion (binomial averaging of partial sums of the
    Bromwich series) applied to the transform damped by the positive root,
    so the inverted function is bounded and the contour sits right of all
    singularities.  The undamped value is recovered by one exponential.
    """
    if x <= 0.0:
        raise ValueError("x must be positive")
    p = phi(model, q)
    a0 = terms * math.log(10.0) / 3.0
    if a0 / x <= 0.5:
        raise ContourTooClose(
            f"contour abscissa exceeds the dominant pole by only {a0 / x:.3f} at x={x}; "
            "increase terms or reduce x"
        )
    M = terms
    eta = np.zeros(2 * M + 1)
    eta[0] = 0.5
    eta[1 : M + 1] = 1.0
    eta[2 * M] = 2.0**-M
    for k in range(1, M):
        eta[2 * M - k] = eta[2 * M - k + 1] + (2.0**-M) * math.comb(M, k)
    ks = np.arange(2 * M + 1)
    beta = (a0 + 1j * np.pi * ks) / x
    vals = np.array([1.0 / (model.psi(p + b) - q) for b in beta])
    damped = (10.0 ** (M / 3.0) / x) * np.sum((-1.0) ** ks * eta * vals.real)
    return float(math.exp(p * x) * damped)
