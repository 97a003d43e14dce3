"""Spectrally positive Levy surplus model with phase-type upward jumps.

The surplus process moves as  X_t - X_0 = -d*t + sigma*B_t + sum of jumps,
where jumps arrive at Poisson rate lam and are phase-type distributed.
Its Laplace exponent psi(s) = log E[exp(-s*X_1)] is the rational function

    psi(s) = d*s + 0.5*sigma^2*s^2 + lam*(alpha (sI - T)^{-1} t - 1),

with t = -T*1 the exit-rate vector of the phase-type generator.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import (
    DimensionMismatch,
    InvalidPhaseType,
    NotSubordinatorViolation,
    SingularResolvent,
)

# Relative distance from the spectrum of T below which resolvent solves are refused.
_RESOLVENT_GUARD = 1e-10


class PathVariation(enum.Enum):
    BOUNDED = "bounded_variation"
    UNBOUNDED = "unbounded_variation"


@dataclass(frozen=True, eq=False)
class PhaseType:
    """Phase-type distribution: absorption time of a Markov chain.

    alpha is the initial distribution over the m transient phases and T the
    m x m subgenerator (negative diagonal, nonnegative off-diagonal, row sums
    <= 0).  The exit-rate vector is t = -T*1.
    """

    alpha: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        T = np.atleast_2d(np.asarray(self.T, dtype=float))
        if alpha.ndim != 1 or T.ndim != 2 or T.shape[0] != T.shape[1]:
            raise DimensionMismatch(
                f"alpha must be a vector and T square, got {alpha.shape} and {T.shape}"
            )
        if T.shape[0] != alpha.shape[0]:
            raise DimensionMismatch(
                f"alpha has {alpha.shape[0]} entries but T is {T.shape[0]}x{T.shape[1]}"
            )
        if np.any(alpha < 0.0) or abs(alpha.sum() - 1.0) > 1e-12:
            raise InvalidPhaseType("alpha must be a probability vector (sum 1 within 1e-12)")
        scale = np.abs(T).max()
        if scale <= 0.0:
            raise InvalidPhaseType("T must be nonzero")
        if np.any(np.diag(T) >= 0.0):
            raise InvalidPhaseType("diagonal of T must be strictly negative")
        off = T - np.diag(np.diag(T))
        if np.any(off < 0.0):
            raise InvalidPhaseType("off-diagonal entries of T must be nonnegative")
        if np.any(T.sum(axis=1) > 1e-12 * scale):
            raise InvalidPhaseType("row sums of T must be nonpositive")
        eigs = np.linalg.eigvals(T)
        if np.any(eigs.real >= 0.0):
            raise InvalidPhaseType("T must be a proper subgenerator (eigenvalues in the open left half-plane)")
        alpha.setflags(write=False)
        T.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "_eigs", eigs)
        object.__setattr__(self, "_scale", scale)

    @property
    def m(self) -> int:
        return self.alpha.shape[0]

    @property
    def exit_vector(self) -> np.ndarray:
        return -self.T @ np.ones(self.m)

    def mean(self) -> float:
        """E[Z] = alpha (-T)^{-1} 1."""
        return float(self.alpha @ np.linalg.solve(-self.T, np.ones(self.m)))

    def lst(self, s: complex) -> complex:
        """Laplace-Stieltjes transform E[exp(-s Z)] = alpha (sI - T)^{-1} t."""
        return complex(self.alpha @ self._resolve(s))

    def _resolve(self, s: complex) -> np.ndarray:
        """(sI - T)^{-1} t with a conditioning guard near the spectrum of T."""
        if np.min(np.abs(s - self._eigs)) < _RESOLVENT_GUARD * self._scale:
            raise SingularResolvent(f"s={s} is within guard distance of the spectrum of T")
        A = s * np.eye(self.m, dtype=complex) - self.T
        return np.linalg.solve(A, self.exit_vector.astype(complex))

    def _resolve2(self, s: complex) -> np.ndarray:
        """(sI - T)^{-2} t, via two solves."""
        first = self._resolve(s)
        A = s * np.eye(self.m, dtype=complex) - self.T
        return np.linalg.solve(A, first)


@dataclass(frozen=True, eq=False)
class LevyModel:
    """Spectrally positive Levy process parameterized by (d, sigma, lam, jumps).

    drift_d is the downward drift rate (d > 0 required when sigma = 0, else the
    paths would be monotone), sigma the Gaussian coefficient, lam the Poisson
    arrival rate of the upward phase-type jumps.
    """

    drift_d: float
    sigma: float
    lam: float
    jumps: PhaseType

    def __post_init__(self):
        object.__setattr__(self, "drift_d", float(self.drift_d))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "lam", float(self.lam))
        if not isinstance(self.jumps, PhaseType):
            raise InvalidPhaseType("jumps must be a PhaseType instance")
        if self.sigma < 0.0:
            raise NotSubordinatorViolation("sigma must be nonnegative")
        if self.lam <= 0.0:
            raise InvalidPhaseType("jump arrival rate lam must be positive")
        if self.sigma == 0.0 and self.drift_d <= 0.0:
            raise NotSubordinatorViolation(
                "sigma = 0 requires drift_d > 0, otherwise paths are monotone"
            )

    # -- Laplace exponent -------------------------------------------------

    def psi(self, s: complex) -> complex:
        """Laplace exponent psi(s) = log E[exp(-s X_1)]; psi(0) = 0 exactly."""
        s = complex(s)
        if s == 0.0:
            return 0.0 if s.imag == 0.0 else complex(0.0)
        val = (
            self.drift_d * s
            + 0.5 * self.sigma**2 * s * s
            + self.lam * (self.jumps.lst(s) - 1.0)
        )
        return val.real if s.imag == 0.0 else val

    def psi_prime(self, s: complex) -> complex:
        """Derivative psi'(s) = d + sigma^2 s - lam * alpha (sI - T)^{-2} t."""
        s = complex(s)
        val = (
            self.drift_d
            + self.sigma**2 * s
            - self.lam * complex(self.jumps.alpha @ self.jumps._resolve2(s))
        )
        return val.real if s.imag == 0.0 else val

    def drift_mu(self) -> float:
        """Mean drift mu = E[X_1] = lam * E[Z] - d; equals -psi'(0+)."""
        return self.lam * self.jumps.mean() - self.drift_d

    # -- Jump measure ------------------------------------------------------

    def jump_density(self, z: float) -> float:
        """Levy measure density lam * alpha exp(Tz) t at z > 0."""
        if z < 0.0:
            raise ValueError("jump density is supported on (0, infinity)")
        ph = self.jumps
        return float(self.lam * (ph.alpha @ expm(ph.T * z) @ ph.exit_vector))

    def path_variation(self) -> PathVariation:
        """Bounded variation iff sigma = 0 (phase-type jumps are integrable)."""
        return PathVariation.BOUNDED if self.sigma == 0.0 else PathVariation.UNBOUNDED

    # -- Construction helpers ----------------------------------------------

    @classmethod
    def from_dict(cls, spec: dict) -> "LevyModel":
        """Build a model from the documented file schema.

        Required keys: drift_d, sigma, lambda, alpha, T.  Unknown keys are
        rejected so that typos fail loudly.
        """
        allowed = {"drift_d", "sigma", "lambda", "alpha", "T"}
        unknown = set(spec) - allowed
        if unknown:
            raise InvalidPhaseType(f"unknown model fields: {sorted(unknown)}")
        missing = allowed - set(spec)
        if missing:
            raise InvalidPhaseType(f"missing model fields: {sorted(missing)}")
        return cls(
            drift_d=spec["drift_d"],
            sigma=spec["sigma"],
            lam=spec["lambda"],
            jumps=PhaseType(np.asarray(spec["alpha"], float), np.asarray(spec["T"], float)),
        )

    def to_dict(self) -> dict:
        return {
            "drift_d": self.drift_d,
            "sigma": self.sigma,
            "lambda": self.lam,
            "alpha": self.jumps.alpha.tolist(),
            "T": self.jumps.T.tolist(),
        }


def validate_model(
    drift_d: float, sigma: float, lam: float, alpha, T
) -> LevyModel:
    """Validate raw parameters and return the model; raises on any violation."""
    return LevyModel(drift_d, sigma, lam, PhaseType(np.asarray(alpha, float), np.asarray(T, float)))
