"""Bundled model data used by the figure presets and tests."""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .model import LevyModel, PhaseType

# Parameter sweeps behind the two report figures.
FIGURE1_DRIFTS = (2.0, 2.33, 2.67, 3.0)
FIGURE2_COSTS = (1.001, 1.5, 2.0, 5.0)
DEFAULT_Q = 0.05
DEFAULT_LAM = 3.5
DEFAULT_DRIFT = 2.33


def halfnormal_m6() -> PhaseType:
    """Six-phase fit of the |N(0,1)| jump law shipped as package data."""
    doc = json.loads(
        resources.files("dualdiv").joinpath("data/halfnormal_m6.json").read_text()
    )
    return PhaseType(np.asarray(doc["alpha"], float), np.asarray(doc["T"], float))


def preset_model(drift_d: float = DEFAULT_DRIFT, sigma: float = 0.0,
                 lam: float = DEFAULT_LAM) -> LevyModel:
    """Reference model: half-normal phase-type jumps at the given drift/sigma."""
    return LevyModel(drift_d=drift_d, sigma=sigma, lam=lam, jumps=halfnormal_m6())
