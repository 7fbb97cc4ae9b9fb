"""Anonymous-interference outcome models f(w, x, u) with derivatives and noise.

The mean response depends on a unit's own treatment w in {0,1}, its fraction
of treated neighbors x in [0,1], and its latent type u; observed outcomes add
independent N(0, noise_sd^2) noise on top.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

FD_STEP = 1e-5


@dataclass(frozen=True)
class OutcomeModel:
    """Mean response, optional analytic x-derivative, and noise scale."""

    name: str
    base: Callable
    partial: Optional[Callable] = None
    noise_sd: float = 0.0

    def __post_init__(self):
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")


def evaluate_mean(model: OutcomeModel, w, x, u=0.0):
    """Deterministic part of the outcome (noise excluded)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("treated-neighbor fraction must lie in [0,1]")
    return np.asarray(model.base(np.asarray(w), x, np.asarray(u, dtype=float)), dtype=float)


def partial_x(model: OutcomeModel, w, x, u=0.0):
    """d/dx of the mean response: analytic if declared, else O(h^2) differences."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > 1):
        raise ValueError("treated-neighbor fraction must lie in [0,1]")
    if model.partial is not None:
        return np.asarray(model.partial(np.asarray(w), x, np.asarray(u, dtype=float)), dtype=float)
    return _finite_difference(model, w, x, u)


def _finite_difference(model: OutcomeModel, w, x, u):
    h = FD_STEP
    scalar = np.ndim(x) == 0 and np.ndim(w) == 0 and np.ndim(u) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = np.broadcast_to(np.asarray(w), x.shape)
    u = np.broadcast_to(np.asarray(u, dtype=float), x.shape)
    out = np.empty(x.shape, dtype=float)

    interior = (x >= h) & (x <= 1 - h)
    lo = x < h
    hi = x > 1 - h
    if np.any(interior):
        xi, wi, ui = x[interior], w[interior], u[interior]
        out[interior] = (model.base(wi, xi + h, ui) - model.base(wi, xi - h, ui)) / (2 * h)
    if np.any(lo):
        xi, wi, ui = x[lo], w[lo], u[lo]
        out[lo] = (
            -3 * model.base(wi, xi, ui)
            + 4 * model.base(wi, xi + h, ui)
            - model.base(wi, xi + 2 * h, ui)
        ) / (2 * h)
    if np.any(hi):
        xi, wi, ui = x[hi], w[hi], u[hi]
        out[hi] = (
            3 * model.base(wi, xi, ui)
            - 4 * model.base(wi, xi - h, ui)
            + model.base(wi, xi - 2 * h, ui)
        ) / (2 * h)
    return float(out[0]) if scalar else out
