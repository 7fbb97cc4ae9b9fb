"""Bernoulli assignment, neighborhood statistics, and outcome realization.

Treatment and outcome noise use independent named streams so a fixed graph
can be re-randomized (fresh W) or re-noised (fresh epsilon) independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphons import SampledNetwork, _seed_seq
from .outcomes import OutcomeModel, evaluate_mean


@dataclass(frozen=True)
class ExperimentRealization:
    """One randomized experiment on a sampled network."""

    W: np.ndarray
    pi: float
    M: np.ndarray
    N: np.ndarray
    frac: np.ndarray
    Y: np.ndarray


def assign_bernoulli(n: int, pi: float, seed) -> np.ndarray:
    """i.i.d. Bernoulli(pi) treatment vector, deterministic given seed."""
    if not 0 < pi < 1:
        raise ValueError("treatment probability pi must lie strictly in (0,1)")
    rng = np.random.Generator(np.random.Philox(_seed_seq(seed)))
    return (rng.uniform(size=n) < pi).astype(np.int64)


def neighbor_stats(net: SampledNetwork, W: np.ndarray):
    """Treated-neighbor counts M and fractions M/N with the 0/0 = 0 convention."""
    W = np.asarray(W)
    if W.shape != (net.n,):
        raise ValueError("treatment vector length must match the network size")
    M = np.asarray(net.E @ W.astype(np.float64)).ravel()
    M = np.rint(M).astype(np.int64)
    frac = np.divide(M, net.N, out=np.zeros(net.n, dtype=float), where=net.N > 0)
    return M, frac


def realize(
    net: SampledNetwork,
    model: OutcomeModel,
    W: np.ndarray,
    pi: float,
    noise_seed=0,
) -> ExperimentRealization:
    """Observed outcomes Y_i = f(W_i, M_i/N_i, U_i) + noise."""
    M, frac = neighbor_stats(net, W)
    Y = evaluate_mean(model, np.asarray(W), frac, net.U).astype(float)
    if model.noise_sd > 0:
        rng = np.random.Generator(np.random.Philox(_seed_seq(noise_seed)))
        Y = Y + model.noise_sd * rng.standard_normal(net.n)
    return ExperimentRealization(W=np.asarray(W), pi=pi, M=M, N=net.N, frac=frac, Y=Y)
