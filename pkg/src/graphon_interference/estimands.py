"""Ground-truth effect targets.

Exhaustive estimands enumerate all 2^n Bernoulli-weighted assignments on a
small fixed graph (exact, zero-noise); population estimands evaluate the
large-sample direct/indirect formulas by quadrature or Monte Carlo over the
latent type distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphons import FeasibilityError, SampledNetwork, _gauss_legendre_01, _seed_seq
from .outcomes import OutcomeModel, evaluate_mean, partial_x

EXHAUSTIVE_MAX_N = 20
_CHUNK = 4096


@dataclass(frozen=True)
class EstimandSet:
    tau_dir: float
    tau_ind: float
    tau_tot: float
    flavor: str  # "sample-exhaustive" | "population"


def _assignment_chunks(n: int):
    total = 1 << n
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        W = ((codes[:, None] >> np.arange(n, dtype=np.uint64)) & 1).astype(np.float64)
        yield W


def _log_weights(W: np.ndarray, pi: float) -> np.ndarray:
    k = W.sum(axis=1)
    n = W.shape[1]
    return k * np.log(pi) + (n - k) * np.log1p(-pi)


def exhaustive_estimands(net: SampledNetwork, model: OutcomeModel, pi: float) -> EstimandSet:
    """Exact Bernoulli-design estimands on a graph with n <= 20 units.

    The total effect is the analytic pi-derivative of the mean-outcome
    polynomial; direct/indirect follow their own definitions (flip one unit,
    measure own/others' responses), so the decomposition identity is a
    genuine check rather than being built in.
    """
    n = net.n
    if n > EXHAUSTIVE_MAX_N:
        raise FeasibilityError(f"exhaustive enumeration supports n <= {EXHAUSTIVE_MAX_N}")
    if not 0 < pi < 1:
        raise ValueError("treatment probability pi must lie strictly in (0,1)")

    A = net.E.toarray()
    N = net.N.astype(float)
    U = net.U
    safe_N = np.where(N > 0, N, 1.0)
    src, dst = net.E.nonzero()  # directed edge list: flipping src moves dst's fraction

    mean_by_count = np.zeros(n + 1)  # S_k = sum over |W|=k of mean outcome
    tau_dir = 0.0
    tau_ind = 0.0

    for W in _assignment_chunks(n):
        counts = W.sum(axis=1).astype(int)
        weights = np.exp(_log_weights(W, pi))
        M = W @ A
        frac = M / safe_N

        Ubc = np.broadcast_to(U, W.shape)
        y = evaluate_mean(model, W, frac, Ubc)
        np.add.at(mean_by_count, counts, y.mean(axis=1))

        d = evaluate_mean(model, np.ones_like(W), frac, Ubc) - evaluate_mean(
            model, np.zeros_like(W), frac, Ubc
        )
        tau_dir += float(weights @ d.mean(axis=1))

        if src.size:
            # effect on neighbor dst of flipping src's treatment 0 -> 1
            m_dst = M[:, dst]
            w_src = W[:, src]
            frac_up = (m_dst - w_src + 1.0) / N[dst]
            frac_dn = (m_dst - w_src) / N[dst]
            w_dst = W[:, dst]
            u_dst = np.broadcast_to(U[dst], w_dst.shape)
            delta = evaluate_mean(model, w_dst, frac_up, u_dst) - evaluate_mean(
                model, w_dst, frac_dn, u_dst
            )
            tau_ind += float(weights @ delta.sum(axis=1)) / n

    tau_tot = _polynomial_total_effect(mean_by_count, pi)
    return EstimandSet(tau_dir=tau_dir, tau_ind=tau_ind, tau_tot=tau_tot, flavor="sample-exhaustive")


def _polynomial_total_effect(mean_by_count: np.ndarray, pi: float) -> float:
    """d/dpi of sum_k S_k pi^k (1-pi)^(n-k), evaluated term by term."""
    n = len(mean_by_count) - 1
    k = np.arange(n + 1, dtype=float)
    with np.errstate(divide="ignore"):
        term_up = np.where(k > 0, k * pi ** np.maximum(k - 1, 0) * (1 - pi) ** (n - k), 0.0)
        term_dn = np.where(k < n, (n - k) * pi**k * (1 - pi) ** np.maximum(n - k - 1, 0), 0.0)
    return float(mean_by_count @ (term_up - term_dn))


def mean_outcome_curve(net: SampledNetwork, model: OutcomeModel, pi: float) -> float:
    """Exhaustive mean outcome V(pi) on a small graph (finite-difference oracle)."""
    n = net.n
    if n > EXHAUSTIVE_MAX_N:
        raise FeasibilityError(f"exhaustive enumeration supports n <= {EXHAUSTIVE_MAX_N}")
    A = net.E.toarray()
    safe_N = np.where(net.N > 0, net.N, 1.0)
    total = 0.0
    for W in _assignment_chunks(n):
        weights = np.exp(_log_weights(W, pi))
        frac = (W @ A) / safe_N
        y = evaluate_mean(model, W, frac, np.broadcast_to(net.U, W.shape))
        total += float(weights @ y.mean(axis=1))
    return total


def exhaustive_estimator_expectation(net, model, pi: float, estimator) -> float:
    """Exact E over all 2^n assignments of a statistic of (Y, W, M, N).

    `estimator` is called as estimator(Y, W, M, N) per assignment; outcomes
    are zero-noise means, so this is the randomization-distribution mean.
    """
    n = net.n
    if n > EXHAUSTIVE_MAX_N:
        raise FeasibilityError(f"exhaustive enumeration supports n <= {EXHAUSTIVE_MAX_N}")
    A = net.E.toarray()
    N = net.N
    safe_N = np.where(N > 0, N, 1.0)
    total = 0.0
    for W in _assignment_chunks(n):
        weights = np.exp(_log_weights(W, pi))
        M = W @ A
        frac = M / safe_N
        Y = evaluate_mean(model, W, frac, np.broadcast_to(net.U, W.shape))
        vals = np.array(
            [estimator(Y[b], W[b], M[b], N) for b in range(W.shape[0])]
        )
        total += float(weights @ vals)
    return total


def population_estimands(
    spec,
    model: OutcomeModel,
    pi: float,
    mc: int = 0,
    seed=0,
) -> EstimandSet:
    """Limiting estimands E[f(1,pi,U) - f(0,pi,U)] and E[pi f'(1) + (1-pi) f'(0)].

    These depend on the outcome model only; `spec` is accepted for interface
    symmetry with the sampled-graph estimands.  mc = 0 uses 128-node
    Gauss-Legendre quadrature (exact for polynomial models); mc > 0 averages
    over that many seeded uniform draws.
    """
    if not 0 < pi < 1:
        raise ValueError("treatment probability pi must lie strictly in (0,1)")
    del spec
    if mc > 0:
        rng = np.random.Generator(np.random.Philox(_seed_seq(seed)))
        u = rng.uniform(size=mc)
        weights = np.full(mc, 1.0 / mc)
    else:
        u, weights = _gauss_legendre_01(128)
    x = np.full(u.shape, pi)
    ones = np.ones_like(u)
    zeros = np.zeros_like(u)
    tau_dir = float(
        weights @ (evaluate_mean(model, ones, x, u) - evaluate_mean(model, zeros, x, u))
    )
    tau_ind = float(
        weights
        @ (pi * partial_x(model, ones, x, u) + (1 - pi) * partial_x(model, zeros, x, u))
    )
    return EstimandSet(
        tau_dir=tau_dir, tau_ind=tau_ind, tau_tot=tau_dir + tau_ind, flavor="population"
    )
