"""Point estimators for direct, indirect, and total effects.

All estimators are pure functions of one realized experiment.  The PC
balancing estimators remove the dominant noise component of the unbiased
indirect-effect weights by balancing the top adjacency eigenvectors; the
correction is canonicalized internally (eigenpair order and orientation), so
the estimate is bit-identical under any sign flips or reordering of the
supplied eigenpairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .graphons import SampledNetwork
from .spectral import EigenResult, _orient, _tie_order, top_abs_eigs


class DegenerateArmError(ValueError):
    """Raised when an estimator needs both arms non-empty."""


@dataclass(frozen=True)
class PCBalanceDiagnostics:
    rank: int
    eigenvalues: np.ndarray
    beta: np.ndarray
    residuals: np.ndarray  # per-k balance-equation residual / ||weights||


@dataclass(frozen=True)
class EstimateRecord:
    name: str
    value: float
    aux: Optional[dict] = field(default=None)


def _check_pi(pi: float):
    if not 0 < pi < 1:
        raise ValueError("treatment probability pi must lie strictly in (0,1)")


def ht_direct(Y, W, pi: float) -> float:
    """Horvitz-Thompson (inverse propensity weighted) direct-effect estimate."""
    _check_pi(pi)
    Y = np.asarray(Y, dtype=float)
    W = np.asarray(W, dtype=float)
    n = Y.size
    return float((W @ Y) / (pi * n) - ((1 - W) @ Y) / ((1 - pi) * n))


def hajek_direct(Y, W) -> float:
    """Treated mean minus control mean (shift invariant)."""
    Y = np.asarray(Y, dtype=float)
    W = np.asarray(W)
    treated = W == 1
    if not treated.any() or treated.all():
        raise DegenerateArmError("Hajek estimator needs both arms non-empty")
    return float(Y[treated].mean() - Y[~treated].mean())


def v_hat(Y, W, M, N, pi: float, pi_prime: float) -> float:
    """Horvitz-Thompson estimate of the mean outcome under design pi_prime.

    Weights are accumulated in log space; exponents grow with the degree, so
    the direct product form overflows long before the estimate itself does.
    """
    _check_pi(pi)
    _check_pi(pi_prime)
    Y = np.asarray(Y, dtype=float)
    W = np.asarray(W, dtype=float)
    M = np.asarray(M, dtype=float)
    N = np.asarray(N, dtype=float)
    log_w = (M + W) * np.log(pi_prime / pi) + (N - M + 1 - W) * np.log(
        (1 - pi_prime) / (1 - pi)
    )
    shift = np.max(log_w)
    scaled = np.exp(log_w - shift) * Y
    total = scaled.sum()
    if total == 0.0:
        return 0.0
    if shift <= 700.0:
        return float(total * np.exp(shift)) / Y.size
    log_abs = shift + np.log(abs(total))
    if log_abs > 709.0:  # exp would overflow float64
        raise OverflowError("v_hat weights overflow: pi_prime too far from pi")
    return float(np.sign(total) * np.exp(log_abs)) / Y.size


def unbiased_total(Y, W, M, N, pi: float) -> float:
    """Derivative-of-v_hat estimator of the total effect."""
    _check_pi(pi)
    Y = np.asarray(Y, dtype=float)
    W = np.asarray(W, dtype=float)
    M = np.asarray(M, dtype=float)
    N = np.asarray(N, dtype=float)
    weights = (M + W) / pi - (N - M + 1 - W) / (1 - pi)
    return float(Y @ weights) / Y.size


def unbiased_indirect(Y, W, M, N, pi: float) -> float:
    """Unbiased indirect-effect estimator (treated-neighbor count weights)."""
    _check_pi(pi)
    Y = np.asarray(Y, dtype=float)
    M = np.asarray(M, dtype=float)
    N = np.asarray(N, dtype=float)
    weights = M / pi - (N - M) / (1 - pi)
    return float(Y @ weights) / Y.size


def _indirect_weights(M, N, pi):
    return np.asarray(M, dtype=float) / pi - (np.asarray(N, dtype=float) - np.asarray(M, dtype=float)) / (1 - pi)


def _canonical_eigs(eigs: EigenResult):
    vectors = _orient(np.array(eigs.vectors, dtype=float))
    order = _tie_order(np.asarray(eigs.values, dtype=float), vectors)
    return np.asarray(eigs.values, dtype=float)[order], vectors[:, order]


def pc_balancing_indirect(
    Y,
    W,
    net: SampledNetwork,
    pi: float,
    r: int,
    eigs: Optional[EigenResult] = None,
    solver_seed=0,
) -> tuple[float, PCBalanceDiagnostics]:
    """PC balancing estimator of the indirect effect.

    Balances the unbiased weights against the top-r adjacency eigenvectors;
    with eigenvectors scaled to ||psi||^2 = n and exactly orthogonal, the
    balance equations have the closed-form solution
    beta_k = -(1/n) sum_i psi_ki (M_i/pi - (N_i - M_i)/(1-pi)).
    """
    _check_pi(pi)
    if net.E.nnz == 0:
        raise ValueError("PC balancing needs a non-empty graph")
    if eigs is None:
        eigs = top_abs_eigs(net.E, r=r, seed=solver_seed)
    values, vectors = _canonical_eigs(eigs)
    values, vectors = values[:r], vectors[:, :r]

    Y = np.asarray(Y, dtype=float)
    W = np.asarray(W)
    M, N = net_neighbor_counts(net, W)
    n = net.n
    w = _indirect_weights(M, N, pi)
    beta = -(vectors.T @ w) / n
    adjusted = w + vectors @ beta
    residuals = np.abs(vectors.T @ adjusted) / max(np.linalg.norm(w), 1e-300)
    estimate = float(Y @ adjusted) / n
    diag = PCBalanceDiagnostics(
        rank=r, eigenvalues=values, beta=beta, residuals=residuals
    )
    return estimate, diag


def pc_balancing_total(
    Y, W, net: SampledNetwork, pi: float, r: int, eigs=None, solver_seed=0
) -> float:
    """PC balancing indirect estimate plus the Horvitz-Thompson direct estimate."""
    ind, _ = pc_balancing_indirect(Y, W, net, pi, r, eigs=eigs, solver_seed=solver_seed)
    return ind + ht_direct(Y, W, pi)


def oracle_pc_indirect(Y, W, net: SampledNetwork, pi: float, psi_values: np.ndarray) -> float:
    """PC balancing with the true eigenfunctions evaluated at the latent types.

    The true psi_k(U_i) columns are not exactly orthogonal in sample, so the
    balance coefficients solve the r x r Gram system instead of using the
    closed form.
    """
    _check_pi(pi)
    Y = np.asarray(Y, dtype=float)
    psi = np.asarray(psi_values, dtype=float)
    if psi.ndim == 1:
        psi = psi[:, None]
    M, N = net_neighbor_counts(net, W)
    w = _indirect_weights(M, N, pi)
    gram = psi.T @ psi
    try:
        beta = np.linalg.solve(gram, -(psi.T @ w))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"singular Gram system in oracle PC balancing: {exc}")
    adjusted = w + psi @ beta
    return float(Y @ adjusted) / net.n


def net_neighbor_counts(net: SampledNetwork, W):
    W = np.asarray(W)
    M = np.asarray(net.E @ W.astype(np.float64)).ravel()
    return np.rint(M).astype(np.int64), net.N


def plug_in_variance(Y, W, pi: float) -> float:
    """Arm-wise plug-in variance nu1/pi + nu0/(1-pi) (no-interference form)."""
    _check_pi(pi)
    Y = np.asarray(Y, dtype=float)
    W = np.asarray(W)
    treated = W == 1
    if not treated.any() or treated.all():
        raise DegenerateArmError("plug-in variance needs both arms non-empty")
    y1, y0 = Y[treated], Y[~treated]
    nu1 = float(np.mean((y1 - y1.mean()) ** 2))
    nu0 = float(np.mean((y0 - y0.mean()) ** 2))
    return nu1 / pi + nu0 / (1 - pi)
