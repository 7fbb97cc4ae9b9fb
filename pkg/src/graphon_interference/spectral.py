"""Top-|lambda| eigenpairs of a sparse symmetric adjacency matrix.

Seeded block subspace iteration with Rayleigh-Ritz extraction, touching the
matrix only through sparse matrix-vector products; small matrices fall back
to a dense decomposition.  Eigenvectors are returned scaled to ||psi|| =
sqrt(n) with a deterministic orientation (the entry of largest magnitude is
made positive), ordered by |lambda| descending with ties broken by signed
value and then by the first differing vector coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graphons import _seed_seq

DENSE_FALLBACK_N = 500
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 1000
_OVERSAMPLE = 6


class SolverError(RuntimeError):
    """Eigensolver failed to converge; carries the achieved residuals."""

    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray          # |values[0]| >= |values[1]| >= ...
    vectors: np.ndarray         # (n, r), columns scaled to sqrt(n)
    residual_norms: np.ndarray  # ||E v - lam v|| / (scale * ||v||) per pair
    iterations: int


def _orient(vectors: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _tie_order(values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Order by (|lam| desc, signed lam desc, first differing coordinate)."""
    import functools

    def cmp(a: int, b: int) -> int:
        if np.abs(values[a]) != np.abs(values[b]):
            return -1 if np.abs(values[a]) > np.abs(values[b]) else 1
        if values[a] != values[b]:
            return -1 if values[a] > values[b] else 1
        diff = np.nonzero(vectors[:, a] != vectors[:, b])[0]
        if diff.size == 0:
            return 0
        i = diff[0]
        return -1 if vectors[i, a] > vectors[i, b] else 1

    order = sorted(range(len(values)), key=functools.cmp_to_key(cmp))
    return np.array(order, dtype=int)


def top_abs_eigs(
    E: sp.spmatrix,
    r: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed=0,
    dense_cutoff: int = DENSE_FALLBACK_N,
) -> EigenResult:
    """The r eigenpairs of E largest in absolute eigenvalue."""
    n = E.shape[0]
    if not 1 <= r < n:
        raise ValueError("need 1 <= r < n")
    E = E.tocsr()

    scale = max(float(np.abs(E).sum(axis=1).max()), 1.0)
    sqrt_n = np.sqrt(n)

    if n <= dense_cutoff:
        lam, V = np.linalg.eigh(E.toarray())
        keep = np.argsort(-np.abs(lam))[:r]
        values = lam[keep]
        vectors = V[:, keep] * sqrt_n
        iterations = 0
    else:
        values, vectors, iterations = _subspace_iteration(E, r, tol, max_iter, seed, scale)
        vectors = vectors * (sqrt_n / np.linalg.norm(vectors, axis=0))

    vectors = _orient(vectors)
    order = _tie_order(values, vectors)
    values, vectors = values[order], vectors[:, order]
    resid = np.linalg.norm(E @ vectors - vectors * values, axis=0) / (scale * sqrt_n)
    return EigenResult(
        values=values, vectors=vectors, residual_norms=resid, iterations=iterations
    )


def _subspace_iteration(E, r, tol, max_iter, seed, scale):
    n = E.shape[0]
    b = min(n - 1, r + _OVERSAMPLE)
    rng = np.random.Generator(np.random.Philox(_seed_seq(seed, 2)))
    V, _ = np.linalg.qr(rng.standard_normal((n, b)))

    theta = np.zeros(r)
    X = V[:, :r]
    for it in range(1, max_iter + 1):
        Z = E @ V
        # Rayleigh-Ritz on the current block; E X = Z S reuses the multiply
        H = V.T @ Z
        H = 0.5 * (H + H.T)
        ritz, S = np.linalg.eigh(H)
        top = np.argsort(-np.abs(ritz))[:r]
        theta = ritz[top]
        X = V @ S[:, top]
        resid = np.linalg.norm(Z @ S[:, top] - X * theta, axis=0) / scale
        if np.all(resid <= tol):
            return theta, X, it
        V, _ = np.linalg.qr(Z)

    resid = np.linalg.norm(E @ X - X * theta, axis=0) / scale
    raise SolverError(
        f"subspace iteration did not reach tol={tol:g} within {max_iter} iterations "
        f"(achieved residuals {resid})",
        residuals=resid,
    )
