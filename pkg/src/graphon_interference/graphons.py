"""Parametric graphons, sparsity scaling, and exposure-graph sampling.

A graphon here is a symmetric nonnegative kernel G on [0,1]^2. Networks are
sampled by drawing latent types U_i ~ Uniform[0,1] i.i.d. and connecting each
unordered pair {i,j} independently with probability min(1, rho * G(U_i, U_j)).

Randomness is counter-based (Philox): the latent types use the stream
SeedSequence((seed, 0)) and the edges of row block b use
SeedSequence((seed, 1, b)).  Blocks are independent of each other, so the
sampled network does not depend on the order in which row blocks are
processed, and two calls with the same seed are bit-identical.  For
n <= DENSE_CROSSOVER every pair in a row draws its own uniform; above the
crossover, rows are scanned with geometric skipping at the proposal rate
p_max = min(1, rho * sup G) and proposals are thinned down to the exact
pair probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

DENSE_CROSSOVER = 2000
ROW_BLOCK = 1024
DEFAULT_EDGE_CAP = 2.0e8


class GraphonConfigError(ValueError):
    """Raised for unknown graphon kinds or invalid parameters."""


class UnsupportedEigenstructureError(RuntimeError):
    """Raised when a graphon has no declared low-rank eigensystem."""


class FeasibilityError(RuntimeError):
    """Raised before sampling when the expected edge count exceeds the cap."""


@dataclass(frozen=True)
class SparsityRule:
    """Edge-probability scaling rho_n: dense (rho=1) or power law n**(-exponent)."""

    form: str = "dense"
    exponent: float = 0.0

    def __post_init__(self):
        if self.form not in ("dense", "power"):
            raise GraphonConfigError(f"unknown sparsity form {self.form!r}")
        if self.form == "power" and not 0 < self.exponent < 1:
            raise GraphonConfigError("power-law exponent must lie in (0, 1)")

    def rho(self, n: int) -> float:
        if self.form == "dense":
            return 1.0
        return float(n) ** (-self.exponent)


@dataclass(frozen=True)
class SampledNetwork:
    """Latent types, sparse symmetric adjacency, and degrees of one draw."""

    n: int
    U: np.ndarray
    E: sp.csr_matrix
    N: np.ndarray

    def __post_init__(self):
        self.U.setflags(write=False)
        self.N.setflags(write=False)


class Graphon:
    """Base class: a symmetric nonnegative kernel with known supremum."""

    #: exact upper bound of G on [0,1]^2, set by subclasses
    sup: float

    def evaluate(self, u, v):
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Interior discontinuity locations of u -> G(u, .) (for quadrature)."""
        return ()

    def eigensystem(self) -> list[tuple[float, Callable[[np.ndarray], np.ndarray]]]:
        """Pairs (lambda_k, psi_k) with sum_k lambda_k psi_k(u) psi_k(v) = G(u,v),
        E[psi_k^2] = 1 and E[psi_k psi_l] = 0, ordered by |lambda| descending."""
        raise UnsupportedEigenstructureError(
            f"{type(self).__name__} has no declared low-rank eigensystem"
        )

    def mean_degree_fn(self) -> Callable[[np.ndarray], np.ndarray]:
        """g(u) = E[G(u, V)], V ~ Uniform[0,1]; numeric quadrature fallback."""
        nodes, weights = _gauss_legendre_01(256)

        def g(u):
            u = np.asarray(u, dtype=float)
            return self.evaluate(u[..., None], nodes) @ weights

        return g

    def mean_value(self) -> float:
        """E[G(U, V)] for independent uniforms."""
        nodes, weights = _gauss_legendre_01(256)
        g = self.mean_degree_fn()
        return float(g(nodes) @ weights)


def _gauss_legendre_01(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def _blocks_from_boundaries(boundaries: Sequence[float]) -> np.ndarray:
    edges = np.asarray([0.0, *boundaries, 1.0], dtype=float)
    if np.any(np.diff(edges) <= 0):
        raise GraphonConfigError("block boundaries must be strictly increasing in (0,1)")
    return edges


class _PiecewiseConstantGraphon(Graphon):
    """Kernel constant on the cells of a product partition of [0,1].

    Subclasses provide the partition edges and the symmetric block matrix K;
    evaluation, g(u) and the eigensystem all reduce to finite linear algebra
    on K weighted by the block lengths.
    """

    def __init__(self, edges: np.ndarray, K: np.ndarray):
        if not np.allclose(K, K.T):
            raise GraphonConfigError("block matrix must be symmetric")
        if np.any(K < 0):
            raise GraphonConfigError("block matrix must be nonnegative")
        self._edges = edges
        self._K = K
        self._p = np.diff(edges)
        self.sup = float(K.max())

    def breakpoints(self):
        return tuple(float(x) for x in self._edges[1:-1])

    def _block(self, u):
        u = np.asarray(u, dtype=float)
        return np.clip(np.searchsorted(self._edges, u, side="right") - 1, 0, len(self._p) - 1)

    def evaluate(self, u, v):
        return self._K[self._block(u), self._block(v)]

    def mean_degree_fn(self):
        gvals = self._K @ self._p

        def g(u):
            return gvals[self._block(u)]

        return g

    def mean_value(self) -> float:
        return float(self._p @ self._K @ self._p)

    def eigensystem(self):
        # Diagonalize the kernel as an operator on L2[0,1]: with S = diag(sqrt(p)),
        # eigenpairs of S K S give orthonormal piecewise-constant eigenfunctions.
        s = np.sqrt(self._p)
        lam, V = np.linalg.eigh(s[:, None] * self._K * s[None, :])
        order = np.argsort(-np.abs(lam))
        out = []
        for j in order:
            if abs(lam[j]) < 1e-12:
                continue
            values = V[:, j] / s
            out.append((float(lam[j]), _PiecewiseEvaluator(self._edges, values.copy())))
        return out


class _PiecewiseEvaluator:
    """Piecewise-constant eigenfunction evaluator (picklable)."""

    def __init__(self, edges: np.ndarray, values: np.ndarray):
        self._edges = edges
        self._values = values

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        idx = np.clip(np.searchsorted(self._edges, u, side="right") - 1, 0, len(self._values) - 1)
        return self._values[idx]


class Constant(Graphon):
    """G(u,v) = c."""

    def __init__(self, value: float):
        if value < 0:
            raise GraphonConfigError("constant graphon must be nonnegative")
        self.value = float(value)
        self.sup = self.value

    def evaluate(self, u, v):
        u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
        return np.broadcast_to(np.float64(self.value), np.broadcast_shapes(u.shape, v.shape)).copy()

    def mean_degree_fn(self):
        value = self.value

        def g(u):
            u = np.asarray(u, dtype=float)
            return np.full(u.shape, value)

        return g

    def mean_value(self):
        return self.value

    def eigensystem(self):
        return [(self.value, _ConstantOne())]


class _ConstantOne:
    def __call__(self, u):
        return np.ones_like(np.asarray(u, dtype=float))


class BlockModel(_PiecewiseConstantGraphon):
    """G = base + within * 1{same block}, blocks cut at the given boundaries."""

    def __init__(self, boundaries: Sequence[float], within: float, base: float):
        edges = _blocks_from_boundaries(boundaries)
        k = len(edges) - 1
        K = np.full((k, k), float(base)) + float(within) * np.eye(k)
        super().__init__(edges, K)
        self.boundaries, self.within, self.base = tuple(boundaries), float(within), float(base)


class StepMin(_PiecewiseConstantGraphon):
    """G(u,v) = levels[min(block(u), block(v))] on equal-width blocks."""

    def __init__(self, levels: Sequence[float]):
        k = len(levels)
        edges = np.linspace(0.0, 1.0, k + 1)
        lv = np.asarray(levels, dtype=float)
        K = lv[np.minimum.outer(np.arange(k), np.arange(k))]
        super().__init__(edges, K)
        self.levels = tuple(float(x) for x in levels)


class Star(_PiecewiseConstantGraphon):
    """G(u,v) = a * 1{u <= eta or v <= eta}: a small nucleus linked to everyone."""

    def __init__(self, eta: float, a: float):
        if not 0 < eta < 1:
            raise GraphonConfigError("star nucleus eta must lie in (0,1)")
        K = np.array([[a, a], [a, 0.0]], dtype=float)
        super().__init__(np.array([0.0, eta, 1.0]), K)
        self.eta, self.a = float(eta), float(a)


class DisjointCommunities(_PiecewiseConstantGraphon):
    """G = a0^2 + 1{u,v in same I_k} a_k^2 with constant factor levels.

    `intervals` are disjoint sub-intervals of [0,1]; a0 applies globally,
    a_k inside community k.
    """

    def __init__(self, intervals: Sequence[tuple[float, float]], a0: float, a: Sequence[float]):
        if len(intervals) != len(a):
            raise GraphonConfigError("need one community factor per interval")
        cuts = sorted({0.0, 1.0, *(x for iv in intervals for x in iv)})
        edges = np.asarray(cuts)
        k = len(edges) - 1
        mids = 0.5 * (edges[:-1] + edges[1:])
        K = np.full((k, k), float(a0) ** 2)
        for (lo, hi), ak in zip(intervals, a):
            inside = (mids > lo) & (mids < hi)
            K[np.ix_(inside, inside)] += float(ak) ** 2
        super().__init__(edges, K)
        self.intervals = tuple((float(lo), float(hi)) for lo, hi in intervals)
        self.a0, self.a = float(a0), tuple(float(x) for x in a)


class _Rank1(Graphon):
    """G(u,v) = a(u) a(v) for a nonnegative factor function a."""

    def _factor(self, u):
        raise NotImplementedError

    def evaluate(self, u, v):
        return self._factor(np.asarray(u, dtype=float)) * self._factor(np.asarray(v, dtype=float))

    def _factor_moments(self):
        nodes, weights = _gauss_legendre_01(256)
        a = self._factor(nodes)
        return float(a @ weights), float((a * a) @ weights)

    def mean_degree_fn(self):
        abar, _ = self._factor_moments()

        def g(u):
            return self._factor(np.asarray(u, dtype=float)) * abar

        return g

    def mean_value(self):
        abar, _ = self._factor_moments()
        return abar * abar

    def eigensystem(self):
        _, a2 = self._factor_moments()
        return [(a2, _ScaledFactor(self, 1.0 / math.sqrt(a2)))]


class _ScaledFactor:
    def __init__(self, graphon: "_Rank1", scale: float):
        self._graphon = graphon
        self._scale = scale

    def __call__(self, u):
        return self._graphon._factor(np.asarray(u, dtype=float)) * self._scale


class Rank1Step(_Rank1):
    """Factor a(u) = low + jump * 1{u > threshold} (piecewise-constant rank-1)."""

    def __init__(self, low: float, jump: float, threshold: float):
        self.low, self.jump, self.threshold = float(low), float(jump), float(threshold)
        amax = max(self.low, self.low + self.jump)
        self.sup = amax * amax

    def breakpoints(self):
        return (self.threshold,)

    def _factor(self, u):
        return self.low + self.jump * (u > self.threshold)

    def _factor_moments(self):
        t = self.threshold
        abar = self.low + self.jump * (1 - t)
        a2 = self.low**2 * t + (self.low + self.jump) ** 2 * (1 - t)
        return abar, a2


class Rank1Sin(_Rank1):
    """Factor a(u) = amplitude * sin(2 pi u) + offset."""

    def __init__(self, amplitude: float, offset: float):
        if abs(amplitude) > offset:
            raise GraphonConfigError("sine factor must stay nonnegative")
        self.amplitude, self.offset = float(amplitude), float(offset)
        amax = self.offset + abs(self.amplitude)
        self.sup = amax * amax

    def _factor(self, u):
        return self.amplitude * np.sin(2 * np.pi * u) + self.offset


class Rank1Quartic(_Rank1):
    """Factor a(u) = scale * (u + 1)^4 + offset."""

    def __init__(self, scale: float, offset: float):
        self.scale, self.offset = float(scale), float(offset)
        amax = self.scale * 16.0 + self.offset
        self.sup = amax * amax

    def _factor(self, u):
        return self.scale * (u + 1.0) ** 4 + self.offset


class Rank3Poly(Graphon):
    """G(u,v) = sum_k c_k (u v)^k for k = 1..3, diagonal in the monomial basis.

    The orthonormal eigensystem is obtained by diagonalizing the coefficient
    matrix with respect to the monomial Gram matrix M_kl = 1/(k+l+1).
    """

    def __init__(self, coefficients: Sequence[float]):
        if len(coefficients) != 3:
            raise GraphonConfigError("Rank3Poly takes exactly three coefficients")
        self.coefficients = tuple(float(c) for c in coefficients)
        grid = np.linspace(0.0, 1.0, 20001)
        diag = self.evaluate(grid, grid)
        if diag.min() < -1e-12:
            raise GraphonConfigError("polynomial kernel goes negative on the diagonal")
        # For a PSD separable kernel sum c_k s^k (s = u v in [0,1]) the sup over
        # the square is attained on the diagonal u = v.
        self.sup = float(diag.max())

    def evaluate(self, u, v):
        s = np.asarray(u, dtype=float) * np.asarray(v, dtype=float)
        c1, c2, c3 = self.coefficients
        return s * (c1 + s * (c2 + s * c3))

    def mean_degree_fn(self):
        c = self.coefficients

        def g(u):
            u = np.asarray(u, dtype=float)
            return u * (c[0] / 2 + u * (c[1] / 3 + u * c[2] / 4))

        return g

    def mean_value(self):
        return sum(ck / (k + 2) ** 2 for k, ck in enumerate(self.coefficients))

    def eigensystem(self):
        powers = np.arange(1, 4)
        M = 1.0 / (powers[:, None] + powers[None, :] + 1.0)
        mlam, mvec = np.linalg.eigh(M)
        S = mvec @ np.diag(np.sqrt(mlam)) @ mvec.T
        Sinv = mvec @ np.diag(1.0 / np.sqrt(mlam)) @ mvec.T
        C = np.diag(self.coefficients)
        lam, V = np.linalg.eigh(S @ C @ S)
        A = V.T @ Sinv  # rows: coefficients of psi_j in the monomial basis
        order = np.argsort(-np.abs(lam))
        out = []
        for j in order:
            if abs(lam[j]) < 1e-12:
                continue
            out.append((float(lam[j]), _MonomialEvaluator(A[j].copy())))
        return out


class _MonomialEvaluator:
    """psi(u) = a1 u + a2 u^2 + a3 u^3."""

    def __init__(self, coeffs: np.ndarray):
        self._coeffs = coeffs

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        a1, a2, a3 = self._coeffs
        return u * (a1 + u * (a2 + u * a3))


def eval_graphon(spec: Graphon, u, v):
    """G(u,v); raises for arguments outside [0,1]."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u < 0) or np.any(u > 1) or np.any(v < 0) or np.any(v > 1):
        raise ValueError("graphon arguments must lie in [0,1]")
    return spec.evaluate(u, v)


def edge_probability(spec: Graphon, rho: float, u, v):
    """min(1, rho * G(u,v)) for rho in (0,1]."""
    if not 0 < rho <= 1:
        raise ValueError("sparsity level rho must lie in (0,1]")
    return np.minimum(1.0, rho * eval_graphon(spec, u, v))


def true_eigensystem(spec: Graphon):
    """Declared (lambda_k, psi_k) pairs ordered by |lambda| descending."""
    return spec.eigensystem()


def _edge_rng(seed, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(_seed_seq(seed, 1, block)))


def _seed_seq(seed, *tail) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(
            entropy=seed.entropy, spawn_key=(*seed.spawn_key, *tail)
        )
    if isinstance(seed, (tuple, list)):
        return np.random.SeedSequence(entropy=(*(int(s) for s in seed), *tail))
    return np.random.SeedSequence(entropy=(int(seed), *tail))


def _sample_row_dense(rng, i, n, probs_row):
    u = rng.uniform(size=n - i - 1)
    return i + 1 + np.nonzero(u < probs_row)[0]


def _row_proposals(rng, span: int, p: float) -> np.ndarray:
    """Indices in [0, span) hit by geometric skipping at rate p."""
    if span <= 0 or p <= 0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(span, dtype=np.int64)
    out = []
    pos = -1
    expected = span * p
    batch = max(16, int(expected + 6.0 * math.sqrt(expected + 1.0)))
    while pos < span:
        gaps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(gaps)
        out.append(idx)
        pos = int(idx[-1])
    idx = np.concatenate(out)
    return idx[idx < span]


def network_from_edges(n: int, edges, U=None) -> SampledNetwork:
    """Fixed network from an explicit undirected edge list (0-based pairs)."""
    ii = np.array([i for i, _ in edges], dtype=np.int64)
    jj = np.array([j for _, j in edges], dtype=np.int64)
    if ii.size and (ii == jj).any():
        raise ValueError("self-loops are not allowed")
    data = np.ones(2 * ii.size, dtype=np.float64)
    E = sp.csr_matrix(
        (data, (np.concatenate([ii, jj]), np.concatenate([jj, ii]))), shape=(n, n)
    )
    E.sort_indices()
    if E.nnz and E.data.max() > 1:
        raise ValueError("duplicate edges in edge list")
    U = np.linspace(0.0, 1.0, n) if U is None else np.asarray(U, dtype=float)
    N = np.asarray(E.sum(axis=1)).ravel().astype(np.int64)
    return SampledNetwork(n=n, U=U, E=E, N=N)


def sample_network(
    spec: Graphon,
    n: int,
    rho: float,
    seed,
    *,
    edge_cap: float = DEFAULT_EDGE_CAP,
) -> SampledNetwork:
    """Sample latent types and the Bernoulli exposure graph.

    Deterministic given `seed`; see the module docstring for the stream layout.
    """
    if n < 2:
        raise ValueError("need at least two units")
    if not 0 < rho <= 1:
        raise ValueError("sparsity level rho must lie in (0,1]")

    expected = 0.5 * n * (n - 1) * min(1.0, rho * spec.mean_value())
    if expected > edge_cap:
        raise FeasibilityError(
            f"expected edge count {expected:.3g} exceeds cap {edge_cap:.3g}"
        )

    rng_u = np.random.Generator(np.random.Philox(_seed_seq(seed, 0)))
    U = rng_u.uniform(size=n)

    p_max = min(1.0, rho * spec.sup)
    rows_i: list[np.ndarray] = []
    rows_j: list[np.ndarray] = []
    use_dense = n <= DENSE_CROSSOVER

    for block_start in range(0, n, ROW_BLOCK):
        rng = _edge_rng(seed, block_start // ROW_BLOCK)
        for i in range(block_start, min(block_start + ROW_BLOCK, n)):
            span = n - i - 1
            if span <= 0:
                continue
            if use_dense:
                probs = np.minimum(1.0, rho * spec.evaluate(U[i], U[i + 1 :]))
                j = i + 1 + np.nonzero(rng.uniform(size=span) < probs)[0]
            else:
                cand = i + 1 + _row_proposals(rng, span, p_max)
                if cand.size:
                    accept_p = rho * spec.evaluate(U[i], U[cand]) / p_max
                    j = cand[rng.uniform(size=cand.size) < accept_p]
                else:
                    j = cand
            if j.size:
                rows_i.append(np.full(j.size, i, dtype=np.int64))
                rows_j.append(j.astype(np.int64))

    if rows_i:
        ii = np.concatenate(rows_i)
        jj = np.concatenate(rows_j)
    else:
        ii = jj = np.empty(0, dtype=np.int64)
    data = np.ones(2 * ii.size, dtype=np.float64)
    E = sp.csr_matrix(
        (data, (np.concatenate([ii, jj]), np.concatenate([jj, ii]))), shape=(n, n)
    )
    E.sort_indices()
    N = np.asarray(E.sum(axis=1)).ravel().astype(np.int64)
    return SampledNetwork(n=n, U=U, E=E, N=N)
