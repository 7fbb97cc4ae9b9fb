"""Asymptotic-variance predictions for the direct and indirect estimators.

Direct-effect CLT components are moments of

    R(u) = f(1,pi,u)/pi + f(0,pi,u)/(1-pi),
    Q(u) = E[ G(u,V) * (f'(1,pi,V) - f'(0,pi,V)) / g(V) ],     g(v) = E[G(v,U)],

computed either in closed form (constant and rank-1 graphons, where G/g does
not depend on V) or by nested Monte Carlo with antithetic outer draws and a
debiased inner second moment.  Additive outcome noise enters the R moments
analytically through its known variance, never by simulation.

The indirect-effect CLT variance is

    sigma_ind^2 = E[G(U1,U2)(alpha1^2 + alpha1 alpha2)]
                  + E[g(U1) eta1^2] / (pi (1-pi)),

with alpha = f(1,pi,u) - f(0,pi,u), b = pi f(1,pi,u) + (1-pi) f(0,pi,u), and
eta the residual of b after projecting out the top-r graphon eigenfunctions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graphons import Constant, Graphon, _Rank1, _gauss_legendre_01, _seed_seq
from .outcomes import OutcomeModel, evaluate_mean, partial_x

_G1_GRID = 512
_G1_FLOOR = 1e-8


class PreconditionError(RuntimeError):
    """Raised when the graphon's mean-degree function is degenerate."""


@dataclass(frozen=True)
class MCConfig:
    outer: int = 10_000
    inner: int = 1_000
    seed: int = 0
    antithetic: bool = True


@dataclass(frozen=True)
class DirectCLTPrediction:
    """Asymptotic variances for the HT and Hajek direct estimators.

    `variance(estimator, centering)` returns the limit of n * Var; divide by n
    for the sampling variance of the estimate itself.
    """

    pi: float
    components: dict
    standard_errors: dict = field(default_factory=dict)

    def variance(self, estimator: str = "ht", centering: str = "sample") -> float:
        c = self.components
        pq = self.pi * (1 - self.pi)
        if estimator == "ht":
            v = pq * c["e_rq_sq"]
        elif estimator == "hajek":
            v = pq * (c["var_rq"] + c["e_q"] ** 2)
        else:
            raise ValueError("estimator must be 'ht' or 'hajek'")
        if centering == "population":
            v += c["sigma0_sq"]
        elif centering != "sample":
            raise ValueError("centering must be 'sample' or 'population'")
        return v

    def naive_variance(self, estimator: str = "ht", centering: str = "sample") -> float:
        """Limit ignoring interference: Q dropped from the influence function."""
        c = self.components
        pq = self.pi * (1 - self.pi)
        v = pq * (c["e_r_sq"] if estimator == "ht" else c["var_r"])
        if centering == "population":
            v += c["sigma0_sq"]
        return v


@dataclass(frozen=True)
class IndirectCLTPrediction:
    pi: float
    rank: int
    sigma2_ind: float
    components: dict
    standard_errors: dict = field(default_factory=dict)


def _piecewise_nodes(spec: Graphon, per_piece: int = 64):
    """Composite Gauss-Legendre nodes respecting the graphon's breakpoints."""
    cuts = [0.0, *spec.breakpoints(), 1.0]
    base_x, base_w = np.polynomial.legendre.leggauss(per_piece)
    nodes, weights = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (base_x + 1.0))
        weights.append(half * base_w)
    return np.concatenate(nodes), np.concatenate(weights)


def _model_profiles(model: OutcomeModel, pi: float, u: np.ndarray):
    """(f1, f0, d) at x = pi for latent types u, noise-free."""
    x = np.full(u.shape, pi)
    ones, zeros = np.ones_like(u), np.zeros_like(u)
    f1 = evaluate_mean(model, ones, x, u)
    f0 = evaluate_mean(model, zeros, x, u)
    d = partial_x(model, ones, x, u) - partial_x(model, zeros, x, u)
    return f1, f0, np.asarray(d, dtype=float)


def check_degree_lower_bound(spec: Graphon):
    """Numeric check that g1(u) = int min(1, G(u,t)) dt stays positive."""
    u = (np.arange(_G1_GRID) + 0.5) / _G1_GRID
    nodes, weights = _piecewise_nodes(spec)
    g1 = np.minimum(1.0, spec.evaluate(u[:, None], nodes)) @ weights
    if g1.min() <= _G1_FLOOR:
        raise PreconditionError(
            f"mean-degree function dips to {g1.min():.3g}; the direct-effect "
            "CLT needs it bounded away from zero"
        )


def direct_clt(
    spec: Graphon,
    model: OutcomeModel,
    pi: float,
    mc: MCConfig = MCConfig(),
    method: str = "auto",
) -> DirectCLTPrediction:
    """Direct-effect CLT components for the given design.

    method: "closed" (constant / rank-1 only), "mc", or "auto" (closed form
    where available, Monte Carlo otherwise).
    """
    if not 0 < pi < 1:
        raise ValueError("treatment probability pi must lie strictly in (0,1)")
    check_degree_lower_bound(spec)
    closed_available = isinstance(spec, (Constant, _Rank1))
    if method == "auto":
        method = "closed" if closed_available else "mc"
    if method == "closed" and not closed_available:
        raise ValueError("closed form only available for constant and rank-1 graphons")

    if method == "closed":
        comps, ses = _direct_components_closed(spec, model, pi)
    elif method == "mc":
        comps, ses = _direct_components_mc(spec, model, pi, mc)
    else:
        raise ValueError("method must be 'auto', 'closed', or 'mc'")

    noise_var = model.noise_sd**2 / (pi * (1 - pi)) ** 2
    comps["e_r_sq"] += noise_var
    comps["var_r"] += noise_var
    comps["e_rq_sq"] += noise_var
    comps["var_rq"] += noise_var
    return DirectCLTPrediction(pi=pi, components=comps, standard_errors=ses)


def _assemble_direct_components(e_r, e_r2, e_q, e_q2, e_rq, sigma0_sq):
    return {
        "e_r": e_r,
        "e_r_sq": e_r2,
        "var_r": e_r2 - e_r**2,
        "e_q": e_q,
        "e_q_sq": e_q2,
        "e_rq_sq": e_r2 + 2 * e_rq + e_q2,
        "var_rq": e_r2 + 2 * e_rq + e_q2 - (e_r + e_q) ** 2,
        "sigma0_sq": sigma0_sq,
    }


def _direct_components_closed(spec: Graphon, model: OutcomeModel, pi: float):
    nodes, weights = _piecewise_nodes(spec, per_piece=128)
    f1, f0, d = _model_profiles(model, pi, nodes)
    r = f1 / pi + f0 / (1 - pi)
    e_d = float(d @ weights)
    if isinstance(spec, Constant):
        q = np.full(nodes.shape, e_d)  # G/g is identically 1
    else:
        a = spec._factor(nodes)
        abar, _ = spec._factor_moments()
        q = a * (e_d / abar)  # G(u,v)/g(v) = a(u)/abar, so Q(u) = a(u) E[d]/abar
    diff = f1 - f0
    comps = _assemble_direct_components(
        e_r=float(r @ weights),
        e_r2=float((r * r) @ weights),
        e_q=float(q @ weights),
        e_q2=float((q * q) @ weights),
        e_rq=float((r * q) @ weights),
        sigma0_sq=float((diff * diff) @ weights) - float(diff @ weights) ** 2,
    )
    return comps, {}


def _direct_components_mc(spec: Graphon, model: OutcomeModel, pi: float, mc: MCConfig):
    rng = np.random.Generator(np.random.Philox(_seed_seq(mc.seed, 3)))
    half = max(mc.outer // 2, 1)
    u_half = rng.uniform(size=half)
    u = np.concatenate([u_half, 1.0 - u_half]) if mc.antithetic else rng.uniform(size=2 * half)
    n_outer = u.size
    m = mc.inner

    g = spec.mean_degree_fn()
    f1, f0, _ = _model_profiles(model, pi, u)
    r = f1 / pi + f0 / (1 - pi)

    q_hat = np.empty(n_outer)
    q_inner_var = np.empty(n_outer)  # s_i^2 / m, the inner-noise variance of q_hat
    chunk = max(1, 2_000_000 // m)
    for start in range(0, n_outer, chunk):
        ui = u[start : start + chunk]
        v = rng.uniform(size=(ui.size, m))
        _, _, dv = _model_profiles(model, pi, v.ravel())
        terms = spec.evaluate(ui[:, None], v) * dv.reshape(v.shape) / g(v)
        q_hat[start : start + chunk] = terms.mean(axis=1)
        q_inner_var[start : start + chunk] = terms.var(axis=1, ddof=1) / m

    diff = f1 - f0
    e_q2_terms = q_hat**2 - q_inner_var  # debiased: E[q_hat^2] = E[Q^2] + inner var
    comps = _assemble_direct_components(
        e_r=float(r.mean()),
        e_r2=float((r * r).mean()),
        e_q=float(q_hat.mean()),
        e_q2=float(e_q2_terms.mean()),
        e_rq=float((r * q_hat).mean()),
        sigma0_sq=float(diff.var()),
    )
    ses = {
        "e_q": _pair_se(q_hat, mc.antithetic),
        "e_q_sq": _pair_se(e_q2_terms, mc.antithetic),
        "e_rq_sq": _pair_se(r * r + 2 * r * q_hat + e_q2_terms, mc.antithetic),
    }
    return comps, ses


def _pair_se(values: np.ndarray, antithetic: bool) -> float:
    if antithetic:
        half = values.size // 2
        values = 0.5 * (values[:half] + values[half:])
    return float(values.std(ddof=1) / math.sqrt(values.size))


def indirect_clt(
    spec: Graphon,
    model: OutcomeModel,
    pi: float,
    r: int,
    mc: MCConfig = MCConfig(),
    method: str = "auto",
) -> IndirectCLTPrediction:
    """sigma_ind^2 of the PC balancing CLT, by eigen-expansion or pair MC."""
    if not 0 < pi < 1:
        raise ValueError("treatment probability pi must lie strictly in (0,1)")
    eigen = spec.eigensystem()  # raises if the spec has no low-rank structure
    if r > len(eigen):
        raise ValueError(f"graphon rank is {len(eigen)}, cannot balance r={r}")
    if method == "auto":
        method = "expansion"

    nodes, weights = _piecewise_nodes(spec, per_piece=128)
    f1, f0, _ = _model_profiles(model, pi, nodes)
    alpha = f1 - f0
    b0 = pi * f1 + (1 - pi) * f0
    psi = np.stack([psi_k(nodes) for _, psi_k in eigen[:r]])
    mu = psi @ (b0 * weights)  # mu_k = E[b0 psi_k]
    eta0 = b0 - mu @ psi
    g = spec.mean_degree_fn()
    gvals = g(nodes)
    gbar = float(gvals @ weights)

    e_g_eta2 = float((gvals * eta0 * eta0) @ weights) + gbar * model.noise_sd**2
    ses: dict = {}

    if method == "expansion":
        # E[G a1 (a1 + a2)] via G = sum lam psi psi (all declared pairs)
        term1 = 0.0
        for lam, psi_k in eigen:
            pk = psi_k(nodes)
            term1 += lam * float((pk * alpha * alpha) @ weights) * float(pk @ weights)
            term1 += lam * float((pk * alpha) @ weights) ** 2
    elif method == "mc":
        rng = np.random.Generator(np.random.Philox(_seed_seq(mc.seed, 4)))
        u1 = rng.uniform(size=mc.outer)
        u2 = rng.uniform(size=mc.outer)
        fa1, fb1, _ = _model_profiles(model, pi, u1)
        fa2, fb2, _ = _model_profiles(model, pi, u2)
        a1, a2 = fa1 - fb1, fa2 - fb2
        terms = spec.evaluate(u1, u2) * (a1 * a1 + a1 * a2)
        term1 = float(terms.mean())
        ses["term1"] = float(terms.std(ddof=1) / math.sqrt(terms.size))
    else:
        raise ValueError("method must be 'auto', 'expansion', or 'mc'")

    sigma2 = term1 + e_g_eta2 / (pi * (1 - pi))
    comps = {
        "term_pairs": term1,
        "e_g_eta_sq": e_g_eta2,
        "mu": mu,
        "gbar": gbar,
    }
    return IndirectCLTPrediction(
        pi=pi, rank=r, sigma2_ind=sigma2, components=comps, standard_errors=ses
    )


def unbiased_variance_scale(
    spec: Graphon, model: OutcomeModel, pi: float, mc: MCConfig | None = None
) -> float:
    """Variance blow-up constant of the unbiased indirect/total estimators:

        Var ~ nu * n * rho^2,   nu = E[h_b(U)^2] / (pi (1-pi)),
        h_b(u) = E[G(u,V) b(V)],   b(v) = pi f(1,pi,v) + (1-pi) f(0,pi,v).

    The dominant noise is the bilinear term sum_j (W_j - pi) sum_i b_i E_ij;
    squaring its conditional mean gives the second moment of h_b, not the
    squared first moment, and the Bernoulli variance contributes the
    1/(pi(1-pi)) factor.  Mean-zero outcome noise does not enter.
    """
    if mc is None:
        nodes, weights = _piecewise_nodes(spec, per_piece=128)
        f1, f0, _ = _model_profiles(model, pi, nodes)
        b0 = pi * f1 + (1 - pi) * f0
        h_b = spec.evaluate(nodes[:, None], nodes) @ (b0 * weights)
        second_moment = float((h_b * h_b) @ weights)
    else:
        rng = np.random.Generator(np.random.Philox(_seed_seq(mc.seed, 5)))
        u1, u2, u3 = rng.uniform(size=(3, mc.outer))
        b = {}
        for tag, u in (("u1", u1), ("u2", u2)):
            f1, f0, _ = _model_profiles(model, pi, u)
            b[tag] = pi * f1 + (1 - pi) * f0
        terms = b["u1"] * spec.evaluate(u1, u3) * b["u2"] * spec.evaluate(u2, u3)
        second_moment = float(terms.mean())
    return second_moment / (pi * (1 - pi))


def naive_variance(
    model: OutcomeModel,
    pi: float,
    estimator: str = "hajek",
    centering: str = "sample",
) -> float:
    """No-interference limit: pi(1-pi) E[R^2] for HT, pi(1-pi) Var[R] for Hajek."""
    if not 0 < pi < 1:
        raise ValueError("treatment probability pi must lie strictly in (0,1)")
    nodes, weights = _gauss_legendre_01(256)
    f1, f0, _ = _model_profiles(model, pi, nodes)
    r = f1 / pi + f0 / (1 - pi)
    e_r = float(r @ weights)
    e_r2 = float((r * r) @ weights) + model.noise_sd**2 / (pi * (1 - pi)) ** 2
    diff = f1 - f0
    sigma0_sq = float((diff * diff) @ weights) - float(diff @ weights) ** 2
    pq = pi * (1 - pi)
    v = pq * (e_r2 if estimator == "ht" else e_r2 - e_r**2)
    if centering == "population":
        v += sigma0_sq
    return v
