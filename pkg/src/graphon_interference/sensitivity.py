"""Interference-robust confidence intervals for the direct effect.

The reported no-interference standard error calibrates the baseline variance
V0 through (sigma0^2 + pi (1-pi) V0) / n = se0^2; a user-chosen rule bounds
the interference moment E[Q^2] as a function of the hypothesized effect, and
the Cauchy-Schwarz bound V <= V0 + 2 sqrt(V0 E[Q^2]) + E[Q^2] widens the
test's noise term.  Intervals invert the resulting chi-squared test by
bracketed bisection on each side of the point estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

BISECTION_TOL = 1e-6
_MONOTONE_GRID = 1024


class UnionOfIntervalsError(RuntimeError):
    """The rejection region is not monotone outward from the point estimate."""


def norm_quantile(p: float) -> float:
    """Inverse standard normal CDF (Wichura's AS241 rational approximation).

    Accurate to well below 1e-9 over (0, 1); coefficients are fixed decimal
    literals so results are bit-stable across platforms.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("quantile level must lie strictly in (0,1)")
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    r = p if q < 0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    value = num / den
    return -value if q < 0 else value


def cs_bound(v0: float, q2: float) -> float:
    """Cauchy-Schwarz upper bound V0 + 2 sqrt(V0 q2) + q2 on the CLT variance."""
    if v0 < 0 or q2 < 0:
        raise ValueError("variance components must be nonnegative")
    return v0 + 2.0 * math.sqrt(v0 * q2) + q2


def disjoint_communities_q2(
    weights: Sequence[float],
    cv_terms: Sequence[float],
    effect_sq_moments: Sequence[float],
    global_cv: float,
    global_effect_sq: float,
    inflation: float = 1.0,
) -> float:
    """E[Q^2] bound for the disjoint-communities graphon.

    weights: community probabilities P(U in I_k) (sum <= 1);
    cv_terms: E[a_k^2 | I_k] / E[a_k | I_k]^2 per community;
    effect_sq_moments: squared conditional mean of f'(1) - f'(0) per community;
    global_cv / global_effect_sq: same objects for the shared rank-1 factor.
    The half-bound is doubled, then multiplied by `inflation` (treating the
    fluctuation terms as constants and doubling uses inflation = 2).
    """
    weights = list(weights)
    if any(w < 0 for w in weights) or sum(weights) > 1 + 1e-12:
        raise ValueError("community weights must be nonnegative and sum to at most 1")
    if global_cv <= 0 or any(c <= 0 for c in cv_terms):
        raise ZeroDivisionError("degenerate community: zero mean factor")
    half = global_cv * global_effect_sq
    half += sum(w * c * m for w, c, m in zip(weights, cv_terms, effect_sq_moments))
    return 2.0 * half * inflation


def eight_tau_sq_bound(tau_dir: float) -> float:
    """Working bound E[Q^2] <= 8 tau_dir^2 (single community,
    CV terms treated as constant and inflated by 2, indirect <= direct)."""
    return disjoint_communities_q2(
        weights=[1.0],
        cv_terms=[1.0],
        effect_sq_moments=[tau_dir**2],
        global_cv=1.0,
        global_effect_sq=tau_dir**2,
        inflation=2.0,
    )


def star_q2(eta: float, a: float, effect_moment, grid: int = 4096) -> float:
    """E[Q^2] for the star graphon (nucleus measure eta, link level a).

    effect_moment is E[f'(1,pi) - f'(0,pi) | U = v], either a constant or a
    callable of v; the link level a cancels from Q.  Satisfies
    eta * E[Q^2] -> E[effect]^2 as eta -> 0.
    """
    if not 0 < eta < 1:
        raise ValueError("star nucleus eta must lie in (0,1)")
    del a
    if callable(effect_moment):
        import numpy as np

        v = (np.arange(grid) + 0.5) / grid
        dvals = np.asarray(effect_moment(v), dtype=float)
        inside = v <= eta
        int_nucleus = float(dvals[inside].sum()) / grid
        int_rest = float(dvals[~inside].sum()) / grid
    else:
        int_nucleus = eta * float(effect_moment)
        int_rest = (1 - eta) * float(effect_moment)
    q_out = int_nucleus
    q_in = int_nucleus + int_rest / eta
    return (1 - eta) * q_out**2 + eta * q_in**2


class Q2Rule:
    """Maps a hypothesized direct effect tau0 to an upper bound on E[Q^2]."""

    kind = "base"

    def bound(self, tau0: float) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroQ2(Q2Rule):
    """No interference adjustment (classical Wald test)."""

    kind: str = "zero"

    def bound(self, tau0: float) -> float:
        return 0.0


@dataclass(frozen=True)
class ScaledTauSqQ2(Q2Rule):
    """E[Q^2] <= coefficient * tau0^2 (the audit-study default is 8)."""

    coefficient: float = 8.0
    kind: str = "scaled_tau_sq"

    def bound(self, tau0: float) -> float:
        return self.coefficient * tau0 * tau0


@dataclass(frozen=True)
class ConstantQ2(Q2Rule):
    value: float = 0.0
    kind: str = "constant"

    def bound(self, tau0: float) -> float:
        return self.value


@dataclass(frozen=True)
class SensitivityInput:
    """Study summary plus the interference bound rule."""

    n: int
    pi: float
    tau_hat: float
    se0: float
    q2_rule: Q2Rule
    sigma0_sq: float = 0.0  # the conservative default: all noise assigned to V0

    def __post_init__(self):
        if not 0 < self.pi < 1:
            raise ValueError("treatment probability pi must lie strictly in (0,1)")
        if self.se0 < 0 or self.sigma0_sq < 0:
            raise ValueError("variance inputs must be nonnegative")
        if self.n * self.se0**2 < self.sigma0_sq - 1e-12:
            raise ValueError("sigma0_sq exceeds the total calibrated variance n se0^2")

    @property
    def v0(self) -> float:
        """Baseline variance from the calibration (sigma0^2 + pi(1-pi)V0)/n = se0^2."""
        return (self.n * self.se0**2 - self.sigma0_sq) / (self.pi * (1 - self.pi))


def _noise_term(inp: SensitivityInput, tau0: float) -> float:
    q2 = inp.q2_rule.bound(tau0)
    pq = inp.pi * (1 - inp.pi)
    return (inp.sigma0_sq + pq * cs_bound(inp.v0, q2)) / inp.n


def noise_polynomial(inp: SensitivityInput) -> tuple[float, float, float]:
    """Coefficients (c0, c1, c2) with noise term = c0 + c1 |tau0| + c2 tau0^2.

    Exact for the zero, constant, and scaled-tau^2 rules (the only rules for
    which the test's noise term is a polynomial in |tau0|).
    """
    pq = inp.pi * (1 - inp.pi)
    c0 = (inp.sigma0_sq + pq * inp.v0) / inp.n
    if isinstance(inp.q2_rule, ZeroQ2):
        return (c0, 0.0, 0.0)
    if isinstance(inp.q2_rule, ConstantQ2):
        q2 = inp.q2_rule.value
        return (c0 + pq * (2 * math.sqrt(inp.v0 * q2) + q2) / inp.n, 0.0, 0.0)
    if isinstance(inp.q2_rule, ScaledTauSqQ2):
        c = inp.q2_rule.coefficient
        c1 = pq * 2.0 * math.sqrt(c * inp.v0) / inp.n
        c2 = pq * c / inp.n
        return (c0, c1, c2)
    raise ValueError(f"no polynomial form for rule {inp.q2_rule.kind!r}")


def test_reject(inp: SensitivityInput, tau0: float, alpha: float) -> bool:
    """Level-alpha chi-squared test of H0: tau_dir = tau0 under the bound."""
    if not 0 < alpha < 1:
        raise ValueError("significance level alpha must lie strictly in (0,1)")
    z = norm_quantile(1 - alpha / 2)
    return (inp.tau_hat - tau0) ** 2 >= z * z * _noise_term(inp, tau0)


def invert_interval(inp: SensitivityInput, alpha: float) -> tuple[float, float]:
    """Confidence interval from inverting the test, endpoints to 1e-6.

    The rejection region is checked on a grid on each side of tau_hat before
    root finding; a non-monotone region raises UnionOfIntervalsError rather
    than silently returning a single interval.
    """
    if not 0 < alpha < 1:
        raise ValueError("significance level alpha must lie strictly in (0,1)")
    z = norm_quantile(1 - alpha / 2)

    def statistic(tau0: float) -> float:
        return (inp.tau_hat - tau0) ** 2 - z * z * _noise_term(inp, tau0)

    bound = 10.0 * (abs(inp.tau_hat) + 10.0 * inp.se0)
    hi = _invert_side(statistic, inp.tau_hat, inp.tau_hat + bound)
    lo = _invert_side(statistic, inp.tau_hat, inp.tau_hat - bound)
    return (lo, hi)


def _invert_side(statistic: Callable[[float], float], start: float, end: float) -> float:
    grid = [start + (end - start) * k / _MONOTONE_GRID for k in range(_MONOTONE_GRID + 1)]
    rejected = [statistic(t) >= 0 for t in grid]
    first = next((k for k, rej in enumerate(rejected) if rej), None)
    if first is None:
        raise UnionOfIntervalsError(
            "test never rejects within the search bound; interval endpoint diverges"
        )
    if not all(rejected[first:]):
        raise UnionOfIntervalsError(
            "rejection region is not monotone outward from the point estimate"
        )
    if first == 0:
        return start  # rejects immediately at the point estimate
    lo, hi = grid[first - 1], grid[first]
    while abs(hi - lo) > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if statistic(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def interval_table(
    inp: SensitivityInput, alphas: Sequence[float]
) -> list[tuple[float, float, float]]:
    """(alpha, lo, hi) rows for a grid of significance levels."""
    return [(float(a), *invert_interval(inp, a)) for a in alphas]


def build_q2_rule(config: Optional[dict]) -> Q2Rule:
    """Q2 rule from a config record {rule: ..., parameters}."""
    if config is None:
        return ZeroQ2()
    if isinstance(config, str):
        config = {"rule": config}
    cfg = dict(config)
    rule = cfg.pop("rule", "zero")
    if rule == "zero":
        return ZeroQ2()
    if rule == "scaled_tau_sq":
        return ScaledTauSqQ2(coefficient=float(cfg.get("coefficient", 8.0)))
    if rule == "constant":
        return ConstantQ2(value=float(cfg.get("value", 0.0)))
    raise ValueError(f"unknown q2 rule {rule!r}")
