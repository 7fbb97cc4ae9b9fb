"""Named graphon/outcome presets and config parsing for the harness.

The ten `appendix_a_*` presets pair a rank-3 or rank-1 graphon with its
outcome model; `figure2_constant` is the constant-0.4 graphon with the linear
response w*x/pi^2.  Custom models can be given as expressions in (w, x, u)
using +, -, *, /, **, cos, sin, exp.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .graphons import (
    BlockModel,
    Constant,
    DisjointCommunities,
    Graphon,
    GraphonConfigError,
    Rank1Quartic,
    Rank1Sin,
    Rank1Step,
    Rank3Poly,
    SparsityRule,
    Star,
    StepMin,
)
from .outcomes import OutcomeModel

APPENDIX_NOISE_SD = 0.2  # the epsilon/5 term shared by all appendix settings


def _sq_half(w, x, u):
    return 0.5 * (w + u * x) ** 2


def _sq_half_dx(w, x, u):
    return (w + u * x) * u


def _cos3wx(w, x, u):
    return np.cos(3.0 * w * x)


def _cos3wx_dx(w, x, u):
    return -3.0 * w * np.sin(3.0 * w * x)


def _neg_exp_cos(w, x, u):
    return -np.exp(u) * np.cos(3.0 * w * x)


def _neg_exp_cos_dx(w, x, u):
    return 3.0 * w * np.exp(u) * np.sin(3.0 * w * x)


def _growth_exp(w, x, u):
    return (1.0 + w) * np.exp(x)


def _growth_exp_dx(w, x, u):
    return (1.0 + w) * np.exp(x)


def _scaled_growth_exp(w, x, u):
    return 0.2 * (1.0 + u) ** 2 * (1.0 + w) * np.exp(x)


def _scaled_growth_exp_dx(w, x, u):
    return 0.2 * (1.0 + u) ** 2 * (1.0 + w) * np.exp(x)


class _LinearFraction:
    """f(w, x) = w * x / pi^2, the constant-graphon benchmark response."""

    def __init__(self, pi: float):
        self.pi = pi

    def __call__(self, w, x, u):
        return np.asarray(w) * np.asarray(x) / self.pi**2


class _LinearFractionDx:
    def __init__(self, pi: float):
        self.pi = pi

    def __call__(self, w, x, u):
        return np.asarray(w) / self.pi**2 * np.ones_like(np.asarray(x, dtype=float))


_RANK3_SBM = dict(boundaries=(1 / 3, 2 / 3), within=3 / 5, base=1 / 5)
_RANK3_POLY = (27 / 4, -27 / 2, 27 / 4)
_STEP_MIN = (1 / 4, 1 / 2, 3 / 4)

_GRAPHON_PRESETS = {
    "appendix_a_1": lambda: BlockModel(**_RANK3_SBM),
    "appendix_a_2": lambda: Rank3Poly(_RANK3_POLY),
    "appendix_a_3": lambda: Rank3Poly(_RANK3_POLY),
    "appendix_a_4": lambda: StepMin(_STEP_MIN),
    "appendix_a_5": lambda: StepMin(_STEP_MIN),
    "appendix_a_6": lambda: Rank1Step(low=3 / 10, jump=3 / 5, threshold=1 / 2),
    "appendix_a_7": lambda: Rank1Sin(amplitude=3 / 10, offset=1 / 2),
    "appendix_a_8": lambda: Rank1Sin(amplitude=3 / 10, offset=1 / 2),
    "appendix_a_9": lambda: Rank1Quartic(scale=1 / 20, offset=1 / 10),
    "appendix_a_10": lambda: Rank1Quartic(scale=1 / 20, offset=1 / 10),
    "figure2_constant": lambda: Constant(0.4),
}

_OUTCOME_PRESETS = {
    "appendix_a_1": (_sq_half, _sq_half_dx),
    "appendix_a_2": (_cos3wx, _cos3wx_dx),
    "appendix_a_3": (_neg_exp_cos, _neg_exp_cos_dx),
    "appendix_a_4": (_growth_exp, _growth_exp_dx),
    "appendix_a_5": (_scaled_growth_exp, _scaled_growth_exp_dx),
    "appendix_a_6": (_sq_half, _sq_half_dx),
    "appendix_a_7": (_cos3wx, _cos3wx_dx),
    "appendix_a_8": (_neg_exp_cos, _neg_exp_cos_dx),
    "appendix_a_9": (_growth_exp, _growth_exp_dx),
    "appendix_a_10": (_scaled_growth_exp, _scaled_growth_exp_dx),
}

PRESET_NAMES = tuple(_GRAPHON_PRESETS)


def graphon_preset(name: str) -> Graphon:
    try:
        return _GRAPHON_PRESETS[name]()
    except KeyError:
        raise GraphonConfigError(f"unknown graphon preset {name!r}") from None


def outcome_preset(name: str, pi: Optional[float] = None, noise_sd: Optional[float] = None) -> OutcomeModel:
    if name == "figure2_constant":
        if pi is None:
            raise ValueError("figure2_constant needs the design probability pi")
        sd = APPENDIX_NOISE_SD if noise_sd is None else noise_sd
        return OutcomeModel(
            name=name, base=_LinearFraction(pi), partial=_LinearFractionDx(pi), noise_sd=sd
        )
    try:
        base, partial = _OUTCOME_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown outcome preset {name!r}") from None
    sd = APPENDIX_NOISE_SD if noise_sd is None else noise_sd
    return OutcomeModel(name=name, base=base, partial=partial, noise_sd=sd)


class _Expression:
    """Mean response parsed from a trusted config expression in (w, x, u)."""

    _NAMESPACE = {
        "cos": np.cos,
        "sin": np.sin,
        "exp": np.exp,
        "sqrt": np.sqrt,
        "abs": np.abs,
        "pi": math.pi,
    }

    def __init__(self, text: str):
        self.text = text
        self._code = compile(text, "<outcome-expression>", "eval")

    def __call__(self, w, x, u):
        env = dict(self._NAMESPACE)
        env.update(w=np.asarray(w, dtype=float), x=np.asarray(x, dtype=float), u=np.asarray(u, dtype=float))
        return eval(self._code, {"__builtins__": {}}, env)


def build_graphon(config: dict) -> Graphon:
    """Graphon from a tagged config record: a preset name or kind + parameters."""
    if isinstance(config, str):
        return graphon_preset(config)
    cfg = dict(config)
    if "preset" in cfg:
        return graphon_preset(cfg["preset"])
    kind = cfg.pop("kind", None)
    builders = {
        "constant": lambda: Constant(cfg["value"]),
        "block_model": lambda: BlockModel(tuple(cfg["boundaries"]), cfg["within"], cfg["base"]),
        "step_min": lambda: StepMin(tuple(cfg["levels"])),
        "rank1_step": lambda: Rank1Step(cfg["low"], cfg["jump"], cfg["threshold"]),
        "rank1_sin": lambda: Rank1Sin(cfg["amplitude"], cfg["offset"]),
        "rank1_quartic": lambda: Rank1Quartic(cfg["scale"], cfg["offset"]),
        "rank3_poly": lambda: Rank3Poly(tuple(cfg["coefficients"])),
        "disjoint_communities": lambda: DisjointCommunities(
            [tuple(iv) for iv in cfg["intervals"]], cfg["a0"], tuple(cfg["a"])
        ),
        "star": lambda: Star(cfg["eta"], cfg["a"]),
    }
    if kind not in builders:
        raise GraphonConfigError(f"unknown graphon kind {kind!r}")
    return builders[kind]()


def build_outcome(config: dict, pi: Optional[float] = None) -> OutcomeModel:
    """Outcome model from a preset name or an expression record."""
    if isinstance(config, str):
        return outcome_preset(config, pi=pi)
    cfg = dict(config)
    if "preset" in cfg:
        return outcome_preset(cfg["preset"], pi=pi, noise_sd=cfg.get("noise_sd"))
    if "mean" in cfg:
        partial = _Expression(cfg["partial"]) if "partial" in cfg else None
        return OutcomeModel(
            name=cfg.get("name", "expression"),
            base=_Expression(cfg["mean"]),
            partial=partial,
            noise_sd=float(cfg.get("noise_sd", 0.0)),
        )
    raise ValueError("outcome config needs a 'preset' name or a 'mean' expression")


def build_sparsity(config) -> SparsityRule:
    if config in (None, "dense"):
        return SparsityRule()
    cfg = dict(config)
    form = cfg.get("form", "power")
    if form == "dense":
        return SparsityRule()
    return SparsityRule(form="power", exponent=float(cfg["exponent"]))
