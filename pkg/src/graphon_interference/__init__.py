"""Treatment-effect estimation under graphon-sampled network interference.

Subpackages: graphons (kernels and sampling), outcomes (response models),
experiment (assignment and realization), estimands (exact and population
targets), estimators (HT, Hajek, unbiased, PC balancing, plug-in variance),
spectral (top eigenpairs), theory (CLT variance predictions), sensitivity
(interference-robust intervals), harness (Monte Carlo runner and CLI).
"""

from .estimands import EstimandSet, exhaustive_estimands, population_estimands
from .estimators import (
    hajek_direct,
    ht_direct,
    oracle_pc_indirect,
    pc_balancing_indirect,
    pc_balancing_total,
    plug_in_variance,
    unbiased_indirect,
    unbiased_total,
    v_hat,
)
from .experiment import ExperimentRealization, assign_bernoulli, neighbor_stats, realize
from .graphons import (
    BlockModel,
    Constant,
    DisjointCommunities,
    Rank1Quartic,
    Rank1Sin,
    Rank1Step,
    Rank3Poly,
    SampledNetwork,
    SparsityRule,
    Star,
    StepMin,
    edge_probability,
    eval_graphon,
    network_from_edges,
    sample_network,
    true_eigensystem,
)
from .harness import RunConfig, mse_sweep, run_replications
from .outcomes import OutcomeModel, evaluate_mean, partial_x
from .presets import build_graphon, build_outcome, graphon_preset, outcome_preset
from .spectral import EigenResult, top_abs_eigs
from .theory import MCConfig, direct_clt, indirect_clt, naive_variance, unbiased_variance_scale

__version__ = "0.1.0"
