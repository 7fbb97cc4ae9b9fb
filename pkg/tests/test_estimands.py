import numpy as np
import pytest

from graphon_interference.estimands import (
    exhaustive_estimands,
    exhaustive_estimator_expectation,
    mean_outcome_curve,
    population_estimands,
)
from graphon_interference.estimators import ht_direct
from graphon_interference.graphons import Constant, FeasibilityError, sample_network
from graphon_interference.outcomes import OutcomeModel
from graphon_interference.presets import outcome_preset


def no_interference_model(a=2.0):
    return OutcomeModel(name="own-arm", base=lambda w, x, u: a * np.asarray(w, dtype=float))


def test_no_interference_estimands(five_node_network):
    ex = exhaustive_estimands(five_node_network, no_interference_model(2.0), 0.6)
    assert ex.tau_dir == pytest.approx(2.0, abs=1e-12)
    assert ex.tau_ind == pytest.approx(0.0, abs=1e-12)
    assert ex.tau_tot == pytest.approx(2.0, abs=1e-12)


def test_decomposition_identity(five_node_network):
    model = outcome_preset("figure2_constant", pi=0.5, noise_sd=0.0)
    ex = exhaustive_estimands(five_node_network, model, 0.5)
    assert ex.tau_tot == pytest.approx(ex.tau_dir + ex.tau_ind, abs=1e-10)


def test_five_node_golden_values(five_node_network):
    """Enumeration vs an independent closed-form derivation for setting 1.

    For f(w,x,u) = (w + u x)^2 / 2 the per-unit flip effects integrate in
    closed form over the Binomial treated-neighbor counts:
      tau_dir = mean(1/2 + pi U_i)
      tau_ind = mean over j of [ u_j^2 (2 (N_j - 1) pi + 1) / (2 N_j) + pi u_j ].
    """
    model = outcome_preset("appendix_a_1", noise_sd=0.0)
    U, N = five_node_network.U, five_node_network.N
    for pi in (0.7, 0.5):
        ex = exhaustive_estimands(five_node_network, model, pi)
        tau_dir_closed = np.mean(0.5 + pi * U)
        tau_ind_closed = np.mean(U**2 * (2 * (N - 1) * pi + 1) / (2 * N) + pi * U)
        assert ex.tau_dir == pytest.approx(tau_dir_closed, abs=1e-12)
        assert ex.tau_ind == pytest.approx(tau_ind_closed, abs=1e-12)
        assert ex.tau_tot == pytest.approx(ex.tau_dir + ex.tau_ind, abs=1e-12)
    # frozen golden values at pi = 0.7 (from the derivation above)
    ex = exhaustive_estimands(five_node_network, model, 0.7)
    assert ex.tau_dir == pytest.approx(0.85, abs=1e-12)
    assert ex.tau_ind == pytest.approx(0.579375, abs=1e-12)


def test_exhaustive_matches_population_formula(five_node_network):
    # tau_dir from enumeration vs the population formula evaluated at the
    # sampled types: equal up to the O(B / min N) remainder (here exactly)
    model = outcome_preset("appendix_a_1", noise_sd=0.0)
    pi = 0.7
    ex = exhaustive_estimands(five_node_network, model, pi)
    U = five_node_network.U
    prop1 = np.mean(0.5 * (1 + U * pi) ** 2 - 0.5 * (U * pi) ** 2)
    assert ex.tau_dir == pytest.approx(prop1, abs=1e-10)


def test_ht_unbiasedness_identity():
    # for n <= 12, exhaustive E[HT] equals exhaustive tau_dir to 1e-10
    net = sample_network(Constant(0.5), 9, 1.0, seed=8)
    model = outcome_preset("appendix_a_2", noise_sd=0.0)
    pi = 0.35
    ex = exhaustive_estimands(net, model, pi)
    e_ht = exhaustive_estimator_expectation(
        net, model, pi, lambda Y, W, M, N: ht_direct(Y, W, pi)
    )
    assert e_ht == pytest.approx(ex.tau_dir, abs=1e-10)


def test_total_effect_finite_difference(five_node_network):
    model = outcome_preset("appendix_a_5", noise_sd=0.0)
    pi, h = 0.55, 1e-5
    ex = exhaustive_estimands(five_node_network, model, pi)
    fd = (
        mean_outcome_curve(five_node_network, model, pi + h)
        - mean_outcome_curve(five_node_network, model, pi - h)
    ) / (2 * h)
    assert ex.tau_tot == pytest.approx(fd, abs=1e-7)


def test_feasibility_error():
    net = sample_network(Constant(0.3), 21, 1.0, seed=0)
    with pytest.raises(FeasibilityError):
        exhaustive_estimands(net, no_interference_model(), 0.5)


def test_population_figure2():
    model = outcome_preset("figure2_constant", pi=0.7, noise_sd=0.0)
    pop = population_estimands(None, model, 0.7)
    assert pop.tau_dir == pytest.approx(1 / 0.7, rel=1e-12)
    assert pop.tau_ind == pytest.approx(1 / 0.7, rel=1e-10)
    assert pop.flavor == "population"


def test_population_quadrature_vs_mc():
    model = outcome_preset("appendix_a_1", noise_sd=0.0)
    quad = population_estimands(None, model, 0.5)
    mc = population_estimands(None, model, 0.5, mc=400_000, seed=1)
    assert mc.tau_dir == pytest.approx(quad.tau_dir, abs=2e-3)
    assert mc.tau_ind == pytest.approx(quad.tau_ind, abs=2e-3)


def test_population_additive_model():
    # f = a(w) + b(x): tau_ind = b'(pi), tau_dir graph-free
    model = OutcomeModel(
        name="additive",
        base=lambda w, x, u: 3.0 * np.asarray(w, dtype=float) + np.asarray(x) ** 2,
    )
    pop = population_estimands(None, model, 0.4)
    assert pop.tau_dir == pytest.approx(3.0, abs=1e-9)
    assert pop.tau_ind == pytest.approx(2 * 0.4, abs=1e-7)


def test_population_constant_model():
    model = OutcomeModel(name="const", base=lambda w, x, u: np.full(np.shape(x), 5.0))
    pop = population_estimands(None, model, 0.5)
    assert pop.tau_dir == pytest.approx(0.0, abs=1e-12)
    assert pop.tau_ind == pytest.approx(0.0, abs=1e-7)
    assert pop.tau_tot == pytest.approx(0.0, abs=1e-7)
