import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphon_interference.estimands import (
    exhaustive_estimands,
    exhaustive_estimator_expectation,
    mean_outcome_curve,
)
from graphon_interference.estimators import (
    DegenerateArmError,
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
from graphon_interference.experiment import assign_bernoulli, neighbor_stats, realize
from graphon_interference.graphons import (
    Constant,
    network_from_edges,
    sample_network,
    true_eigensystem,
)
from graphon_interference.presets import graphon_preset, outcome_preset
from graphon_interference.spectral import EigenResult, top_abs_eigs


def test_ht_hand_example():
    assert ht_direct([2.0, 0.0], [1, 0], 0.5) == pytest.approx(2.0)


def test_ht_single_arm():
    assert ht_direct([1.0, 2.0], [1, 1], 0.5) == pytest.approx(3.0)  # control term is 0


def test_hajek_hand_example():
    assert hajek_direct([2.0, 0.0], [1, 0]) == pytest.approx(2.0)


def test_hajek_shift_invariance(rng):
    Y = rng.normal(size=50)
    W = (rng.uniform(size=50) < 0.4).astype(int)
    W[0], W[1] = 1, 0
    base = hajek_direct(Y, W)
    assert hajek_direct(Y + 17.3, W) == pytest.approx(base, abs=1e-10)


def test_hajek_degenerate_arm():
    with pytest.raises(DegenerateArmError):
        hajek_direct([1.0, 2.0], [1, 1])


def test_hajek_equals_ht_at_exact_split(rng):
    n, pi = 10, 0.3
    W = np.zeros(n, dtype=int)
    W[:3] = 1  # sum W = n pi exactly
    Y = rng.normal(size=n)
    assert hajek_direct(Y, W) == pytest.approx(ht_direct(Y, W, pi), abs=1e-12)


def test_vhat_at_pi_is_mean(rng):
    n = 40
    net = sample_network(Constant(0.5), n, 1.0, seed=2)
    W = assign_bernoulli(n, 0.6, seed=3)
    M, _ = neighbor_stats(net, W)
    Y = rng.normal(size=n)
    assert v_hat(Y, W, M, net.N, 0.6, 0.6) == Y.mean()


def test_vhat_exhaustive_expectation():
    # E_pi[v_hat(pi')] equals the exhaustively enumerated mean outcome at pi'
    net = sample_network(Constant(0.6), 7, 1.0, seed=4)
    model = outcome_preset("appendix_a_4", noise_sd=0.0)
    pi, pi_prime = 0.5, 0.62
    expect = exhaustive_estimator_expectation(
        net, model, pi, lambda Y, W, M, N: v_hat(Y, W, M, N, pi, pi_prime)
    )
    target = mean_outcome_curve(net, model, pi_prime)
    assert expect == pytest.approx(target, abs=1e-10)


def test_vhat_derivative_matches_unbiased_total(rng):
    n = 30
    net = sample_network(Constant(0.4), n, 1.0, seed=5)
    W = assign_bernoulli(n, 0.5, seed=6)
    M, _ = neighbor_stats(net, W)
    Y = rng.normal(size=n)
    h = 1e-6
    fd = (v_hat(Y, W, M, net.N, 0.5, 0.5 + h) - v_hat(Y, W, M, net.N, 0.5, 0.5 - h)) / (2 * h)
    assert fd == pytest.approx(unbiased_total(Y, W, M, net.N, 0.5), abs=1e-6)


def test_vhat_overflow_guard():
    # one very high degree unit and a pi' far from pi forces the log-space path
    n = 2000
    net = sample_network(Constant(1.0), n, 1.0, seed=0)
    W = np.ones(n, dtype=int)
    W[0] = 0
    M, _ = neighbor_stats(net, W)
    Y = np.ones(n)
    with pytest.raises(OverflowError):
        v_hat(Y, W, M, net.N, 0.01, 0.99)


@given(seed=st.integers(0, 2**16))
@settings(max_examples=30, deadline=None)
def test_total_decomposition_identity(seed):
    # unbiased_total = ht_direct + unbiased_indirect on arbitrary inputs
    rng = np.random.default_rng(seed)
    n = rng.integers(2, 40)
    Y = rng.normal(size=n) * rng.lognormal(size=n)
    W = rng.integers(0, 2, n)
    N = rng.integers(0, 8, n)
    M = rng.integers(0, N + 1)
    pi = rng.uniform(0.05, 0.95)
    lhs = unbiased_total(Y, W, M, N, pi)
    rhs = ht_direct(Y, W, pi) + unbiased_indirect(Y, W, M, N, pi)
    assert lhs == pytest.approx(rhs, abs=1e-12 * (1 + abs(lhs)))


def test_isolated_unit_reduces_to_ht():
    Y = np.array([3.0])
    for w in (0, 1):
        W = np.array([w])
        assert unbiased_total(Y, W, [0], [0], 0.4) == pytest.approx(
            ht_direct(Y, W, 0.4)
        )


def test_empty_graph_indirect_zero(rng):
    n = 12
    Y = rng.normal(size=n)
    W = rng.integers(0, 2, n)
    assert unbiased_indirect(Y, W, np.zeros(n), np.zeros(n), 0.3) == 0.0


def test_exhaustive_unbiasedness_all_three():
    net = sample_network(Constant(0.7), 8, 1.0, seed=13)
    model = outcome_preset("appendix_a_1", noise_sd=0.0)
    pi = 0.45
    ex = exhaustive_estimands(net, model, pi)
    e_ht = exhaustive_estimator_expectation(net, model, pi, lambda Y, W, M, N: ht_direct(Y, W, pi))
    e_tot = exhaustive_estimator_expectation(
        net, model, pi, lambda Y, W, M, N: unbiased_total(Y, W, M, N, pi)
    )
    e_ind = exhaustive_estimator_expectation(
        net, model, pi, lambda Y, W, M, N: unbiased_indirect(Y, W, M, N, pi)
    )
    assert e_ht == pytest.approx(ex.tau_dir, abs=1e-10)
    assert e_tot == pytest.approx(ex.tau_tot, abs=1e-10)
    assert e_ind == pytest.approx(ex.tau_ind, abs=1e-10)


@pytest.fixture(scope="module")
def pc_setup():
    spec = graphon_preset("appendix_a_1")
    model = outcome_preset("appendix_a_1")
    n, pi = 1200, 0.5
    net = sample_network(spec, n, n ** (-0.3), seed=20)
    W = assign_bernoulli(n, pi, seed=21)
    real = realize(net, model, W, pi, noise_seed=22)
    eigs = top_abs_eigs(net.E, 3, seed=23)
    return spec, net, real, eigs, pi


def test_pc_balance_residuals(pc_setup):
    _, net, real, eigs, pi = pc_setup
    _, diag = pc_balancing_indirect(real.Y, real.W, net, pi, 3, eigs=eigs)
    assert np.all(diag.residuals <= 1e-8)


def test_pc_sign_flip_bit_identical(pc_setup):
    _, net, real, eigs, pi = pc_setup
    base, _ = pc_balancing_indirect(real.Y, real.W, net, pi, 3, eigs=eigs)
    for signs in ([-1, 1, 1], [1, -1, -1], [-1, -1, -1]):
        flipped = EigenResult(
            values=eigs.values.copy(),
            vectors=eigs.vectors * np.asarray(signs, dtype=float),
            residual_norms=eigs.residual_norms,
            iterations=eigs.iterations,
        )
        value, _ = pc_balancing_indirect(real.Y, real.W, net, pi, 3, eigs=flipped)
        assert value == base  # bit-exact


def test_pc_reorder_bit_identical(pc_setup):
    _, net, real, eigs, pi = pc_setup
    base, _ = pc_balancing_indirect(real.Y, real.W, net, pi, 3, eigs=eigs)
    for perm in ([1, 0, 2], [2, 1, 0], [2, 0, 1]):
        reordered = EigenResult(
            values=eigs.values[list(perm)],
            vectors=eigs.vectors[:, list(perm)],
            residual_norms=eigs.residual_norms[list(perm)],
            iterations=eigs.iterations,
        )
        value, _ = pc_balancing_indirect(real.Y, real.W, net, pi, 3, eigs=reordered)
        assert value == base  # bit-exact


def test_pc_total_is_sum(pc_setup):
    _, net, real, eigs, pi = pc_setup
    ind, _ = pc_balancing_indirect(real.Y, real.W, net, pi, 3, eigs=eigs)
    tot = pc_balancing_total(real.Y, real.W, net, pi, 3, eigs=eigs)
    assert tot == ind + ht_direct(real.Y, real.W, pi)
    # sign-flip invariance carries over additively
    flipped = EigenResult(
        values=eigs.values.copy(),
        vectors=eigs.vectors * np.array([-1.0, 1.0, -1.0]),
        residual_norms=eigs.residual_norms,
        iterations=eigs.iterations,
    )
    assert pc_balancing_total(real.Y, real.W, net, pi, 3, eigs=flipped) == tot


def test_pc_empty_graph_rejected():
    net = sample_network(Constant(0.0), 10, 1.0, seed=1)
    with pytest.raises(ValueError):
        pc_balancing_indirect(np.zeros(10), np.zeros(10, dtype=int), net, 0.5, 2)


def test_oracle_pc_balance_conditions(pc_setup):
    spec, net, real, _, pi = pc_setup
    psi = np.column_stack([f(net.U) for _, f in true_eigensystem(spec)])
    value = oracle_pc_indirect(real.Y, real.W, net, pi, psi)
    # re-derive the adjusted weights and check the Gram balance directly
    w = real.M / pi - (real.N - real.M) / (1 - pi)
    beta = np.linalg.solve(psi.T @ psi, -(psi.T @ w))
    adjusted = w + psi @ beta
    assert np.abs(psi.T @ adjusted).max() <= 1e-8 * np.linalg.norm(w)
    assert value == pytest.approx(float(real.Y @ adjusted) / net.n)


def test_oracle_pc_constant_graphon_demeans(rng):
    n = 200
    net = sample_network(Constant(0.5), n, 1.0, seed=30)
    W = assign_bernoulli(n, 0.4, seed=31)
    model = outcome_preset("figure2_constant", pi=0.4, noise_sd=0.0)
    real = realize(net, model, W, 0.4)
    value = oracle_pc_indirect(real.Y, W, net, 0.4, np.ones((n, 1)))
    w = real.M / 0.4 - (real.N - real.M) / 0.6
    demeaned = float(real.Y @ (w - w.mean())) / n
    assert value == pytest.approx(demeaned, abs=1e-10)


def test_oracle_pc_singular_gram():
    net = network_from_edges(4, [(0, 1), (2, 3)])
    psi = np.ones((4, 2))  # rank-deficient on purpose
    with pytest.raises(np.linalg.LinAlgError):
        oracle_pc_indirect(np.ones(4), np.array([1, 0, 1, 0]), net, 0.5, psi)


def test_pc_vs_oracle_agreement(pc_setup):
    # same replicate: data-driven and oracle corrections should land close
    # (within a few estimator standard deviations of each other)
    spec, net, real, eigs, pi = pc_setup
    pc, _ = pc_balancing_indirect(real.Y, real.W, net, pi, 3, eigs=eigs)
    psi = np.column_stack([f(net.U) for _, f in true_eigensystem(spec)])
    oracle = oracle_pc_indirect(real.Y, real.W, net, pi, psi)
    assert abs(pc - oracle) < 0.2


def test_plug_in_variance_constant_outcome():
    Y = np.full(20, 3.3)
    W = np.r_[np.ones(10), np.zeros(10)].astype(int)
    assert plug_in_variance(Y, W, 0.5) == pytest.approx(0.0, abs=1e-12)


def test_plug_in_variance_textbook_identity(rng):
    Y = rng.normal(size=100)
    W = (rng.uniform(size=100) < 0.5).astype(int)
    W[0], W[1] = 1, 0
    pi = 0.37
    y1, y0 = Y[W == 1], Y[W == 0]
    expected = y1.var() / pi + y0.var() / (1 - pi)  # population-style arm variances
    assert plug_in_variance(Y, W, pi) == pytest.approx(expected, rel=1e-12)


def test_plug_in_variance_degenerate_arm():
    with pytest.raises(DegenerateArmError):
        plug_in_variance(np.ones(5), np.ones(5, dtype=int), 0.5)
