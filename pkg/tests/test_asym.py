import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_equal_support_pair
from postselect import asym, linalg, oracle
from postselect.asym import ProductStrategy, ThreeOutcomePovm
from postselect.errors import BadEpsilon, InfiniteOmega, InvalidPovm


def test_postselected_beta_examples(pair):
    rho, sigma = pair
    for eps in (0.1, 0.3, 0.77):
        assert asym.postselected_beta(rho, rho, eps).beta_bar == pytest.approx(1 - eps, abs=1e-15)
    assert asym.postselected_beta(rho, sigma, 0.5).beta_bar == pytest.approx(1 / 3, abs=1e-12)
    rep = asym.postselected_beta(np.diag([1.0, 0]), np.diag([0, 1.0]), 0.3)
    assert rep.beta_bar == 0 and rep.achieving_povm is None and rep.omega_value == math.inf


def test_report_rederives_other_levels(pair):
    rep = asym.postselected_beta(*pair, 0.5)
    assert rep.beta_at(0.25) == pytest.approx(asym.postselected_beta(*pair, 0.25).beta_bar, abs=1e-15)


def test_bad_epsilon(pair):
    for eps in (0.0, 1.0, -0.1, float("nan")):
        with pytest.raises(BadEpsilon):
            asym.postselected_beta(*pair, eps)


def test_beta_zero_cases():
    ket0, mixed = np.diag([1.0, 0]), np.eye(2) / 2
    assert asym.beta_zero(mixed, ket0) == 1
    assert asym.beta_zero(ket0, mixed) == 0
    assert asym.beta_zero(np.diag([0.3, 0.7]), np.diag([0.0, 1.0])) == 1


def test_optimal_povm_examples(pair):
    rho, sigma = pair
    e = oracle.conditional_errors(asym.optimal_povm_asym(np.eye(2) / 2, np.eye(2) / 2, 0.4), np.eye(2) / 2, np.eye(2) / 2)
    assert (e.alpha_bar, e.beta_bar) == pytest.approx((0.4, 0.6), abs=1e-12)
    e = oracle.conditional_errors(asym.optimal_povm_asym(rho, sigma, 0.5), rho, sigma)
    assert (e.alpha_bar, e.beta_bar) == pytest.approx((0.5, 1 / 3), abs=1e-12)
    with pytest.raises(InfiniteOmega):
        asym.optimal_povm_asym(np.diag([1.0, 0]), np.eye(2) / 2, 0.5)


def test_qutrit_formula_vs_measurement(rng):
    rho, sigma = linalg.random_density(3, rng), linalg.random_density(3, rng)
    rep = asym.postselected_beta(rho, sigma, 0.25)
    e = oracle.conditional_errors(rep.achieving_povm, rho, sigma)
    assert e.beta_bar == pytest.approx(rep.beta_bar, abs=1e-9)
    assert e.alpha_bar == pytest.approx(0.25, abs=1e-9)


def test_povm_validation():
    with pytest.raises(InvalidPovm):
        ThreeOutcomePovm(np.eye(2), np.eye(2), np.zeros((2, 2)))
    with pytest.raises(InvalidPovm):
        ThreeOutcomePovm(np.diag([1.2, 0]), np.diag([-0.2, 0]), np.diag([0, 1.0]))
    povm = ThreeOutcomePovm.from_conclusive(np.eye(2) / 2, np.eye(2) / 4)
    with pytest.raises(ValueError):
        povm.m1[0, 0] = 3


def test_product_strategy(pair):
    rho, sigma = pair
    one = asym.product_strategy_asym(rho, sigma, 0.5, 1)
    opt = asym.optimal_povm_asym(rho, sigma, 0.5)
    assert np.allclose(one.povm.m1, opt.m1) and np.allclose(one.povm.m2, opt.m2)

    two = asym.product_strategy_asym(rho, sigma, 0.5, 2)
    p_rho = two.outcome_probabilities(rho)
    p_sigma = two.outcome_probabilities(sigma)
    assert p_rho[1] / (p_rho[0] + p_rho[1]) == pytest.approx(0.5, abs=1e-12)
    assert p_sigma[0] / (p_sigma[0] + p_sigma[1]) == pytest.approx(1 / 5, abs=1e-12)

    same = asym.product_strategy_asym(rho, rho, 0.3, 3)
    p = same.outcome_probabilities(rho)
    assert p[0] / (p[0] + p[1]) == pytest.approx(0.7, abs=1e-12)


def test_product_strategy_matches_joint_measurement(rng):
    # the all-agree rule on n copies is the measurement (M1^{(x)n}, M2^{(x)n}, rest)
    rho, sigma = random_equal_support_pair(rng, 2)
    n, eps = 3, 0.2
    strat = asym.product_strategy_asym(rho, sigma, eps, n)
    joint = ThreeOutcomePovm.from_conclusive(linalg.tensor_power(strat.povm.m1, n), linalg.tensor_power(strat.povm.m2, n))
    e = oracle.conditional_errors(joint, linalg.tensor_power(rho, n), linalg.tensor_power(sigma, n))
    closed = asym.postselected_beta(linalg.tensor_power(rho, n), linalg.tensor_power(sigma, n), eps).beta_bar
    assert e.alpha_bar == pytest.approx(eps, abs=1e-9)
    assert e.beta_bar == pytest.approx(closed, abs=1e-9)


def test_decision_rule():
    assert ProductStrategy.decide([0, 0, 0]) == asym.GUESS_RHO
    assert ProductStrategy.decide([1, 1]) == asym.GUESS_SIGMA
    assert ProductStrategy.decide([0, 1]) == asym.INCONCLUSIVE
    assert ProductStrategy.decide([2, 2]) == asym.INCONCLUSIVE


def test_exponent_examples(pair):
    rho, sigma = pair
    assert asym.exponent_asym(rho, rho) == 0
    assert asym.exponent_asym(rho, sigma) == pytest.approx(1.0, abs=1e-12)
    val = asym.neg_log2_beta_ncopy(1.0, 0.5, 10)
    assert val == pytest.approx(math.log2(2**10 + 1), abs=1e-12)
    assert 10 < val < 11


def test_tensor_power_against_closed_form(rng):
    for _ in range(5):
        rho, sigma = random_equal_support_pair(rng, 2)
        d = asym.exponent_asym(rho, sigma)
        for n in (1, 2, 4):
            exact = asym.postselected_beta(linalg.tensor_power(rho, n), linalg.tensor_power(sigma, n), 0.3).beta_bar
            # explicit tensor powers of badly conditioned pairs lose a few digits
            assert -math.log2(exact) == pytest.approx(asym.neg_log2_beta_ncopy(d, 0.3, n), rel=1e-8)


def test_ill_conditioned_pair_warns():
    # needs a support tolerance below the conditioning threshold
    rho = np.diag([1 - 1e-13, 1e-13])
    rep = asym.postselected_beta(rho, np.eye(2) / 2, 0.5, tol=1e-15)
    assert rep.warnings and math.isfinite(rep.omega_value)
    assert not asym.postselected_beta(np.diag([0.6, 0.4]), np.eye(2) / 2, 0.5).warnings


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.99))
def test_symmetric_in_states(seed, eps):
    rho, sigma = random_equal_support_pair(np.random.default_rng(seed))
    a = asym.postselected_beta(rho, sigma, eps, with_povm=False).beta_bar
    b = asym.postselected_beta(sigma, rho, eps, with_povm=False).beta_bar
    assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.98))
def test_strictly_decreasing_in_eps(seed, eps):
    rho, sigma = random_equal_support_pair(np.random.default_rng(seed))
    rep = asym.postselected_beta(rho, sigma, eps, with_povm=False)
    assert rep.beta_at(min(eps + 0.01, 0.99)) < rep.beta_bar


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.05, 0.25, 0.5, 0.75, 0.95]))
def test_achievability(seed, eps):
    rho, sigma = random_equal_support_pair(np.random.default_rng(seed))
    rep = asym.postselected_beta(rho, sigma, eps)
    e = oracle.conditional_errors(rep.achieving_povm, rho, sigma)
    assert e.alpha_bar == pytest.approx(eps, abs=1e-9)
    assert e.beta_bar == pytest.approx(rep.beta_bar, abs=1e-9)
