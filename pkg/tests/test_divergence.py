import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import qubit_pair, random_equal_support_pair
from postselect import channels, divergence, linalg
from postselect.divergence import WeightedPair
from postselect.errors import BadGamma, BadPrior, ZeroOperator


def gen_eig_max(rho, sigma):
    # independent route for full-rank sigma: largest generalised eigenvalue
    return float(scipy.linalg.eigh(rho, sigma, eigvals_only=True)[-1])


def test_dmax_examples(pair):
    rho, sigma = pair
    assert divergence.dmax(rho, rho) == 0
    assert divergence.dmax(rho, sigma) == pytest.approx(math.log2(4 / 3), abs=1e-12)
    assert divergence.dmax(np.diag([1.0, 0]), np.diag([0, 1.0])) == math.inf


def test_omega_examples(pair):
    rho, sigma = pair
    assert divergence.omega(rho, rho) == 1
    assert divergence.omega(rho, sigma) == pytest.approx(2, abs=1e-12)
    assert divergence.omega(3 * rho, 0.2 * sigma) == pytest.approx(2, abs=1e-12)


def test_xi_examples(pair):
    rho, sigma = pair
    assert divergence.xi(rho, sigma) == pytest.approx(1.5, abs=1e-12)
    assert divergence.xi_weighted(WeightedPair(rho, rho)) == 1
    assert divergence.xi_weighted(WeightedPair(rho, rho, 2 / 3)) == pytest.approx(2, abs=1e-12)


def test_helstrom_examples(pair):
    rho, sigma = pair
    assert divergence.helstrom_error(WeightedPair(rho, rho)) == pytest.approx(0.5)
    assert divergence.helstrom_error(WeightedPair(np.diag([1.0, 0]), np.diag([0, 1.0]))) == pytest.approx(0, abs=1e-15)
    assert divergence.helstrom_error(WeightedPair(rho, sigma)) == pytest.approx(5 / 12, abs=1e-12)


def test_dilation_counterexample():
    assert divergence.dilation_counterexample(2.0) == pytest.approx((9 / 5, 3 / 2), abs=1e-12)
    assert divergence.dilation_counterexample(3.0) == pytest.approx((19 / 10, 3 / 2), abs=1e-12)
    near, orig = divergence.dilation_counterexample(1 + 1e-9)
    assert near == pytest.approx(1.5, abs=1e-8) and orig == pytest.approx(1.5)
    with pytest.raises(BadGamma):
        divergence.dilation_counterexample(1.0)


def test_rejects_zero_and_bad_prior(pair):
    rho, _ = pair
    with pytest.raises(ZeroOperator):
        divergence.dmax(rho, np.zeros((2, 2)))
    with pytest.raises(BadPrior):
        WeightedPair(rho, rho, 1.0)


def test_matches_generalised_eigenvalues(rng):
    for _ in range(30):
        dim = int(rng.integers(2, 6))
        rho, sigma = linalg.random_density(dim, rng), linalg.random_density(dim, rng)
        a, b = gen_eig_max(rho, sigma), gen_eig_max(sigma, rho)
        assert divergence.dmax(rho, sigma) == pytest.approx(math.log2(a), abs=1e-9)
        assert divergence.omega(rho, sigma) == pytest.approx(a * b, rel=1e-9)
        assert divergence.xi(rho, sigma) == pytest.approx(max(a, b), rel=1e-9)


def test_diagonal_reduction(rng):
    for _ in range(30):
        p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
        assert divergence.dmax(np.diag(p), np.diag(q)) == pytest.approx(math.log2(np.max(p / q)), abs=1e-10)


def test_faithfulness(rng):
    rho, sigma = random_equal_support_pair(rng, 3)
    assert divergence.d_omega(rho, rho) == 0
    assert divergence.d_omega(rho, sigma) > 1e-8


def test_additivity(rng):
    for _ in range(20):
        r1, s1 = random_equal_support_pair(rng, 2)
        r2, s2 = random_equal_support_pair(rng, 3)
        joint = divergence.d_omega(np.kron(r1, r2), np.kron(s1, s2))
        assert joint == pytest.approx(divergence.d_omega(r1, s1) + divergence.d_omega(r2, s2), abs=1e-8)
        assert divergence.dmax(np.kron(r1, r2), np.kron(s1, s2)) == pytest.approx(
            divergence.dmax(r1, s1) + divergence.dmax(r2, s2), abs=1e-8)
        assert divergence.d_xi(np.kron(r1, r1), np.kron(s1, s1)) == pytest.approx(2 * divergence.d_xi(r1, s1), abs=1e-8)


def test_infinite_values_are_ieee_inf():
    ket0, mixed = np.diag([1.0, 0]), np.eye(2) / 2
    assert divergence.dmax(ket0, mixed) == pytest.approx(1.0)
    assert divergence.dmax(mixed, ket0) == math.inf
    assert divergence.omega(ket0, mixed) == math.inf
    assert divergence.xi(ket0, mixed) == math.inf
    assert math.inf + divergence.dmax(mixed, ket0) == math.inf


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100), st.floats(0.01, 100))
def test_symmetry_and_scaling(seed, a, b):
    rho, sigma = random_equal_support_pair(np.random.default_rng(seed))
    om = divergence.omega(rho, sigma)
    assert divergence.omega(sigma, rho) == om
    assert divergence.xi(sigma, rho) == divergence.xi(rho, sigma)
    assert divergence.omega(a * rho, b * sigma) == pytest.approx(om, rel=1e-8)
    assert divergence.dmax(a * rho, b * sigma) == pytest.approx(math.log2(a / b) + divergence.dmax(rho, sigma), abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.95))
def test_data_processing(seed, p):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 4))
    rho, sigma = linalg.random_density(dim, rng), linalg.random_density(dim, rng)
    ch = channels.random_channel(dim, int(rng.integers(2, 4)), rng)
    er, es = ch.apply(rho), ch.apply(sigma)
    assert divergence.d_omega(er, es) <= divergence.d_omega(rho, sigma) + 1e-8
    before = divergence.xi_weighted(WeightedPair(rho, sigma, p))
    after = divergence.xi_weighted(WeightedPair(linalg.hermitianize(er), linalg.hermitianize(es), p))
    assert math.log2(after) <= math.log2(before) + 1e-8


def test_dilation_breaks_monotonicity_after_normalisation():
    rho, sigma = qubit_pair()
    for gamma in (1.5, 2.0, 5.0):
        conj, orig = divergence.dilation_counterexample(gamma)
        assert conj == pytest.approx((2 * gamma**2 + 1) / (gamma**2 + 1), abs=1e-12)
        assert conj > orig == pytest.approx(divergence.xi(rho, sigma))
