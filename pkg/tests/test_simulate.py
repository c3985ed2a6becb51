import math

import numpy as np
import pytest
from scipy.stats import norm

from postselect import asym, linalg, simulate, sym
from postselect.asym import ThreeOutcomePovm
from postselect.divergence import WeightedPair
from postselect.errors import BadPrior, DimOverflow, InvalidPovm, ValidationError
from postselect.simulate import ExperimentConfig


def covers(ci, value):
    return ci is not None and ci[0] <= value <= ci[1]


def test_always_inconclusive(pair):
    povm = ThreeOutcomePovm(np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2))
    res = simulate.run_povm_experiment(povm, *pair, ExperimentConfig(1000))
    assert res.conclusive_rate == 0 and res.trials == 1000
    assert res.est_alpha_bar is None and res.est_beta_bar is None and res.est_perr_bar is None
    assert res.wilson_ci["alpha_bar"] is None


def test_type_one_error_estimate(pair):
    rho, sigma = pair
    res = simulate.run_povm_experiment(asym.optimal_povm_asym(rho, sigma, 0.5), rho, sigma,
                                       ExperimentConfig(100_000, seed=3, truth_prior=1.0))
    assert res.counts[1].sum() == 0 and res.est_beta_bar is None
    assert covers(res.wilson_ci["alpha_bar"], 0.5)


def test_symmetric_error_estimate(pair):
    rho, sigma = pair
    povm = sym.optimal_povm_sym(WeightedPair(rho, sigma))
    res = simulate.run_povm_experiment(povm, rho, sigma, ExperimentConfig(100_000, seed=4))
    assert covers(res.wilson_ci["perr_bar"], 2 / 5)


def test_product_strategy_single_copy_is_the_optimum(pair):
    rho, sigma = pair
    cfg = ExperimentConfig(50_000, seed=9)
    a = simulate.run_product_strategy(rho, sigma, 0.5, 1, cfg)
    b = simulate.run_povm_experiment(asym.optimal_povm_asym(rho, sigma, 0.5), rho, sigma, cfg)
    # same Born distribution and same random stream
    assert a == b


def test_product_strategy_four_copies(pair):
    rho, sigma = pair
    res = simulate.run_product_strategy(rho, sigma, 0.5, 4, ExperimentConfig(1_000_000, seed=1))
    assert covers(res.wilson_ci["beta_bar"], 1 / 17)
    assert covers(res.wilson_ci["alpha_bar"], 0.5)


def test_equal_states_give_one_minus_eps(pair):
    rho, _ = pair
    for n in (1, 3):
        res = simulate.run_product_strategy(rho, rho, 0.3, n, ExperimentConfig(100_000, seed=n))
        assert covers(res.wilson_ci["beta_bar"], 0.7)


def test_determinism(pair):
    cfg = ExperimentConfig(200_000, seed=12)
    assert simulate.run_product_strategy(*pair, 0.4, 2, cfg) == simulate.run_product_strategy(*pair, 0.4, 2, cfg)
    other = simulate.run_product_strategy(*pair, 0.4, 2, ExperimentConfig(200_000, seed=13))
    assert not np.array_equal(other.counts, simulate.run_product_strategy(*pair, 0.4, 2, cfg).counts)


def test_conclusive_rate_bookkeeping(pair):
    rho, sigma = pair
    povm = asym.optimal_povm_asym(rho, sigma, 0.3)
    res = simulate.run_povm_experiment(povm, rho, sigma, ExperimentConfig(100_000, seed=5, truth_prior=1.0))
    exact = float(np.trace((povm.m1 + povm.m2) @ rho).real)
    assert covers(simulate.wilson_interval(int(res.counts[0, :2].sum()), res.trials), exact)
    assert res.conclusive_rate_given(1) is None


def test_estimator_consistency(pair):
    # 99% intervals: coverage over 100 seeds should stay at or above 95
    rho, sigma = pair
    hits = 0
    for seed in range(100):
        res = simulate.run_product_strategy(rho, sigma, 0.5, 2, ExperimentConfig(20_000, seed=seed))
        hits += covers(res.wilson_ci["beta_bar"], 1 / 5)
    assert hits >= 95


def test_wilson_interval_against_closed_form():
    z = norm.ppf(0.995)
    for k, n in ((0, 10), (3, 10), (500, 1000), (10, 10)):
        p = k / n
        centre = (p + z * z / (2 * n)) / (1 + z * z / n)
        half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
        lo, hi = simulate.wilson_interval(k, n)
        assert lo == pytest.approx(max(0.0, centre - half), abs=1e-12)
        assert hi == pytest.approx(min(1.0, centre + half), abs=1e-12)
    assert simulate.wilson_interval(0, 0) is None


def test_validation(pair):
    with pytest.raises(ValidationError):
        ExperimentConfig(0)
    with pytest.raises(BadPrior):
        ExperimentConfig(10, truth_prior=1.5)
    bad = ThreeOutcomePovm.__new__(ThreeOutcomePovm)
    object.__setattr__(bad, "m1", np.eye(2))
    object.__setattr__(bad, "m2", np.eye(2))
    object.__setattr__(bad, "m_inconclusive", np.zeros((2, 2)))
    with pytest.raises(InvalidPovm):
        simulate.run_povm_experiment(bad, *pair, ExperimentConfig(10))
    with pytest.raises(DimOverflow):
        simulate.run_product_strategy(*pair, 0.5, 13, ExperimentConfig(10))


def test_exponent_scan(pair):
    rho, sigma = pair
    rows = simulate.exponent_scan(rho, sigma, 0.5, range(1, 21))
    for r in rows:
        assert r.exponent == pytest.approx(math.log2(2**r.n + 1) / r.n, abs=1e-12)
        assert 1 < r.exponent <= 1 + 1 / r.n
        assert r.lower <= r.exponent <= r.upper
    same = simulate.exponent_scan(rho, rho, 0.3, [1, 10, 100])
    for r in same:
        assert r.exponent == pytest.approx(-math.log2(0.7) / r.n, abs=1e-12)
    lo = simulate.exponent_scan(rho, sigma, 0.1, [2000])[0].exponent
    hi = simulate.exponent_scan(rho, sigma, 0.9, [2000])[0].exponent
    assert lo == pytest.approx(1, abs=2e-3) and hi == pytest.approx(1, abs=2e-3)
    with pytest.raises(ValidationError):
        simulate.exponent_scan(rho, sigma, 0.5, [0])


def test_csv(pair):
    res = simulate.run_product_strategy(*pair, 0.5, 1, ExperimentConfig(1000))
    text = simulate.to_csv(simulate.CSV_HEADER, simulate.experiment_rows(res, {"beta_bar": 1 / 3}))
    header, row = text.strip().split("\n")
    assert header == ",".join(simulate.CSV_HEADER)
    fields = row.split(",")
    assert float(fields[2]) == 1 / 3 and float(fields[3]) == res.est_beta_bar
    assert float(fields[6]) == res.conclusive_rate


def test_large_dimension_product_strategy(rng):
    rho, sigma = linalg.random_density(3, rng), linalg.random_density(3, rng)
    res = simulate.run_product_strategy(rho, sigma, 0.2, 3, ExperimentConfig(200_000, seed=2))
    exact = asym.postselected_beta(linalg.tensor_power(rho, 3), linalg.tensor_power(sigma, 3), 0.2).beta_bar
    assert covers(res.wilson_ci["beta_bar"], exact)
