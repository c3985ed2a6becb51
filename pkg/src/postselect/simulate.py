"""Monte Carlo discrimination experiments.

Outcomes are drawn from the exact Born distribution of each copy by inverse
CDF. Trials are processed in fixed-size blocks; block ``k`` draws from
``default_rng([seed, k])``, so results do not depend on how blocks are
scheduled and counts merge by addition.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from . import asym, linalg
from .asym import GUESS_RHO, GUESS_SIGMA, INCONCLUSIVE, ThreeOutcomePovm
from .errors import BadPrior, DimOverflow, InvalidPovm, ValidationError
from .linalg import DIM_CAP

BLOCK = 1 << 16
CONFIDENCE = 0.99
PROB_ATOL = 1e-9

CSV_HEADER = ("n", "quantity", "exact", "estimate", "ci_lo", "ci_hi", "conclusive_rate")


@dataclass(frozen=True)
class ExperimentConfig:
    trials: int
    seed: int = 0
    truth_prior: float = 0.5
    n_copies: int = 1

    def __post_init__(self):
        if int(self.trials) < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if int(self.n_copies) < 1:
            raise ValidationError(f"n_copies must be >= 1, got {self.n_copies}")
        if not 0.0 <= float(self.truth_prior) <= 1.0:
            raise BadPrior(f"truth_prior must lie in [0, 1], got {self.truth_prior!r}")


Interval = tuple[float, float]


@dataclass(frozen=True)
class ExperimentResult:
    """Tallies of decisions, rows indexed by the true state (rho, sigma).

    Estimates are ``None`` when no conclusive trial supports them.
    """

    counts: np.ndarray
    est_alpha_bar: float | None
    est_beta_bar: float | None
    est_perr_bar: float | None
    wilson_ci: dict[str, Interval | None] = field(default_factory=dict)
    n_copies: int = 1

    @property
    def trials(self) -> int:
        return int(self.counts.sum())

    @property
    def conclusive_rate(self) -> float:
        return float(self.counts[:, :INCONCLUSIVE].sum() / self.trials)

    def conclusive_rate_given(self, truth: int) -> float | None:
        total = self.counts[truth].sum()
        return None if total == 0 else float(self.counts[truth, :INCONCLUSIVE].sum() / total)

    def __eq__(self, other):
        if not isinstance(other, ExperimentResult):
            return NotImplemented
        return (
            np.array_equal(self.counts, other.counts)
            and (self.est_alpha_bar, self.est_beta_bar, self.est_perr_bar, self.n_copies)
            == (other.est_alpha_bar, other.est_beta_bar, other.est_perr_bar, other.n_copies)
            and self.wilson_ci == other.wilson_ci
        )


def wilson_interval(k: int, n: int, confidence: float = CONFIDENCE) -> Interval | None:
    if n == 0:
        return None
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def _estimate(k: int, n: int) -> tuple[float | None, Interval | None]:
    return (k / n if n else None), wilson_interval(k, n)


def _born(povm: ThreeOutcomePovm, state) -> np.ndarray:
    probs = povm.probabilities(state)
    if probs.min() < -PROB_ATOL or abs(probs.sum() - 1.0) > PROB_ATOL:
        raise InvalidPovm(f"outcome probabilities {probs} do not form a distribution")
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def _tally(probs: np.ndarray, cfg: ExperimentConfig, n: int) -> np.ndarray:
    # probs[truth] is the single-copy outcome distribution under that truth
    cdf = np.cumsum(probs, axis=1)
    counts = np.zeros((2, 3), dtype=np.int64)
    for block, start in enumerate(range(0, cfg.trials, BLOCK)):
        size = min(BLOCK, cfg.trials - start)
        rng = np.random.default_rng([cfg.seed, block])
        truth = (rng.random(size) >= cfg.truth_prior).astype(np.intp)
        u = rng.random((size, n))
        c = cdf[truth]
        outcome = (u >= c[:, 0:1]).astype(np.intp) + (u >= c[:, 1:2])
        # all-agree rule across copies
        first = outcome[:, 0]
        agree = np.all(outcome == first[:, None], axis=1)
        decision = np.where(agree & (first != INCONCLUSIVE), first, INCONCLUSIVE)
        np.add.at(counts, (truth, decision), 1)
    return counts


def _result(counts: np.ndarray, n: int) -> ExperimentResult:
    conc_rho = int(counts[0, GUESS_RHO] + counts[0, GUESS_SIGMA])
    conc_sigma = int(counts[1, GUESS_RHO] + counts[1, GUESS_SIGMA])
    wrong = int(counts[0, GUESS_SIGMA] + counts[1, GUESS_RHO])
    a, a_ci = _estimate(int(counts[0, GUESS_SIGMA]), conc_rho)
    b, b_ci = _estimate(int(counts[1, GUESS_RHO]), conc_sigma)
    e, e_ci = _estimate(wrong, conc_rho + conc_sigma)
    rate, rate_ci = _estimate(conc_rho + conc_sigma, int(counts.sum()))
    cis = {"alpha_bar": a_ci, "beta_bar": b_ci, "perr_bar": e_ci, "conclusive_rate": rate_ci}
    return ExperimentResult(counts, a, b, e, cis, n)


def run_povm_experiment(povm: ThreeOutcomePovm, rho, sigma, cfg: ExperimentConfig) -> ExperimentResult:
    """Simulate ``cfg.trials`` rounds of measuring ``cfg.n_copies`` copies with ``povm``.

    With more than one copy the per-copy outcomes are combined by the all-agree
    rule.
    """
    probs = np.stack([_born(povm, rho), _born(povm, sigma)])
    return _result(_tally(probs, cfg, cfg.n_copies), cfg.n_copies)


def run_product_strategy(rho, sigma, eps: float, n: int | None, cfg: ExperimentConfig) -> ExperimentResult:
    """Simulate the optimal n-copy product strategy (``n`` defaults to ``cfg.n_copies``)."""
    n = cfg.n_copies if n is None else int(n)
    rho = linalg.as_density(rho, "rho")
    sigma = linalg.as_density(sigma, "sigma")
    if n * math.log2(rho.shape[0]) > math.log2(DIM_CAP):
        raise DimOverflow(f"{rho.shape[0]}^{n} exceeds the dimension cap {DIM_CAP}")
    strategy = asym.product_strategy_asym(rho, sigma, eps, n)
    probs = np.stack([_born(strategy.povm, rho), _born(strategy.povm, sigma)])
    return _result(_tally(probs, cfg, n), n)


@dataclass(frozen=True)
class ScanRow:
    n: int
    exponent: float
    lower: float
    upper: float


def exponent_scan(rho, sigma, eps: float, n_list) -> list[ScanRow]:
    """Exact ``-(1/n) log2 beta_bar`` for n copies with the sandwich bounds divided by n."""
    eps = asym.check_epsilon(eps)
    d = asym.exponent_asym(rho, sigma)
    rows = []
    for n in n_list:
        n = int(n)
        if n < 1:
            raise ValidationError(f"number of copies must be >= 1, got {n}")
        value = asym.neg_log2_beta_ncopy(d, eps, n) / n
        rows.append(ScanRow(n, value, d + math.log2(eps / (1 - eps)) / n, d + math.log2(1 / (1 - eps)) / n))
    return rows


def experiment_rows(result: ExperimentResult, exact: dict[str, float]) -> list[tuple]:
    """CSV rows for the quantities named in ``exact``."""
    est = {"alpha_bar": result.est_alpha_bar, "beta_bar": result.est_beta_bar, "perr_bar": result.est_perr_bar}
    rows = []
    for name, value in exact.items():
        ci = result.wilson_ci.get(name)
        rows.append((result.n_copies, name, value, est[name], *(ci if ci else (None, None)), result.conclusive_rate))
    return rows


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else _fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)
