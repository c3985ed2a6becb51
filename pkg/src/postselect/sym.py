"""Symmetric postselected hypothesis testing.

With priors ``p`` (rho) and ``q = 1 - p`` (sigma) the optimal error conditioned
on a conclusive outcome is ``(Xi(p rho || q sigma) + 1) ** -1``. It is attained
by a measurement that only ever guesses the dominant hypothesis and abstains
otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import divergence, linalg
from .asym import ThreeOutcomePovm
from .divergence import WeightedPair
from .errors import InfiniteXi, ValidationError
from .linalg import DEFAULT_TOL

RHO_OVER_SIGMA = "rho-over-sigma"
SIGMA_OVER_RHO = "sigma-over-rho"


@dataclass(frozen=True)
class SymReport:
    p: float
    perr_bar: float
    xi_value: float
    dominant_side: str
    achieving_povm: ThreeOutcomePovm | None = None


def perr_from_xi(xi_value: float) -> float:
    return 0.0 if math.isinf(xi_value) else 1.0 / (xi_value + 1.0)


def _dominant(wp: WeightedPair, tol: float) -> tuple[float, str]:
    a, b = divergence.weighted_ratios(wp, tol)
    # ties go to rho-over-sigma; both branches give the same error
    if a >= b:
        return a, RHO_OVER_SIGMA
    return b, SIGMA_OVER_RHO


def postselected_perr(wp: WeightedPair, tol: float = DEFAULT_TOL, with_povm: bool = True) -> SymReport:
    """Optimal conditional average error for the weighted pair ``wp``.

    Zero exactly when the supports of rho and sigma differ, in which case no
    achieving measurement is returned.
    """
    xi_value, side = _dominant(wp, tol)
    povm = None
    if with_povm and not math.isinf(xi_value):
        povm = _sym_povm(wp, side, tol)
    return SymReport(wp.p, perr_from_xi(xi_value), xi_value, side, povm)


def _sym_povm(wp: WeightedPair, side: str, tol: float) -> ThreeOutcomePovm:
    # guessed state is the dominant one; the other conclusive effect stays zero
    guessed, other = (wp.rho, wp.sigma) if side == RHO_OVER_SIGMA else (wp.sigma, wp.rho)
    x = linalg.pinv_sqrt(other, tol)
    _, v = linalg._eigh(x @ guessed @ x)
    a = x @ v[:, -1]
    w = np.outer(a, a.conj())
    # the only non-zero eigenvalue of w is <psi|other^{-1}|psi> = |a|^2
    effect = w / np.vdot(a, a).real
    zero = np.zeros_like(effect)
    rest = np.eye(effect.shape[0]) - effect
    if side == RHO_OVER_SIGMA:
        return ThreeOutcomePovm(effect, zero, rest)
    return ThreeOutcomePovm(zero, effect, rest)


def optimal_povm_sym(wp: WeightedPair, tol: float = DEFAULT_TOL) -> ThreeOutcomePovm:
    """Measurement attaining :func:`postselected_perr`.

    Raises
    ------
    InfiniteXi
        When the supports differ.
    """
    xi_value, side = _dominant(wp, tol)
    if math.isinf(xi_value):
        raise InfiniteXi("supports of rho and sigma differ; the optimum 0 is not attained")
    return _sym_povm(wp, side, tol)


def exponent_sym(rho, sigma, tol: float = DEFAULT_TOL) -> float:
    """Asymptotic exponent of the conditional average error (any priors): the Thompson metric."""
    return divergence.d_xi(rho, sigma, tol)


def neg_log2_perr_ncopy(rho, sigma, p: float, n: int, tol: float = DEFAULT_TOL) -> float:
    """``-log2`` of the optimal error for ``n`` copies with priors ``(p, 1-p)``.

    Uses additivity of the max-relative entropy, so nothing of dimension
    ``d**n`` is formed.
    """
    if n < 1:
        raise ValidationError(f"number of copies must be >= 1, got {n}")
    wp = WeightedPair(rho, sigma, p)
    a, b = divergence.max_ratios(wp.rho, wp.sigma, tol)
    if math.isinf(a) or math.isinf(b):
        return math.inf
    lp = math.log2(wp.p / wp.q)
    log_xi = max(lp + n * math.log2(a), -lp + n * math.log2(b))
    return float(np.logaddexp2(log_xi, 0.0))


def exact_ncopy_perr(rho, sigma, n: int, tol: float = DEFAULT_TOL) -> float:
    """Optimal error for ``n`` copies at equal priors, ``(Xi^n + 1)^-1``."""
    return 2.0 ** -neg_log2_perr_ncopy(rho, sigma, 0.5, n, tol)
