"""Max-relative entropy and the two metrics built from it.

* ``dmax(rho, sigma)``: log2 of the smallest ``lam`` with ``rho <= lam * sigma``.
* Hilbert projective metric ``d_omega = dmax(rho||sigma) + dmax(sigma||rho)``;
  ``omega`` is its base-2 exponential.
* Thompson metric ``d_xi = max(dmax(rho||sigma), dmax(sigma||rho))``; ``xi``
  likewise.

Infinite values are returned as ``math.inf``. Logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import BadGamma, BadPrior, DimMismatch, ZeroOperator
from .linalg import DEFAULT_TOL


def _log2(x: float) -> float:
    return math.inf if math.isinf(x) else math.log2(x)


def _checked_pair(rho, sigma, tol: float) -> tuple[np.ndarray, np.ndarray]:
    rho = linalg.as_psd(rho, "rho")
    sigma = linalg.as_psd(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise DimMismatch(f"rho is {rho.shape}, sigma is {sigma.shape}")
    for name, op in (("rho", rho), ("sigma", sigma)):
        if linalg.lambda_max(op) <= tol:
            raise ZeroOperator(f"{name} is the zero operator")
    return rho, sigma


def _max_ratio(rho: np.ndarray, sigma: np.ndarray, tol: float) -> float:
    # smallest lam with rho <= lam sigma; inputs already validated
    if not linalg.support_contained(rho, sigma, tol):
        return math.inf
    x = linalg.pinv_sqrt(sigma, tol)
    return linalg.lambda_max(x @ rho @ x)


def max_ratios(rho, sigma, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Return ``(2**dmax(rho||sigma), 2**dmax(sigma||rho))`` from one validation pass."""
    if rho is sigma or np.array_equal(np.asarray(rho), np.asarray(sigma)):
        _checked_pair(rho, sigma, tol)
        return 1.0, 1.0
    rho, sigma = _checked_pair(rho, sigma, tol)
    return _max_ratio(rho, sigma, tol), _max_ratio(sigma, rho, tol)


def dmax(rho, sigma, tol: float = DEFAULT_TOL) -> float:
    """Max-relative entropy ``log2 inf{lam : rho <= lam sigma}``.

    Both arguments may be unnormalised PSD operators; rescaling obeys
    ``dmax(a rho || b sigma) = log2(a/b) + dmax(rho || sigma)``.

    Returns ``math.inf`` when supp(rho) is not contained in supp(sigma).

    Raises
    ------
    ZeroOperator
        If either argument vanishes.
    """
    rho, sigma = _checked_pair(rho, sigma, tol)
    return _log2(_max_ratio(rho, sigma, tol))


def omega(rho, sigma, tol: float = DEFAULT_TOL) -> float:
    """Non-logarithmic Hilbert projective metric; ``math.inf`` iff the supports differ."""
    a, b = max_ratios(rho, sigma, tol)
    if math.isinf(a) or math.isinf(b):
        return math.inf
    # rho <= a sigma <= a b rho forces a b >= 1
    return max(a * b, 1.0)


def d_omega(rho, sigma, tol: float = DEFAULT_TOL) -> float:
    return _log2(omega(rho, sigma, tol))


def xi(rho, sigma, tol: float = DEFAULT_TOL) -> float:
    """Non-logarithmic Thompson metric."""
    return max(max_ratios(rho, sigma, tol))


def d_xi(rho, sigma, tol: float = DEFAULT_TOL) -> float:
    return _log2(xi(rho, sigma, tol))


@dataclass(frozen=True)
class WeightedPair:
    """Two density matrices with priors ``p`` (for rho) and ``q = 1 - p`` (for sigma)."""

    rho: np.ndarray
    sigma: np.ndarray
    p: float = 0.5

    def __post_init__(self):
        rho = linalg.as_density(self.rho, "rho")
        sigma = linalg.as_density(self.sigma, "sigma")
        if rho.shape != sigma.shape:
            raise DimMismatch(f"rho is {rho.shape}, sigma is {sigma.shape}")
        p = float(self.p)
        if not 0.0 < p < 1.0:
            raise BadPrior(f"prior p must lie in (0, 1), got {p!r}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> float:
        return 1.0 - self.p


def weighted_ratios(wp: WeightedPair, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """``(2**dmax(p rho || q sigma), 2**dmax(q sigma || p rho))``."""
    a, b = max_ratios(wp.rho, wp.sigma, tol)
    return wp.p / wp.q * a, wp.q / wp.p * b


def xi_weighted(wp: WeightedPair, tol: float = DEFAULT_TOL) -> float:
    """``Xi(p rho || q sigma)``; equals ``max(p/q, q/p)`` when rho == sigma."""
    return max(weighted_ratios(wp, tol))


def helstrom_error(wp: WeightedPair) -> float:
    """Optimal conventional (no inconclusive outcome) average error."""
    return 0.5 * (1.0 - linalg.trace_norm(wp.p * wp.rho - wp.q * wp.sigma))


def dilation_counterexample(gamma: float) -> tuple[float, float]:
    """Xi of a normalised conjugated pair versus Xi of the original pair.

    Uses rho = diag(2/3, 1/3), sigma = I/2 and the positive map X -> D X D with
    D = diag(sqrt(gamma), 1/sqrt(gamma)). The first value is
    ``(2 gamma^2 + 1) / (gamma^2 + 1)``, which exceeds the original 3/2 for every
    gamma > 1: the Thompson metric is not monotone once outputs are renormalised.
    """
    if not gamma > 1.0:
        raise BadGamma(f"gamma must exceed 1, got {gamma!r}")
    rho = np.diag([2 / 3, 1 / 3]).astype(complex)
    sigma = np.eye(2, dtype=complex) / 2
    d = np.diag([math.sqrt(gamma), 1 / math.sqrt(gamma)])
    rho_out = d @ rho @ d
    sigma_out = d @ sigma @ d
    rho_out /= np.trace(rho_out).real
    sigma_out /= np.trace(sigma_out).real
    return xi(rho_out, sigma_out), xi(rho, sigma)
