"""Asymmetric postselected hypothesis testing.

The optimal conditional type II error at conditional type I level ``eps`` is

    beta_bar = (eps / (1 - eps) * Omega(rho||sigma) + 1) ** -1,

with ``beta_bar = 0`` when the supports of rho and sigma differ. An optimal
three-outcome measurement is built from the extreme eigenvectors of
``rho^{-1/2} sigma rho^{-1/2}``, and its n-copy version factorises into
identical single-copy measurements combined with an all-agree rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import divergence, linalg
from .errors import BadEpsilon, DimMismatch, InfiniteOmega, InvalidPovm, ValidationError
from .linalg import DEFAULT_TOL

POVM_ATOL = 1e-10
ILL_CONDITIONED = 1e12

GUESS_RHO = 0
GUESS_SIGMA = 1
INCONCLUSIVE = 2


@dataclass(frozen=True)
class ThreeOutcomePovm:
    """Effects ``(m1, m2, m_inconclusive)``: guess rho, guess sigma, abstain."""

    m1: np.ndarray
    m2: np.ndarray
    m_inconclusive: np.ndarray

    def __post_init__(self):
        effects = [np.array(m, dtype=np.complex128) for m in (self.m1, self.m2, self.m_inconclusive)]
        shapes = {m.shape for m in effects}
        if len(shapes) != 1:
            raise DimMismatch(f"effects have different shapes: {sorted(shapes)}")
        dim = effects[0].shape[0]
        for name, m in zip(("m1", "m2", "m_inconclusive"), effects):
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise InvalidPovm(f"{name} is not square")
            if np.max(np.abs(m - m.conj().T)) > POVM_ATOL:
                raise InvalidPovm(f"{name} is not Hermitian")
            if np.linalg.eigvalsh(linalg.hermitianize(m))[0] < -POVM_ATOL:
                raise InvalidPovm(f"{name} is not positive semidefinite")
        if np.max(np.abs(sum(effects) - np.eye(dim))) > POVM_ATOL:
            raise InvalidPovm("effects do not sum to the identity")
        for name, m in zip(("m1", "m2", "m_inconclusive"), effects):
            m = linalg.hermitianize(m)
            m.setflags(write=False)
            object.__setattr__(self, name, m)

    @classmethod
    def from_conclusive(cls, m1, m2) -> "ThreeOutcomePovm":
        """Complete ``m1, m2`` (with ``m1 + m2 <= I``) by the inconclusive effect."""
        m1 = np.asarray(m1, dtype=np.complex128)
        m2 = np.asarray(m2, dtype=np.complex128)
        return cls(m1, m2, np.eye(m1.shape[0]) - m1 - m2)

    @property
    def dim(self) -> int:
        return self.m1.shape[0]

    @property
    def effects(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.m1, self.m2, self.m_inconclusive

    def probabilities(self, state) -> np.ndarray:
        """Born probabilities ``[Tr m1 state, Tr m2 state, Tr m? state]``."""
        state = np.asarray(state)
        probs = np.array([np.vdot(m, state).real for m in self.effects])
        return probs


@dataclass(frozen=True)
class AsymReport:
    epsilon: float
    beta_bar: float
    omega_value: float
    achieving_povm: ThreeOutcomePovm | None = None
    warnings: tuple[str, ...] = field(default=())

    def beta_at(self, eps: float) -> float:
        """Re-derive the optimal error at another level without new eigensystems."""
        return beta_from_omega(self.omega_value, eps)


def check_epsilon(eps: float) -> float:
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise BadEpsilon(f"epsilon must lie in (0, 1), got {eps!r}")
    return eps


def beta_from_omega(omega_value: float, eps: float) -> float:
    """Closed form ``(eps/(1-eps) * Omega + 1)^-1``; zero when Omega is infinite."""
    eps = check_epsilon(eps)
    if math.isinf(omega_value):
        return 0.0
    return (1.0 - eps) / (eps * omega_value + (1.0 - eps))


def _density_pair(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
    rho = linalg.as_density(rho, "rho")
    sigma = linalg.as_density(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise DimMismatch(f"rho is {rho.shape}, sigma is {sigma.shape}")
    return rho, sigma


def _conditioning_warnings(rho, sigma, tol) -> tuple[str, ...]:
    out = []
    for name, op in (("rho", rho), ("sigma", sigma)):
        w = np.linalg.eigvalsh(op)
        supp = w[w > linalg.support_threshold(w, tol)]
        if supp.size and supp[-1] / supp[0] > ILL_CONDITIONED:
            out.append(f"{name} is ill-conditioned on its support (ratio {supp[-1] / supp[0]:.3e})")
    return tuple(out)


def postselected_beta(rho, sigma, eps: float, tol: float = DEFAULT_TOL, with_povm: bool = True) -> AsymReport:
    """Optimal conditional type II error subject to conditional type I error <= eps.

    Parameters
    ----------
    rho, sigma : array_like
        Density matrices of the null and alternative hypotheses.
    eps : float
        Level in (0, 1) for the conditional type I error.
    with_povm : bool
        Also construct an achieving measurement when one exists.

    Returns
    -------
    AsymReport
        ``achieving_povm`` is ``None`` when the supports differ (the optimum
        zero is then approached but the construction below does not apply).
    """
    eps = check_epsilon(eps)
    rho, sigma = _density_pair(rho, sigma)
    om = divergence.omega(rho, sigma, tol)
    povm = None
    warnings: tuple[str, ...] = ()
    if not math.isinf(om):
        warnings = _conditioning_warnings(rho, sigma, tol)
        if with_povm:
            povm = _asym_povm(rho, sigma, eps, 1.0 - eps, tol)
    return AsymReport(eps, beta_from_omega(om, eps), om, povm, warnings)


def beta_zero(rho, sigma, tol: float = DEFAULT_TOL) -> float:
    """Optimal conditional type II error when no type I error is tolerated.

    Equals 1 if supp(sigma) is inside supp(rho) and 0 otherwise; unlike the
    eps > 0 case it is not symmetric in its arguments.
    """
    rho, sigma = _density_pair(rho, sigma)
    return 1.0 if linalg.support_contained(sigma, rho, tol) else 0.0


def _extreme_vectors(rho, sigma, tol) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = linalg.pinv_sqrt(rho, tol)
    w, v = linalg._eigh(x @ sigma @ x)
    support = np.flatnonzero(w > linalg.support_threshold(w, tol))
    lo = support[0]
    # lowest index among the (numerically) maximal eigenvalues
    hi = support[np.flatnonzero(w[support] >= w[support[-1]] * (1 - 1e-12))[0]]
    return x, v[:, lo], v[:, hi]


def _asym_povm(rho, sigma, denom1, denom2, tol) -> ThreeOutcomePovm:
    x, psi_min, psi_max = _extreme_vectors(rho, sigma, tol)
    a = x @ psi_min
    b = x @ psi_max
    m1 = np.outer(a, a.conj()) / denom1
    m2 = np.outer(b, b.conj()) / denom2
    scale = linalg.lambda_max(m1 + m2)
    m1 = m1 / scale
    m2 = m2 / scale
    return ThreeOutcomePovm(m1, m2, np.eye(rho.shape[0]) - m1 - m2)


def optimal_povm_asym(rho, sigma, eps: float, tol: float = DEFAULT_TOL) -> ThreeOutcomePovm:
    """Measurement attaining conditional errors ``(eps, postselected_beta)``.

    Raises
    ------
    InfiniteOmega
        When the supports differ; no measurement attains the infimum 0.
    """
    eps = check_epsilon(eps)
    rho, sigma = _density_pair(rho, sigma)
    if math.isinf(divergence.omega(rho, sigma, tol)):
        raise InfiniteOmega("supports of rho and sigma differ; the optimum is not attained")
    return _asym_povm(rho, sigma, eps, 1.0 - eps, tol)


@dataclass(frozen=True)
class ProductStrategy:
    """Identical single-copy measurements on ``n`` copies with an all-agree rule.

    All ``n`` outcomes equal to "guess rho" decide rho, all equal to
    "guess sigma" decide sigma; anything else is inconclusive.
    """

    povm: ThreeOutcomePovm
    n: int

    @staticmethod
    def decide(outcomes) -> int:
        outcomes = np.asarray(outcomes)
        if np.all(outcomes == GUESS_RHO):
            return GUESS_RHO
        if np.all(outcomes == GUESS_SIGMA):
            return GUESS_SIGMA
        return INCONCLUSIVE

    def outcome_probabilities(self, state) -> np.ndarray:
        """Exact distribution of the aggregated decision for ``n`` copies of ``state``."""
        p1, p2, _ = self.povm.probabilities(state)
        all1 = max(p1, 0.0) ** self.n
        all2 = max(p2, 0.0) ** self.n
        return np.array([all1, all2, 1.0 - all1 - all2])


def product_strategy_asym(rho, sigma, eps: float, n: int, tol: float = DEFAULT_TOL) -> ProductStrategy:
    """Single-copy measurement whose n-fold all-agree use is optimal for n copies."""
    eps = check_epsilon(eps)
    if n < 1:
        raise ValidationError(f"number of copies must be >= 1, got {n}")
    rho, sigma = _density_pair(rho, sigma)
    if math.isinf(divergence.omega(rho, sigma, tol)):
        raise InfiniteOmega("supports of rho and sigma differ")
    povm = _asym_povm(rho, sigma, eps ** (1.0 / n), (1.0 - eps) ** (1.0 / n), tol)
    return ProductStrategy(povm, n)


def exponent_asym(rho, sigma, tol: float = DEFAULT_TOL) -> float:
    """Asymptotic exponent of the conditional type II error: the Hilbert projective metric."""
    return divergence.d_omega(rho, sigma, tol)


def neg_log2_beta_ncopy(d_omega_value: float, eps: float, n: int) -> float:
    """``-log2`` of the optimal error for ``n`` copies, evaluated stably in the log domain."""
    eps = check_epsilon(eps)
    if math.isinf(d_omega_value):
        return math.inf
    return float(np.logaddexp2(n * d_omega_value + math.log2(eps / (1.0 - eps)), 0.0))


def sandwich_bounds(rho, sigma, eps: float, n: int, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Bounds on ``-log2 beta_bar`` for n copies; there are no sub-linear terms in n."""
    eps = check_epsilon(eps)
    d = exponent_asym(rho, sigma, tol)
    return n * d + math.log2(eps / (1.0 - eps)), n * d + math.log2(1.0 / (1.0 - eps))
