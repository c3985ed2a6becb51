"""Independent checks of the closed forms.

Nothing here calls the closed-form error formulas. Conditional errors are
evaluated from Born traces, converse searches sample random measurements, and
adaptive channel strategies are simulated explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import divergence, linalg
from .asym import ThreeOutcomePovm, check_epsilon, optimal_povm_asym
from .channels import QuantumChannel, channel_omega, random_channel
from .divergence import WeightedPair
from .errors import BadPrior, DimMismatch, InfeasiblePovm, NoConclusiveMass, ValidationError
from .sym import optimal_povm_sym

CONCLUSIVE_MIN = 1e-12
BLOCK = 2048
NEAR_OPTIMUM_FRACTION = 0.2


@dataclass(frozen=True)
class ConditionalErrors:
    """Born probabilities of the two conclusive outcomes under each hypothesis.

    Ratios are computed on access and raise :class:`NoConclusiveMass` when
    their denominator is at most ``CONCLUSIVE_MIN``.
    """

    p1_rho: float
    p2_rho: float
    p1_sigma: float
    p2_sigma: float

    @property
    def conc_rho(self) -> float:
        return self.p1_rho + self.p2_rho

    @property
    def conc_sigma(self) -> float:
        return self.p1_sigma + self.p2_sigma

    @staticmethod
    def _ratio(num: float, den: float, what: str) -> float:
        if den <= CONCLUSIVE_MIN:
            raise NoConclusiveMass(f"conclusive probability {den:.3e} too small for {what}")
        return num / den

    @property
    def alpha_bar(self) -> float:
        return self._ratio(self.p2_rho, self.conc_rho, "alpha_bar")

    @property
    def beta_bar(self) -> float:
        return self._ratio(self.p1_sigma, self.conc_sigma, "beta_bar")

    def perr_bar(self, p: float = 0.5) -> float:
        if not 0.0 < p < 1.0:
            raise BadPrior(f"prior p must lie in (0, 1), got {p!r}")
        q = 1.0 - p
        return self._ratio(p * self.p2_rho + q * self.p1_sigma, p * self.conc_rho + q * self.conc_sigma, "perr_bar")


def conditional_errors(povm: ThreeOutcomePovm, rho, sigma) -> ConditionalErrors:
    rho = linalg.as_density(rho, "rho")
    sigma = linalg.as_density(sigma, "sigma")
    if rho.shape != (povm.dim, povm.dim) or sigma.shape != rho.shape:
        raise DimMismatch("measurement and states have different dimensions")
    p1r, p2r, _ = povm.probabilities(rho)
    p1s, p2s, _ = povm.probabilities(sigma)
    return ConditionalErrors(float(p1r), float(p2r), float(p1s), float(p2s))


def _gaussian_psd(rng: np.random.Generator, shape: tuple[int, ...], dim: int) -> np.ndarray:
    a = rng.standard_normal(shape + (dim, dim)) + 1j * rng.standard_normal(shape + (dim, dim))
    return np.conj(np.swapaxes(a, -1, -2)) @ a


def random_povm3(dim: int, seed: int) -> ThreeOutcomePovm:
    """Random three-outcome measurement with Gaussian-induced conclusive effects."""
    if dim < 2:
        raise ValidationError(f"dimension must be >= 2, got {dim}")
    rng = np.random.default_rng(seed)
    m1, m2 = _gaussian_psd(rng, (2,), dim)
    scale = linalg.lambda_max(m1 + m2)
    return ThreeOutcomePovm.from_conclusive(m1 / scale, m2 / scale)


@dataclass(frozen=True)
class ConverseResult:
    best: float
    trials: int
    feasible: int


def _traces(m: np.ndarray, state: np.ndarray) -> np.ndarray:
    return np.einsum("bij,ji->b", m, state).real


def _sample_block(rng, dim, size, anchor):
    m1 = _gaussian_psd(rng, (size,), dim)
    m2 = _gaussian_psd(rng, (size,), dim)
    if anchor is not None:
        near = int(round(NEAR_OPTIMUM_FRACTION * size))
        # small Gaussian kicks of log-uniform size around the analytic optimum
        kick = 10.0 ** rng.uniform(-6, -1, size=(near, 1, 1)) / dim
        m1[:near] = anchor[0] + kick * m1[:near] / np.trace(m1[:near], axis1=1, axis2=2).real[:, None, None]
        m2[:near] = anchor[1] + kick * m2[:near] / np.trace(m2[:near], axis1=1, axis2=2).real[:, None, None]
    return m1, m2


def _normalise(m1, m2, c):
    # joint rescaling so that m1 + c m2 <= I; conditional errors are unchanged
    m2 = m2 * c[:, None, None]
    s = np.linalg.eigvalsh(m1 + m2)[:, -1]
    return m1 / s[:, None, None], m2 / s[:, None, None]


def converse_search(rho, sigma, eps: float | None = None, p: float | None = None,
                    trials: int = 10_000, seed: int = 0) -> ConverseResult:
    """Smallest conditional error found over randomly sampled measurements.

    Give exactly one of ``eps`` (asymmetric mode: minimise beta_bar subject to
    alpha_bar <= eps) or ``p`` (symmetric mode: minimise perr_bar with priors
    ``(p, 1 - p)``).

    Each sample ``(M1, M2)`` is used through the family ``(M1, c M2)``, which
    stays a valid measurement after joint rescaling. In asymmetric mode ``c``
    is chosen to put alpha_bar exactly at ``eps``; in symmetric mode the two
    extreme members ``c -> 0`` and ``c -> inf`` are also scored.
    """
    if (eps is None) == (p is None):
        raise ValidationError("give exactly one of eps or p")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    rho = linalg.as_density(rho, "rho")
    sigma = linalg.as_density(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise DimMismatch(f"rho is {rho.shape}, sigma is {sigma.shape}")
    dim = rho.shape[0]
    anchor = None
    if eps is not None:
        eps = check_epsilon(eps)
        if math.isfinite(divergence.omega(rho, sigma)):
            opt = optimal_povm_asym(rho, sigma, eps)
            anchor = (opt.m1, opt.m2)
    else:
        wp = WeightedPair(rho, sigma, p)
        if math.isfinite(divergence.xi_weighted(wp)):
            opt = optimal_povm_sym(wp)
            anchor = (opt.m1, opt.m2)

    best, feasible = math.inf, 0
    for block, start in enumerate(range(0, trials, BLOCK)):
        size = min(BLOCK, trials - start)
        rng = np.random.default_rng([seed, block])
        m1, m2 = _sample_block(rng, dim, size, anchor)
        t1r, t2r = _traces(m1, rho), _traces(m2, rho)
        if eps is not None:
            ok = t2r > 0
            c = np.where(ok, eps * t1r / ((1 - eps) * np.where(ok, t2r, 1.0)), 1.0)
            m1, m2 = _normalise(m1, m2, c)
            t1r, t2r = _traces(m1, rho), _traces(m2, rho)
            t1s, t2s = _traces(m1, sigma), _traces(m2, sigma)
            conc_r, conc_s = t1r + t2r, t1s + t2s
            ok &= (conc_r > CONCLUSIVE_MIN) & (conc_s > CONCLUSIVE_MIN)
            ok &= t2r <= eps * conc_r * (1 + 1e-12)
            vals = t1s[ok] / conc_s[ok]
        else:
            q = 1.0 - p
            m1, m2 = _normalise(m1, m2, np.ones(size))
            t1r, t2r = _traces(m1, rho), _traces(m2, rho)
            t1s, t2s = _traces(m1, sigma), _traces(m2, sigma)
            den = p * (t1r + t2r) + q * (t1s + t2s)
            den1 = p * t1r + q * t1s
            den2 = p * t2r + q * t2s
            with np.errstate(divide="ignore", invalid="ignore"):
                cand = np.stack([
                    np.where(den > CONCLUSIVE_MIN, (p * t2r + q * t1s) / den, np.inf),
                    np.where(den1 > CONCLUSIVE_MIN, q * t1s / den1, np.inf),
                    np.where(den2 > CONCLUSIVE_MIN, p * t2r / den2, np.inf),
                ])
            ok = np.isfinite(cand).any(axis=0)
            vals = cand.min(axis=0)[ok]
        feasible += int(ok.sum())
        if vals.size:
            best = min(best, float(vals.min()))
    return ConverseResult(best, trials, feasible)


@dataclass(frozen=True)
class DualWitness:
    """Operators ``(A, B)`` feasible for the dual form of Omega."""

    a: np.ndarray
    b: np.ndarray

    def value(self, sigma) -> float:
        """``Tr(A sigma) / Tr(B sigma)``, a lower bound on Omega(rho||sigma)."""
        num = float(np.vdot(self.a, sigma).real)
        den = float(np.vdot(self.b, sigma).real)
        if den <= 0:
            return 0.0 if num <= 0 else math.inf
        return num / den


def dual_witness_from_povm(m1, m2, eps: float, rho) -> DualWitness:
    """Map a measurement with conditional type I error <= eps to a dual witness.

    Raises
    ------
    InfeasiblePovm
        If the measurement violates the eps constraint on ``rho``.
    """
    eps = check_epsilon(eps)
    m1 = linalg.as_psd(m1, "m1")
    m2 = linalg.as_psd(m2, "m2")
    rho = linalg.as_density(rho, "rho")
    a = (1.0 - eps) * m2
    b = eps * m1
    tr_a, tr_b = np.vdot(a, rho).real, np.vdot(b, rho).real
    if tr_a > tr_b + 1e-12 * max(tr_b, 1.0):
        raise InfeasiblePovm("conditional type I error of the measurement exceeds eps")
    return DualWitness(a, b)


@dataclass(frozen=True)
class AdaptiveSample:
    rho_out: np.ndarray
    sigma_out: np.ndarray
    omega: float
    bound: float


def _on_last(state: np.ndarray, dim_rest: int, channel: QuantumChannel) -> np.ndarray:
    # apply id (x) channel to an operator on rest (x) input
    choi = channel.choi.reshape(channel.dim_in, channel.dim_out, channel.dim_in, channel.dim_out)
    t = state.reshape(dim_rest, channel.dim_in, dim_rest, channel.dim_in)
    # M(|i><j|) = dA * choi[i, :, j, :]
    out = channel.dim_in * np.einsum("xiyj,iajb->xayb", t, choi)
    return out.reshape(dim_rest * channel.dim_out, dim_rest * channel.dim_out)


def _apply_kraus(state: np.ndarray, kraus) -> np.ndarray:
    return sum(k @ state @ k.conj().T for k in kraus)


def _swap_processor(d_a: int, d_b: int) -> np.ndarray:
    # (R1, R2, A2, B1) -> (R1, B1, R2, A2)
    dims = (d_a, d_a, d_a, d_b)
    n = int(np.prod(dims))
    perm = np.eye(n).reshape(dims + (n,)).transpose(0, 3, 1, 2, 4).reshape(n, n)
    return perm


def adaptive_strategy_sample(m: QuantumChannel, n: QuantumChannel, seed: int, parallel: bool = False) -> AdaptiveSample:
    """Two channel uses interleaved with a random CPTP processor.

    A random pure state on R (x) A goes through the channel, then a random
    channel R (x) B -> R' (x) A, then the channel again. With
    ``parallel=True`` the input is two maximally entangled pairs and the
    processor only reroutes systems, which reproduces the parallel strategy.
    """
    if (m.dim_in, m.dim_out) != (n.dim_in, n.dim_out):
        raise DimMismatch("channels must share input and output dimensions")
    d_a, d_b = m.dim_in, m.dim_out
    bound = channel_omega(m, n) ** 2
    if parallel:
        r = d_a ** 3
        v = np.zeros((d_a, d_a, d_a, d_a), dtype=np.complex128)
        for i in range(d_a):
            for j in range(d_a):
                v[i, j, j, i] = 1.0 / d_a
        psi = v.reshape(-1)
        processor = [_swap_processor(d_a, d_b)]
        r_out = d_a * d_b * d_a
    else:
        rng = np.random.default_rng(seed)
        r = r_out = d_a
        psi = rng.standard_normal(r * d_a) + 1j * rng.standard_normal(r * d_a)
        psi /= np.linalg.norm(psi)
        processor = random_channel(r * d_b, r_out * d_a, rng, n_kraus=2).kraus
    outs = []
    for ch in (m, n):
        state = np.outer(psi, psi.conj())
        state = _on_last(state, r, ch)
        state = _apply_kraus(state, processor)
        state = _on_last(state, r_out, ch)
        outs.append(linalg.hermitianize(state))
    return AdaptiveSample(outs[0], outs[1], divergence.omega(outs[0], outs[1]), bound)
