"""Channel discrimination through Choi states.

Conventions: the maximally entangled state is ``|Phi+> = sum_i |i>|i> / sqrt(dA)``
with the reference (ancilla) system first, so the Choi state of ``M: A -> B``
is ``J = sum_ij |i><j| (x) M(|i><j|) / dA`` on ``A (x) B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import composite, divergence, linalg
from .asym import check_epsilon, neg_log2_beta_ncopy
from .errors import BadPrior, DimMismatch, DimOverflow, InvalidKraus, ValidationError
from .linalg import DEFAULT_TOL, DIM_CAP

CHANNEL_ATOL = 1e-9


def max_entangled(dim: int) -> np.ndarray:
    """Density matrix of ``|Phi+>`` on ``dim x dim``."""
    v = np.eye(dim, dtype=np.complex128).reshape(-1) / math.sqrt(dim)
    return np.outer(v, v.conj())


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """CPTP map from ``dim_in`` to ``dim_out``; the Choi state is always present."""

    dim_in: int
    dim_out: int
    choi: np.ndarray
    kraus: tuple[np.ndarray, ...] | None = field(default=None)

    @classmethod
    def from_kraus(cls, kraus) -> "QuantumChannel":
        ks = [np.array(k, dtype=np.complex128) for k in kraus]
        if not ks or any(k.ndim != 2 for k in ks) or len({k.shape for k in ks}) != 1:
            raise InvalidKraus("Kraus operators must be a non-empty list of equally shaped matrices")
        d_out, d_in = ks[0].shape
        total = sum(k.conj().T @ k for k in ks)
        if np.max(np.abs(total - np.eye(d_in))) > CHANNEL_ATOL:
            raise InvalidKraus("Kraus operators are not trace preserving")
        # column of the Choi vectorisation: (I (x) K) |Phi+>
        phi = np.eye(d_in, dtype=np.complex128).reshape(-1) / math.sqrt(d_in)
        vecs = [np.kron(np.eye(d_in), k) @ phi for k in ks]
        choi = sum(np.outer(v, v.conj()) for v in vecs)
        for k in ks:
            k.setflags(write=False)
        return cls(d_in, d_out, choi, tuple(ks))

    @classmethod
    def from_choi(cls, choi, dim_in: int, dim_out: int) -> "QuantumChannel":
        return cls(dim_in, dim_out, choi)

    def __post_init__(self):
        if self.dim_in < 1 or self.dim_out < 1:
            raise ValidationError("channel dimensions must be positive")
        choi = linalg.as_hermitian(self.choi, "choi")
        if choi.shape[0] != self.dim_in * self.dim_out:
            raise DimMismatch(f"Choi matrix of dim {choi.shape[0]} does not match {self.dim_in}x{self.dim_out}")
        w = np.linalg.eigvalsh(choi)
        if w[0] < -CHANNEL_ATOL:
            raise InvalidKraus("Choi matrix is not positive semidefinite (map is not completely positive)")
        reduced = linalg.partial_trace(choi, (self.dim_in, self.dim_out), over="B")
        if np.max(np.abs(reduced - np.eye(self.dim_in) / self.dim_in)) > CHANNEL_ATOL:
            raise InvalidKraus("Choi matrix does not describe a trace-preserving map")
        choi.setflags(write=False)
        object.__setattr__(self, "choi", choi)

    def apply(self, rho) -> np.ndarray:
        """Image of an operator on the input space (Kraus sum when available)."""
        rho = np.asarray(rho, dtype=np.complex128)
        if rho.shape != (self.dim_in, self.dim_in):
            raise DimMismatch(f"input has shape {rho.shape}, channel expects dim {self.dim_in}")
        if self.kraus is not None:
            return sum(k @ rho @ k.conj().T for k in self.kraus)
        return apply_via_choi(self.choi, rho, self.dim_in, self.dim_out)

    def tensor(self, other: "QuantumChannel") -> "QuantumChannel":
        """Parallel composition ``self (x) other`` (requires Kraus operators)."""
        if self.kraus is None or other.kraus is None:
            raise ValidationError("tensor product of channels needs Kraus operators")
        return QuantumChannel.from_kraus([np.kron(a, b) for a in self.kraus for b in other.kraus])


def apply_via_choi(choi, rho, dim_in: int, dim_out: int) -> np.ndarray:
    """``M(rho) = dA Tr_A[(rho^T (x) I) J]``."""
    t = np.asarray(choi).reshape(dim_in, dim_out, dim_in, dim_out)
    return dim_in * np.einsum("ij,iajb->ab", np.asarray(rho), t)


def choi_of(channel: QuantumChannel) -> np.ndarray:
    return channel.choi.copy()


def apply(channel: QuantumChannel, rho) -> np.ndarray:
    return channel.apply(rho)


def identity_channel(dim: int) -> QuantumChannel:
    return QuantumChannel.from_kraus([np.eye(dim)])


def depolarizing(t: float, dim: int = 2) -> QuantumChannel:
    """``rho -> (1 - t) rho + t Tr(rho) I / dim`` for ``t`` in [0, 1]."""
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"depolarizing parameter must lie in [0, 1], got {t!r}")
    units = [np.zeros((dim, dim), dtype=np.complex128) for _ in range(dim * dim)]
    for idx, (i, j) in enumerate(np.ndindex(dim, dim)):
        units[idx][i, j] = math.sqrt(t / dim)
    kraus = [math.sqrt(1.0 - t) * np.eye(dim)] + units
    return QuantumChannel.from_kraus(kraus)


def random_channel(dim_in: int, dim_out: int, rng: np.random.Generator, n_kraus: int | None = None) -> QuantumChannel:
    """Random channel from a random Stinespring isometry.

    The default number of Kraus operators, ``dim_in * dim_out``, gives a
    full-rank Choi state almost surely.
    """
    n_kraus = dim_in * dim_out if n_kraus is None else n_kraus
    g = rng.standard_normal((n_kraus * dim_out, dim_in)) + 1j * rng.standard_normal((n_kraus * dim_out, dim_in))
    q, _ = np.linalg.qr(g)
    return QuantumChannel.from_kraus(q.reshape(n_kraus, dim_out, dim_in))


def _pair(m: QuantumChannel, n: QuantumChannel) -> tuple[np.ndarray, np.ndarray]:
    if (m.dim_in, m.dim_out) != (n.dim_in, n.dim_out):
        raise DimMismatch(f"channels act {m.dim_in}->{m.dim_out} and {n.dim_in}->{n.dim_out}")
    return m.choi, n.choi


def channel_omega(m: QuantumChannel, n: QuantumChannel, tol: float = DEFAULT_TOL) -> float:
    return divergence.omega(*_pair(m, n), tol)


def channel_xi(m: QuantumChannel, n: QuantumChannel, tol: float = DEFAULT_TOL) -> float:
    return divergence.xi(*_pair(m, n), tol)


def _check_copies(m: QuantumChannel, copies: int) -> None:
    if copies < 1:
        raise ValidationError(f"number of channel uses must be >= 1, got {copies}")
    if (m.dim_in * m.dim_out) ** copies > DIM_CAP:
        raise DimOverflow(f"({m.dim_in}*{m.dim_out})^{copies} exceeds the dimension cap {DIM_CAP}")


@dataclass(frozen=True)
class ChannelReport:
    """Choi-state ratios of a channel pair; n-use values follow by additivity."""

    omega: float
    xi: float
    ratio_mn: float
    ratio_nm: float
    dim_in: int
    dim_out: int

    def beta_bar(self, eps: float, copies: int = 1) -> float:
        d = math.inf if math.isinf(self.omega) else math.log2(self.omega)
        return 2.0 ** -neg_log2_beta_ncopy(d, eps, copies)

    def perr_bar(self, p: float, copies: int = 1) -> float:
        if not 0.0 < p < 1.0:
            raise BadPrior(f"prior p must lie in (0, 1), got {p!r}")
        if math.isinf(self.ratio_mn) or math.isinf(self.ratio_nm):
            return 0.0
        q = 1.0 - p
        log_xi = max(math.log2(p / q) + copies * math.log2(self.ratio_mn),
                     math.log2(q / p) + copies * math.log2(self.ratio_nm))
        return 2.0 ** -float(np.logaddexp2(log_xi, 0.0))


def channel_report(m: QuantumChannel, n: QuantumChannel, tol: float = DEFAULT_TOL) -> ChannelReport:
    a, b = divergence.max_ratios(*_pair(m, n), tol)
    om = math.inf if math.isinf(a) or math.isinf(b) else max(a * b, 1.0)
    return ChannelReport(om, max(a, b), a, b, m.dim_in, m.dim_out)


def channel_beta(m: QuantumChannel, n: QuantumChannel, eps: float, copies: int = 1, tol: float = DEFAULT_TOL) -> float:
    """Optimal conditional type II error over all strategies with ``copies`` uses."""
    eps = check_epsilon(eps)
    _check_copies(m, copies)
    return channel_report(m, n, tol).beta_bar(eps, copies)


def channel_perr(m: QuantumChannel, n: QuantumChannel, p: float, copies: int = 1, tol: float = DEFAULT_TOL) -> float:
    """Optimal conditional average error over all strategies with ``copies`` uses."""
    _check_copies(m, copies)
    return channel_report(m, n, tol).perr_bar(p, copies)


def channel_exponents(m: QuantumChannel, n: QuantumChannel, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """``(asymmetric, symmetric)`` exponents in bits per channel use."""
    rep = channel_report(m, n, tol)
    lg = lambda x: math.inf if math.isinf(x) else math.log2(x)  # noqa: E731
    return lg(rep.omega), lg(rep.xi)


def channel_composite_omega(m: QuantumChannel, family, tol: float = composite.COMPOSITE_TOL, seed: int = 0) -> composite.CompositeReport:
    """Minimum of Omega(J_M || J) over the convex hull of the Choi states of ``family``."""
    family = list(family)
    for other in family:
        _pair(m, other)
    return composite.omega_min(m.choi, [c.choi for c in family], tol, seed)
