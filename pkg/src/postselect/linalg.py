"""Dense Hermitian linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The validators
(:func:`as_hermitian`, :func:`as_density`) return fresh arrays, so callers
never share mutable state with the library.

Numerical rank is decided relative to the spectrum: an eigenvalue counts as
part of the support when it exceeds ``tol * max(lambda_max, 1)``.
"""

from __future__ import annotations

from functools import reduce
from typing import NamedTuple

import numpy as np

from .errors import DimMismatch, DimOverflow, NonHermitian, NotPsd, ValidationError

DEFAULT_TOL = 1e-10
HERMITIAN_ATOL = 1e-12
DENSITY_ATOL = 1e-10
DIM_CAP = 4096


class Spectrum(NamedTuple):
    """Eigenvalues in ascending order with matching orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _square(a, name: str = "matrix") -> np.ndarray:
    arr = np.array(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimMismatch(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    return arr


def hermitianize(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def as_hermitian(a, name: str = "matrix") -> np.ndarray:
    """Validate ``a`` as a Hermitian matrix and return a complex copy."""
    arr = _square(a, name)
    if not np.all(np.isfinite(arr)):
        raise NonHermitian(f"{name} has non-finite entries")
    if np.max(np.abs(arr - arr.conj().T)) > HERMITIAN_ATOL:
        raise NonHermitian(f"{name} is not Hermitian within {HERMITIAN_ATOL}")
    return hermitianize(arr)


def as_psd(a, name: str = "matrix", tol: float = DENSITY_ATOL) -> np.ndarray:
    arr = as_hermitian(a, name)
    w = np.linalg.eigvalsh(arr)
    if w[0] < -tol * max(w[-1], 1.0):
        raise NotPsd(f"{name} has eigenvalue {w[0]:.3e} < 0")
    return arr


def as_density(a, name: str = "state") -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD within 1e-10 and unit trace within 1e-10."""
    arr = as_psd(a, name)
    tr = np.trace(arr).real
    if abs(tr - 1.0) > DENSITY_ATOL:
        raise ValidationError(f"{name} has trace {tr!r}, expected 1")
    return arr


def _eigh(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # internal products like X rho X are Hermitian only up to rounding
    return np.linalg.eigh(hermitianize(h))


def herm_eig(h) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix.

    Raises
    ------
    NonHermitian
        If ``h`` is not Hermitian within ``HERMITIAN_ATOL``.
    """
    w, v = _eigh(as_hermitian(h))
    return Spectrum(w, v)


def support_threshold(eigenvalues: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    return tol * max(float(eigenvalues[-1]), 1.0)


def _check_psd(w: np.ndarray, tol: float) -> None:
    # anything more negative than the support threshold is a genuine violation
    if w[0] < -max(support_threshold(w, tol), DENSITY_ATOL * max(float(w[-1]), 1.0)):
        raise NotPsd(f"operator has eigenvalue {w[0]:.3e} < 0")


def support_basis(rho, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal columns spanning the support of a PSD operator."""
    w, v = _eigh(_square(rho))
    _check_psd(w, tol)
    return v[:, w > support_threshold(w, tol)]


def support_projector(rho, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector onto the span of eigenvectors with eigenvalue above threshold."""
    v = support_basis(rho, tol)
    return v @ v.conj().T


def pinv_sqrt(rho, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Inverse square root on the support, zero on the kernel.

    ``pinv_sqrt(rho) @ rho @ pinv_sqrt(rho)`` is the support projector.
    """
    w, v = _eigh(_square(rho))
    _check_psd(w, tol)
    keep = w > support_threshold(w, tol)
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (v * inv) @ v.conj().T


def support_contained(rho, sigma, tol: float = DEFAULT_TOL) -> bool:
    """True iff supp(rho) is contained in supp(sigma).

    Decided by the norm of the part of ``rho`` outside the support of ``sigma``,
    relative to ``max(||rho||, 1)``.
    """
    rho = _square(rho, "rho")
    sigma = _square(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise DimMismatch(f"shapes differ: {rho.shape} vs {sigma.shape}")
    w_rho = np.linalg.eigvalsh(hermitianize(rho))
    _check_psd(w_rho, tol)
    comp = np.eye(sigma.shape[0]) - support_projector(sigma, tol)
    leak = np.linalg.eigvalsh(hermitianize(comp @ rho @ comp))
    return float(np.max(np.abs(leak))) <= tol * max(float(w_rho[-1]), 1.0)


def lambda_max(h: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitianize(h))[-1])


def tensor(a, b, cap: int = DIM_CAP) -> np.ndarray:
    """Kronecker product, refusing results larger than ``cap``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[0] * b.shape[0] > cap:
        raise DimOverflow(f"tensor dimension {a.shape[0] * b.shape[0]} exceeds cap {cap}")
    return np.kron(a, b)


def tensor_power(a, n: int, cap: int = DIM_CAP) -> np.ndarray:
    a = np.asarray(a)
    if n < 1:
        raise ValidationError("tensor power needs n >= 1")
    if a.shape[0] ** n > cap:
        raise DimOverflow(f"dimension {a.shape[0]}^{n} exceeds cap {cap}")
    return reduce(np.kron, [a] * n)


def partial_trace(x, dims: tuple[int, int], over: str = "B") -> np.ndarray:
    """Partial trace of an operator on A (x) B over subsystem ``over`` ("A" or "B")."""
    d_a, d_b = dims
    x = _square(x)
    if x.shape[0] != d_a * d_b:
        raise DimMismatch(f"operator of dim {x.shape[0]} is not on {d_a}x{d_b}")
    t = x.reshape(d_a, d_b, d_a, d_b)
    if over == "B":
        return np.einsum("ijkj->ik", t)
    if over == "A":
        return np.einsum("ijil->jl", t)
    raise ValidationError(f"subsystem must be 'A' or 'B', got {over!r}")


def trace_norm(a) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(as_hermitian(a)))))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix of the given rank (full rank by default), Ginibre-induced."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return hermitianize(rho / np.trace(rho).real)


def ket(*amplitudes) -> np.ndarray:
    v = np.asarray(amplitudes, dtype=np.complex128)
    return v / np.linalg.norm(v)


def proj(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())
