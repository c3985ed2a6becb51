"""Postselected testing against a convex set of alternatives.

The alternative hypothesis is the convex hull of finitely many generator
states. The relevant quantity is ``min_{sigma in F} Omega(rho||sigma)``, found
by bisection on ``t`` over the level sets

    exists u >= 0 :  rho <= sum_i u_i sigma_i <= t rho.

Only generators with support inside supp(rho) can contribute (any other one
makes the mixture's support too large), so everything is compressed to
supp(rho) and whitened by ``rho^{-1/2}``. With ``S_w = sum_i w_i S_i`` the
level set is non-empty iff some simplex point ``w`` has
``lambda_max(S_w) <= t * lambda_min(S_w)``, and the convex function
``h_t(w) = lambda_max(S_w) - t lambda_min(S_w)`` is minimised by projected
subgradient descent.
"""

from __future__ import annotations

import itertools
from collections import deque
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

from . import divergence, linalg
from .asym import beta_from_omega
from .errors import DimMismatch, ValidationError

COMPOSITE_TOL = 1e-7
MAX_BISECTIONS = 60
RESTARTS = 8
MAX_ITER = 2000
CUT_EVERY = 50
CUT_MARGIN = 1e-12
CUT_POOL = 200


@dataclass(frozen=True)
class ConvexStateSet:
    """Convex hull of a non-empty list of density matrices of a common dimension."""

    generators: tuple[np.ndarray, ...]

    def __post_init__(self):
        gens = tuple(linalg.as_density(g, f"generator {i}") for i, g in enumerate(self.generators))
        if not gens:
            raise ValidationError("a convex state set needs at least one generator")
        if len({g.shape for g in gens}) != 1:
            raise DimMismatch("generators have different dimensions")
        object.__setattr__(self, "generators", gens)

    @property
    def dim(self) -> int:
        return self.generators[0].shape[0]

    def __len__(self) -> int:
        return len(self.generators)

    def mixture(self, weights) -> np.ndarray:
        w = np.asarray(weights, dtype=float)
        return np.tensordot(w, np.stack(self.generators), axes=1)


@dataclass(frozen=True)
class CompositeReport:
    """Result of :func:`omega_min`.

    ``omega_min`` is Omega evaluated at ``weights``; ``lower_bound`` is the
    largest level the search certified (or assumed) infeasible.
    """

    omega_min: float
    weights: np.ndarray
    lower_bound: float = 1.0
    attained: bool = True
    warnings: tuple[str, ...] = field(default=())

    def beta_bar(self, eps: float) -> float:
        return beta_from_omega(self.omega_min, eps)

    @property
    def d_omega_min(self) -> float:
        return math.inf if math.isinf(self.omega_min) else math.log2(self.omega_min)


def _as_set(F) -> ConvexStateSet:
    return F if isinstance(F, ConvexStateSet) else ConvexStateSet(tuple(F))


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    r = np.flatnonzero(u - css / k > 0)[-1]
    return np.maximum(v - css[r] / (r + 1), 0.0)


def _kappa(S: np.ndarray, w: np.ndarray) -> float:
    ev = np.linalg.eigvalsh(np.tensordot(w, S, axes=1))
    return math.inf if ev[0] <= 0 else ev[-1] / ev[0]


class _Level:
    """Feasibility oracle for the level sets of the whitened problem.

    Every eigenvector ``v`` seen along the way gives a cut: the vector
    ``a_j = <v|S_j|v>`` satisfies ``lambda_max(S_w) >= a.w`` and
    ``lambda_min(S_w) <= a.w`` for all ``w``. The cuts do not depend on the
    level ``t``, so they are pooled and an LP over them certifies
    infeasibility of low levels.
    """

    def __init__(self, S: np.ndarray, rng: np.random.Generator, tol: float):
        self.S = S
        self.rng = rng
        self.tol = tol
        self.best_w: np.ndarray | None = None
        self.best_kappa = math.inf
        self.upper_cuts: deque[np.ndarray] = deque(maxlen=CUT_POOL)
        self.lower_cuts: deque[np.ndarray] = deque(maxlen=CUT_POOL)

    def _record(self, w, kappa):
        if kappa < self.best_kappa:
            self.best_kappa = kappa
            self.best_w = w.copy()

    def cut_bound(self, t: float) -> float:
        """Lower bound on ``min_w h_t(w)`` from the pooled cuts."""
        m = self.S.shape[0]
        A = np.array(self.upper_cuts)
        B = np.array(self.lower_cuts)
        # variables (w, s1, s2): minimise s1 - t s2 with s1 >= A w, s2 <= B w
        c = np.concatenate([np.zeros(m), [1.0, -t]])
        a_ub = np.vstack([
            np.hstack([A, -np.ones((len(A), 1)), np.zeros((len(A), 1))]),
            np.hstack([-B, np.zeros((len(B), 1)), np.ones((len(B), 1))]),
        ])
        a_eq = np.concatenate([np.ones(m), [0.0, 0.0]])[None, :]
        bounds = [(0, None)] * m + [(None, None)] * 2
        res = linprog(c, A_ub=a_ub, b_ub=np.zeros(len(a_ub)), A_eq=a_eq, b_eq=[1.0], bounds=bounds, method="highs")
        return res.fun if res.status == 0 else -math.inf

    def feasible(self, t: float) -> bool | None:
        """True if a point with kappa <= t (1 + tol) was found, False if
        infeasibility is certified, None if the iteration budget ran out."""
        m = self.S.shape[0]
        starts = [self.best_w] + [self.rng.dirichlet(np.ones(m)) for _ in range(RESTARTS - 1)]
        for w in starts:
            verdict = self._descend(w.copy(), t)
            if verdict is not None:
                return verdict
        return None

    def _descend(self, w: np.ndarray, t: float) -> bool | None:
        S = self.S
        for it in range(MAX_ITER):
            ev, vecs = np.linalg.eigh(np.tensordot(w, S, axes=1))
            if ev[0] > 0:
                self._record(w, ev[-1] / ev[0])
            h = ev[-1] - t * ev[0]
            # feasible up to a relative violation tol, i.e. kappa <= t (1 + tol)
            if h <= self.tol * t * ev[0]:
                return True
            a = np.einsum("i,jik,k->j", vecs[:, -1].conj(), S, vecs[:, -1]).real
            b = np.einsum("i,jik,k->j", vecs[:, 0].conj(), S, vecs[:, 0]).real
            self.upper_cuts.append(a)
            self.lower_cuts.append(b)
            if it % CUT_EVERY == CUT_EVERY - 1 and self.cut_bound(t) > CUT_MARGIN * t * ev[-1]:
                return False
            g = a - t * b
            d = g - g.mean()
            dn = d @ d
            if dn <= 1e-300:
                # flat along the simplex with h > 0: w minimises, so infeasible
                return False
            w = project_simplex(w - h / dn * d)
        if self.cut_bound(t) > CUT_MARGIN * t * ev[-1]:
            return False
        return None


def _whitened(rho: np.ndarray, gens: Sequence[np.ndarray], tol: float) -> tuple[np.ndarray, list[int]]:
    v = linalg.support_basis(rho, tol)
    rc = v.conj().T @ rho @ v
    x = linalg.pinv_sqrt(rc, tol)
    keep = [i for i, g in enumerate(gens) if linalg.support_contained(g, rho, tol)]
    S = np.stack([linalg.hermitianize(x @ v.conj().T @ gens[i] @ v @ x) for i in keep]) if keep else np.empty((0,))
    return S, keep


def omega_min(rho, F, tol: float = COMPOSITE_TOL, seed: int = 0, support_tol: float = linalg.DEFAULT_TOL) -> CompositeReport:
    """Minimise Omega(rho||sigma) over the convex hull of the generators of ``F``.

    Parameters
    ----------
    rho : array_like
        Null-hypothesis density matrix.
    F : ConvexStateSet or sequence of density matrices
        Generators of the alternative set.
    tol : float
        Target width of the final bisection bracket in log2 units.
    seed : int
        Seed for the random restarts of the subgradient method.

    Returns
    -------
    CompositeReport
        ``omega_min`` is ``inf`` (and ``attained`` is False) when no element
        of F has the same support as rho.
    """
    rho = linalg.as_density(rho, "rho")
    F = _as_set(F)
    if F.dim != rho.shape[0]:
        raise DimMismatch(f"rho has dim {rho.shape[0]}, generators have dim {F.dim}")
    m = len(F)
    for i, g in enumerate(F.generators):
        if np.array_equal(g, rho):
            return CompositeReport(1.0, np.eye(m)[i], 1.0, True)

    S, keep = _whitened(rho, F.generators, support_tol)

    def lift(w_keep):
        w = np.zeros(m)
        w[keep] = w_keep
        return w

    if not keep:
        return CompositeReport(math.inf, np.full(m, 1.0 / m), math.inf, False, ("no generator has support inside supp(rho)",))
    k = len(keep)
    uniform = np.full(k, 1.0 / k)
    ev = np.linalg.eigvalsh(np.tensordot(uniform, S, axes=1))
    if ev[0] <= support_tol * max(ev[-1], 1.0):
        # the uniform mixture has the largest support in the hull
        return CompositeReport(math.inf, lift(uniform), math.inf, False, ("no element of the set has the support of rho",))

    level = _Level(S, np.random.default_rng(seed), tol)
    level._record(uniform, ev[-1] / ev[0])
    for j in range(k):
        level._record(np.eye(k)[j], _kappa(S, np.eye(k)[j]))

    lo, hi, certified = 1.0, level.best_kappa, True
    for _ in range(MAX_BISECTIONS):
        hi = min(hi, level.best_kappa)
        if math.log2(hi / lo) <= tol:
            break
        t = math.sqrt(lo * hi)
        verdict = level.feasible(t)
        if verdict is True:
            hi = t
        elif verdict is False:
            lo = t
        else:
            lo, certified = t, False
    warnings = () if certified else ("infeasibility of some levels was not certified within the iteration budget",)
    w = lift(level.best_w)
    value = max(divergence.omega(rho, F.mixture(w), support_tol), 1.0)
    return CompositeReport(value, w, lo, True, warnings)


def composite_beta(rho, F, eps: float, tol: float = COMPOSITE_TOL, seed: int = 0) -> float:
    """Optimal conditional type II error against the convex set ``F``."""
    return omega_min(rho, F, tol, seed).beta_bar(eps)


def grid_omega_min(rho, F, step: float = 1e-3, tol: float = linalg.DEFAULT_TOL) -> tuple[float, np.ndarray]:
    """Brute-force minimum of Omega over a regular simplex grid (at most 3 generators).

    Evaluates :func:`divergence.omega` on the mixtures directly, without the
    whitening used by :func:`omega_min`.
    """
    F = _as_set(F)
    m = len(F)
    if m > 3:
        raise ValidationError("the grid oracle handles at most 3 generators")
    steps = int(round(1.0 / step))
    best, best_w = math.inf, np.full(m, 1.0 / m)
    for idx in itertools.product(range(steps + 1), repeat=m - 1):
        if sum(idx) > steps:
            continue
        w = np.array(list(idx) + [steps - sum(idx)], dtype=float) / steps
        val = divergence.omega(rho, F.mixture(w), tol)
        if val < best:
            best, best_w = val, w
    return best, best_w


def regularized_exponent_estimate(
    rho, F_builder: Callable[[int], ConvexStateSet], n_max: int = 3, tol: float = COMPOSITE_TOL, seed: int = 0
) -> list[tuple[int, float]]:
    """``(n, d_omega_min(rho^{(x)n}, F_n) / n)`` for ``n = 1..n_max``."""
    rho = linalg.as_density(rho, "rho")
    out = []
    for n in range(1, n_max + 1):
        rho_n = linalg.tensor_power(rho, n)
        rep = omega_min(rho_n, F_builder(n), tol, seed)
        out.append((n, rep.d_omega_min / n))
    return out
