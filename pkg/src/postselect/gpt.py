"""Cone-ordered versions of the divergences for general probabilistic theories.

A model is a real vector space with a closed cone ``C`` and a unit effect
``U``. Three variants are supported:

* ``quantum``: Hermitian matrices with the PSD cone and the trace.
* ``classical``: real vectors with the non-negative orthant and the all-ones
  functional.
* ``polyhedral``: ``C = {x : <w_i, x> >= 0 for all i}`` given by its dual
  generators ``w_i`` and an explicit unit effect.

The postselected error formulas carry over unchanged once ``D_max`` is taken
with respect to the cone order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from . import divergence, linalg
from .asym import beta_from_omega
from .errors import BadPrior, ConeMismatch, UnsupportedVariant, ValidationError
from .sym import perr_from_xi

QUANTUM = "quantum"
CLASSICAL = "classical"
POLYHEDRAL = "polyhedral"

MEMBERSHIP_TOL = 1e-9
UNIT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ConeModel:
    variant: str
    dim: int
    dual_generators: np.ndarray | None = None
    unit_effect: np.ndarray | None = None

    def __post_init__(self):
        if self.variant not in (QUANTUM, CLASSICAL, POLYHEDRAL):
            raise UnsupportedVariant(f"unknown cone variant {self.variant!r}")
        if self.dim < 1:
            raise ValidationError("cone dimension must be positive")
        if self.variant == POLYHEDRAL:
            w = np.array(self.dual_generators, dtype=float)
            u = np.array(self.unit_effect, dtype=float)
            if w.ndim != 2 or w.shape[1] != self.dim or u.shape != (self.dim,):
                raise ValidationError("dual generators and unit effect must match the vector space dimension")
            if np.linalg.matrix_rank(w) < self.dim:
                raise ValidationError("dual generators do not span the dual space (cone is not pointed)")
            if not _in_dual_interior(w, u):
                raise ValidationError("unit effect is not strictly positive on the cone")
            w.setflags(write=False)
            u.setflags(write=False)
            object.__setattr__(self, "dual_generators", w)
            object.__setattr__(self, "unit_effect", u)

    @classmethod
    def quantum(cls, dim: int) -> "ConeModel":
        return cls(QUANTUM, dim)

    @classmethod
    def classical(cls, dim: int) -> "ConeModel":
        return cls(CLASSICAL, dim)

    @classmethod
    def polyhedral(cls, dual_generators, unit_effect) -> "ConeModel":
        w = np.asarray(dual_generators, dtype=float)
        return cls(POLYHEDRAL, w.shape[1] if w.ndim == 2 else 0, w, unit_effect)

    @classmethod
    def boxworld(cls) -> "ConeModel":
        """Square cone: states are ``(1, a, b)`` with ``|a|, |b| <= 1``."""
        w = [(1, 1, 0), (1, -1, 0), (1, 0, 1), (1, 0, -1)]
        return cls.polyhedral(w, (1, 0, 0))

    def __eq__(self, other):
        if not isinstance(other, ConeModel):
            return NotImplemented
        if (self.variant, self.dim) != (other.variant, other.dim):
            return False
        if self.variant != POLYHEDRAL:
            return True
        return (
            np.array_equal(self.dual_generators, other.dual_generators)
            and np.array_equal(self.unit_effect, other.unit_effect)
        )

    __hash__ = None


def _in_dual_interior(w: np.ndarray, u: np.ndarray) -> bool:
    # u = sum_i lam_i w_i with every lam_i >= s; maximise s (capped at 1)
    k = w.shape[0]
    c = np.zeros(k + 1)
    c[-1] = -1.0
    a_eq = np.hstack([w.T, np.zeros((w.shape[1], 1))])
    a_ub = np.hstack([-np.eye(k), np.ones((k, 1))])
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(k), A_eq=a_eq, b_eq=u,
                  bounds=[(0, None)] * k + [(None, 1.0)], method="highs")
    return res.status == 0 and -res.fun > 1e-12


@dataclass(frozen=True, eq=False)
class GptState:
    cone: ConeModel
    vector: np.ndarray

    def __post_init__(self):
        c = self.cone
        if c.variant == QUANTUM:
            v = linalg.as_density(self.vector, "state")
            if v.shape[0] != c.dim:
                raise ValidationError(f"state has dim {v.shape[0]}, cone has dim {c.dim}")
        else:
            v = np.array(self.vector, dtype=float)
            if v.shape != (c.dim,):
                raise ValidationError(f"state has shape {v.shape}, cone has dim {c.dim}")
            scale = MEMBERSHIP_TOL * max(np.linalg.norm(v), 1.0)
            if abs(unit_value(c, v) - 1.0) > UNIT_TOL:
                raise ValidationError("state is not normalised by the unit effect")
            if np.min(_functionals(c, v)) < -scale:
                raise ValidationError("state lies outside the cone")
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)


def unit_value(cone: ConeModel, v: np.ndarray) -> float:
    if cone.variant == QUANTUM:
        return float(np.trace(v).real)
    if cone.variant == CLASSICAL:
        return float(np.sum(v))
    return float(cone.unit_effect @ v)


def _functionals(cone: ConeModel, v: np.ndarray) -> np.ndarray:
    # values of the extremal dual functionals on v
    return v if cone.variant == CLASSICAL else cone.dual_generators @ v


def _same_cone(x: GptState, y: GptState) -> ConeModel:
    if x.cone != y.cone:
        raise ConeMismatch("states belong to different cone models")
    return x.cone


def _ratio(fx: np.ndarray, fy: np.ndarray, tol: float) -> float:
    pos = fy > tol
    if np.any(fx[~pos] > tol):
        return math.inf
    return float(np.max(fx[pos] / fy[pos]))


def cone_ratio(x: GptState, y: GptState, tol: float = linalg.DEFAULT_TOL) -> float:
    """``inf{lam : x <=_C lam y}``."""
    cone = _same_cone(x, y)
    if cone.variant == QUANTUM:
        return divergence.max_ratios(x.vector, y.vector, tol)[0]
    return _ratio(_functionals(cone, x.vector), _functionals(cone, y.vector), tol)


def cone_dmax(x: GptState, y: GptState, tol: float = linalg.DEFAULT_TOL) -> float:
    r = cone_ratio(x, y, tol)
    return math.inf if math.isinf(r) else math.log2(r)


def cone_omega(x: GptState, y: GptState, tol: float = linalg.DEFAULT_TOL) -> float:
    a, b = cone_ratio(x, y, tol), cone_ratio(y, x, tol)
    return math.inf if math.isinf(a) or math.isinf(b) else max(a * b, 1.0)


def cone_xi_weighted(x: GptState, y: GptState, p: float = 0.5, tol: float = linalg.DEFAULT_TOL) -> float:
    if not 0.0 < p < 1.0:
        raise BadPrior(f"prior p must lie in (0, 1), got {p!r}")
    q = 1.0 - p
    return max(p / q * cone_ratio(x, y, tol), q / p * cone_ratio(y, x, tol))


def cone_postselected_beta(x: GptState, y: GptState, eps: float, tol: float = linalg.DEFAULT_TOL) -> float:
    return beta_from_omega(cone_omega(x, y, tol), eps)


def cone_postselected_perr(x: GptState, y: GptState, p: float = 0.5, tol: float = linalg.DEFAULT_TOL) -> float:
    return perr_from_xi(cone_xi_weighted(x, y, p, tol))


def tensor_state(x: GptState, n: int) -> GptState:
    """``x`` to the n-th tensor power (classical and quantum variants only)."""
    cone = x.cone
    if cone.variant == POLYHEDRAL:
        raise UnsupportedVariant("no canonical tensor product for polyhedral cones")
    if n < 1:
        raise ValidationError("tensor power needs n >= 1")
    if cone.variant == QUANTUM:
        return GptState(ConeModel.quantum(cone.dim ** n), linalg.tensor_power(x.vector, n))
    v = x.vector
    for _ in range(n - 1):
        v = np.kron(v, x.vector)
    return GptState(ConeModel.classical(cone.dim ** n), v)


def cone_additivity_check(x: GptState, y: GptState, n: int, tol: float = linalg.DEFAULT_TOL) -> tuple[float, float]:
    """``(D_max(x^n || y^n), n D_max(x || y))``; the two agree for local models."""
    _same_cone(x, y)
    return cone_dmax(tensor_state(x, n), tensor_state(y, n), tol), n * cone_dmax(x, y, tol)
