"""Closed-form smooth potentials and their classification.

Every family provides analytic ``V``, gradient, Hessian and gradient of the
Laplacian.  Positions are arrays of shape ``(d, ...)``: the leading axis
indexes the coordinate, the remaining axes are arbitrary sample shape.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

import numpy as np

AT_MOST_QUADRATIC = "at_most_quadratic"
SUPER_QUADRATIC = "super_quadratic"
OUTSIDE_ASSUMPTION = "outside_assumption"


@dataclass(frozen=True)
class PotentialClass:
    kind: str
    m: float | None = None
    grad_bounded: bool = False
    nonnegative: bool = False

    @property
    def at_most_quadratic(self) -> bool:
        return self.kind == AT_MOST_QUADRATIC

    @property
    def super_quadratic(self) -> bool:
        return self.kind == SUPER_QUADRATIC


@dataclass(frozen=True)
class PotentialEval:
    V: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    grad_lap: np.ndarray


class GuardDecision(Enum):
    ACCEPT = "accept"
    REJECT = "reject"


@dataclass(frozen=True)
class GuardVerdict:
    decision: GuardDecision
    reason: str = ""

    @property
    def accepted(self) -> bool:
        return self.decision is GuardDecision.ACCEPT


def _as_points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    return x


def _vec(values, d: int) -> np.ndarray:
    """Broadcast a scalar or length-d parameter to a length-d vector."""
    v = np.atleast_1d(np.asarray(values, dtype=float))
    if v.size == 1:
        return np.full(d, v.item())
    if v.size != d:
        raise ValueError(f"parameter of length {v.size} used in dimension {d}")
    return v


def _expand(vec: np.ndarray, like: np.ndarray) -> np.ndarray:
    return vec.reshape(vec.shape + (1,) * (like.ndim - 1))


class Potential:
    """Base class.  Subclasses implement the four analytic evaluations."""

    name = "potential"

    def value(self, x) -> np.ndarray:
        raise NotImplementedError

    def grad(self, x) -> np.ndarray:
        raise NotImplementedError

    def hess(self, x) -> np.ndarray:
        raise NotImplementedError

    def grad_lap(self, x) -> np.ndarray:
        raise NotImplementedError

    # Analytic supremum of the operator norm of the Hessian (inf if unbounded).
    def hess_sup(self, d: int = 1) -> float:
        raise NotImplementedError

    def grad_bounded(self, d: int = 1) -> bool:
        raise NotImplementedError

    def nonnegative(self, d: int = 1) -> bool:
        raise NotImplementedError

    # Whether V(x) >= -a|x|^2 - b for some a, b > 0.
    def quadratically_bounded_below(self) -> bool:
        return True

    def grad_norm(self, x) -> np.ndarray:
        return np.sqrt(np.sum(self.grad(x) ** 2, axis=0))

    def spec(self) -> dict[str, Any]:
        raise NotImplementedError


def eval_potential(p: Potential, x) -> PotentialEval:
    x = _as_points(x)
    return PotentialEval(p.value(x), p.grad(x), p.hess(x), p.grad_lap(x))


@dataclass(frozen=True)
class Zero(Potential):
    name = "zero"

    def value(self, x):
        x = _as_points(x)
        return np.zeros(x.shape[1:])

    def grad(self, x):
        return np.zeros_like(_as_points(x))

    def hess(self, x):
        x = _as_points(x)
        return np.zeros((x.shape[0],) + x.shape)

    def grad_lap(self, x):
        return np.zeros_like(_as_points(x))

    def hess_sup(self, d=1):
        return 0.0

    def grad_bounded(self, d=1):
        return True

    def nonnegative(self, d=1):
        return True

    def spec(self):
        return {"kind": self.name}


@dataclass(frozen=True)
class _Quadratic(Potential):
    """``V = 1/2 x.Ax + b.x + c`` with constant A, b, c built per dimension."""

    def _abc(self, d: int) -> tuple[np.ndarray, np.ndarray, float]:
        raise NotImplementedError

    def value(self, x):
        x = _as_points(x)
        A, b, c = self._abc(x.shape[0])
        Ax = np.tensordot(A, x, axes=(1, 0))
        return 0.5 * np.sum(x * Ax, axis=0) + np.tensordot(b, x, axes=(0, 0)) + c

    def grad(self, x):
        x = _as_points(x)
        A, b, _ = self._abc(x.shape[0])
        return np.tensordot(A, x, axes=(1, 0)) + _expand(b, x)

    def hess(self, x):
        x = _as_points(x)
        A, _, _ = self._abc(x.shape[0])
        return np.broadcast_to(A.reshape(A.shape + (1,) * (x.ndim - 1)), A.shape + x.shape[1:]).copy()

    def grad_lap(self, x):
        return np.zeros_like(_as_points(x))

    def hess_sup(self, d=1):
        A, _, _ = self._abc(d)
        return float(np.linalg.norm(A, 2)) if A.size else 0.0

    def grad_bounded(self, d=1):
        A, _, _ = self._abc(d)
        return bool(np.all(A == 0))

    def nonnegative(self, d=1):
        A, b, c = self._abc(d)
        w, Q = np.linalg.eigh(A)
        tol = 1e-14 * max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
        if np.any(w < -tol):
            return False
        # b must lie in range(A), otherwise V is unbounded below along ker(A)
        bq = Q.T @ b
        null = np.abs(w) <= tol
        if np.any(np.abs(bq[null]) > 1e-14):
            return False
        vmin = c - 0.5 * float(np.sum(bq[~null] ** 2 / w[~null]))
        return vmin >= -1e-14


@dataclass(frozen=True)
class Harmonic(_Quadratic):
    """``V = sum_j omega_j^2 x_j^2 / 2``."""

    omega: Any = 1.0
    name = "harmonic"

    def _abc(self, d):
        w = _vec(self.omega, d)
        return np.diag(w**2), np.zeros(d), 0.0

    def spec(self):
        return {"kind": self.name, "omega": np.atleast_1d(self.omega).tolist()}


@dataclass(frozen=True)
class InvertedHarmonic(_Quadratic):
    """``V = -omega^2 |x|^2 / 2``."""

    omega: float = 1.0
    name = "inverted_harmonic"

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("inverted harmonic frequency must be positive")

    def _abc(self, d):
        return -(self.omega**2) * np.eye(d), np.zeros(d), 0.0

    def spec(self):
        return {"kind": self.name, "omega": float(self.omega)}


@dataclass(frozen=True)
class Stark(_Quadratic):
    """Linear potential ``V = E.x``."""

    field: Any = 1.0
    name = "stark"

    def _abc(self, d):
        return np.zeros((d, d)), _vec(self.field, d), 0.0

    def spec(self):
        return {"kind": self.name, "field": np.atleast_1d(self.field).tolist()}


@dataclass(frozen=True)
class AnisotropicQuadratic(_Quadratic):
    """``V = 1/2 x.Ax + b.x + c`` with symmetric A."""

    A: Any = field(default_factory=lambda: [[1.0]])
    b: Any = None
    c: float = 0.0
    name = "anisotropic_quadratic"

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.shape[0] != A.shape[1] or not np.allclose(A, A.T):
            raise ValueError("quadratic form must be a symmetric square matrix")

    def _abc(self, d):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.shape != (d, d):
            raise ValueError(f"matrix of shape {A.shape} used in dimension {d}")
        b = np.zeros(d) if self.b is None else _vec(self.b, d)
        return A, b, float(self.c)

    def spec(self):
        out = {"kind": self.name, "A": np.atleast_2d(self.A).tolist(), "c": float(self.c)}
        if self.b is not None:
            out["b"] = np.atleast_1d(self.b).tolist()
        return out


def _bracket_power(x: np.ndarray, m: float, coef: float):
    """Value and derivatives of ``coef * <x>^m`` with ``<x> = (1+|x|^2)^(1/2)``."""
    d = x.shape[0]
    r2 = 1.0 + np.sum(x**2, axis=0)
    rho2 = r2 - 1.0
    V = coef * r2 ** (m / 2)
    g = coef * m * r2 ** (m / 2 - 1)
    grad = g * x
    eye = np.eye(d).reshape((d, d) + (1,) * (x.ndim - 1))
    outer = x[:, None] * x[None, :]
    hess = g * eye + coef * m * (m - 2) * r2 ** (m / 2 - 2) * outer
    gl = coef * m * (m - 2) * ((d + 2) * r2 ** (m / 2 - 2) + (m - 4) * r2 ** (m / 2 - 3) * rho2)
    return V, grad, hess, gl * x


@dataclass(frozen=True)
class SoftLinear(Potential):
    """``V = <x>``: at most quadratic with bounded gradient."""

    name = "soft_linear"

    def value(self, x):
        return _bracket_power(_as_points(x), 1.0, 1.0)[0]

    def grad(self, x):
        return _bracket_power(_as_points(x), 1.0, 1.0)[1]

    def hess(self, x):
        return _bracket_power(_as_points(x), 1.0, 1.0)[2]

    def grad_lap(self, x):
        return _bracket_power(_as_points(x), 1.0, 1.0)[3]

    def hess_sup(self, d=1):
        # eigenvalues 1/<x> and 1/<x>^3, both maximal at the origin
        return 1.0

    def grad_bounded(self, d=1):
        return True

    def nonnegative(self, d=1):
        return True

    def spec(self):
        return {"kind": self.name}


@dataclass(frozen=True)
class SoftPower(Potential):
    """``V = coefficient * <x>^m`` with ``m > 2``.

    ``coefficient=1`` is the super-quadratic confining family.  A negative
    coefficient is allowed only so that the self-adjointness guard has
    something to reject; :func:`classify` puts it outside both classes.
    """

    m: float = 3.0
    coefficient: float = 1.0
    name = "soft_power"

    def __post_init__(self):
        if not self.m > 2:
            raise ValueError(f"soft power exponent must exceed 2, got {self.m}")

    def __neg__(self):
        return SoftPower(self.m, -self.coefficient)

    def value(self, x):
        return _bracket_power(_as_points(x), self.m, self.coefficient)[0]

    def grad(self, x):
        return _bracket_power(_as_points(x), self.m, self.coefficient)[1]

    def hess(self, x):
        return _bracket_power(_as_points(x), self.m, self.coefficient)[2]

    def grad_lap(self, x):
        return _bracket_power(_as_points(x), self.m, self.coefficient)[3]

    def hess_sup(self, d=1):
        return math.inf if self.coefficient != 0 else 0.0

    def grad_bounded(self, d=1):
        return self.coefficient == 0

    def nonnegative(self, d=1):
        return self.coefficient >= 0

    def quadratically_bounded_below(self):
        return self.coefficient >= 0

    def spec(self):
        out = {"kind": self.name, "m": float(self.m)}
        if self.coefficient != 1.0:
            out["coefficient"] = float(self.coefficient)
        return out


def classify(p: Potential, d: int = 1) -> PotentialClass:
    nonneg = p.nonnegative(d)
    if isinstance(p, SoftPower):
        if p.coefficient > 0:
            return PotentialClass(SUPER_QUADRATIC, m=float(p.m), grad_bounded=False, nonnegative=True)
        if p.coefficient < 0:
            return PotentialClass(OUTSIDE_ASSUMPTION, m=float(p.m), grad_bounded=False, nonnegative=False)
        return PotentialClass(AT_MOST_QUADRATIC, grad_bounded=True, nonnegative=True)
    return PotentialClass(AT_MOST_QUADRATIC, grad_bounded=p.grad_bounded(d), nonnegative=nonneg)


def self_adjointness_guard(p: Potential) -> GuardVerdict:
    """Reject potentials going to minus infinity faster than quadratically."""
    if p.quadratically_bounded_below():
        return GuardVerdict(GuardDecision.ACCEPT)
    return GuardVerdict(
        GuardDecision.REJECT,
        f"{p.name} {p.spec()} is unbounded below faster than -a|x|^2 - b; "
        "the Hamiltonian is not essentially self-adjoint",
    )


@dataclass(frozen=True)
class LemmaReport:
    max_ratio: float
    hess_sup: float
    skipped: int
    passed: bool


def grad_bound_lemma_check(p: Potential, sample_box) -> LemmaReport:
    """Max of ``|grad V|^2 / (2 sup|hess V| V)`` over the grid points of ``sample_box``.

    For nonnegative V with bounded Hessian this never exceeds 1.
    """
    d = sample_box.d
    if not p.nonnegative(d):
        raise ValueError(f"{p.name} is not nonnegative")
    cls = classify(p, d)
    if not cls.at_most_quadratic:
        raise ValueError(f"{p.name} is not at most quadratic")
    x = sample_box.points.reshape(d, -1)
    V = p.value(x)
    g2 = np.sum(p.grad(x) ** 2, axis=0)
    sup = p.hess_sup(d)
    keep = V >= 1e-12
    if sup == 0 or not np.any(keep):
        return LemmaReport(0.0, sup, int(np.sum(~keep)), True)
    ratio = g2[keep] / (2.0 * sup * V[keep])
    mr = float(np.max(ratio))
    return LemmaReport(mr, sup, int(np.sum(~keep)), mr <= 1.0 + 1e-9)


_FAMILIES = {
    "zero": Zero,
    "harmonic": Harmonic,
    "inverted_harmonic": InvertedHarmonic,
    "stark": Stark,
    "soft_linear": SoftLinear,
    "anisotropic_quadratic": AnisotropicQuadratic,
    "soft_power": SoftPower,
}

_FAMILY_KEYS = {
    "zero": set(),
    "harmonic": {"omega"},
    "inverted_harmonic": {"omega"},
    "stark": {"field"},
    "soft_linear": set(),
    "anisotropic_quadratic": {"A", "b", "c"},
    "soft_power": {"m", "coefficient"},
}


def potential_families() -> list[str]:
    return list(_FAMILIES)


def potential_from_spec(spec: Mapping[str, Any]) -> Potential:
    """Build a potential from ``{"kind": name, **parameters}``."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in _FAMILIES:
        raise ValueError(f"unknown potential kind {kind!r}; expected one of {sorted(_FAMILIES)}")
    extra = set(spec) - _FAMILY_KEYS[kind]
    if extra:
        raise ValueError(f"unknown key(s) for potential {kind!r}: {sorted(extra)}")
    return _FAMILIES[kind](**spec)
