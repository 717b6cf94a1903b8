"""Probability laws on the real line and their exponential moments.

Three kinds of law are supported:

* :class:`FiniteDistribution` - finitely many atoms with positive masses,
* :class:`NamedLaw` - the standard Gaussian and the Rademacher law, evaluated
  by closed forms,
* :class:`CenteredBinaryShape` - a centered two-point law in the ``(u, x1)``
  parametrization, with mass ``u/(1+u)`` at ``x1`` and ``1/(1+u)`` at ``-u*x1``.

All of them are immutable. The module-level functions (:func:`mgf`,
:func:`psi2_moment`, :func:`mean`, ...) accept any of the three.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Union

import numpy as np

from .exceptions import (
    InvalidAtoms,
    LengthMismatch,
    MassSumOutOfTolerance,
    NonPositiveK,
    NonPositiveMass,
    UnsupportedLaw,
    UOutOfRange,
    ZeroX1,
)

MERGE_TOL = 1e-12
MASS_SUM_TOL = 1e-9
# exp(x) overflows a double slightly above 709
EXP_GUARD = 700.0

_SERIES_CUTOFF = 0.5
_SERIES_TERMS = 24
_INV_FACT = np.array([1.0 / math.factorial(k) for k in range(_SERIES_TERMS + 1)])


def expm1_minus_linear(y: np.ndarray) -> np.ndarray:
    """Return ``exp(y) - 1 - y`` without cancellation for small ``|y|``."""
    y = np.asarray(y, dtype=float)
    out = np.expm1(y) - y
    small = np.abs(y) < _SERIES_CUTOFF
    if np.any(small):
        ys = y[small]
        acc = np.zeros_like(ys)
        for k in range(_SERIES_TERMS, 1, -1):
            acc = (acc + _INV_FACT[k]) * ys
        out[small] = acc * ys
    return out


def log_mgf_atoms(points: np.ndarray, masses: np.ndarray, s) -> np.ndarray:
    """Stable ``log sum_i p_i exp(s x_i)`` for a vector of ``s`` values.

    Rows with ``max |s x_i| <= 1`` go through ``log1p`` of the second-order
    remainder so that ``log M(s) ~ Var * s^2 / 2`` keeps full relative
    precision as ``s -> 0``; the rest use log-sum-exp.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    x = np.asarray(points, dtype=float)
    p = np.asarray(masses, dtype=float)
    y = s[:, None] * x[None, :]
    out = np.empty(s.shape[0])

    near = np.max(np.abs(y), axis=1) <= 1.0
    if np.any(near):
        first = s[near] * float(np.dot(p, x))
        rest = expm1_minus_linear(y[near]) @ p
        out[near] = np.log1p(first + rest)
    far = ~near
    if np.any(far):
        z = y[far] + np.log(p)[None, :]
        zmax = np.max(z, axis=1)
        out[far] = zmax + np.log(np.sum(np.exp(z - zmax[:, None]), axis=1))
    return out


@dataclass(frozen=True)
class FiniteDistribution:
    """Law with atoms ``points`` (sorted, distinct) and masses ``masses``.

    Build instances with :func:`make_finite`, which normalizes input; the
    constructor only validates.
    """

    points: tuple[float, ...]
    masses: tuple[float, ...]

    def __post_init__(self):
        if len(self.points) != len(self.masses) or not self.points:
            raise LengthMismatch("points and masses must have equal, nonzero length")
        if any(not m > 0 for m in self.masses):
            raise NonPositiveMass("all masses must be strictly positive")
        if abs(math.fsum(self.masses) - 1.0) > MASS_SUM_TOL:
            raise MassSumOutOfTolerance("masses must sum to 1")
        if len(set(self.points)) != len(self.points):
            raise InvalidAtoms("support points must be pairwise distinct")

    @cached_property
    def x(self) -> np.ndarray:
        return np.array(self.points, dtype=float)

    @cached_property
    def p(self) -> np.ndarray:
        return np.array(self.masses, dtype=float)

    @property
    def size(self) -> int:
        return len(self.points)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.x)))

    def is_point_mass(self) -> bool:
        return self.size == 1

    def mean(self) -> float:
        return math.fsum(p * x for p, x in zip(self.masses, self.points))

    def variance(self) -> float:
        m = self.mean()
        return math.fsum(p * (x - m) ** 2 for p, x in zip(self.masses, self.points))

    def centered(self) -> "FiniteDistribution":
        m = self.mean()
        if m == 0.0:
            return self
        return _from_arrays(self.x - m, self.p)

    def mgf(self, s: float) -> float:
        if s == 0:
            return 1.0
        return float(np.exp(log_mgf_atoms(self.x, self.p, s)[0]))

    def psi2_moment(self, K: float) -> float:
        q = (self.x / K) ** 2
        if np.any(q > EXP_GUARD):
            return math.inf
        return 1.0 + float(np.dot(self.p, np.expm1(q)))

    def to_finite(self) -> "FiniteDistribution":
        return self


class LawKind(enum.Enum):
    STANDARD_GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"


@dataclass(frozen=True)
class NamedLaw:
    """An analytically known law, evaluated through closed forms only."""

    kind: LawKind

    def mean(self) -> float:
        return 0.0

    def variance(self) -> float:
        return 1.0

    def centered(self) -> "NamedLaw":
        return self

    def mgf(self, s: float) -> float:
        try:
            if self.kind is LawKind.STANDARD_GAUSSIAN:
                return math.exp(s * s / 2.0)
            return math.cosh(s)
        except OverflowError:
            return math.inf

    def psi2_moment(self, K: float) -> float:
        k2 = K * K
        if self.kind is LawKind.STANDARD_GAUSSIAN:
            if k2 <= 2.0:
                return math.inf
            return (1.0 - 2.0 / k2) ** -0.5
        if 1.0 / k2 > EXP_GUARD:
            return math.inf
        return math.exp(1.0 / k2)

    @property
    def known_sigma(self) -> float:
        return 1.0

    @property
    def known_psi2_norm(self) -> float:
        if self.kind is LawKind.STANDARD_GAUSSIAN:
            return math.sqrt(8.0 / 3.0)
        return 1.0 / math.sqrt(math.log(2.0))

    def to_finite(self) -> FiniteDistribution:
        if self.kind is LawKind.STANDARD_GAUSSIAN:
            raise UnsupportedLaw("the standard Gaussian has no finite support")
        return FiniteDistribution((-1.0, 1.0), (0.5, 0.5))


STANDARD_GAUSSIAN = NamedLaw(LawKind.STANDARD_GAUSSIAN)
RADEMACHER = NamedLaw(LawKind.RADEMACHER)


@dataclass(frozen=True)
class CenteredBinaryShape:
    """Centered two-point law: mass ``u/(1+u)`` at ``x1``, ``1/(1+u)`` at ``-u*x1``."""

    u: float
    x1: float

    def __post_init__(self):
        if not self.u >= 1.0:
            raise UOutOfRange(f"u must be >= 1, got {self.u}")
        if self.x1 == 0.0:
            raise ZeroX1("x1 must be nonzero")

    @property
    def heavy_mass(self) -> float:
        return self.u / (1.0 + self.u)

    @property
    def light_mass(self) -> float:
        return 1.0 / (1.0 + self.u)

    def mean(self) -> float:
        return 0.0

    def variance(self) -> float:
        return self.u * self.x1 * self.x1

    def centered(self) -> "CenteredBinaryShape":
        return self

    def mgf(self, s: float) -> float:
        return self.to_finite().mgf(s)

    def psi2_moment(self, K: float) -> float:
        return self.to_finite().psi2_moment(K)

    @cached_property
    def _finite(self) -> FiniteDistribution:
        return _from_arrays(
            np.array([self.x1, -self.u * self.x1]),
            np.array([self.heavy_mass, self.light_mass]),
        )

    def to_finite(self) -> FiniteDistribution:
        return self._finite


Distribution = Union[FiniteDistribution, NamedLaw, CenteredBinaryShape]


def _from_arrays(points: np.ndarray, masses: np.ndarray) -> FiniteDistribution:
    order = np.argsort(points, kind="stable")
    xs = np.asarray(points, dtype=float)[order]
    ps = np.asarray(masses, dtype=float)[order]
    merged_x: list[float] = []
    merged_p: list[float] = []
    for xi, pi in zip(xs, ps):
        if merged_x and abs(xi - merged_x[-1]) <= MERGE_TOL:
            merged_p[-1] += float(pi)
        else:
            merged_x.append(float(xi))
            merged_p.append(float(pi))
    total = math.fsum(merged_p)
    return FiniteDistribution(tuple(merged_x), tuple(p / total for p in merged_p))


def make_finite(points: Sequence[float], masses: Sequence[float]) -> FiniteDistribution:
    """Validate and normalize a finite law.

    Atoms are sorted, atoms within 1e-12 of each other are merged by adding
    their masses, and masses are renormalized to sum to one.
    """
    if len(points) != len(masses) or len(points) == 0:
        raise LengthMismatch(
            f"need equal nonzero lengths, got {len(points)} points and {len(masses)} masses"
        )
    xs = np.asarray(points, dtype=float)
    ps = np.asarray(masses, dtype=float)
    if not np.all(np.isfinite(xs)):
        raise InvalidAtoms("support points must be finite")
    if not np.all(ps > 0):
        raise NonPositiveMass("all masses must be strictly positive")
    if abs(math.fsum(ps) - 1.0) > MASS_SUM_TOL:
        raise MassSumOutOfTolerance(f"masses sum to {math.fsum(ps)!r}, expected 1")
    return _from_arrays(xs, ps)


def make_centered_binary(u: float, x1: float) -> CenteredBinaryShape:
    return CenteredBinaryShape(float(u), float(x1))


def mgf(d: Distribution, s: float) -> float:
    """Moment generating function ``E exp(s X)``."""
    return d.mgf(float(s))


def psi2_moment(d: Distribution, K: float) -> float:
    """``E exp(X^2 / K^2)``; may be ``inf``."""
    if not K > 0:
        raise NonPositiveK(f"K must be positive, got {K}")
    return d.psi2_moment(float(K))


def mean(d: Distribution) -> float:
    return d.mean()


def variance(d: Distribution) -> float:
    return d.variance()


def centered(d: Distribution) -> Distribution:
    return d.centered()


def as_finite(d: Distribution) -> FiniteDistribution:
    """Finite-support view of ``d``; raises :class:`UnsupportedLaw` for the Gaussian."""
    return d.to_finite()


def scaled(d: Distribution, c: float) -> Distribution:
    """Law of ``c X`` for ``X ~ d``."""
    c = float(c)
    if isinstance(d, CenteredBinaryShape) and c != 0.0:
        return CenteredBinaryShape(d.u, c * d.x1)
    if isinstance(d, NamedLaw) and d.kind is LawKind.STANDARD_GAUSSIAN:
        raise UnsupportedLaw("scaled Gaussians are not represented")
    f = d.to_finite()
    return _from_arrays(c * f.x, f.p)
