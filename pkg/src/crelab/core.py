"""Lotteries, common-ratio problems, utilities and probability weighting.

All lotteries are binary: ``(prize, prob)`` pays ``prize`` with probability
``prob`` and zero otherwise. Utilities are normalised so that ``u(0) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .exceptions import ConstructionError, DomainError


@dataclass(frozen=True)
class Lottery:
    prize: float
    prob: float

    def __post_init__(self):
        if not (self.prize >= 0 and math.isfinite(self.prize)):
            raise ConstructionError(f"prize must be a finite nonnegative number, got {self.prize}")
        if not 0.0 <= self.prob <= 1.0:
            raise ConstructionError(f"prob must lie in [0, 1], got {self.prob}")

    def __iter__(self):
        yield self.prize
        yield self.prob


@dataclass(frozen=True)
class CommonRatioProblem:
    """The quadruple A=(x,1), B=(y,p), C=(x,r), D=(y,rp)."""

    x: float
    y: float
    p: float
    r: float

    def __post_init__(self):
        if not (self.x > 0 and self.y > 0):
            raise ConstructionError(f"prizes must be positive, got x={self.x}, y={self.y}")
        for name in ("p", "r"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ConstructionError(f"{name} must lie in (0, 1], got {value}")

    @property
    def A(self) -> Lottery:
        return Lottery(self.x, 1.0)

    @property
    def B(self) -> Lottery:
        return Lottery(self.y, self.p)

    @property
    def C(self) -> Lottery:
        return Lottery(self.x, self.r)

    @property
    def D(self) -> Lottery:
        return Lottery(self.y, self.r * self.p)

    @property
    def lotteries(self) -> tuple[Lottery, Lottery, Lottery, Lottery]:
        return self.A, self.B, self.C, self.D


def make_problem(x: float, y: float, p: float, r: float) -> CommonRatioProblem:
    return CommonRatioProblem(float(x), float(y), float(p), float(r))


# --------------------------------------------------------------------------
# Utilities
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerUtility:
    """u(x) = x**exponent for any positive exponent.

    Exponents below one are concave, above one convex. ``CRRAUtility`` is the
    risk-averse/neutral special case used by the valuation constructions.
    """

    exponent: float

    def __post_init__(self):
        if not self.exponent > 0:
            raise DomainError(f"exponent must be positive, got {self.exponent}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise DomainError("utility is defined for nonnegative prizes only")
        out = np.power(x, self.exponent)
        return float(out) if out.ndim == 0 else out

    def inverse(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError(
                f"inverse utility needs a nonnegative argument, got min {float(np.min(t))}"
            )
        out = np.power(t, 1.0 / self.exponent)
        return float(out) if out.ndim == 0 else out

    @property
    def is_linear(self) -> bool:
        return self.exponent == 1.0


@dataclass(frozen=True)
class CRRAUtility(PowerUtility):
    """u(x) = x**gamma with gamma in (0, 1]."""

    def __post_init__(self):
        if not 0.0 < self.exponent <= 1.0:
            raise DomainError(f"CRRA gamma must lie in (0, 1], got {self.exponent}")

    @property
    def gamma(self) -> float:
        return self.exponent


@dataclass(frozen=True)
class TwoPointUtility:
    """A utility given by a finite table; u(0)=0 is implied."""

    table: Mapping[float, float] = field(default_factory=dict)

    def __post_init__(self):
        items = sorted((float(k), float(v)) for k, v in dict(self.table).items())
        if items and items[0][0] != 0.0:
            items.insert(0, (0.0, 0.0))
        if not items:
            raise DomainError("utility table is empty")
        if items[0][1] != 0.0:
            raise DomainError("utility table must satisfy u(0) = 0")
        for (x0, u0), (x1, u1) in zip(items, items[1:]):
            if not u1 > u0:
                raise DomainError(f"utility table must be strictly increasing ({x0}->{u0}, {x1}->{u1})")
        object.__setattr__(self, "table", dict(items))

    def __call__(self, x):
        if np.ndim(x):
            return np.array([self(v) for v in np.ravel(x)]).reshape(np.shape(x))
        try:
            return self.table[float(x)]
        except KeyError:
            raise DomainError(f"prize {x} is outside the utility table domain {sorted(self.table)}") from None

    def inverse(self, t):
        raise DomainError("a tabulated utility has no inverse off its grid")

    @property
    def is_linear(self) -> bool:
        return False


UtilitySpec = Union[PowerUtility, TwoPointUtility]


def expected_utility(lottery: Lottery, u: UtilitySpec) -> float:
    """p * u(x); the null lottery is worth 0 without consulting ``u``."""
    if lottery.prob == 0.0:
        return 0.0
    return lottery.prob * float(u(lottery.prize))


def utility_invert(u: UtilitySpec, t):
    return u.inverse(t)


# --------------------------------------------------------------------------
# Probability weighting
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityWeighting:
    def __call__(self, p):
        return _weigh(p, lambda q: q)


@dataclass(frozen=True)
class TKWeighting:
    """w(p) = p^s / (p^s + (1-p)^s)^(1/s)."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    def __call__(self, p):
        s = self.sigma

        def w(q):
            qs = np.power(q, s)
            return qs / np.power(qs + np.power(1.0 - q, s), 1.0 / s)

        return _weigh(p, w)


@dataclass(frozen=True)
class PrelecWeighting:
    """v(p) = exp(-(-ln p)^alpha)."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")

    def __call__(self, p):
        a = self.alpha
        return _weigh(p, lambda q: np.exp(-np.power(-np.log(q), a)))


WeightingSpec = Union[IdentityWeighting, TKWeighting, PrelecWeighting]


def _weigh(p, interior):
    scalar = np.ndim(p) == 0
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise DomainError("probability must lie in [0, 1]")
    # endpoints by branch: avoids log(0) and 0**0
    out = np.where(arr == 1.0, 1.0, 0.0)
    inner = (arr > 0) & (arr < 1)
    if np.any(inner):
        out[inner] = interior(arr[inner])
    return float(out[0]) if scalar else out


def weight_eval(w: WeightingSpec, p):
    return w(p)


def prelec(p, alpha):
    """Prelec weight for an array of ``alpha`` values at a scalar ``p``."""
    alpha = np.asarray(alpha, dtype=float)
    if p == 1.0:
        return np.ones_like(alpha)
    if p == 0.0:
        return np.zeros_like(alpha)
    return np.exp(-np.power(-math.log(p), alpha))
