"""Scalar noise laws used for utility shocks and valuation residuals.

Every law samples by inverse transform of counter-based uniforms, so a
sample is a pure function of the stream position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy import integrate

from .exceptions import DomainError
from .rng import RngStream


class _Noise:
    def sample(self, stream: RngStream, n: int) -> np.ndarray:
        return self.ppf(stream.uniform_at(stream.counter, n))

    @property
    def atoms(self):
        """List of (value, probability) for discrete laws, else None."""
        return None

    def expect(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        """E[fn(eps)]: exact for discrete laws, adaptive quadrature otherwise."""
        if self.atoms is not None:
            return float(sum(w * fn(np.asarray(v, dtype=float)) for v, w in self.atoms))
        lo, hi = self.support
        val, _ = integrate.quad(lambda t: fn(np.asarray(t)) * self.pdf(t), lo, hi, limit=200)
        return float(val)

    @property
    def variance(self) -> float:
        m = self.mean
        return self.expect(lambda t: (t - m) ** 2)


@dataclass(frozen=True)
class Degenerate(_Noise):
    value: float = 0.0

    def ppf(self, u):
        return np.full(np.shape(u), float(self.value))

    def cdf(self, t):
        return np.where(np.asarray(t) >= self.value, 1.0, 0.0)

    @property
    def atoms(self):
        return [(self.value, 1.0)]

    @property
    def support(self):
        return (self.value, self.value)

    @property
    def mean(self):
        return float(self.value)

    @property
    def median(self):
        return float(self.value)

    @property
    def symmetric(self):
        return self.value == 0.0


@dataclass(frozen=True)
class Uniform(_Noise):
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise DomainError(f"uniform law needs a < b, got [{self.a}, {self.b}]")

    def ppf(self, u):
        return self.a + (self.b - self.a) * np.asarray(u)

    def cdf(self, t):
        return np.clip((np.asarray(t, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def pdf(self, t):
        return 1.0 / (self.b - self.a)

    @property
    def support(self):
        return (self.a, self.b)

    @property
    def mean(self):
        return 0.5 * (self.a + self.b)

    median = mean

    @property
    def variance(self):
        return (self.b - self.a) ** 2 / 12.0

    @property
    def symmetric(self):
        return self.a == -self.b


@dataclass(frozen=True)
class SplitUniform(_Noise):
    """Half the mass uniform on [center-left, center], half on [center, center+right].

    Median is ``center``; the law is asymmetric whenever ``left != right``.
    """

    center: float
    left: float
    right: float

    def __post_init__(self):
        if not (self.left > 0 and self.right > 0):
            raise DomainError("split-uniform half widths must be positive")

    def ppf(self, u):
        u = np.asarray(u)
        return np.where(
            u < 0.5,
            self.center - self.left + 2.0 * u * self.left,
            self.center + (2.0 * u - 1.0) * self.right,
        )

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        lower = 0.5 * np.clip((t - self.center + self.left) / self.left, 0.0, 1.0)
        upper = 0.5 * np.clip((t - self.center) / self.right, 0.0, 1.0)
        return lower + upper

    def pdf(self, t):
        return 0.5 / self.left if t < self.center else 0.5 / self.right

    @property
    def support(self):
        return (self.center - self.left, self.center + self.right)

    @property
    def mean(self):
        return self.center + 0.25 * (self.right - self.left)

    @property
    def median(self):
        return float(self.center)

    @property
    def symmetric(self):
        return self.center == 0 and self.left == self.right


@dataclass(frozen=True)
class TwoPointSym(_Noise):
    """+c or -c with probability 1/2 each."""

    c: float

    def __post_init__(self):
        if self.c < 0:
            raise DomainError(f"two-point half width must be nonnegative, got {self.c}")

    def ppf(self, u):
        return np.where(np.asarray(u) < 0.5, -self.c, self.c).astype(float)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= self.c, 1.0, np.where(t >= -self.c, 0.5, 0.0))

    @property
    def atoms(self):
        return [(-self.c, 0.5), (self.c, 0.5)]

    @property
    def support(self):
        return (-self.c, self.c)

    mean = 0.0
    median = 0.0
    symmetric = True


@dataclass(frozen=True)
class DiscreteSign(TwoPointSym):
    """+1 or -1 with probability 1/2 each."""

    c: float = 1.0


@dataclass(frozen=True)
class TwoPointSkew(_Noise):
    """``a`` with probability 1-weight and ``-a(1-weight)/weight`` with probability weight.

    Mean zero by construction; ``a`` may be negative.
    """

    a: float
    weight: float

    def __post_init__(self):
        if not 0.0 < self.weight < 1.0:
            raise DomainError(f"weight must lie in (0, 1), got {self.weight}")

    @property
    def minority(self) -> float:
        return -self.a * (1.0 - self.weight) / self.weight

    def ppf(self, u):
        return np.where(np.asarray(u) < self.weight, self.minority, self.a).astype(float)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = sorted((self.minority, self.a))
        w_lo = self.weight if lo == self.minority else 1.0 - self.weight
        return np.where(t >= hi, 1.0, np.where(t >= lo, w_lo, 0.0))

    @property
    def atoms(self):
        return [(self.a, 1.0 - self.weight), (self.minority, self.weight)]

    @property
    def support(self):
        return tuple(sorted((self.minority, self.a)))

    mean = 0.0

    @property
    def median(self):
        return self.a if self.weight < 0.5 else self.minority

    @property
    def symmetric(self):
        return self.a == 0.0 or self.weight == 0.5


@dataclass(frozen=True)
class Scaled(_Noise):
    """The law of ``k * base`` for k > 0."""

    base: "NoiseSpec"
    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError(f"scale must be positive, got {self.k}")

    def ppf(self, u):
        return self.k * self.base.ppf(u)

    def cdf(self, t):
        return self.base.cdf(np.asarray(t, dtype=float) / self.k)

    def pdf(self, t):
        return self.base.pdf(t / self.k) / self.k

    @property
    def atoms(self):
        inner = self.base.atoms
        return None if inner is None else [(self.k * v, w) for v, w in inner]

    @property
    def support(self):
        lo, hi = self.base.support
        return (self.k * lo, self.k * hi)

    @property
    def mean(self):
        return self.k * self.base.mean

    @property
    def median(self):
        return self.k * self.base.median

    @property
    def variance(self):
        return self.k**2 * self.base.variance

    @property
    def symmetric(self):
        return self.base.symmetric


NoiseSpec = Union[Degenerate, Uniform, SplitUniform, TwoPointSym, DiscreteSign, TwoPointSkew, Scaled]


def uniform_with_variance(var: float) -> Uniform:
    """Symmetric uniform law with the given variance."""
    half = math.sqrt(3.0 * var)
    return Uniform(-half, half)
