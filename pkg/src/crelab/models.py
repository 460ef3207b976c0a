"""Stochastic choice engines.

Closed-form choice probabilities are used wherever a model admits one
(Fechner links, weak expected utility). The random-utility families are
simulated; every simulator returns a ``FrequencyPair`` with counts so
callers can form standard errors.

Tie conventions. ``prospect_frequency_sim`` chooses the first alternative
only on a strict V-difference exceedance. The other simulators resolve exact
ties in favour of the first-listed alternative; ties have probability zero
under continuous noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy import special, stats

from .core import (
    CRRAUtility,
    CommonRatioProblem,
    IdentityWeighting,
    Lottery,
    PowerUtility,
    TKWeighting,
    UtilitySpec,
    WeightingSpec,
    expected_utility,
    prelec,
)
from .exceptions import ConfigError, DomainError, ModelError
from .noise import Degenerate, NoiseSpec, SplitUniform, Uniform
from .rng import RngStream, as_stream
from .testkit import FrequencyPair

# --------------------------------------------------------------------------
# Fechner links
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FechnerLink:
    """A symmetric link F with F(0) = 1/2.

    ``kind`` is one of ``uniform`` (difference noise uniform on [-h, h]),
    ``triangular`` (difference of two i.i.d. uniforms on [-h/2, h/2]),
    ``logistic`` or ``probit``; ``scale`` is the half width or scale.
    """

    kind: str
    scale: float

    _KINDS = ("uniform", "triangular", "logistic", "probit")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ConfigError(f"unknown link kind {self.kind!r}; expected one of {self._KINDS}")
        if not self.scale > 0:
            raise ConfigError(f"link scale must be positive, got {self.scale}")

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        h = self.scale
        if self.kind == "uniform":
            out = np.clip((t + h) / (2.0 * h), 0.0, 1.0)
        elif self.kind == "triangular":
            lo = (t + h) ** 2 / (2.0 * h * h)
            hi = 1.0 - (h - t) ** 2 / (2.0 * h * h)
            out = np.where(t <= -h, 0.0, np.where(t < 0, lo, np.where(t < h, hi, 1.0)))
        elif self.kind == "logistic":
            out = special.expit(t / h)
        else:
            out = stats.norm.cdf(t / h)
        return float(out) if out.ndim == 0 else out

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        h = self.scale
        if self.kind == "uniform":
            out = -h + 2.0 * h * q
        elif self.kind == "triangular":
            out = np.where(q < 0.5, -h + h * np.sqrt(2.0 * q), h - h * np.sqrt(2.0 * (1.0 - q)))
        elif self.kind == "logistic":
            out = h * special.logit(q)
        else:
            out = h * stats.norm.ppf(q)
        return float(out) if out.ndim == 0 else out


def UniformDiff(halfwidth: float) -> FechnerLink:
    return FechnerLink("uniform", halfwidth)


def TriangularDiff(halfwidth: float) -> FechnerLink:
    return FechnerLink("triangular", halfwidth)


def Logistic(scale: float) -> FechnerLink:
    return FechnerLink("logistic", scale)


def Probit(scale: float) -> FechnerLink:
    return FechnerLink("probit", scale)


# --------------------------------------------------------------------------
# Fechner and weak-EU models (closed form)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FechnerModel:
    """rho(l1, l2) = F(V(l1) - V(l2)) with V(x, p) = w(p) u(x).

    Identity weighting gives i.i.d. additive random expected utility.
    """

    u: UtilitySpec
    link: FechnerLink
    weighting: WeightingSpec = field(default_factory=IdentityWeighting)

    def value(self, lot: Lottery) -> float:
        if lot.prob == 0.0:
            return 0.0
        return float(self.weighting(lot.prob)) * float(self.u(lot.prize))


def fechner_choice_prob(m: FechnerModel, l1: Lottery, l2: Lottery) -> float:
    return float(m.link.cdf(m.value(l1) - m.value(l2)))


def _exact(v) -> Fraction:
    # decimal literal of the float, so 0.225 becomes 9/40 rather than its binary neighbour
    return Fraction(repr(float(v)))


def fechner_choice_prob_exact(m: FechnerModel, l1: Lottery, l2: Lottery) -> Fraction:
    """Rational evaluation for the piecewise-polynomial links under identity weighting."""
    if m.link.kind not in ("uniform", "triangular") or not isinstance(m.weighting, IdentityWeighting):
        raise ConfigError("exact evaluation needs a uniform or triangular link and identity weighting")

    def value(lot):
        return Fraction(0) if lot.prob == 0 else _exact(lot.prob) * _exact(m.u(lot.prize))

    t, h = value(l1) - value(l2), _exact(m.link.scale)
    if t <= -h:
        return Fraction(0)
    if t >= h:
        return Fraction(1)
    if m.link.kind == "uniform":
        return (t + h) / (2 * h)
    if t < 0:
        return (t + h) ** 2 / (2 * h * h)
    return 1 - (h - t) ** 2 / (2 * h * h)


@dataclass(frozen=True)
class WeakEUModel:
    """rho(l1, l2) = F(G(l1, l2) [EU(l1) - EU(l2)]) for a positive scaling G."""

    u: UtilitySpec
    link: FechnerLink
    G: Callable[[Lottery, Lottery], float]


def weakeu_choice_prob(m: WeakEUModel, l1: Lottery, l2: Lottery) -> float:
    g = float(m.G(l1, l2))
    if not g > 0 or not math.isfinite(g):
        raise ModelError(f"scaling G must be strictly positive, got {g}")
    diff = expected_utility(l1, m.u) - expected_utility(l2, m.u)
    return float(m.link.cdf(g * diff))


# --------------------------------------------------------------------------
# Simulated i.i.d. additive model
# --------------------------------------------------------------------------


def iareu_choice_sim(
    u: UtilitySpec, noise: NoiseSpec, l1: Lottery, l2: Lottery, n: int, stream
) -> tuple[int, int]:
    """Simulate U(l) = EU(l) + eps(l) with i.i.d. errors per alternative.

    Returns ``(k, n)`` where ``k`` counts choices of ``l1``.
    """
    s = as_stream(stream)
    e1 = noise.sample(s, n)
    e2 = noise.sample(s.advance(n), n)
    v1 = expected_utility(l1, u) + e1
    v2 = expected_utility(l2, u) + e2
    return int(np.count_nonzero(v1 >= v2)), int(n)


# --------------------------------------------------------------------------
# Random expected utility
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class REUModel:
    """U(x, p) = p (u(x) + eps_x); the shock law is shared by all prizes."""

    u: UtilitySpec
    shock: NoiseSpec


def reu_choice_freq(m: REUModel, l1: Lottery, l2: Lottery, n: int, stream) -> tuple[int, int]:
    """Choices of ``l1`` out of ``n``; one independent shock per alternative."""
    if n < 1:
        raise DomainError("n must be at least 1")
    s = as_stream(stream)
    e1 = m.shock.sample(s, n)
    e2 = m.shock.sample(s.advance(n), n)
    v1 = l1.prob * (float(m.u(l1.prize)) + e1)
    v2 = l2.prob * (float(m.u(l2.prize)) + e2)
    return int(np.count_nonzero(v1 >= v2)), int(n)


def reu_choice_pair(m: REUModel, prob: CommonRatioProblem, n: int, stream) -> FrequencyPair:
    s = as_stream(stream)
    k_ab, _ = reu_choice_freq(m, prob.A, prob.B, n, s.child(0))
    k_cd, _ = reu_choice_freq(m, prob.C, prob.D, n, s.child(1))
    return FrequencyPair.from_counts(k_ab, n, k_cd, n)


# --------------------------------------------------------------------------
# Perception model U(x, p) = p u(x) + eps_p f(x) + eps_x g(p) + eps_{p,x}
# --------------------------------------------------------------------------

_CASES = ("independent", "product", "shared", "linear")


@dataclass(frozen=True)
class PerceptionModel:
    """Additive perception model with a configurable correlation structure.

    Cases:

    * ``independent``: every error term is an independent draw; all laws
      symmetric about zero.
    * ``product``: eps_{p,x} = alpha eps_p eps_x + beta eps*_{p,x} + const,
      with ``product=(alpha, beta, const)`` and eps* drawn from ``noise_px``.
    * ``shared``: eps_{p,x} independent with a law symmetric about a common
      constant (its median); eps_p and eps_x symmetric about zero.
    * ``linear``: one draw e per task; eps_s = lam e for every probability
      and eps_x = e for every prize; eps_{p,x} independent.

    ``eps_one`` is ``"zero"`` (the sure lottery carries no probability error)
    or ``"same"`` (eps_1 has the law of the other eps_p).
    """

    u: UtilitySpec
    noise_p: NoiseSpec = field(default_factory=Degenerate)
    noise_x: NoiseSpec = field(default_factory=Degenerate)
    noise_px: NoiseSpec = field(default_factory=Degenerate)
    case: str = "independent"
    eps_one: str = "zero"
    lam: Optional[float] = None
    product: Optional[tuple[float, float, float]] = None
    f: Optional[Callable] = None
    g: Optional[Callable] = None

    def __post_init__(self):
        if self.case not in _CASES:
            raise ConfigError(f"unknown case {self.case!r}; expected one of {_CASES}")
        if self.eps_one not in ("zero", "same"):
            raise ConfigError(f"eps_one must be 'zero' or 'same', got {self.eps_one!r}")
        if (self.lam is not None) != (self.case == "linear"):
            raise ConfigError("lam is required by, and only allowed for, the linear case")
        if (self.product is not None) != (self.case == "product"):
            raise ConfigError("product constants are required by, and only allowed for, the product case")
        if self.case == "linear" and not self.lam:
            raise ConfigError("lam must be nonzero")
        for name in ("noise_p", "noise_x"):
            if not getattr(self, name).symmetric:
                raise ConfigError(f"{name} must be symmetric about zero")
        if self.case in ("independent", "linear") and not self.noise_px.symmetric:
            raise ConfigError("noise_px must be symmetric about zero in this case")
        if self.case == "product" and not (self.noise_px.symmetric or _is_degenerate(self.noise_px)):
            raise ConfigError("eps* must be symmetric about zero or identical")
        if self.case == "shared" and not _centrally_symmetric(self.noise_px):
            raise ConfigError("noise_px must be symmetric about its median")

    def fx(self, x):
        return self.u(x) if self.f is None else self.f(x)

    def gp(self, p):
        return p if self.g is None else self.g(p)


def _is_degenerate(law) -> bool:
    return isinstance(law, Degenerate)


def _centrally_symmetric(law) -> bool:
    if isinstance(law, (Degenerate, Uniform)):
        return True
    if isinstance(law, SplitUniform):
        return law.left == law.right
    return law.symmetric


def _task_utilities(m: PerceptionModel, l_safe: Lottery, l_risky: Lottery, n: int, s: RngStream):
    """Random utilities of the two lotteries of one task, n replications."""
    (x, q1), (y, q2) = l_safe, l_risky
    draw = lambda law, k: law.sample(s.child(k), n)
    if m.case == "linear":
        e = draw(m.noise_x, 0)
        eps_q2 = m.lam * e
        eps_q1 = m.lam * e if (q1 < 1.0 or m.eps_one == "same") else np.zeros(n)
        eps_x = eps_y = e
    else:
        eps_q2 = draw(m.noise_p, 1)
        eps_q1 = draw(m.noise_p, 2) if (q1 < 1.0 or m.eps_one == "same") else np.zeros(n)
        eps_x = draw(m.noise_x, 3)
        eps_y = draw(m.noise_x, 4)
    star1 = draw(m.noise_px, 5)
    star2 = draw(m.noise_px, 6)
    if m.case == "product":
        a, b, c = m.product
        eps_1x = a * eps_q1 * eps_x + b * star1 + c
        eps_2y = a * eps_q2 * eps_y + b * star2 + c
    else:
        eps_1x, eps_2y = star1, star2
    u1 = q1 * float(m.u(x)) + eps_q1 * m.fx(x) + eps_x * m.gp(q1) + eps_1x
    u2 = q2 * float(m.u(y)) + eps_q2 * m.fx(y) + eps_y * m.gp(q2) + eps_2y
    return u1, u2


def perception_choice_pair(m: PerceptionModel, prob: CommonRatioProblem, n: int, stream) -> FrequencyPair:
    if n < 1:
        raise DomainError("n must be at least 1")
    s = as_stream(stream)
    ua, ub = _task_utilities(m, prob.A, prob.B, n, s.child(0))
    uc, ud = _task_utilities(m, prob.C, prob.D, n, s.child(1))
    return FrequencyPair.from_counts(
        int(np.count_nonzero(ua >= ub)), n, int(np.count_nonzero(uc >= ud)), n
    )


# --------------------------------------------------------------------------
# Prospect model with uniform Fechner errors
# --------------------------------------------------------------------------


def prospect_vdiffs(gamma: float, sigma: float, prob: CommonRatioProblem) -> tuple[float, float]:
    """Deterministic value differences V(A)-V(B) and V(C)-V(D)."""
    u = PowerUtility(gamma)
    w = TKWeighting(sigma)
    ux, uy = u(prob.x), u(prob.y)
    return ux - w(prob.p) * uy, w(prob.r) * ux - w(prob.r * prob.p) * uy


def prospect_frequency_batch(
    gamma: float,
    sigma: float,
    prob: CommonRatioProblem,
    noise_halfwidth: float,
    n_choices: int,
    reps: int,
    stream,
    first_rep: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Counts of A and C choices for replications ``first_rep .. first_rep+reps-1``.

    Replication ``i`` reads its errors at stream positions
    ``[2 n i, 2 n (i+1))``: AB errors first, then CD errors. Results are
    therefore independent of how replications are batched.
    """
    if n_choices < 1:
        raise DomainError("n_choices must be at least 1")
    if noise_halfwidth < 0:
        raise DomainError("noise half width must be nonnegative")
    s = as_stream(stream)
    d_ab, d_cd = prospect_vdiffs(gamma, sigma, prob)
    block = 2 * n_choices
    u = s.uniform_at(s.counter + block * first_rep, block * reps).reshape(reps, 2, n_choices)
    eps = noise_halfwidth * (2.0 * u - 1.0)
    k_ab = np.count_nonzero(d_ab > eps[:, 0, :], axis=1)
    k_cd = np.count_nonzero(d_cd > eps[:, 1, :], axis=1)
    return k_ab, k_cd


def prospect_frequency_sim(
    gamma: float,
    sigma: float,
    prob: CommonRatioProblem,
    noise_halfwidth: float,
    n_choices: int,
    stream,
) -> FrequencyPair:
    """One pair of sample frequencies: A iff V(A)-V(B) > eps, C iff V(C)-V(D) > eps."""
    k_ab, k_cd = prospect_frequency_batch(gamma, sigma, prob, noise_halfwidth, n_choices, 1, stream)
    return FrequencyPair.from_counts(int(k_ab[0]), n_choices, int(k_cd[0]), n_choices)


def prospect_choice_probs(
    gamma: float, sigma: float, prob: CommonRatioProblem, noise_halfwidth: float
) -> tuple[float, float]:
    """Population choice probabilities under uniform errors on [-h, h]."""
    d_ab, d_cd = prospect_vdiffs(gamma, sigma, prob)
    if noise_halfwidth == 0:
        return float(d_ab > 0), float(d_cd > 0)
    link = UniformDiff(noise_halfwidth)
    return link.cdf(d_ab), link.cdf(d_cd)


# --------------------------------------------------------------------------
# Random Prelec weighting
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RandomPrelecModel:
    """Prospect valuation v_alpha(p) u(x) with a random Prelec exponent.

    ``alpha_law`` is ``"uniform"`` (uniform on [1-delta, 1+delta]) or
    ``"median1"`` (uniform halves of unequal width, median 1, asymmetric).
    """

    gamma: float
    delta: float
    alpha_law: str = "uniform"
    skew: float = 0.4

    def __post_init__(self):
        CRRAUtility(self.gamma)
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if self.alpha_law not in ("uniform", "median1"):
            raise ConfigError(f"unknown alpha law {self.alpha_law!r}")
        if not 0.0 < self.skew <= 1.0:
            raise ConfigError("skew must lie in (0, 1]")

    @property
    def law(self) -> NoiseSpec:
        if self.alpha_law == "uniform":
            return Uniform(1.0 - self.delta, 1.0 + self.delta)
        return SplitUniform(1.0, self.delta, self.skew * self.delta)


def _prelec_choices(m: RandomPrelecModel, prob: CommonRatioProblem, alpha_ab, alpha_cd):
    if prob.p == 1.0:
        raise DomainError("random Prelec model needs p < 1")
    ux, uy = prob.x**m.gamma, prob.y**m.gamma
    a_choice = ux >= prelec(prob.p, alpha_ab) * uy
    c_choice = prelec(prob.r, alpha_cd) * ux >= prelec(prob.r * prob.p, alpha_cd) * uy
    return a_choice, c_choice


def random_prelec_choice_pair(m: RandomPrelecModel, prob: CommonRatioProblem, n: int, stream) -> FrequencyPair:
    """Fresh alpha per replication and per task."""
    if n < 1:
        raise DomainError("n must be at least 1")
    s = as_stream(stream)
    law = m.law
    a_choice, c_choice = _prelec_choices(m, prob, law.sample(s.child(0), n), law.sample(s.child(1), n))
    return FrequencyPair.from_counts(
        int(np.count_nonzero(a_choice)), n, int(np.count_nonzero(c_choice)), n
    )


def random_prelec_exact(m: RandomPrelecModel, prob: CommonRatioProblem, grid: int = 200001) -> tuple[float, float]:
    """Choice probabilities by midpoint quadrature over the alpha quantile function."""
    q = (np.arange(grid) + 0.5) / grid
    alpha = m.law.ppf(q)
    a_choice, c_choice = _prelec_choices(m, prob, alpha, alpha)
    return float(a_choice.mean()), float(c_choice.mean())
