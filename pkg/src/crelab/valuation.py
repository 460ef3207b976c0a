"""Valuation-task samplers and counterexample constructions.

A valuation task elicits m_AB with (m_AB, 1) ~ (y, p) and m_CD with
(m_CD, r) ~ (y, rp). Under additive noise on the utility scale

    m_AB = h(p u(y) + eps_AB),    m_CD = h(p u(y) + eps_CD / r),

with h the inverse utility. Domain violations of h are hard errors: clipping
would silently change the model.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import optimize

from .core import CRRAUtility, PowerUtility, UtilitySpec, prelec
from .exceptions import ConstructionError, DomainError
from .noise import Degenerate, NoiseSpec, TwoPointSkew, TwoPointSym, Uniform
from .rng import as_stream
from .testkit import ValuationSampleSet, sign_scores

# --------------------------------------------------------------------------
# Coupled uniform errors
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Independent:
    """Marker: the two valuation errors are drawn independently."""


@dataclass(frozen=True)
class CoupledErrorConstruction:
    """Joint law of (X, Y) with X ~ U[-c, c], Y ~ U[-d, d] and Pr(X > Y) = (c+d)/(2c).

    Y and an independent Z ~ U[-c, c] are drawn; X = Z when Z < -d and
    X = a + bY otherwise. With ``orientation="XisAB"`` the valuation errors
    are (eps_AB, eps_CD) = (X, rY); with ``"XisCD"`` they are (Y, rX).
    At d = c the map is the identity, so X = Y surely.
    """

    c: float
    d: float
    orientation: str = "XisAB"
    r: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"c must be positive, got {self.c}")
        if not 0 < self.d <= self.c:
            raise DomainError(f"d must lie in (0, c], got {self.d}")
        if self.orientation not in ("XisAB", "XisCD"):
            raise DomainError(f"unknown orientation {self.orientation!r}")
        if not 0 < self.r <= 1:
            raise DomainError(f"r must lie in (0, 1], got {self.r}")

    @property
    def a(self) -> float:
        return (self.c - self.d) / 2.0

    @property
    def b(self) -> float:
        return (self.c + self.d) / (2.0 * self.d)

    @property
    def prob_x_gt_y(self) -> float:
        if self.d == self.c:
            return 0.0  # X == Y surely
        return (self.c + self.d) / (2.0 * self.c)

    @property
    def prob_ab_gt_cd(self) -> float:
        """Pr(eps_AB > eps_CD / r), i.e. Pr(m_AB > m_CD) with ties at zero weight."""
        if self.d == self.c:
            return 0.0
        q = self.prob_x_gt_y
        return q if self.orientation == "XisAB" else 1.0 - q


Coupling = Union[Independent, CoupledErrorConstruction]


def coupled_xy(ce: CoupledErrorConstruction, n: int, stream) -> tuple[np.ndarray, np.ndarray]:
    s = as_stream(stream)
    y = Uniform(-ce.d, ce.d).sample(s.child(0), n)
    z = Uniform(-ce.c, ce.c).sample(s.child(1), n)
    x = np.where(z < -ce.d, z, ce.a + ce.b * y)
    return x, y


def coupled_sample(ce: CoupledErrorConstruction, n: int, stream) -> tuple[np.ndarray, np.ndarray]:
    """Draw n pairs (eps_AB, eps_CD)."""
    x, y = coupled_xy(ce, n, stream)
    if ce.orientation == "XisAB":
        return x, ce.r * y
    return y, ce.r * x


def construct_sign_target(q: float, c: float, r: float = 1.0) -> Coupling:
    """Coupled errors with Pr(m_AB > m_CD) = q.

    q > 1/2 puts the wider error on the AB task, q < 1/2 on the CD task, and
    q = 1/2 is met by independent errors. At q = 1 the construction has
    d = c, which makes the two errors equal; see ``CoupledErrorConstruction``.
    """
    if not 0 < q <= 1:
        raise DomainError(f"q must lie in (0, 1], got {q}")
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    if q == 0.5:
        return Independent()
    if q > 0.5:
        return CoupledErrorConstruction(c, (2 * q - 1) * c, "XisAB", r)
    return CoupledErrorConstruction(c, (1 - 2 * q) * c, "XisCD", r)


# --------------------------------------------------------------------------
# Gamma model
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaModel:
    """Valuations m = h(u(m*) + eps) around the certainty equivalent m* = h(p u(y)).

    ``cd_over_r`` divides the CD error by r (the additive-utility reading);
    switch it off to feed eps_CD to the valuation map unchanged.
    """

    u: PowerUtility
    y: float
    p: float
    r: float
    noise_ab: NoiseSpec = field(default_factory=Degenerate)
    noise_cd: NoiseSpec = field(default_factory=Degenerate)
    coupling: Coupling = field(default_factory=Independent)
    cd_over_r: bool = True

    def __post_init__(self):
        if not self.y > 0:
            raise DomainError("y must be positive")
        for name in ("p", "r"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise DomainError(f"{name} must lie in (0, 1], got {v}")

    @property
    def base(self) -> float:
        """B = p u(y)."""
        return self.p * float(self.u(self.y))

    @property
    def m_star(self) -> float:
        return float(self.u.inverse(self.base))

    @property
    def cd_divisor(self) -> float:
        return self.r if self.cd_over_r else 1.0

    def error_supports(self) -> tuple[tuple[float, float], tuple[float, float]]:
        if isinstance(self.coupling, CoupledErrorConstruction):
            ce = self.coupling
            wide, narrow = (-ce.c, ce.c), (-ce.d, ce.d)
            if ce.orientation == "XisAB":
                return wide, (ce.r * narrow[0], ce.r * narrow[1])
            return narrow, (ce.r * wide[0], ce.r * wide[1])
        return self.noise_ab.support, self.noise_cd.support

    def check_support(self):
        (lo_ab, _), (lo_cd, _) = self.error_supports()
        if self.base + lo_ab < 0:
            raise DomainError(
                f"AB error support reaches {lo_ab}, below -p u(y) = {-self.base}; inverse utility undefined"
            )
        if self.base + lo_cd / self.cd_divisor < 0:
            raise DomainError(
                f"CD error support reaches {lo_cd}, so p u(y) + eps_CD/r can be negative"
            )

    def valuations(self, eps_ab, eps_cd) -> tuple[np.ndarray, np.ndarray]:
        m_ab = self.u.inverse(self.base + np.asarray(eps_ab))
        m_cd = self.u.inverse(self.base + np.asarray(eps_cd) / self.cd_divisor)
        return np.atleast_1d(m_ab), np.atleast_1d(m_cd)


def gamma_errors(gm: GammaModel, n: int, stream) -> tuple[np.ndarray, np.ndarray]:
    s = as_stream(stream)
    if isinstance(gm.coupling, CoupledErrorConstruction):
        return coupled_sample(gm.coupling, n, s)
    return gm.noise_ab.sample(s.child(0), n), gm.noise_cd.sample(s.child(1), n)


def gamma_valuation_sample(gm: GammaModel, n: int, stream) -> ValuationSampleSet:
    gm.check_support()
    eps_ab, eps_cd = gamma_errors(gm, n, stream)
    return ValuationSampleSet(*gm.valuations(eps_ab, eps_cd))


def gamma_choice_probs(gm: GammaModel, x: float) -> tuple[float, float]:
    """rho(A, B) = Pr(x >= m_AB(eps)) and rho(C, D) = Pr(x >= m_CD(eps)) for independent errors.

    Both reduce to cdf evaluations: x >= h(B + e) iff e <= u(x) - B.
    """
    if not isinstance(gm.coupling, Independent):
        raise DomainError("closed-form choice probabilities need independent errors")
    t = float(gm.u(x)) - gm.base
    return float(gm.noise_ab.cdf(t)), float(gm.noise_cd.cdf(t * gm.cd_divisor))


# --------------------------------------------------------------------------
# Mean bounds and mean targets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MeanBoundRectangle:
    gamma: float
    y: float
    p: float

    @property
    def base(self) -> float:
        return self.p * self.y**self.gamma

    @property
    def e_min(self) -> float:
        return self.y * self.p ** (1.0 / self.gamma)

    @property
    def e_max(self) -> float:
        return 0.5 * self.y * (2.0 * self.p) ** (1.0 / self.gamma)

    @property
    def corners(self) -> tuple[float, float]:
        return self.e_min, self.e_max

    def contains(self, z1: float, z2: float) -> bool:
        return all(self.e_min <= z <= self.e_max for z in (z1, z2))


def mean_bounds(gamma: float, y: float, p: float) -> MeanBoundRectangle:
    CRRAUtility(gamma)
    if not y > 0:
        raise DomainError("y must be positive")
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    return MeanBoundRectangle(float(gamma), float(y), float(p))


def two_point_mean(base: float, c: float, gamma: float) -> float:
    """E[(base + eps)^(1/gamma)] for eps = +-c with equal weight."""
    k = 1.0 / gamma
    return 0.5 * ((base - c) ** k + (base + c) ** k)


@dataclass(frozen=True)
class MeanTargetConstruction:
    gamma: float
    c1: float
    c2: float
    y: float
    p: float
    r: float

    @property
    def noise_ab(self) -> TwoPointSym:
        return TwoPointSym(self.c1)

    @property
    def noise_cd(self) -> TwoPointSym:
        return TwoPointSym(self.c2)

    @property
    def means(self) -> tuple[float, float]:
        base = self.p * self.y**self.gamma
        return two_point_mean(base, self.c1, self.gamma), two_point_mean(base, self.c2 / self.r, self.gamma)

    def model(self) -> GammaModel:
        return GammaModel(CRRAUtility(self.gamma), self.y, self.p, self.r, self.noise_ab, self.noise_cd)


def feasible_gamma_limit(z1: float, z2: float, y: float, p: float) -> float:
    """Largest gamma in (0, 1] whose mean rectangle contains (z1, z2).

    e_min rises and e_max falls in gamma, so the feasible set is (0, limit].
    """
    lo, hi = min(z1, z2), max(z1, z2)
    limit = 1.0
    if lo < p * y:
        limit = min(limit, math.log(p) / math.log(lo / y))
    if hi > p * y:
        limit = min(limit, math.log(2 * p) / math.log(2 * hi / y))
    return limit


def _half_width(base: float, gamma: float, z: float) -> float:
    lo = base ** (1.0 / gamma)
    if z <= lo:
        return 0.0
    return optimize.brentq(lambda c: two_point_mean(base, c, gamma) - z, 0.0, base, xtol=1e-15, rtol=1e-15)


def construct_mean_target(
    z1: float, z2: float, y: float, p: float, r: float, tol: float = 1e-8, gamma: Optional[float] = None
) -> MeanTargetConstruction:
    """Symmetric two-point errors and a CRRA exponent giving E[m_AB]=z1, E[m_CD]=z2.

    Without an explicit ``gamma`` the target is placed strictly inside the
    rectangle by taking half the largest feasible exponent (the exponent 1
    itself when the target is the risk-neutral point).
    """
    if not (z1 > 0 and z2 > 0):
        raise DomainError(f"targets must be positive, got ({z1}, {z2})")
    if not 0.5 < p < 1:
        raise DomainError(f"need 1/2 < p < 1, got {p}")
    if not 0 < r <= 1:
        raise DomainError(f"r must lie in (0, 1], got {r}")
    limit = feasible_gamma_limit(z1, z2, y, p)
    if gamma is None:
        gamma = 1.0 if limit == 1.0 else 0.5 * limit
    rect = mean_bounds(gamma, y, p)
    if not rect.contains(z1, z2) and not (
        math.isclose(min(z1, z2), rect.e_min, rel_tol=1e-12) or math.isclose(max(z1, z2), rect.e_max, rel_tol=1e-12)
    ):
        raise ConstructionError(
            f"target ({z1}, {z2}) is outside the gamma={gamma} rectangle [{rect.e_min}, {rect.e_max}]"
        )
    base = rect.base
    c1 = _half_width(base, gamma, z1)
    w2 = _half_width(base, gamma, z2)
    out = MeanTargetConstruction(gamma, c1, r * w2, y, p, r)
    e1, e2 = out.means
    if abs(e1 - z1) > tol or abs(e2 - z2) > tol:
        raise ConstructionError(f"construction misses target: got ({e1}, {e2}) for ({z1}, {z2})")
    return out


# --------------------------------------------------------------------------
# Asymmetric joint density with uniform marginals
# --------------------------------------------------------------------------

_A_ENVELOPE = 5.0 / 12.0


def appendix_a_density(z1, z2):
    """f(z1, z2) = 1/4 + z1 (z2^2 - 1/3) / 4 on [-1, 1]^2."""
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    if np.any(np.abs(z1) > 1) or np.any(np.abs(z2) > 1):
        raise DomainError("density is supported on [-1, 1]^2")
    out = 0.25 + 0.25 * z1 * (z2 * z2 - 1.0 / 3.0)
    return float(out) if out.ndim == 0 else out


def appendix_a_sample(n: int, stream) -> tuple[np.ndarray, np.ndarray]:
    """Rejection sampling from uniform proposals with envelope 5/12.

    Proposals are drawn in fixed-size rounds from child streams, so the
    output depends only on (stream, n).
    """
    s = as_stream(stream)
    out1, out2, have, rnd = [], [], 0, 0
    batch = max(1024, int(1.7 * n))
    while have < n:
        u = s.child(rnd).uniform_at(0, 3 * batch).reshape(3, batch)
        z1, z2 = 2 * u[0] - 1, 2 * u[1] - 1
        keep = u[2] * _A_ENVELOPE < appendix_a_density(z1, z2)
        out1.append(z1[keep])
        out2.append(z2[keep])
        have += int(keep.sum())
        rnd += 1
    return np.concatenate(out1)[:n], np.concatenate(out2)[:n]


def remark_mixture_sample(n: int, stream, weight: float = 0.8) -> tuple[np.ndarray, np.ndarray]:
    """(X, X) with probability ``weight`` and (X, -X) otherwise, X ~ U[-1, 1]."""
    s = as_stream(stream)
    x = Uniform(-1.0, 1.0).sample(s.child(0), n)
    same = s.child(1).uniform_at(0, n) < weight
    return x, np.where(same, x, -x)


# --------------------------------------------------------------------------
# Mean-test bias with i.i.d. lottery errors
# --------------------------------------------------------------------------


def mps_transform(eps_ab, r: float, stream) -> np.ndarray:
    """Z | eps_AB = x is (1/r - 1) x w.p. (1+r)/2 and -(1/r + 1) x otherwise."""
    if not 0 < r < 1:
        raise DomainError(f"r must lie in (0, 1), got {r}")
    x = np.atleast_1d(np.asarray(eps_ab, dtype=float))
    u = as_stream(stream).uniform_at(as_stream(stream).counter, x.size).reshape(x.shape)
    return np.where(u < 0.5 * (1 + r), (1 / r - 1) * x, -(1 / r + 1) * x)


@dataclass(frozen=True)
class MeanBias:
    delta: float
    se: float
    n: int


def _mean_bias_valuations(u, p, y, r, e):
    base = p * float(u(y))
    eps_ab = e[1] - e[0]
    eps_cd = (e[3] - e[2]) / r
    arg_ab, arg_cd = base + eps_ab, base + eps_cd
    if np.any(arg_ab < 0) or np.any(arg_cd < 0):
        raise DomainError("p u(y) + eps leaves the domain of the inverse utility; widen p u(y) or shrink the noise")
    return u.inverse(arg_ab), u.inverse(arg_cd)


def mean_bias_direction(u: UtilitySpec, p: float, y: float, r: float, noise: NoiseSpec, n: int, stream) -> MeanBias:
    """Monte Carlo mean of m_CD - m_AB with i.i.d. errors on A, B, C, D."""
    s = as_stream(stream)
    e = [noise.sample(s.child(k), n) for k in range(4)]
    m_ab, m_cd = _mean_bias_valuations(u, p, y, r, e)
    d = np.asarray(m_cd) - np.asarray(m_ab)
    return MeanBias(float(d.mean()), float(d.std(ddof=1) / math.sqrt(n)), n)


def mean_bias_exact(u: UtilitySpec, p: float, y: float, r: float, noise: NoiseSpec) -> float:
    """Exact E[m_CD - m_AB] by enumerating a discrete error law."""
    atoms = noise.atoms
    if atoms is None:
        raise DomainError("exact enumeration needs a discrete error law")
    total = 0.0
    for combo in itertools.product(atoms, repeat=4):
        w = math.prod(pr for _, pr in combo)
        e = [np.array([v]) for v, _ in combo]
        m_ab, m_cd = _mean_bias_valuations(u, p, y, r, e)
        total += w * (float(np.squeeze(m_cd)) - float(np.squeeze(m_ab)))
    return total


# --------------------------------------------------------------------------
# Sign-test bias with skewed two-point probability errors
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaBiasConstruction:
    theta: float
    p: float
    r: float
    direction: str
    gamma_prob: float
    a: float
    noise: TwoPointSkew

    @property
    def guaranteed(self) -> float:
        """Lower bound (1 - gamma_prob)^3 on the targeted probability."""
        return (1.0 - self.gamma_prob) ** 3


def theta_bias_construction(theta: float, p: float, r: float, direction: str = "CD_over_AB") -> ThetaBiasConstruction:
    """Probability errors making Pr(m_CD > m_AB) (or the reverse) exceed theta.

    eps_s for s in {p, r, pr} is i.i.d. with value s a on the majority
    atom (weight 1 - gamma_prob), where the sign s depends on whether p + r
    is below one and on the requested direction.
    """
    if not 0 < theta < 1:
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    if not (0 < p < 1 and 0 < r < 1):
        raise DomainError("p and r must lie in (0, 1)")
    if math.isclose(p + r, 1.0, rel_tol=0, abs_tol=1e-12):
        raise DomainError("construction needs p + r != 1")
    if direction not in ("CD_over_AB", "AB_over_CD"):
        raise DomainError(f"unknown direction {direction!r}")
    g = 0.5 * (1.0 - theta ** (1.0 / 3.0))
    a = 0.5 * min(abs(1.0 - (p + r)), p * r * g / (1.0 - g), p * r)
    sign = 1.0 if (p + r < 1) == (direction == "CD_over_AB") else -1.0
    return ThetaBiasConstruction(theta, p, r, direction, g, a, TwoPointSkew(sign * a, g))


def theta_bias_sample(tc: ThetaBiasConstruction, y: float, u: PowerUtility, n: int, stream) -> ValuationSampleSet:
    """u(m_AB) = u(y)(p + eps_p), u(m_CD) = u(y)(pr + eps_pr)/(r + eps_r)."""
    s = as_stream(stream)
    ep, er, epr = (tc.noise.sample(s.child(k), n) for k in range(3))
    uy = float(u(y))
    if np.any(tc.r + er <= 0):
        raise DomainError("r + eps_r must stay positive")
    m_ab = u.inverse(uy * (tc.p + ep))
    m_cd = u.inverse(uy * (tc.p * tc.r + epr) / (tc.r + er))
    return ValuationSampleSet(np.atleast_1d(m_ab), np.atleast_1d(m_cd))


# --------------------------------------------------------------------------
# Residual moments in the multiplicative perception model
# --------------------------------------------------------------------------

RESIDUAL_CASES = ("1", "2", "3a", "3b")


@dataclass(frozen=True)
class ResidualMoments:
    case: str
    e_ab: float
    e_cd: float
    se_ab: float
    se_cd: float
    n: int
    se_diff: float = float("nan")

    @property
    def gap(self) -> float:
        """E[eps_CD] - E[eps_AB]."""
        return self.e_cd - self.e_ab

    def __post_init__(self):
        if not (self.se_ab > 0 and self.se_cd > 0):
            raise DomainError("residual moments need positive standard errors")


@dataclass(frozen=True)
class MultiplicativeModel:
    """Random utility (p + eps_p)(u(x) + eps_x) of a lottery (x, p).

    ``case`` selects the correlation pattern:

    * ``"1"``: all errors independent; eps_1 is zero or an independent copy.
    * ``"2"``: one draw shared by eps_p, eps_r, eps_pr (and eps_1 unless zero).
    * ``"3a"``: eps_p = eps_r = eps_pr = lam eps_x, eps_1 = 0.
    * ``"3b"``: as 3a with eps_1 equal to the same draw.
    """

    u: PowerUtility
    noise_p: NoiseSpec
    noise_x: NoiseSpec = field(default_factory=Degenerate)
    case: str = "1"
    eps_one: str = "zero"
    lam: Optional[float] = None

    def __post_init__(self):
        if self.case not in RESIDUAL_CASES:
            raise DomainError(f"unknown case {self.case!r}")
        if self.eps_one not in ("zero", "same"):
            raise DomainError("eps_one must be 'zero' or 'same'")
        if self.case.startswith("3") and not self.lam:
            raise DomainError("cases 3a/3b need a nonzero lam")

    @property
    def one_mode(self) -> str:
        return {"3a": "zero", "3b": "same"}.get(self.case, self.eps_one)


def residual_draws(mm: MultiplicativeModel, y: float, p: float, r: float, n: int, stream):
    """Per-replication residuals (eps_AB, eps_CD) defined by u(m) = p u(y) + eps."""
    s = as_stream(stream)
    draw = lambda law, k: law.sample(s.child(k), n)
    zero = np.zeros(n)
    if mm.case == "1":
        ep, er, epr = draw(mm.noise_p, 0), draw(mm.noise_p, 1), draw(mm.noise_p, 2)
        e1 = draw(mm.noise_p, 3) if mm.one_mode == "same" else zero
        ey1, ey2, em1, em2 = (draw(mm.noise_x, k) for k in (4, 5, 6, 7))
    elif mm.case == "2":
        ep = er = epr = draw(mm.noise_p, 0)
        e1 = ep if mm.one_mode == "same" else zero
        ey1, ey2, em1, em2 = (draw(mm.noise_x, k) for k in (4, 5, 6, 7))
    else:
        ep = er = epr = draw(mm.noise_p, 0)
        e1 = ep if mm.one_mode == "same" else zero
        ey1 = ey2 = em1 = em2 = ep / mm.lam
    if np.any(r + er <= 0) or np.any(1 + e1 <= 0):
        raise DomainError("perceived probabilities r + eps_r and 1 + eps_1 must stay positive")
    uy = float(mm.u(y))
    base = p * uy
    eps_ab = (p + ep) * (uy + ey1) / (1 + e1) - em1 - base
    eps_cd = (p * r + epr) * (uy + ey2) / (r + er) - em2 - base
    return eps_ab, eps_cd


def residual_moments(mm: MultiplicativeModel, y: float, p: float, r: float, n: int, stream) -> ResidualMoments:
    eps_ab, eps_cd = residual_draws(mm, y, p, r, n, stream)
    sq = math.sqrt(n)
    return ResidualMoments(
        mm.case,
        float(eps_ab.mean()),
        float(eps_cd.mean()),
        float(eps_ab.std(ddof=1) / sq),
        float(eps_cd.std(ddof=1) / sq),
        n,
        float((eps_cd - eps_ab).std(ddof=1) / sq),
    )


def residual_closed_form(mm: MultiplicativeModel, y: float, p: float, r: float) -> tuple[float, float]:
    """Exact (E[eps_AB], E[eps_CD]) for the four correlation cases."""
    uy = float(mm.u(y))
    law = mm.noise_p
    inv_r = law.expect(lambda t: r / (r + t))
    inv_1 = law.expect(lambda t: 1.0 / (1.0 + t))
    same = mm.one_mode == "same"
    if mm.case == "1":
        return (p * uy * (inv_1 - 1) if same else 0.0), p * uy * (inv_r - 1)
    if mm.case == "2":
        return ((1 - p) * uy * (1 - inv_1) if same else 0.0), (1 - p) * uy * (1 - inv_r)
    e_cd = (1 - p) * (inv_r - 1) * (r / mm.lam - uy)
    if mm.case == "3a":
        return law.variance / mm.lam, e_cd
    return (1 - p) * (inv_1 - 1) * (1 / mm.lam - uy), e_cd


# --------------------------------------------------------------------------
# Random Prelec weighting in valuation tasks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SignEstimate:
    estimate: float
    se: float
    n: int


def _check_prelec_args(p, r, delta):
    if not (0 < p < 1 and 0 < r < 1):
        raise DomainError("p and r must lie in (0, 1)")
    if p == math.exp(-1.0):
        raise DomainError("p = 1/e is the Prelec fixed point; the sign result does not apply")
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


def prelec_valuations(p, r, gamma, alpha_ab, alpha_cd, y: float = 1.0):
    m_ab = y * prelec(p, alpha_ab) ** (1.0 / gamma)
    m_cd = y * (prelec(p * r, alpha_cd) / prelec(r, alpha_cd)) ** (1.0 / gamma)
    return m_ab, m_cd


def prelec_sign_probability(
    p: float, r: float, gamma: float, delta: float, n: int, stream, law: Optional[NoiseSpec] = None
) -> SignEstimate:
    """Estimate Pr(m_CD > m_AB), ties counted 1/2, with independent alpha draws per task."""
    _check_prelec_args(p, r, delta)
    law = Uniform(1.0 - delta, 1.0 + delta) if law is None else law
    s = as_stream(stream)
    m_ab, m_cd = prelec_valuations(p, r, gamma, law.sample(s.child(0), n), law.sample(s.child(1), n))
    score = 1.0 - sign_scores(ValuationSampleSet(m_ab, m_cd))
    return SignEstimate(float(score.mean()), float(score.std(ddof=1) / math.sqrt(n)), n)


def prelec_sign_exact(p: float, r: float, delta: float, grid: int = 4001) -> float:
    """Pr(m_CD > m_AB) for uniform alpha by a midpoint product grid.

    The event does not depend on gamma (a positive power of both sides).
    """
    _check_prelec_args(p, r, delta)
    alpha = 1.0 - delta + 2.0 * delta * (np.arange(grid) + 0.5) / grid
    log_ab = np.log(prelec(p, alpha))
    log_cd = np.sort(np.log(prelec(p * r, alpha)) - np.log(prelec(r, alpha)))
    above = grid - np.searchsorted(log_cd, log_ab, side="right")
    return float(above.sum()) / grid**2
