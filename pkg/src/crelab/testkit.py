"""Paired-choice and valuation tests for the common ratio effect.

Three geometries classify a frequency pair ``(rho_ab, rho_cd)``:

* weak:   compare the two frequencies directly,
* strong: compare each frequency against 1/2,
* band:   the |rho_ab - rho_cd| <= 1/2 expected-utility band with CRE/RCRE
          corner triangles (the "unrestricted noise" region).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import stats

from .exceptions import DataError

HALF = 0.5


class Verdict(str, enum.Enum):
    EU = "EU"
    CRE = "CRE"
    RCRE = "RCRE"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class FrequencyPair:
    rho_ab: float
    rho_cd: float
    k_ab: Optional[int] = None
    n_ab: Optional[int] = None
    k_cd: Optional[int] = None
    n_cd: Optional[int] = None

    def __post_init__(self):
        for name in ("rho_ab", "rho_cd"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DataError(f"{name} must lie in [0, 1], got {v}")
        counts = (self.k_ab, self.n_ab, self.k_cd, self.n_cd)
        if any(c is not None for c in counts):
            if any(c is None for c in counts):
                raise DataError("counts must be given all together")
            for k, n in ((self.k_ab, self.n_ab), (self.k_cd, self.n_cd)):
                if n < 1 or not 0 <= k <= n:
                    raise DataError(f"invalid count {k}/{n}")

    @classmethod
    def from_counts(cls, k_ab: int, n_ab: int, k_cd: int, n_cd: int) -> "FrequencyPair":
        if n_ab < 1 or n_cd < 1:
            raise DataError("sample sizes must be at least 1")
        return cls(k_ab / n_ab, k_cd / n_cd, int(k_ab), int(n_ab), int(k_cd), int(n_cd))

    @property
    def has_counts(self) -> bool:
        return self.n_ab is not None

    def se(self) -> tuple[float, float]:
        """Binomial standard errors of the two frequencies (needs counts)."""
        if not self.has_counts:
            raise DataError("standard errors need counts")
        return (
            math.sqrt(self.rho_ab * (1 - self.rho_ab) / self.n_ab),
            math.sqrt(self.rho_cd * (1 - self.rho_cd) / self.n_cd),
        )


# --------------------------------------------------------------------------
# Point classifications
# --------------------------------------------------------------------------


def weak_test(fp: FrequencyPair, tol: float = 0.0) -> Verdict:
    diff = fp.rho_ab - fp.rho_cd
    if diff > tol:
        return Verdict.CRE
    if -diff > tol:
        return Verdict.RCRE
    return Verdict.EU


def _strong(ab: float, cd: float) -> Verdict:
    if (ab >= HALF and cd < HALF) or (ab > HALF and cd <= HALF):
        return Verdict.CRE
    if (ab < HALF and cd >= HALF) or (ab <= HALF and cd > HALF):
        return Verdict.RCRE
    return Verdict.EU


def strong_test(fp: FrequencyPair) -> Verdict:
    return _strong(fp.rho_ab, fp.rho_cd)


def mnoss_region_test(fp: FrequencyPair) -> Verdict:
    # closed band: points on the triangle edges stay EU
    if fp.rho_cd < fp.rho_ab - HALF:
        return Verdict.CRE
    if fp.rho_cd > fp.rho_ab + HALF:
        return Verdict.RCRE
    return Verdict.EU


def classify_arrays(rho_ab, rho_cd, test: str = "strong", tol: float = 0.0) -> np.ndarray:
    """Vectorised verdicts as an object array of ``Verdict`` labels."""
    ab = np.asarray(rho_ab, dtype=float)
    cd = np.asarray(rho_cd, dtype=float)
    if test == "weak":
        cre, rcre = ab - cd > tol, cd - ab > tol
    elif test == "strong":
        cre = ((ab >= HALF) & (cd < HALF)) | ((ab > HALF) & (cd <= HALF))
        rcre = ((ab < HALF) & (cd >= HALF)) | ((ab <= HALF) & (cd > HALF))
    elif test == "mnoss":
        cre, rcre = cd < ab - HALF, cd > ab + HALF
    else:
        raise ValueError(f"unknown test {test!r}")
    out = np.empty(ab.shape, dtype=object)
    out.fill(Verdict.EU)  # np.full would coerce the members to plain str
    out[cre] = Verdict.CRE
    out[rcre] = Verdict.RCRE
    return out


# --------------------------------------------------------------------------
# Sampling-error aware strong test
# --------------------------------------------------------------------------


def proportion_ci(k: int, n: int, level: float = 0.95, method: str = "wald") -> tuple[float, float]:
    if n < 1:
        raise DataError("sample size must be at least 1")
    if not 0 <= k <= n:
        raise DataError(f"invalid count {k}/{n}")
    if method == "wald":
        phat = k / n
        z = stats.norm.ppf(0.5 + level / 2.0)
        half = z * math.sqrt(phat * (1 - phat) / n)
        return max(0.0, phat - half), min(1.0, phat + half)
    if method == "clopper-pearson":
        alpha = 1.0 - level
        lo = 0.0 if k == 0 else stats.beta.ppf(alpha / 2, k, n - k + 1)
        hi = 1.0 if k == n else stats.beta.ppf(1 - alpha / 2, k + 1, n - k)
        return float(lo), float(hi)
    raise ValueError(f"unknown interval method {method!r}")


def _box_hits(lo_ab, hi_ab, lo_cd, hi_cd) -> set:
    """Verdicts of the strong test reachable inside the CI box."""
    flags = set()
    # CRE region: {ab >= 1/2, cd < 1/2} U {ab > 1/2, cd <= 1/2}
    if (hi_ab >= HALF and lo_cd < HALF) or (hi_ab > HALF and lo_cd <= HALF):
        flags.add(Verdict.CRE)
    if (hi_cd >= HALF and lo_ab < HALF) or (hi_cd > HALF and lo_ab <= HALF):
        flags.add(Verdict.RCRE)
    # EU region: both above, both below, or the centre point
    both_hi = hi_ab > HALF and hi_cd > HALF
    both_lo = lo_ab < HALF and lo_cd < HALF
    centre = lo_ab <= HALF <= hi_ab and lo_cd <= HALF <= hi_cd
    if both_hi or both_lo or centre:
        flags.add(Verdict.EU)
    return flags


def ci_strong_consistency(
    k_ab: int, n_ab: int, k_cd: int, n_cd: int, level: float = 0.95, method: str = "wald"
) -> frozenset:
    """Strong-test verdicts consistent with per-frequency confidence intervals."""
    lo_ab, hi_ab = proportion_ci(k_ab, n_ab, level, method)
    lo_cd, hi_cd = proportion_ci(k_cd, n_cd, level, method)
    return frozenset(_box_hits(lo_ab, hi_ab, lo_cd, hi_cd))


# --------------------------------------------------------------------------
# Valuation tests
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ValuationSampleSet:
    m_ab: np.ndarray
    m_cd: np.ndarray

    def __post_init__(self):
        m_ab = np.asarray(self.m_ab, dtype=float)
        m_cd = np.asarray(self.m_cd, dtype=float)
        if m_ab.shape != m_cd.shape or m_ab.ndim != 1:
            raise DataError("valuation arrays must be 1-d and of equal length")
        object.__setattr__(self, "m_ab", m_ab)
        object.__setattr__(self, "m_cd", m_cd)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> "ValuationSampleSet":
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    def __len__(self):
        return len(self.m_ab)


class TestOutcome(NamedTuple):
    estimate: float
    se: float
    verdict: Verdict


def _check_nonempty(vs: ValuationSampleSet):
    if len(vs) == 0:
        raise DataError("valuation sample set is empty")


def sign_scores(vs: ValuationSampleSet) -> np.ndarray:
    """1 if m_ab > m_cd, 0 if less, 1/2 on ties."""
    return np.where(vs.m_ab > vs.m_cd, 1.0, np.where(vs.m_ab < vs.m_cd, 0.0, 0.5))


def sign_test(vs: ValuationSampleSet, z: float = 3.0) -> TestOutcome:
    """Estimate Pr(m_ab > m_cd); CRE when it is significantly below 1/2."""
    _check_nonempty(vs)
    s = sign_scores(vs)
    est = float(s.mean())
    se = float(s.std(ddof=1) / math.sqrt(len(s))) if len(s) > 1 else 0.0
    if est < HALF - z * se:
        verdict = Verdict.CRE
    elif est > HALF + z * se:
        verdict = Verdict.RCRE
    else:
        verdict = Verdict.EU
    return TestOutcome(est, se, verdict)


def mean_test(vs: ValuationSampleSet, z: float = 3.0) -> TestOutcome:
    """Paired mean difference mean(m_cd) - mean(m_ab); CRE when significantly positive."""
    _check_nonempty(vs)
    d = vs.m_cd - vs.m_ab
    est = float(d.mean())
    se = float(d.std(ddof=1) / math.sqrt(len(d))) if len(d) > 1 else 0.0
    if est > z * se:
        verdict = Verdict.CRE
    elif est < -z * se:
        verdict = Verdict.RCRE
    else:
        verdict = Verdict.EU
    return TestOutcome(est, se, verdict)
