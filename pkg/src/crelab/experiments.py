"""Reproduction harnesses: mean-bound rectangles, the prospect-model choice
simulation, the deterministic reversal sweep and the proposition suites."""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, stats

from . import models, valuation
from .core import CRRAUtility, Lottery, PowerUtility, TKWeighting, TwoPointUtility, make_problem
from .exceptions import UsageError
from .noise import DiscreteSign, Scaled, SplitUniform, TwoPointSym, Uniform, uniform_with_variance
from .rng import RngStream, rng_derive
from .testkit import (
    FrequencyPair,
    ValuationSampleSet,
    Verdict,
    classify_arrays,
    mnoss_region_test,
    sign_scores,
    strong_test,
)

# --------------------------------------------------------------------------
# Figure 1: mean-bound rectangles
# --------------------------------------------------------------------------


def fig1_data(y: float = 30.0, p: float = 0.8, gammas=(0.25, 0.5, 0.8, 1.0)) -> list:
    return [valuation.mean_bounds(g, y, p) for g in gammas]


# --------------------------------------------------------------------------
# Figure 3: prospect-model choice frequencies
# --------------------------------------------------------------------------

FIG3_STREAM = 3


@dataclass(frozen=True)
class FigThreeConfig:
    gamma: float = 0.8
    sigma: float = 0.7
    x: float = 12.0
    y: float = 30.0
    p: float = 0.5
    r: float = 0.2
    noise_halfwidth: float = 1.8
    choices: int = 100
    replications: int = 10000
    seed: int = 0
    threads: int = 1
    chunk: int = 1000


@dataclass
class RegionCounts:
    replications: int
    strong: dict
    mnoss: dict
    k_ab: np.ndarray
    k_cd: np.ndarray
    choices: int
    analytic: tuple

    @property
    def rho_ab(self) -> np.ndarray:
        return self.k_ab / self.choices

    @property
    def rho_cd(self) -> np.ndarray:
        return self.k_cd / self.choices

    def pairs(self) -> list:
        return [
            FrequencyPair.from_counts(int(a), self.choices, int(c), self.choices)
            for a, c in zip(self.k_ab, self.k_cd)
        ]

    def grand_means(self) -> tuple[float, float, float, float]:
        """Grand means of both frequencies and their standard errors."""
        total = self.replications * self.choices
        m_ab = self.k_ab.sum() / total
        m_cd = self.k_cd.sum() / total
        return m_ab, m_cd, math.sqrt(m_ab * (1 - m_ab) / total), math.sqrt(m_cd * (1 - m_cd) / total)

    def summary(self) -> dict:
        m_ab, m_cd, se_ab, se_cd = self.grand_means()
        return {
            "replications": self.replications,
            "choices": self.choices,
            "strong": self.strong,
            "mnoss": self.mnoss,
            "mean_rho_ab": m_ab,
            "mean_rho_cd": m_cd,
            "se_rho_ab": se_ab,
            "se_rho_cd": se_cd,
            "analytic_rho_ab": self.analytic[0],
            "analytic_rho_cd": self.analytic[1],
        }


def _count(verdicts) -> dict:
    return {v.value: int(np.count_nonzero(verdicts == v)) for v in Verdict}


def run_fig3(cfg: FigThreeConfig = FigThreeConfig()) -> RegionCounts:
    """Simulate replications of paired choice frequencies and classify them.

    Replication i always reads the same stream positions, so the counts do
    not depend on ``threads`` or ``chunk``.
    """
    prob = make_problem(cfg.x, cfg.y, cfg.p, cfg.r)
    stream = rng_derive(cfg.seed, FIG3_STREAM)
    starts = list(range(0, cfg.replications, cfg.chunk))

    def work(start):
        reps = min(cfg.chunk, cfg.replications - start)
        return models.prospect_frequency_batch(
            cfg.gamma, cfg.sigma, prob, cfg.noise_halfwidth, cfg.choices, reps, stream, first_rep=start
        )

    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    k_ab = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0, int)
    k_cd = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0, int)
    ab, cd = k_ab / cfg.choices, k_cd / cfg.choices
    analytic = models.prospect_choice_probs(cfg.gamma, cfg.sigma, prob, cfg.noise_halfwidth)
    return RegionCounts(
        cfg.replications,
        _count(classify_arrays(ab, cd, "strong")),
        _count(classify_arrays(ab, cd, "mnoss")),
        k_ab,
        k_cd,
        cfg.choices,
        analytic,
    )


def fig3_strong_cre_probability(cfg: FigThreeConfig = FigThreeConfig()) -> float:
    """Exact probability that one replication lands in the strong CRE region."""
    q_ab, q_cd = models.prospect_choice_probs(
        cfg.gamma, cfg.sigma, make_problem(cfg.x, cfg.y, cfg.p, cfg.r), cfg.noise_halfwidth
    )
    n = cfg.choices
    k = np.arange(n + 1)
    f_ab = stats.binom.pmf(k, n, q_ab)
    f_cd = stats.binom.pmf(k, n, q_cd)
    ab, cd = np.meshgrid(k / n, k / n, indexing="ij")
    cre = classify_arrays(ab, cd, "strong") == Verdict.CRE
    return float(np.sum(np.outer(f_ab, f_cd)[cre]))


# --------------------------------------------------------------------------
# Deterministic reversal sweep
# --------------------------------------------------------------------------

_TENTHS = tuple(round(0.1 * i, 1) for i in range(1, 10))


@dataclass(frozen=True)
class SweepConfig:
    gamma: float = 0.8
    sigma: float = 0.8
    prizes: tuple = tuple(range(1, 11))
    probs: tuple = _TENTHS
    ratios: tuple = _TENTHS


@dataclass
class SweepSummary:
    total: int
    cre: int
    combos: np.ndarray  # columns x, y, p, r, is_cre

    @property
    def cre_rows(self) -> np.ndarray:
        return self.combos[self.combos[:, 4] == 1]

    @property
    def share(self) -> float:
        return self.cre / self.total

    def conditional(self) -> dict:
        rows = self.cre_rows
        if len(rows) == 0:
            return {}
        ratio = rows[:, 0] / (rows[:, 2] * rows[:, 1])
        return {
            "mean_p": float(rows[:, 2].mean()),
            "mean_r": float(rows[:, 3].mean()),
            "median_p": float(np.median(rows[:, 2])),
            "median_r": float(np.median(rows[:, 3])),
            "min_x_over_py": float(ratio.min()),
            "max_x_over_py": float(ratio.max()),
        }

    def summary(self) -> dict:
        return {"total": self.total, "cre": self.cre, "share": self.share, **self.conditional()}


def run_sweep(cfg: SweepConfig = SweepConfig()) -> SweepSummary:
    """CRE iff u(x) > w(p) u(y) and w(r) u(x) < w(rp) u(y), strict inequalities."""
    u = PowerUtility(cfg.gamma)
    w = TKWeighting(cfg.sigma)
    rows = []
    for x in cfg.prizes:
        for y in cfg.prizes:
            if not x < y:
                continue
            ux, uy = u(x), u(y)
            for p in cfg.probs:
                for r in cfg.ratios:
                    cre = ux > w(p) * uy and w(r) * ux < w(r * p) * uy
                    rows.append((x, y, p, r, int(cre)))
    combos = np.array(rows, dtype=float)
    return SweepSummary(len(rows), int(combos[:, 4].sum()), combos)


# --------------------------------------------------------------------------
# Proposition suites
# --------------------------------------------------------------------------

MARGIN = 0.02
N_CONFIGS = 50


@dataclass
class Assertion:
    name: str
    claim: str
    passed: bool
    estimate: Optional[float] = None
    se: Optional[float] = None
    tolerance: str = ""


@dataclass
class SuiteReport:
    suite_id: str
    seed: int
    budget: int
    margin: float = MARGIN
    assertions: list = field(default_factory=list)
    excluded: int = 0

    @property
    def passed(self) -> bool:
        return bool(self.assertions) and all(a.passed for a in self.assertions)

    def add(self, name, claim, passed, estimate=None, se=None, tolerance=""):
        self.assertions.append(
            Assertion(name, claim, bool(passed), None if estimate is None else float(estimate),
                      None if se is None else float(se), tolerance)
        )

    def to_dict(self) -> dict:
        return {
            "suite": self.suite_id,
            "seed": self.seed,
            "budget": self.budget,
            "margin": self.margin,
            "passed": self.passed,
            "excluded_configs": self.excluded,
            "assertions": [asdict(a) for a in self.assertions],
        }


class _Quota:
    """Config indices until ``n`` configs survive the margin exclusion."""

    def __init__(self, n: int = N_CONFIGS, max_draws: int = 20 * N_CONFIGS):
        self.n, self.done, self.max_draws = n, 0, max_draws

    def __iter__(self):
        i = 0
        while self.done < self.n:
            if i >= self.max_draws:
                raise RuntimeError(f"only {self.done} of {self.n} configs cleared the margin")
            yield i
            i += 1

    def hit(self):
        self.done += 1


def _quadrant_agrees(ab: float, cd: float) -> bool:
    return (ab >= 0.5) == (cd >= 0.5)


def _near_half(rep: "SuiteReport", *rhos) -> bool:
    return any(abs(v - 0.5) < rep.margin for v in rhos)


def _suite_linearity(rep: SuiteReport, s: RngStream, rng: np.random.Generator):
    u = TwoPointUtility({10: 8, 30: 12})
    m = models.FechnerModel(u, models.TriangularDiff(2.0))
    l1, l2 = Lottery(10, 1.0), Lottery(30, 0.9)
    m1, m2 = Lottery(10, 0.25), Lottery(30, 0.225)
    exact = models.fechner_choice_prob_exact(m, m1, m2)
    rep.add("mixture_closed_form", "rho((10,.25),(30,.225)) = 169/800", exact == models.Fraction(169, 800),
            float(exact), 0.0, "exact rational")
    base = models.fechner_choice_prob_exact(m, l1, l2)
    rep.add("original_closed_form", "rho((10,1),(30,.9)) = 0", base == 0, float(base), 0.0, "exact rational")
    n = max(rep.budget, 10**6)
    k, _ = models.iareu_choice_sim(u, Uniform(-1, 1), m1, m2, n, s.child(0))
    est, se = k / n, math.sqrt(0.21125 * 0.78875 / n)
    rep.add("mixture_monte_carlo", "simulated frequency matches 169/800", abs(est - 0.21125) <= 3 * se, est, se, "3 se")

    violations = linear_fail = 0
    quota = _Quota()
    for i in quota:
        prob, gamma = _random_problem(rng), rng.uniform(0.3, 1.0)
        uu = CRRAUtility(gamma)
        scale = rng.uniform(0.2, 1.5) * max(float(uu(prob.y)), 1e-9)
        law = [Uniform(-scale, scale), TwoPointSym(scale), SplitUniform(0.0, scale, 0.5 * scale)][i % 3]
        mdl = models.REUModel(uu, law)
        pilot = models.reu_choice_pair(mdl, prob, rep.budget, s.child(1000 + i))
        if _near_half(rep, pilot.rho_ab, pilot.rho_cd):
            rep.excluded += 1
            continue
        quota.hit()
        fp = models.reu_choice_pair(mdl, prob, rep.budget, s.child(i))
        pooled = math.sqrt(2 * 0.25 / rep.budget)
        linear_fail += abs(fp.rho_ab - fp.rho_cd) >= 4 * pooled
        violations += not _quadrant_agrees(fp.rho_ab, fp.rho_cd)
    rep.add("reu_linearity", "random expected utility gives rho(A,B) = rho(C,D)", linear_fail == 0, linear_fail,
            None, f"4 pooled se, {quota.n} evaluated configs")
    rep.add("reu_quadrant", "random expected utility passes the strong test", violations == 0, violations, None,
            f"margin {rep.margin}")


def _random_problem(rng: np.random.Generator):
    x = float(rng.integers(1, 50))
    y = x * float(rng.uniform(1.1, 4.0))
    return make_problem(x, y, float(rng.uniform(0.15, 0.95)), float(rng.uniform(0.1, 0.9)))


def _suite_weak_eu(rep: SuiteReport, s: RngStream, rng: np.random.Generator):
    kinds = ("uniform", "triangular", "logistic", "probit")
    violations = 0
    quota = _Quota()
    for i in quota:
        prob = _random_problem(rng)
        u = CRRAUtility(rng.uniform(0.2, 1.0))
        scale = rng.uniform(0.05, 2.0) * float(u(prob.y))
        k1, k2 = rng.uniform(0.1, 5.0, size=2)
        G = lambda a, b, k1=k1, k2=k2: k1 + k2 * (a.prob + b.prob) ** 2
        mdl = models.WeakEUModel(u, models.FechnerLink(kinds[i % 4], scale), G)
        ab = models.weakeu_choice_prob(mdl, prob.A, prob.B)
        cd = models.weakeu_choice_prob(mdl, prob.C, prob.D)
        if _near_half(rep, ab, cd):
            rep.excluded += 1
            continue
        quota.hit()
        violations += not _quadrant_agrees(ab, cd)
    rep.add("weak_eu_quadrant", "weak expected utility passes the strong test", violations == 0, violations, None,
            f"closed form, {quota.n} evaluated configs, margin {rep.margin}")


def _suite_gamma_median(rep: SuiteReport, s: RngStream, rng: np.random.Generator):
    violations = 0
    quota = _Quota()
    for i in quota:
        prob = _random_problem(rng)
        u = CRRAUtility(rng.uniform(0.2, 1.0))
        base = prob.p * float(u(prob.y))
        median = rng.uniform(-0.3, 0.3) * base
        law_ab = SplitUniform(median, *(rng.uniform(0.05, 0.6, size=2) * base))
        law_cd = SplitUniform(median, *(rng.uniform(0.05, 0.6, size=2) * base))
        gm = valuation.GammaModel(u, prob.y, prob.p, prob.r, law_ab, law_cd, cd_over_r=False)
        ab, cd = valuation.gamma_choice_probs(gm, prob.x)
        if _near_half(rep, ab, cd):
            rep.excluded += 1
            continue
        quota.hit()
        violations += not _quadrant_agrees(ab, cd)
    rep.add("common_median_quadrant", "errors with a common median give an unbiased strong test", violations == 0,
            violations, None, f"closed form, {quota.n} evaluated configs, margin {rep.margin}")


def _perception_model(case: int, i: int, u, scale: float, rng: np.random.Generator):
    sym = lambda k: [Uniform(-k, k), TwoPointSym(k)][int(rng.integers(2))]
    eps_one = ("zero", "same")[int(rng.integers(2))]
    p_law, x_law = sym(rng.uniform(0.02, 0.2)), sym(rng.uniform(0.05, 0.5) * scale)
    if case == 1:
        if i % 2:
            return models.PerceptionModel(u, p_law, x_law, sym(0.5 * scale), "linear", eps_one,
                                          lam=float(rng.uniform(0.02, 0.3)))
        return models.PerceptionModel(u, p_law, x_law, sym(0.5 * scale), "independent", eps_one)
    if case == 2:
        star = sym(0.5 * scale) if i % 2 else models.Degenerate(float(rng.uniform(-1, 1)))
        consts = (float(rng.uniform(-2, 2)), float(rng.uniform(0, 1)), float(rng.uniform(-1, 1)))
        return models.PerceptionModel(u, p_law, x_law, star, "product", eps_one, product=consts)
    center = float(rng.uniform(-1, 1)) * scale
    w = float(rng.uniform(0.1, 0.6)) * scale
    return models.PerceptionModel(u, p_law, x_law, Uniform(center - w, center + w), "shared", eps_one)


def _suite_perception(rep: SuiteReport, s: RngStream, rng: np.random.Generator):
    for case in (1, 2, 3):
        violations = 0
        quota = _Quota()
        for i in quota:
            prob = _random_problem(rng)
            u = CRRAUtility(rng.uniform(0.3, 1.0))
            scale = abs(float(u(prob.x)) - prob.p * float(u(prob.y))) + 0.05
            mdl = _perception_model(case, i, u, scale, rng)
            pilot = models.perception_choice_pair(mdl, prob, rep.budget, s.child(10000 * case + 1000 + i))
            if _near_half(rep, pilot.rho_ab, pilot.rho_cd):
                rep.excluded += 1
                continue
            quota.hit()
            fp = models.perception_choice_pair(mdl, prob, rep.budget, s.child(10000 * case + i))
            violations += not _quadrant_agrees(fp.rho_ab, fp.rho_cd)
        rep.add(f"perception_case_{case}_quadrant", f"error structure {case} gives an unbiased strong test",
                violations == 0, violations, None, f"{quota.n} evaluated configs, pilot margin {rep.margin}")


def _suite_residual_gap(rep: SuiteReport, s: RngStream, rng: np.random.Generator):
    u, y, p, r = CRRAUtility(0.5), 30.0, 0.8, 0.5
    n = max(rep.budget, 10**6)
    specs = [
        ("iid_probability_errors", valuation.MultiplicativeModel(u, Uniform(-0.25, 0.25))),
        ("iid_with_prize_errors", valuation.MultiplicativeModel(u, TwoPointSym(0.2), Uniform(-1, 1))),
        ("shared_probability_error", valuation.MultiplicativeModel(u, Uniform(-0.25, 0.25), Uniform(-1, 1), "2")),
    ]
    for k, (name, mm) in enumerate(specs):
        rm = valuation.residual_moments(mm, y, p, r, n, s.child(k))
        rep.add(name, "symmetric perception errors give E[eps_AB] != E[eps_CD]",
                abs(rm.gap) > 3 * rm.se_diff, rm.gap, rm.se_diff, "3 se")


def _suite_residual_cases(rep: SuiteReport, s: RngStream, rng: np.random.Generator):
    u, y, p, r = CRRAUtility(0.5), 30.0, 0.8, 0.5
    n = max(rep.budget, 10**6)
    law = TwoPointSym(0.25)
    mm = lambda case, lam=None, one="zero": valuation.MultiplicativeModel(u, law, Uniform(-1, 1), case, one, lam)
    rm = valuation.residual_moments(mm("1"), y, p, r, n, s.child(0))
    rep.add("case_1", "independent errors: E[eps_AB] < E[eps_CD]", rm.gap > 3 * rm.se_diff, rm.gap, rm.se_diff, "3 se")
    rm = valuation.residual_moments(mm("2"), y, p, r, n, s.child(1))
    rep.add("case_2", "shared probability error: E[eps_AB] > E[eps_CD]", -rm.gap > 3 * rm.se_diff, rm.gap,
            rm.se_diff, "3 se")
    for k, case in enumerate(("3a", "3b"), start=2):
        rm = valuation.residual_moments(mm(case, 0.15), y, p, r, n, s.child(k))
        ok = rm.e_ab > 3 * rm.se_ab and rm.e_cd < -3 * rm.se_cd
        rep.add(f"case_{case}", "linearly dependent errors: E[eps_AB] > 0 > E[eps_CD]", ok,
                min(rm.e_ab / rm.se_ab, -rm.e_cd / rm.se_cd), None, "3 se on each side")


def mean_bias_setup(exponent: float, r: float = 0.5, p: float = 0.8, y: float = 100.0):
    """Uniform lottery errors scaled so the CD argument of h stays positive."""
    u = PowerUtility(exponent)
    base = p * float(u(y))
    half = 0.45 * r * base
    return u, p, y, r, Uniform(-half, half)


def _suite_mean_bias(rep: SuiteReport, s: RngStream, rng: np.random.Generator):
    n = max(rep.budget, 10**6)
    for k, g in enumerate((0.5, 0.7, 1.5, 2.0)):
        u, p, y, r, law = mean_bias_setup(g)
        mb = valuation.mean_bias_direction(u, p, y, r, law, n, s.child(k))
        want = "positive" if g < 1 else "negative"
        ok = mb.delta > 3 * mb.se if g < 1 else mb.delta < -3 * mb.se
        rep.add(f"exponent_{g}", f"E[m_CD - m_AB] is {want}", ok, mb.delta, mb.se, "3 se")
    mb = valuation.mean_bias_direction(PowerUtility(0.5), 0.8, 100.0, 0.5, uniform_with_variance(0.5), n, s.child(9))
    rep.add("sqrt_example", "E[dm] = (1 - r^2)/r^2 Var[eps_AB] = 3", abs(mb.delta - 3.0) <= 3 * mb.se, mb.delta,
            mb.se, "3 se")
    exact = valuation.mean_bias_exact(PowerUtility(2.0), 0.2, 10.0, 0.2, DiscreteSign())
    rep.add("square_example", "E[dm] = -0.0734 by enumeration", abs(exact + 0.0734) <= 5e-4, exact, 0.0, "5e-4")


def _suite_theta_bias(rep: SuiteReport, s: RngStream, rng: np.random.Generator):
    u = CRRAUtility(0.5)
    k = 0
    for theta in (0.5, 0.8):
        for p, r in ((0.3, 0.3), (0.6, 0.7)):
            for direction in ("CD_over_AB", "AB_over_CD"):
                tc = valuation.theta_bias_construction(theta, p, r, direction)
                vs = valuation.theta_bias_sample(tc, 30.0, u, rep.budget, s.child(k))
                k += 1
                hit = vs.m_cd > vs.m_ab if direction == "CD_over_AB" else vs.m_ab > vs.m_cd
                est = float(hit.mean())
                se = math.sqrt(est * (1 - est) / rep.budget)
                rep.add(f"theta_{theta}_p{p}_r{r}_{direction}", f"Pr({direction}) > theta",
                        est > theta + 3 * se, est, se, "3 se")


def _suite_prelec(rep: SuiteReport, s: RngStream, rng: np.random.Generator):
    n = max(rep.budget, 10**6)
    delta = 0.5
    est = valuation.prelec_sign_probability(0.8, 0.5, 1.0, delta, n, s.child(0))
    rep.add("p_above_inverse_e", "Pr(m_CD > m_AB) > 1/2 when p > 1/e", est.estimate > 0.5 + 3 * est.se,
            est.estimate, est.se, "3 se")
    est = valuation.prelec_sign_probability(0.2, 0.5, 1.0, delta, n, s.child(1))
    below = 1.0 - est.estimate
    rep.add("p_below_inverse_e", "Pr(m_CD < m_AB) < 1/2 when p < 1/e", below < 0.5 - 3 * est.se, below, est.se, "3 se")

    violations = 0
    quota = _Quota()
    for i in quota:
        prob = _random_problem(rng)
        gamma = float(rng.uniform(0.3, 1.0))
        # put the risky option near indifference so both frequencies are interior
        w_p = math.exp(-((-math.log(prob.p)) ** 1.0))
        y = prob.x * (1.0 / w_p) ** (1.0 / gamma) * float(rng.uniform(0.9, 1.1))
        prob = make_problem(prob.x, y, prob.p, prob.r)
        mdl = models.RandomPrelecModel(gamma, float(rng.uniform(0.1, 0.9)), ("uniform", "median1")[i % 2])
        ab, cd = models.random_prelec_exact(mdl, prob)
        if _near_half(rep, ab, cd):
            rep.excluded += 1
            continue
        quota.hit()
        fp = models.random_prelec_choice_pair(mdl, prob, rep.budget, s.child(100 + i))
        violations += not _quadrant_agrees(fp.rho_ab, fp.rho_cd)
    rep.add("median_one_quadrant", "median-one Prelec exponents give an unbiased strong test", violations == 0,
            violations, None, f"{quota.n} evaluated configs, margin {rep.margin}")


def _suite_mean_target(rep: SuiteReport, s: RngStream, rng: np.random.Generator):
    y, p, r = 30.0, 0.8, 0.4
    targets = mean_target_grid()
    worst = 0.0
    for z1, z2 in targets:
        mc = valuation.construct_mean_target(z1, z2, y, p, r, tol=1e-8)
        e1, e2 = mc.means
        worst = max(worst, abs(e1 - z1), abs(e2 - z2))
    rep.add("grid_targets", "every positive mean pair is attainable", worst <= 1e-8, worst, 0.0, "1e-8 analytic")
    mc = valuation.construct_mean_target(50.0, 15.0, y, p, r)
    vs = valuation.gamma_valuation_sample(mc.model(), rep.budget, s.child(0))
    ok = all(
        abs(m.mean() - z) <= 3 * m.std(ddof=1) / math.sqrt(len(m)) for m, z in ((vs.m_ab, 50.0), (vs.m_cd, 15.0))
    )
    rep.add("sampled_means", "sampled valuations reproduce the target means", ok, float(vs.m_ab.mean()), None, "3 se")
    width = valuation.mean_bounds(0.99, y, p)
    rep.add("rectangle_collapse", "rectangle width shrinks to zero as gamma -> 1", width.e_max - width.e_min < 0.3,
            width.e_max - width.e_min, 0.0, "< 0.3 at gamma 0.99")


def mean_target_grid() -> list[tuple[float, float]]:
    return [(5.0, 95.0), (95.0, 5.0), (24.0, 24.0), (50.0, 15.0), (12.3, 98.3), (1.0, 1.0), (99.0, 99.0),
            (30.0, 70.0), (70.0, 30.0), (0.5, 60.0)]


def _suite_sign_target(rep: SuiteReport, s: RngStream, rng: np.random.Generator):
    u, y, p, r, c = CRRAUtility(0.5), 30.0, 0.8, 0.4, 1.0
    checked = set()
    for k, q in enumerate((0.25, 0.5, 0.75, 0.95)):
        ce = valuation.construct_sign_target(q, c, r)
        if isinstance(ce, valuation.Independent):
            gm = valuation.GammaModel(u, y, p, r, Uniform(-c, c), Uniform(-r * c, r * c))
        else:
            gm = valuation.GammaModel(u, y, p, r, coupling=ce)
        vs = valuation.gamma_valuation_sample(gm, rep.budget, s.child(k))
        est = float(sign_scores(vs).mean())
        se = math.sqrt(q * (1 - q) / rep.budget)
        rep.add(f"q_{q}", f"Pr(m_AB > m_CD) = {q}", abs(est - q) <= 3 * se, est, se, "3 se")
        # q and 1 - q share one law, so each distinct construction is tested once
        if isinstance(ce, valuation.CoupledErrorConstruction) and ce.d not in checked:
            x, _ = valuation.coupled_xy(ce, rep.budget, s.child(10 + len(checked)))
            checked.add(ce.d)
            pv = stats.kstest(x, stats.uniform(loc=-c, scale=2 * c).cdf).pvalue
            rep.add(f"d_{ce.d:.3g}_x_marginal", "X is uniform on [-c, c]", pv > 0.01, pv, None, "KS 1%")


def _suite_density(rep: SuiteReport, s: RngStream, rng: np.random.Generator):
    f = valuation.appendix_a_density
    rep.add("corner_values", "f(1,1) = 5/12 and f(-1,-1) = 1/12",
            math.isclose(f(1, 1), 5 / 12, abs_tol=1e-15) and math.isclose(f(-1, -1), 1 / 12, abs_tol=1e-15),
            f(1, 1), 0.0, "exact")
    g = np.linspace(-1, 1, 2001)
    z1, z2 = np.meshgrid(g, g, indexing="ij")
    vals = f(z1, z2)
    rep.add("minimum", "density minimum is 1/12", math.isclose(vals.min(), 1 / 12, abs_tol=1e-12), vals.min(), 0.0,
            "1e-12")
    mass = integrate.simpson(integrate.simpson(vals, x=g, axis=1), x=g)
    rep.add("mass", "density integrates to one", abs(mass - 1) <= 1e-6, mass, 0.0, "1e-6")
    a, b = valuation.appendix_a_sample(rep.budget, s.child(0))
    for name, m in (("ab", a), ("cd", b)):
        pv = stats.kstest(m, stats.uniform(loc=-1, scale=2).cdf).pvalue
        rep.add(f"marginal_{name}", "marginal is uniform on [-1, 1]", pv > 0.01, pv, None, "KS 1%")
    rep.add("central_asymmetry", "f(z1, z2) != f(-z1, -z2)", f(1, 1) != f(-1, -1), f(1, 1) - f(-1, -1), 0.0, "exact")


SUITES: dict[str, Callable] = {
    "P1-mean": _suite_mean_target,
    "P1-sign": _suite_sign_target,
    "P-linearity": _suite_linearity,
    "P2-weakEU": _suite_weak_eu,
    "P3-gamma-median": _suite_gamma_median,
    "P4-perception": _suite_perception,
    "P5-residual-gap": _suite_residual_gap,
    "P9-meanbias": _suite_mean_bias,
    "P8-thetabias": _suite_theta_bias,
    "P10-residual-cases": _suite_residual_cases,
    "P11-prelec": _suite_prelec,
    "PA-density": _suite_density,
}


def run_prop_suite(suite_id: str, seed: int = 0, budget: int = 10**5, margin: float = MARGIN) -> SuiteReport:
    """Run one proposition suite; quadrant checks skip configs with |rho - 1/2| < margin."""
    if suite_id not in SUITES:
        raise UsageError(f"unknown suite {suite_id!r}; choose from {', '.join(SUITES)}")
    if budget < 10**5:
        raise UsageError("budget must be at least 1e5 samples per assertion")
    stream_id = zlib.crc32(suite_id.encode())
    rep = SuiteReport(suite_id, seed, budget, margin)
    SUITES[suite_id](rep, rng_derive(seed, stream_id), rng_derive(seed, stream_id).child(99).generator())
    if not rep.assertions:
        raise RuntimeError(f"suite {suite_id} made no assertions")
    return rep
