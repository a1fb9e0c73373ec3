"""Upper and lower bounds on the misidentification error rate.

Every bound is returned on the rate scale ``(1/T) ln P(I_T != a*)``, so it is
a nonpositive real or ``-inf``. Upper bounds (successive rejects) use the weak
constrained infima through :func:`pair_rate`; lower bounds use strict ones.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from .dist_model import (
    BanditProblem,
    Bernoulli,
    Distribution,
    FiniteSupport,
    Gaussian,
    check_same_model,
    is_exp_family,
    kl_divergence,
)
from .info_geometry import gap_lower_bounds, linf, pair_rate
from .optimize import bisect_sign, golden_min
from .strategies import overline_ln

# right end of [mu_(j), mu_(j-1)) is approached at this fraction of mu* - mu_(K)
HALF_OPEN_OFFSET = 1e-9


def _neg(rate: float) -> float:
    return -rate if rate != 0.0 else 0.0


@dataclass(frozen=True)
class UpperBound:
    value: float
    ordering: tuple       # sigma_1 = best arm, then arms by increasing f
    f_values: tuple       # f(nu_a, nu*) per arm index
    argmin_rank: Optional[int]


def ub_cor3(problem: BanditProblem, f_kind: str = "phi") -> UpperBound:
    """Successive-rejects rate bound -(1/ovln K) min_k f(nu_sigma_k, nu*)/k."""
    problem.require_unique_optimum()
    best = problem.best
    f_values = []
    for a, d in enumerate(problem.arms):
        if a == problem.best_arm:
            f_values.append(0.0)
        elif f_kind == "phi":
            f_values.append(pair_rate(d, best).value)
        elif f_kind == "gap_squared":
            f_values.append(gap_lower_bounds(d, best)[1])
        else:
            raise ValueError(f"f_kind must be 'phi' or 'gap_squared', got {f_kind!r}")
    others = sorted((a for a in range(problem.K) if a != problem.best_arm),
                    key=lambda a: (f_values[a], a))
    ordering = (problem.best_arm, *others)
    ratios = [f_values[ordering[k - 1]] / k for k in range(2, problem.K + 1)]
    smallest = min(ratios)
    argmin = ratios.index(smallest) + 2 if math.isfinite(smallest) else None
    value = _neg(smallest / float(overline_ln(problem.K)))
    return UpperBound(value, ordering, tuple(f_values), argmin)


def lb_thm7(problem: BanditProblem) -> float:
    """-min_k L_inf^<(mu_(k), nu*)/k, for strategies balanced against the worst arm."""
    problem.require_generic()
    best = problem.best
    return _neg(min(linf(best, problem.ranked_mean(k), "below", strict=True).value / k
                    for k in range(2, problem.K + 1)))


@dataclass(frozen=True)
class Thm12Bound:
    value: float
    k: Optional[int]
    j: Optional[int]
    x: Optional[float]


def _strict_domain(worse: Distribution, better: Distribution) -> tuple[float, float]:
    """Open interval where L_inf^>(., worse) and L_inf^<(., better) are both finite."""
    if is_exp_family(worse):
        return worse.mean_interval
    return better.lower_end, worse.upper_end


def _thm12_inner(nu_k: Distribution, best: Distribution, lo: float, hi: float,
                 j: int) -> tuple[float, Optional[float]]:
    dom_lo, dom_hi = _strict_domain(nu_k, best)

    def objective(x):
        return (linf(nu_k, x, "above", strict=True).value / (j - 1)
                + linf(best, x, "below", strict=True).value / j)

    a, b = max(lo, dom_lo), min(hi, dom_hi)
    if a > b or (a == b and (a == dom_lo or a == dom_hi)):
        return math.inf, None
    x, value = golden_min(objective, a, b)
    return value, (x if math.isfinite(value) else None)


def lb_thm12(problem: BanditProblem) -> Thm12Bound:
    """-min_{2<=j<=k<=K} inf_{x in [mu_(j), mu_(j-1))} {L^>(x, nu_(k))/(j-1) + L^<(x, nu*)/j}."""
    problem.require_generic()
    best = problem.best
    offset = HALF_OPEN_OFFSET * (problem.ranked_mean(1) - problem.ranked_mean(problem.K))
    found = (math.inf, None, None, None)
    for k in range(2, problem.K + 1):
        nu_k = problem.ranked(k)
        for j in range(2, k + 1):
            lo = problem.ranked_mean(j)
            hi = problem.ranked_mean(j - 1) - offset
            value, x = _thm12_inner(nu_k, best, lo, hi, j)
            if value < found[0]:
                found = (value, k, j, x)
    return Thm12Bound(_neg(found[0]), found[1], found[2], found[3])


def crossing_value(worse: Distribution, better: Distribution) -> tuple[float, Optional[float]]:
    """inf over x in [E(worse), E(better)] of max{L^>(x, worse), L^<(x, better)}.

    The first term is nondecreasing and the second nonincreasing, so the
    infimum sits at their crossing, found by bisection.
    """
    lo, hi = worse.mean, better.mean

    def up(x):
        return linf(worse, x, "above", strict=True).value

    def down(x):
        return linf(better, x, "below", strict=True).value

    def diff(x):
        u, v = up(x), down(x)
        if math.isinf(u) and math.isinf(v):
            raise _BothInfinite
        return u - v

    try:
        a, b = bisect_sign(diff, lo, hi)
    except _BothInfinite:
        return math.inf, None
    candidates = [(max(up(x), down(x)), x) for x in (a, b)]
    value, x = min(candidates)
    return value, (x if math.isfinite(value) else None)


class _BothInfinite(Exception):
    pass


def lb_thm13(problem: BanditProblem) -> float:
    """-min_{k != a*} inf_x max{L^>(x, nu_k), L^<(x, nu*)}, valid for any consistent strategy."""
    problem.require_generic()
    best = problem.best
    return _neg(min(crossing_value(d, best)[0]
                    for a, d in enumerate(problem.arms) if a != problem.best_arm))


def two_arm_value(problem: BanditProblem) -> float:
    """K = 2 lower bound in its max-of-two-infima form."""
    if problem.K != 2:
        raise ValueError("the two-arm bound needs K = 2")
    problem.require_generic()
    worse = problem.arms[problem.worst_arm]
    return _neg(crossing_value(worse, problem.best)[0])


def lb_gap_abm10(problem: BanditProblem, c_model: float) -> float:
    """-5 C min_k gap_(k)^2 / k, for models where KL <= C (mean gap)^2."""
    if not c_model > 0:
        raise ValueError("the model constant must be positive")
    problem.require_generic()
    gaps = [problem.gaps[problem.order[k - 1]] for k in range(1, problem.K + 1)]
    return _neg(5.0 * c_model * min(gaps[k - 1] ** 2 / k for k in range(2, problem.K + 1)))


def model_constant(problem: BanditProblem) -> Optional[float]:
    """Smallest C with KL <= C gap^2 on the tightest restricted model holding the arms.

    Gaussian: 1/(2 sigma^2). Bernoulli: 1/(2p(1-p)) for B[p, 1-p] with p the
    distance of the most extreme mean to {0, 1}. Otherwise none exists.
    """
    first = problem.arms[0]
    if isinstance(first, Gaussian):
        return 1.0 / (2.0 * first.sigma2)
    if isinstance(first, Bernoulli):
        p = min(min(problem.means), 1.0 - max(problem.means))
        return 1.0 / (2.0 * p * (1.0 - p))
    return None


def bh_bounds(problem: BanditProblem, alternatives: Sequence[Optional[Distribution]],
              T: Optional[int] = None) -> float:
    """-(sum_a 1/KL(nu_a, zeta_a))^-1 - ln4/T.

    Controls the max of the error on ``problem`` and on each alternative
    instance, not the error on ``problem`` alone. ``alternatives[a]`` is
    ignored for the optimal arm; ``T=None`` drops the ln4/T term.
    """
    problem.require_unique_optimum()
    mu_star = problem.means[problem.best_arm]
    total = 0.0
    for a, d in enumerate(problem.arms):
        if a == problem.best_arm:
            continue
        zeta = alternatives[a]
        if zeta is None or not zeta.mean > mu_star:
            raise ValueError(f"alternative for arm {a} must have mean above {mu_star!r}")
        check_same_model(d, zeta)
        kl = kl_divergence(d, zeta)
        total += math.inf if kl == 0 else 1.0 / kl
    rate = 1.0 / total if total > 0 else math.inf
    return -rate - (math.log(4.0) / T if T else 0.0)


def gaussian_c_of_nu(problem: BanditProblem) -> float:
    """C(nu) = sum_{a != a*} 2 sigma^2 / gap_a^2."""
    first = problem.arms[0]
    if not isinstance(first, Gaussian):
        raise ValueError("C(nu) is defined for Gaussian problems")
    problem.require_unique_optimum()
    return sum(2.0 * first.sigma2 / g ** 2 for a, g in enumerate(problem.gaps) if a != problem.best_arm)


def gaussian_bh_value(problem: BanditProblem, T: Optional[int] = None) -> tuple[float, float]:
    """(C(nu), bound) using alternatives with means mu* + gap_k."""
    c = gaussian_c_of_nu(problem)
    mu_star = problem.means[problem.best_arm]
    sigma2 = problem.arms[0].sigma2
    alternatives = [None if a == problem.best_arm else Gaussian(mu_star + g, sigma2)
                    for a, g in enumerate(problem.gaps)]
    return c, bh_bounds(problem, alternatives, T)


def cl16_value(problem: BanditProblem) -> float:
    """-(30/ln K)(sum_{a != a*} 1/gap_a^2)^-1; an existence-only statement."""
    if problem.K < 3:
        raise ValueError("this bound needs K >= 3")
    if not all(isinstance(d, Bernoulli) for d in problem.arms):
        raise ValueError("this bound is stated for Bernoulli arms")
    if not all(0.25 <= m <= 0.75 for m in problem.means):
        raise ValueError("Bernoulli parameters must lie in [1/4, 3/4]")
    problem.require_generic()
    h = sum(1.0 / g ** 2 for a, g in enumerate(problem.gaps) if a != problem.best_arm)
    return -(30.0 / math.log(problem.K)) / h


def atom_boundary_pairs(problem: BanditProblem) -> list[int]:
    """Arms k whose upper support end is an atom equal to the best arm's lower-end atom.

    Only there do the weak and strict versions of the pairwise rate differ.
    """
    best = problem.best
    if not isinstance(best, FiniteSupport):
        return []
    return [a for a, d in enumerate(problem.arms)
            if a != problem.best_arm and d.upper_end == best.lower_end
            and d.mass_at_upper > 0 and best.mass_at_lower > 0]


def problem_digest(problem: BanditProblem) -> str:
    blob = json.dumps(problem.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class BoundReport:
    problem_digest: str
    K: int
    model: str
    generic: bool
    upper: dict = field(default_factory=dict)
    lower: dict = field(default_factory=dict)
    argmin: dict = field(default_factory=dict)
    ordering: list = field(default_factory=list)
    variants: dict = field(default_factory=dict)
    caveats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return encode_floats(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def encode_floats(obj):
    """Replace infinities by the strings "-inf"/"+inf" for JSON output."""
    if isinstance(obj, float):
        if math.isinf(obj):
            return "-inf" if obj < 0 else "+inf"
        return obj
    if isinstance(obj, dict):
        return {k: encode_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode_floats(v) for v in obj]
    return obj


def evaluate_bounds(problem: BanditProblem, c_model: Optional[float] = None,
                    T: Optional[int] = None) -> BoundReport:
    """Evaluate every bound applicable to ``problem``."""
    report = BoundReport(problem_digest(problem), problem.K, problem.model, problem.generic)
    if not problem.unique_optimum:
        report.caveats["unique_optimum"] = "several optimal arms; no bound applies"
        return report

    ub = ub_cor3(problem, "phi")
    report.upper["cor3_phi"] = ub.value
    report.ordering = list(ub.ordering)
    report.argmin["cor3_phi"] = {"k": ub.argmin_rank}
    report.variants["cor3_phi"] = "weak"
    if isinstance(problem.arms[0], (Bernoulli, FiniteSupport)):
        ub_gap = ub_cor3(problem, "gap_squared")
        report.upper["cor3_gap"] = ub_gap.value
        report.argmin["cor3_gap"] = {"k": ub_gap.argmin_rank}

    if problem.generic:
        report.lower["thm7"] = lb_thm7(problem)
        report.variants["thm7"] = "strict"
        t12 = lb_thm12(problem)
        report.lower["thm12"] = t12.value
        report.argmin["thm12"] = {"k": t12.k, "j": t12.j, "x": t12.x}
        report.variants["thm12"] = "strict"
        report.lower["thm13"] = lb_thm13(problem)
        report.variants["thm13"] = "strict"
        c = c_model if c_model is not None else model_constant(problem)
        if c is not None:
            report.lower["gap_lb_abm10"] = lb_gap_abm10(problem, c)
            report.argmin["gap_lb_abm10"] = {"C_D": c}
        if problem.K == 2:
            report.lower["two_arm"] = two_arm_value(problem)
        first = problem.arms[0]
        if isinstance(first, Gaussian):
            c_nu, bh = gaussian_bh_value(problem, T)
            report.lower["bh_value"] = bh
            report.argmin["bh_value"] = {"C_nu": c_nu, "T": T}
            report.caveats["bh_value"] = ("bounds the max of the error on this problem and on "
                                          "each alternative instance, not this error alone")
        if (isinstance(first, Bernoulli) and problem.K >= 3
                and all(0.25 <= m <= 0.75 for m in problem.means)):
            report.lower["cl16_value"] = cl16_value(problem)
            report.caveats["cl16_value"] = ("existence-only: holds for some instance along "
                                            "some budget subsequence, not for this instance")
    else:
        report.caveats["lower"] = "non-generic problem: lower bounds need distinct means"

    flagged = atom_boundary_pairs(problem)
    if flagged:
        report.caveats["atom_boundary"] = (
            f"arms {flagged}: support ends meet at a shared atom; weak and strict "
            "pairwise rates differ, so upper and lower bounds are not compared")
    return report
