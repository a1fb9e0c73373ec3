"""Seeded property suite run by ``fixedbudget verify``.

Each check draws its own random instances from a generator derived from the
master seed and the check name, so output is reproducible and checks are
independent of one another.
"""
from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bounds import evaluate_bounds, lb_thm7, lb_thm12
from .dist_model import BanditProblem, Bernoulli, FiniteSupport, Gaussian, Poisson, kl_divergence
from .info_geometry import (
    chernoff_d,
    fenchel_dual,
    gap_lower_bounds,
    legendre_transform,
    linf,
    pair_rate,
    tilt,
)
from .strategies import run_strategy, sr_schedule


def random_finite_support(rng: np.random.Generator, max_atoms: int = 8,
                          min_atoms: int = 2) -> FiniteSupport:
    """Random distribution on at most ``max_atoms`` points of [0, 1]."""
    n = int(rng.integers(min_atoms, max_atoms + 1))
    atoms = np.sort(rng.uniform(0.0, 1.0, n))
    weights = rng.dirichlet(np.ones(n))
    weights = np.maximum(weights, 1e-3)
    return FiniteSupport(tuple(atoms), tuple(weights / weights.sum()))


def random_exp_family_pair(rng: np.random.Generator):
    """Two members of one randomly chosen exponential family, worse first."""
    family = rng.integers(3)
    if family == 0:
        a, b = np.sort(rng.uniform(0.02, 0.98, 2))
        return Bernoulli(float(a)), Bernoulli(float(b))
    if family == 1:
        s2 = float(rng.choice([0.25, 1.0, 4.0]))
        a, b = np.sort(rng.uniform(-3, 3, 2))
        return Gaussian(float(a), s2), Gaussian(float(b), s2)
    a, b = np.sort(rng.uniform(0.1, 10, 2))
    return Poisson(float(a)), Poisson(float(b))


def tilt_oracle_linf_below(d: FiniteSupport, x: float) -> float:
    """KL of the tilt of ``d`` whose mean is ``x``, found by plain bisection on lambda."""
    if x >= d.mean:
        return 0.0
    lo, hi = -1.0, 0.0
    while d.tilted_mean(lo) > x:
        lo *= 2.0
        if lo < -1e7:
            break
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if d.tilted_mean(mid) > x:
            hi = mid
        else:
            lo = mid
    lam = lo if abs(d.tilted_mean(lo) - x) < abs(d.tilted_mean(hi) - x) else hi
    return kl_divergence(tilt(d, lam), d)


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    detail: str


def _check_kl_nonnegative(rng):
    worst = math.inf
    for _ in range(200):
        p = random_finite_support(rng)
        q = FiniteSupport(p.atoms, tuple(rng.dirichlet(np.ones(len(p.atoms)))))
        worst = min(worst, kl_divergence(p, q))
    return worst >= 0.0, f"min KL = {worst:.3e}"


def _check_duality(rng):
    worst = 0.0
    for _ in range(50):
        d = random_finite_support(rng)
        if d.lower_end == d.upper_end:
            continue
        for u in rng.uniform(0.05, 1.0, 3):
            x = d.lower_end + u * (d.mean - d.lower_end)
            worst = max(worst, abs(fenchel_dual(d, x).value - tilt_oracle_linf_below(d, x)))
    return worst <= 1e-5, f"max |phi* - tilt KL| = {worst:.3e}"


def _check_closed_forms(rng):
    worst = 0.0
    for _ in range(100):
        worse, better = random_exp_family_pair(rng)
        x = 0.5 * (worse.mean + better.mean)
        closed = fenchel_dual(better, x).value
        numeric = legendre_transform(better, x).value
        worst = max(worst, abs(closed - numeric))
    return worst <= 1e-9, f"max |d - numeric Legendre| = {worst:.3e}"


def _check_atom_formula(rng):
    worst = 0.0
    for _ in range(50):
        d = random_finite_support(rng)
        worst = max(worst, abs(linf(d, d.lower_end, "below", False).value + math.log(d.mass_at_lower)))
    return worst <= 1e-12, f"max error = {worst:.3e}"


def _check_sandwich(rng):
    bad = 0
    for _ in range(100):
        worse, better = random_exp_family_pair(rng)
        big_l, d = pair_rate(worse, better).value, chernoff_d(worse, better).value
        if not (d - 1e-10 <= big_l <= 2 * d + 1e-10):
            bad += 1
    return bad == 0, f"{bad} violations of D <= L <= 2D"


def _check_gap_floors(rng):
    bad = 0
    for _ in range(100):
        a, b = random_finite_support(rng), random_finite_support(rng)
        worse, better = (a, b) if a.mean < b.mean else (b, a)
        if worse.mean == better.mean:
            continue
        two_gap2, gap2 = gap_lower_bounds(worse, better)
        if pair_rate(worse, better).value < gap2 - 1e-10:
            bad += 1
        if linf(better, worse.mean, "below", False).value < two_gap2 - 1e-10:
            bad += 1
    return bad == 0, f"{bad} violations of the gap floors"


def _check_schedule(rng):
    bad = 0
    for K in range(2, 11):
        for T in (1000, 10000, 100000):
            s = sr_schedule(K, T)
            bad += sum(abs(n / T - g) > K / T for n, g in zip(s.cumulative, s.gammas))
    return bad == 0, f"{bad} phases with |N_r/T - gamma_r| > K/T"


def _check_relaxation(rng):
    bad = 0
    for _ in range(30):
        means = rng.uniform(0.05, 0.95, int(rng.integers(2, 5)))
        problem = BanditProblem(tuple(Bernoulli(float(m)) for m in means))
        if problem.generic and lb_thm12(problem).value < lb_thm7(problem) - 1e-10:
            bad += 1
    return bad == 0, f"{bad} problems with thm12 < thm7"


def _check_determinism(rng):
    problem = BanditProblem((Bernoulli(0.6), Bernoulli(0.5), Bernoulli(0.4)))
    seed = int(rng.integers(2**31))
    a = run_strategy("sr", problem, 200, np.random.default_rng(seed))
    b = run_strategy("sr", problem, 200, np.random.default_rng(seed))
    return a == b, "identical traces" if a == b else "traces differ"


def _check_json_roundtrip(rng):
    means = rng.uniform(0.05, 0.95, 3)
    text = evaluate_bounds(BanditProblem(tuple(Bernoulli(float(m)) for m in means))).to_json()
    again = json.dumps(json.loads(text), indent=2, sort_keys=True)
    return text == again, "byte-identical" if text == again else "differs"


PROPERTIES: dict[str, Callable] = {
    "kl_nonnegative": _check_kl_nonnegative,
    "duality_tilt": _check_duality,
    "exp_family_closed_form": _check_closed_forms,
    "atom_formula": _check_atom_formula,
    "chernoff_sandwich": _check_sandwich,
    "gap_floors": _check_gap_floors,
    "sr_schedule_frequencies": _check_schedule,
    "relaxation_thm12_ge_thm7": _check_relaxation,
    "strategy_determinism": _check_determinism,
    "bound_report_json_roundtrip": _check_json_roundtrip,
}


def run_properties(seed: int, names=None) -> list[PropertyResult]:
    results = []
    for name, check in PROPERTIES.items():
        if names and name not in names:
            continue
        rng = np.random.default_rng([seed, zlib.crc32(name.encode())])
        try:
            passed, detail = check(rng)
        except Exception as err:  # a crash counts as a failed property
            passed, detail = False, f"{type(err).__name__}: {err}"
        results.append(PropertyResult(name, bool(passed), detail))
    return results
