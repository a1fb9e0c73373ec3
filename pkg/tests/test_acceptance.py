"""Acceptance criteria, each run at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line (run with ``-s`` to see them,
which the project pytest config does by default).
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from fixedbudget.bounds import (
    cl16_value,
    crossing_value,
    gaussian_bh_value,
    lb_thm7,
    lb_thm12,
    two_arm_value,
    ub_cor3,
)
from fixedbudget.dist_model import BanditProblem, Bernoulli, FiniteSupport, Gaussian, Poisson, kl_divergence
from fixedbudget.info_geometry import chernoff_d, fenchel_dual, legendre_transform, linf, pair_rate
from fixedbudget.optimize import golden_min
from fixedbudget.simulation import (
    ExperimentConfig,
    InsufficientDataError,
    flip_prob_experiment,
    run_experiment,
    slope_fit,
)
from fixedbudget.strategies import empirical_frequency_checks, overline_ln, sr_schedule
from fixedbudget.verify import random_finite_support, tilt_oracle_linf_below


def verdict(number, title, ok, detail):
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}")
    assert ok, detail


def test_criterion_01_duality_suite():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        d = random_finite_support(rng, max_atoms=8)
        m, mean = d.lower_end, d.mean
        for u in rng.uniform(0.0, 1.0, 5):
            x = m + 0.05 * (mean - m) + u * 0.95 * (mean - m)
            worst = max(worst, abs(fenchel_dual(d, x).value - tilt_oracle_linf_below(d, x)))
    elapsed = time.perf_counter() - start
    verdict(1, "duality suite", worst <= 1e-5 and elapsed < 30,
            f"max |phi* - tilt oracle| = {worst:.2e} (tol 1e-5), {elapsed:.1f} s (limit 30 s)")


def kl_bernoulli(x, y):
    out = 0.0
    if x > 0:
        out += x * math.log(x / y)
    if x < 1:
        out += (1 - x) * math.log((1 - x) / (1 - y))
    return out


def test_criterion_02_exp_family_closed_forms():
    start = time.perf_counter()
    worst = 0.0
    cases = [("bernoulli", None, np.linspace(0.01, 0.99, 50))]
    cases += [("gaussian", s2, np.linspace(-3.0, 3.0, 50)) for s2 in (0.25, 1.0, 4.0)]
    cases += [("poisson", None, np.linspace(0.1, 10.0, 50))]
    for family, s2, grid in cases:
        for mu in grid:
            mu = float(mu)
            d = {"bernoulli": lambda: Bernoulli(mu), "gaussian": lambda: Gaussian(mu, s2),
                 "poisson": lambda: Poisson(mu)}[family]()
            for x in grid:
                x = float(x)
                if family == "bernoulli":
                    closed = kl_bernoulli(x, mu)
                elif family == "gaussian":
                    closed = (x - mu) ** 2 / (2 * s2)
                else:
                    closed = x * math.log(x / mu) - x + mu
                via_module = fenchel_dual(d, x).value
                numeric = legendre_transform(d, x).value
                worst = max(worst, abs(via_module - closed), abs(numeric - closed))
    elapsed = time.perf_counter() - start
    verdict(2, "exponential-family closed forms", worst <= 1e-9 and elapsed < 10,
            f"max deviation from d = {worst:.2e} (tol 1e-9), {elapsed:.1f} s (limit 10 s)")


def random_pair_exp(rng):
    family = rng.integers(3)
    if family == 0:
        a, b = np.sort(rng.uniform(0.01, 0.99, 2))
        return Bernoulli(float(a)), Bernoulli(float(b))
    if family == 1:
        s2 = float(rng.choice([0.25, 1.0, 4.0]))
        a, b = np.sort(rng.uniform(-3, 3, 2))
        return Gaussian(float(a), s2), Gaussian(float(b), s2)
    a, b = np.sort(rng.uniform(0.1, 10, 2))
    return Poisson(float(a)), Poisson(float(b))


def random_pair_unit(rng):
    if rng.random() < 0.3:
        a, b = np.sort(rng.uniform(0.01, 0.99, 2))
        return Bernoulli(float(a)), Bernoulli(float(b))
    p, q = random_finite_support(rng), random_finite_support(rng)
    return (p, q) if p.mean < q.mean else (q, p)


def test_criterion_03_sandwich_and_dominance():
    rng = np.random.default_rng(3)
    slack = 1e-10
    sandwich = dominance = pinsker = 0
    for _ in range(500):
        worse, better = random_pair_exp(rng)
        big_l, d = pair_rate(worse, better).value, chernoff_d(worse, better).value
        sandwich += not (d - slack <= big_l <= 2 * d + slack)
    for _ in range(500):
        worse, better = random_pair_unit(rng)
        gap = better.mean - worse.mean
        dominance += pair_rate(worse, better).value < gap ** 2 - slack
        pinsker += linf(better, worse.mean, "below", False).value < 2 * gap ** 2 - slack
    total = sandwich + dominance + pinsker
    verdict(3, "sandwich and dominance", total == 0,
            f"violations: D<=L<=2D {sandwich}, L>=gap^2 {dominance}, Linf>=2gap^2 {pinsker} (500 pairs each)")


def test_criterion_04_atom_formula():
    rng = np.random.default_rng(4)
    dists = [FiniteSupport((0.0, 1.0), (0.5, 0.5))]
    dists += [random_finite_support(rng) for _ in range(49)]
    worst = 0.0
    for d in dists:
        point = FiniteSupport((d.lower_end,), (1.0,))
        direct = kl_divergence(point, d)  # KL of the point mass at m
        worst = max(worst, abs(linf(d, d.lower_end, "below", False).value - direct))
    two_point = linf(dists[0], 0.0, "below", False).value
    ok = worst <= 1e-12 and abs(two_point - 0.6931472) <= 5e-8
    verdict(4, "atom formula", ok, f"max error {worst:.1e} (tol 1e-12), two-point case {two_point:.7f}")


def test_criterion_05_schedule_arithmetic():
    s = sr_schedule(3, 120)
    exact = (s.phase_lengths == (90, 30) and s.cumulative == (30, 45)
             and s.gammas == (0.25, 0.375) and overline_ln(3) == Fraction(4, 3))
    bad = []
    for K in range(2, 11):
        for T in (10**3, 10**4, 10**5):
            sched = sr_schedule(K, T)
            bad += [(K, T) for n, g in zip(sched.cumulative, sched.gammas) if abs(n / T - g) > K / T]
    verdict(5, "schedule arithmetic", exact and not bad,
            f"K=3,T=120 example {'matches' if exact else 'differs'}; {len(bad)} frequency violations")


def test_criterion_06_flip_rate_desk_scale():
    start = time.perf_counter()
    rep = flip_prob_experiment(Gaussian(0.0, 1.0), Gaussian(1.0, 1.0), [200], 10**6, 6)
    elapsed = time.perf_counter() - start
    rate = rep.log_rate[0]
    ok = -0.30 <= rate <= -0.20 and elapsed < 120
    verdict(6, "flip rate at N=200", ok,
            f"p_hat = {rep.p_hat[0]} with R = 1e6, ln(p_hat)/N = {rate} (target [-0.30, -0.20]), "
            f"{elapsed:.1f} s")


def test_criterion_07_end_to_end_consistency():
    problem = BanditProblem((Bernoulli(0.7), Bernoulli(0.4)))
    start = time.perf_counter()
    rep = run_experiment(ExperimentConfig(problem, "successive_rejects", [200, 400, 800, 1600], 200_000, 7))
    elapsed = time.perf_counter() - start
    lb, ub = lb_thm7(problem), ub_cor3(problem, "phi").value
    try:
        fit = slope_fit(list(zip(rep.budgets, rep.p_hat)))
    except InsufficientDataError as err:
        verdict(7, "end-to-end slope consistency", False,
                f"p_hat = {rep.p_hat}; {err}; lb_thm7 = {lb:.7f}, ub_cor3 = {ub:.7f}, {elapsed:.1f} s")
        return
    tol = fit.half_width + 2 / 1600
    ok = lb - tol <= fit.slope <= ub + tol and elapsed < 300
    verdict(7, "end-to-end slope consistency", ok,
            f"slope {fit.slope:.5f}, window [{lb - tol:.5f}, {ub + tol:.5f}], {elapsed:.1f} s")


def test_criterion_08_strategy_frequencies():
    rng = np.random.default_rng(8)
    failures = []
    for i, K in enumerate((3, 3, 5, 5, 5)):
        means = rng.uniform(0.1, 0.9, K)
        problem = BanditProblem(tuple(Bernoulli(float(m)) for m in means))
        chk = empirical_frequency_checks(problem, "sr", 1000, 4000, 80 + i)
        if not (chk.balanced_worst and all(chk.monotonous)):
            failures.append((i, chk.frequencies))
    two = empirical_frequency_checks(BanditProblem((Bernoulli(0.6), Bernoulli(0.4))), "sr", 100, 2000, 88)
    equality = two.frequencies[-1] == 0.5 and two.balanced_worst
    verdict(8, "SR pull frequencies", not failures and equality,
            f"{len(failures)} of 5 problems violate a cap; K=2 worst-arm frequency {two.frequencies[-1]}")


def test_criterion_09_relaxation_ordering():
    rng = np.random.default_rng(9)
    relax_bad = 0
    for _ in range(100):
        K = int(rng.integers(2, 6))
        means = rng.uniform(0.05, 0.95, K)
        problem = BanditProblem(tuple(Bernoulli(float(m)) for m in means))
        relax_bad += lb_thm12(problem).value < lb_thm7(problem)
    cross_err = chern_err = 0.0
    for _ in range(100):
        worse, better = random_pair_exp(rng)
        problem = BanditProblem((better, worse))
        value = -two_arm_value(problem)

        def worst_of_two(x):
            return max(linf(worse, x, "above", True).value, linf(better, x, "below", True).value)

        _, direct = golden_min(worst_of_two, worse.mean, better.mean)
        cross_err = max(cross_err, abs(value - direct), abs(crossing_value(worse, better)[0] - direct))
        chern_err = max(chern_err, abs(value - chernoff_d(worse, better).value))
    ok = relax_bad == 0 and cross_err <= 1e-8 and chern_err <= 1e-8
    verdict(9, "relaxation ordering", ok,
            f"{relax_bad} thm12 < thm7; crossing error {cross_err:.1e}; Chernoff error {chern_err:.1e} (tol 1e-8)")


def test_criterion_10_gap_based_formulas():
    g3 = BanditProblem((Gaussian(1.0), Gaussian(0.5), Gaussian(0.0)))
    c, bh = gaussian_bh_value(g3, 100)
    cl = cl16_value(BanditProblem((Bernoulli(0.75), Bernoulli(0.5), Bernoulli(0.25))))
    bh_ok = c == pytest.approx(10.0) and abs(bh - (-0.4138629)) <= 1e-7
    cl_ok = abs(cl - (-1.3652)) <= 1e-4
    verdict(10, "gap-based formulas", bh_ok and cl_ok,
            f"C = {c}, bound {bh:.7f} vs -0.4138629 ({'ok' if bh_ok else 'off'}); "
            f"CL16 {cl:.7f} vs -1.3652 at tol 1e-4 ({'ok' if cl_ok else 'off by %.1e' % abs(cl + 1.3652)})")
