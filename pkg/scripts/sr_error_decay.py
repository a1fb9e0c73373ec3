"""Misidentification probability of successive rejects over a budget grid.

For two Bernoulli arms the error is also computed exactly (convolution of two
binomials), which shows which budgets plain Monte Carlo can resolve with a
given number of replications.
"""
import argparse

import numpy as np
from scipy import stats

from fixedbudget.dist_model import BanditProblem, Bernoulli
from fixedbudget.simulation import ExperimentConfig, run_experiment
from fixedbudget.strategies import sr_schedule


def exact_two_arm_sr_error(p_best, p_other, T):
    """P(best sum <= other sum) after T/2 pulls each; ties reject the lower index (the best)."""
    n = sr_schedule(2, T).cumulative[0]
    k = np.arange(n + 1)
    best = stats.binom.pmf(k, n, p_best)
    other_cdf_below = stats.binom.sf(k - 1, n, p_other)  # P(other sum >= k)
    return float(np.dot(best, other_cdf_below))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--means", default="0.7,0.4")
    parser.add_argument("--grid", default="200,400,800,1600")
    parser.add_argument("--replications", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()
    means = [float(m) for m in args.means.split(",")]
    grid = [int(t) for t in args.grid.split(",")]
    problem = BanditProblem(tuple(Bernoulli(m) for m in means))
    rep = run_experiment(ExperimentConfig(problem, "successive_rejects", grid, args.replications,
                                          args.seed, workers=args.workers))
    print(f"{'T':>6} {'p_hat':>12} {'stderr':>12} {'exact':>12} {'expected hits':>14}")
    for t, p, s in zip(rep.budgets, rep.p_hat, rep.stderr):
        exact = exact_two_arm_sr_error(means[0], means[1], t) if len(means) == 2 else float("nan")
        print(f"{t:6d} {p:12.4e} {s:12.4e} {exact:12.4e} {exact * args.replications:14.4g}")
    print("bounds:", rep.bounds)
    print("verdicts:", rep.verdicts)
    for note in rep.notes:
        print("note:", note)


if __name__ == "__main__":
    main()
