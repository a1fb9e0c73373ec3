"""Print every applicable bound for a handful of reference problems."""
import argparse

from fixedbudget.bounds import evaluate_bounds
from fixedbudget.dist_model import BanditProblem, Bernoulli, FiniteSupport, Gaussian, Poisson

PROBLEMS = {
    "bernoulli_3": BanditProblem((Bernoulli(0.7), Bernoulli(0.5), Bernoulli(0.3))),
    "bernoulli_2": BanditProblem((Bernoulli(0.7), Bernoulli(0.4))),
    "bernoulli_5": BanditProblem(tuple(Bernoulli(m) for m in (0.6, 0.55, 0.5, 0.45, 0.4))),
    "gaussian_3": BanditProblem((Gaussian(1.0), Gaussian(0.5), Gaussian(0.0))),
    "poisson_3": BanditProblem((Poisson(3.0), Poisson(2.0), Poisson(1.0))),
    "finite_3": BanditProblem((
        FiniteSupport((0.2, 0.9), (0.3, 0.7)),
        FiniteSupport((0.0, 0.5, 1.0), (0.3, 0.4, 0.3)),
        FiniteSupport((0.1, 0.6), (0.6, 0.4)),
    )),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--T", type=int, default=1000, help="budget for finite-T bounds")
    args = parser.parse_args()
    names = ["cor3_phi", "cor3_gap", "thm12", "thm13", "thm7", "two_arm", "gap_lb_abm10", "bh_value"]
    print("problem".ljust(14) + "".join(n.rjust(14) for n in names))
    for label, problem in PROBLEMS.items():
        report = evaluate_bounds(problem, T=args.T)
        values = {**report.upper, **report.lower}
        cells = [f"{values[n]:.6g}" if n in values else "-" for n in names]
        print(label.ljust(14) + "".join(c.rjust(14) for c in cells))


if __name__ == "__main__":
    main()
