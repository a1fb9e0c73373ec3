"""Complexity quantities, rate bounds and simulations for fixed-budget best-arm identification."""
from .dist_model import BanditProblem, Bernoulli, FiniteSupport, Gaussian, Poisson, load_problem
from .info_geometry import chernoff_d, fenchel_dual, linf, pair_rate
from .bounds import evaluate_bounds
from .strategies import run_strategy, sr_schedule

__all__ = [
    "BanditProblem", "Bernoulli", "FiniteSupport", "Gaussian", "Poisson", "load_problem",
    "chernoff_d", "fenchel_dual", "linf", "pair_rate", "evaluate_bounds",
    "run_strategy", "sr_schedule",
]
