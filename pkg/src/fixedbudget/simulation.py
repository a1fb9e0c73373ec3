"""Monte Carlo estimation of misidentification and flip probabilities.

Plain Monte Carlo only: rates below roughly ln(1/R)/T cannot be resolved with
R replications, and the report says so instead of extrapolating.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .bounds import encode_floats, evaluate_bounds
from .dist_model import BanditProblem, Distribution, load_problem, problem_from_dict
from .info_geometry import pair_rate
from .strategies import block_seeds, canonical_kind, empirical_frequency_checks, run_batch


class InsufficientDataError(ValueError):
    """Too few cells with a positive error estimate to fit a slope."""


class ConfigError(ValueError):
    pass


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def count_errors(problem: BanditProblem, kind: str, T: int, replications: int,
                 master_seed: int, workers: int = 1) -> int:
    """Number of runs, out of ``replications``, recommending a wrong arm."""
    best = problem.best_arm
    blocks = list(block_seeds(master_seed, (T, 0), replications))

    def one(block):
        size, seq = block
        rec, _ = run_batch(kind, problem, T, np.random.default_rng(seq), size)
        return int(np.count_nonzero(rec != best))

    return sum(_map(one, blocks, workers))


def estimate_misid_prob(problem: BanditProblem, kind: str, T: int, replications: int,
                        master_seed: int, workers: int = 1) -> tuple[float, float]:
    """(p_hat, binomial stderr) of P(I_T != a*)."""
    if replications < 1:
        raise ValueError("replications must be >= 1")
    p = count_errors(problem, kind, T, replications, master_seed, workers) / replications
    return p, math.sqrt(p * (1.0 - p) / replications)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    half_width: float
    n_cells: int


def slope_fit(grid: Sequence[tuple[float, float]]) -> SlopeFit:
    """OLS of ln p_hat on T over cells with p_hat > 0; half-width is 2 slope stderrs."""
    usable = [(t, p) for t, p in grid if p > 0]
    if len(usable) < 3:
        largest = max((t for t, _ in usable), default=None)
        raise InsufficientDataError(
            f"need >= 3 cells with positive error estimates, got {len(usable)}"
            f" (largest usable T: {largest})")
    t = np.array([u[0] for u in usable], dtype=float)
    y = np.log([u[1] for u in usable])
    fit = stats.linregress(t, y)
    stderr = fit.stderr if math.isfinite(fit.stderr) else 0.0
    return SlopeFit(float(fit.slope), float(fit.intercept), 2.0 * float(stderr), len(usable))


def _draw_flip_block(worse, better, n, size, seq):
    rng = np.random.default_rng(seq)
    x = better.sample_sums(n, size, rng) / n
    y = worse.sample_sums(n, size, rng) / n
    return int(np.count_nonzero(x <= y))


@dataclass
class FlipReport:
    n_grid: list
    p_hat: list
    stderr: list
    log_rate: list          # ln(p_hat)/N, -inf when p_hat = 0
    replications: int
    pair_rate: float
    slope: Optional[float] = None
    half_width: Optional[float] = None
    note: str = ""


def flip_prob_experiment(worse: Distribution, better: Distribution, n_grid: Sequence[int],
                         replications: int, master_seed: int, workers: int = 1) -> FlipReport:
    """Estimate P(mean of N draws of ``better`` <= mean of N draws of ``worse``) over N."""
    if not worse.mean < better.mean:
        raise ValueError("expected E(worse) < E(better)")
    p_hat, se, log_rate = [], [], []
    for n in n_grid:
        blocks = list(block_seeds(master_seed, (n, 2), replications))
        hits = sum(_map(lambda b: _draw_flip_block(worse, better, n, b[0], b[1]), blocks, workers))
        p = hits / replications
        p_hat.append(p)
        se.append(math.sqrt(p * (1 - p) / replications))
        log_rate.append(math.log(p) / n if p > 0 else -math.inf)
    rate = pair_rate(worse, better).value
    report = FlipReport(list(n_grid), p_hat, se, log_rate, replications, rate)
    try:
        fit = slope_fit(list(zip(n_grid, p_hat)))
        report.slope, report.half_width = fit.slope, fit.half_width
    except InsufficientDataError as err:
        report.note = str(err)
    return report


@dataclass
class ExperimentConfig:
    problem: BanditProblem
    strategy: str = "sr"
    budgets: list = field(default_factory=list)
    replications: int = 10000
    seed: int = 0
    bounds: bool = True
    workers: int = 1

    @classmethod
    def from_dict(cls, data: dict, base_dir: str = ".") -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {"problem", "strategy", "budgets", "replications", "seed", "bounds", "workers"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        if "problem" not in data:
            raise ConfigError("field 'problem': missing")
        raw = data["problem"]
        try:
            if isinstance(raw, str):
                import os
                path = raw if os.path.isabs(raw) else os.path.join(base_dir, raw)
                problem = load_problem(path)
            else:
                problem = problem_from_dict(raw)
        except (OSError, ValueError) as err:
            raise ConfigError(f"field 'problem': {err}") from err
        try:
            strategy = canonical_kind(data.get("strategy", "sr"))
        except ValueError as err:
            raise ConfigError(f"field 'strategy': {err}") from err
        budgets = data.get("budgets")
        if not isinstance(budgets, list) or not budgets:
            raise ConfigError("field 'budgets': must be a non-empty list of integers")
        if not all(isinstance(b, int) and b > 0 for b in budgets):
            raise ConfigError("field 'budgets': entries must be positive integers")
        if sorted(set(budgets)) != budgets:
            raise ConfigError("field 'budgets': must be strictly increasing")
        reps = data.get("replications", 10000)
        if not isinstance(reps, int) or reps < 1:
            raise ConfigError("field 'replications': must be a positive integer")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or seed < 0:
            raise ConfigError("field 'seed': must be a nonnegative integer")
        want_bounds = data.get("bounds", True)
        if not isinstance(want_bounds, bool):
            raise ConfigError("field 'bounds': must be true or false")
        workers = data.get("workers", 1)
        if not isinstance(workers, int) or workers < 1:
            raise ConfigError("field 'workers': must be a positive integer")
        return cls(problem, strategy, budgets, reps, seed, want_bounds, workers)

    @classmethod
    def from_json(cls, text: str, base_dir: str = ".") -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}") from err
        return cls.from_dict(data, base_dir)


@dataclass
class SimReport:
    strategy: str
    problem: dict
    generic: bool
    budgets: list
    p_hat: list
    stderr: list
    replications: int
    seed: int
    slope: Optional[float] = None
    intercept: Optional[float] = None
    half_width: Optional[float] = None
    tol_stat: Optional[float] = None
    dropped_cells: int = 0
    bounds: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    frequencies: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    wall_clock: list = field(default_factory=list)

    def to_dict(self, include_timing: bool = True) -> dict:
        out = encode_floats(asdict(self))
        if not include_timing:
            out.pop("wall_clock")
        return out

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["T", "p_hat", "stderr", "R"])
        for t, p, s in zip(self.budgets, self.p_hat, self.stderr):
            writer.writerow([t, repr(p), repr(s), self.replications])
        return buf.getvalue()


def run_experiment(config: ExperimentConfig) -> SimReport:
    """Error estimates over the budget grid, slope fit, and bound verdicts."""
    problem = config.problem
    report = SimReport(config.strategy, problem.to_dict(), problem.generic, list(config.budgets),
                       [], [], config.replications, config.seed)
    if not problem.generic:
        report.notes.append("non-generic problem: best arm chosen by lowest-index tie-break")
    for t in config.budgets:
        start = time.perf_counter()
        p, se = estimate_misid_prob(problem, config.strategy, t, config.replications,
                                    config.seed, config.workers)
        report.p_hat.append(p)
        report.stderr.append(se)
        report.wall_clock.append(time.perf_counter() - start)
    report.dropped_cells = sum(p == 0 for p in report.p_hat)
    resolution = math.log(config.replications) / max(config.budgets)
    report.notes.append(f"plain Monte Carlo cannot resolve rates below about -{resolution:.3g} at T_max")

    if config.bounds and problem.unique_optimum:
        b = evaluate_bounds(problem, T=max(config.budgets))
        report.bounds = {"upper": dict(b.upper), "lower": dict(b.lower)}

    if all(p == 0 for p in report.p_hat):
        report.verdicts["status"] = "DEGENERATE_ZERO_ERROR"
    else:
        try:
            fit = slope_fit(list(zip(config.budgets, report.p_hat)))
        except InsufficientDataError as err:
            report.verdicts["status"] = "INSUFFICIENT_DATA"
            report.notes.append(str(err))
        else:
            report.slope, report.intercept, report.half_width = fit.slope, fit.intercept, fit.half_width
            tol = fit.half_width + 2.0 / max(config.budgets)
            report.tol_stat = tol
            report.verdicts["status"] = "FITTED"
            if config.strategy == "successive_rejects" and "upper" in report.bounds:
                ub = report.bounds["upper"]["cor3_phi"]
                report.verdicts["cor3_phi"] = "UB_CONSISTENT" if fit.slope <= ub + tol else "UB_VIOLATED"
            for name, lb in report.bounds.get("lower", {}).items():
                if name in ("thm7", "thm12", "thm13", "two_arm"):
                    report.verdicts[name] = "LB_CONSISTENT" if fit.slope >= lb - tol else "LB_VIOLATED"
            report.verdicts["kind"] = "consistency check at finite T, not a verification of the limit"

    if problem.generic:
        t = max(config.budgets)
        chk = empirical_frequency_checks(problem, config.strategy, t,
                                         min(config.replications, 20000), config.seed)
        report.frequencies = {
            "T": t,
            "by_rank": list(chk.frequencies),
            "stderr": list(chk.stderrs),
            "balanced_worst": chk.balanced_worst,
            "monotonous": list(chk.monotonous),
        }
    return report
