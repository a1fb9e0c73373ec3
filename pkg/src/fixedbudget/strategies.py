"""Fixed-budget strategies: successive rejects, uniform exploration, sequential halving.

Two execution paths share the same decision rules:

* :func:`run_strategy` plays one run pull-batch by pull-batch. Every arm owns
  its own reward stream, so the n-th reward of an arm does not depend on the
  strategy that asked for it.
* :func:`run_batch` plays many independent runs at once, drawing per-phase
  reward *sums* directly. Only sums enter the decisions, so this is exact in
  distribution and much faster.

Ties are always broken towards the lowest arm index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from .dist_model import BanditProblem, sample_batch

KIND_ALIASES = {
    "sr": "successive_rejects",
    "successive_rejects": "successive_rejects",
    "uniform": "uniform",
    "sh": "sequential_halving",
    "sequential_halving": "sequential_halving",
}

# replications per independently seeded block in batch simulations
BLOCK_SIZE = 8192


def canonical_kind(kind: str) -> str:
    try:
        return KIND_ALIASES[kind]
    except KeyError:
        raise ValueError(f"unknown strategy {kind!r}; expected one of {sorted(KIND_ALIASES)}") from None


def overline_ln(K: int) -> Fraction:
    """1/2 + sum_{k=2}^K 1/k, exactly."""
    return Fraction(1, 2) + sum((Fraction(1, k) for k in range(2, K + 1)), Fraction(0))


@dataclass(frozen=True)
class PhaseSchedule:
    K: int
    T: int
    phase_lengths: tuple
    per_arm_pulls: tuple
    cumulative: tuple
    overline_ln_K: float
    gammas: tuple


def sr_min_budget(K: int) -> int:
    """Smallest T for which every phase gives each surviving arm at least one pull.

    Phase 2 is the binding one: floor(T / (K ovln)) >= K - 1.
    """
    return math.ceil(K * (K - 1) * overline_ln(K))


def sr_schedule(K: int, T: int) -> PhaseSchedule:
    """Phase lengths T/ovln(K) and T/((K-r+2) ovln(K)), floored; remainder goes to phase 1."""
    if K < 2:
        raise ValueError("successive rejects needs K >= 2")
    ovln = overline_ln(K)
    if T < sr_min_budget(K):
        raise ValueError(f"budget T={T} too small for K={K}: need T >= {sr_min_budget(K)}")
    exact = [Fraction(T) / ovln] + [Fraction(T) / ((K - r + 2) * ovln) for r in range(2, K)]
    lengths = [math.floor(x) for x in exact]
    lengths[0] += T - sum(lengths)
    per_arm = [lengths[r - 1] // (K - r + 1) for r in range(1, K)]
    cumulative = list(np.cumsum(per_arm).tolist())
    gammas = tuple(float(1 / ((K - r + 1) * ovln)) for r in range(1, K))
    return PhaseSchedule(K, T, tuple(lengths), tuple(per_arm), tuple(cumulative),
                         float(ovln), gammas)


def sh_rounds(K: int, T: int) -> list[tuple[int, int]]:
    """(survivors, pulls per survivor) for each sequential-halving round."""
    n_rounds = max(1, math.ceil(math.log2(K)))
    per_round = T // n_rounds
    rounds = []
    alive = K
    for _ in range(n_rounds):
        rounds.append((alive, per_round // alive))
        alive = math.ceil(alive / 2)
    if min(n for _, n in rounds) < 1:
        raise ValueError(f"budget T={T} too small for sequential halving with K={K}")
    return rounds


def _check_budget(kind: str, K: int, T: int) -> None:
    if kind == "successive_rejects":
        sr_schedule(K, T)
    elif kind == "uniform":
        if T < K:
            raise ValueError(f"budget T={T} too small for uniform exploration: need T >= {K}")
    else:
        sh_rounds(K, T)


@dataclass(frozen=True)
class StrategyTrace:
    pulls: tuple
    rejection_order: tuple
    recommendation: int
    rewards_consumed: int


class _ArmStreams:
    """Per-arm reward streams; arm a's rewards come in a fixed order."""

    def __init__(self, problem: BanditProblem, stream: np.random.Generator):
        self.arms = problem.arms
        self.streams = stream.spawn(problem.K)
        self.pulls = [0] * problem.K

    def draw(self, arm: int, n: int) -> np.ndarray:
        self.pulls[arm] += n
        return sample_batch(self.arms[arm], n, self.streams[arm])


def run_strategy(kind: str, problem: BanditProblem, T: int,
                 stream: np.random.Generator) -> StrategyTrace:
    kind = canonical_kind(kind)
    K = problem.K
    _check_budget(kind, K, T)
    rewards = _ArmStreams(problem, stream)
    rejected: list[int] = []

    if kind == "successive_rejects":
        sched = sr_schedule(K, T)
        alive = list(range(K))
        sums = [0.0] * K
        for r, n in enumerate(sched.per_arm_pulls):
            for a in alive:
                sums[a] += float(rewards.draw(a, n).sum())
            n_total = sched.cumulative[r]
            loser = min(alive, key=lambda a: (sums[a] / n_total, a))
            alive.remove(loser)
            rejected.append(loser)
        recommendation = alive[0]
    elif kind == "uniform":
        n = T // K
        means = [float(rewards.draw(a, n).mean()) for a in range(K)]
        recommendation = min(range(K), key=lambda a: (-means[a], a))
    else:
        alive = list(range(K))
        for _, n in sh_rounds(K, T):
            means = {a: float(rewards.draw(a, n).mean()) for a in alive}
            ranked = sorted(alive, key=lambda a: (-means[a], a))
            keep = math.ceil(len(alive) / 2)
            # rejected arms listed worst first
            rejected.extend(reversed(ranked[keep:]))
            alive = sorted(ranked[:keep])
        recommendation = alive[0]

    pulls = tuple(rewards.pulls)
    return StrategyTrace(pulls, tuple(rejected), recommendation, sum(pulls))


def run_batch(kind: str, problem: BanditProblem, T: int, rng: np.random.Generator,
              size: int) -> tuple[np.ndarray, np.ndarray]:
    """Play ``size`` independent runs; returns (recommendations, pulls of shape (size, K))."""
    kind = canonical_kind(kind)
    K = problem.K
    _check_budget(kind, K, T)
    rows = np.arange(size)
    arms = problem.arms

    def draw_sums(n):
        return np.column_stack([d.sample_sums(n, size, rng) for d in arms])

    if kind == "successive_rejects":
        sched = sr_schedule(K, T)
        sums = np.zeros((size, K))
        alive = np.ones((size, K), dtype=bool)
        pulls = np.zeros((size, K), dtype=np.int64)
        for r, n in enumerate(sched.per_arm_pulls):
            sums += draw_sums(n)
            n_total = sched.cumulative[r]
            avg = np.where(alive, sums / n_total, np.inf)
            loser = np.argmin(avg, axis=1)
            alive[rows, loser] = False
            pulls[rows, loser] = n_total
        recommendation = np.argmax(alive, axis=1)
        pulls[rows, recommendation] = sched.cumulative[-1]
        return recommendation, pulls

    if kind == "uniform":
        n = T // K
        means = draw_sums(n) / n
        return np.argmax(means, axis=1), np.full((size, K), n, dtype=np.int64)

    alive = np.ones((size, K), dtype=bool)
    pulls = np.zeros((size, K), dtype=np.int64)
    for n_alive, n in sh_rounds(K, T):
        means = np.where(alive, draw_sums(n) / n, -np.inf)
        pulls += np.where(alive, n, 0)
        order = np.argsort(-means, axis=1, kind="stable")
        keep = math.ceil(n_alive / 2)
        alive = np.zeros((size, K), dtype=bool)
        np.put_along_axis(alive, order[:, :keep], True, axis=1)
    return np.argmax(alive, axis=1), pulls


def block_seeds(master_seed: int, key: tuple, replications: int,
                block_size: int = BLOCK_SIZE) -> Iterator[tuple[int, np.random.SeedSequence]]:
    """Fixed partition of replications into seeded blocks.

    The seed of a block depends only on (master_seed, key, block index), so the
    result does not depend on how blocks are distributed over workers.
    """
    n_blocks = -(-replications // block_size)
    for b in range(n_blocks):
        size = min(block_size, replications - b * block_size)
        yield size, np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key) + (b,))


@dataclass(frozen=True)
class FrequencyCheck:
    frequencies: tuple      # mean N_(a)(T)/T by rank a = 1..K
    stderrs: tuple
    balanced_worst: bool
    balanced_margin: float
    monotonous: tuple
    monotonous_margins: tuple


def empirical_frequency_checks(problem: BanditProblem, kind: str, T: int,
                               replications: int, master_seed: int) -> FrequencyCheck:
    """Average pull frequencies by mean rank and the 1/K and 1/a frequency caps."""
    if not problem.generic:
        raise ValueError("frequency checks need a generic problem (distinct means)")
    K = problem.K
    totals = np.zeros(K)
    squares = np.zeros(K)
    for size, seq in block_seeds(master_seed, (T, 1), replications):
        _, pulls = run_batch(kind, problem, T, np.random.default_rng(seq), size)
        by_rank = pulls[:, list(problem.order)] / T
        totals += by_rank.sum(axis=0)
        squares += (by_rank ** 2).sum(axis=0)
    freq = totals / replications
    var = np.maximum(squares / replications - freq ** 2, 0.0)
    se = np.sqrt(var / replications)
    caps = 1.0 / np.arange(1, K + 1)
    margins = caps + 3.0 * se - freq
    balanced_margin = 1.0 / K + 3.0 * se[-1] - freq[-1]
    return FrequencyCheck(
        frequencies=tuple(freq.tolist()),
        stderrs=tuple(se.tolist()),
        balanced_worst=bool(balanced_margin >= 0.0),
        balanced_margin=float(balanced_margin),
        monotonous=tuple(bool(m >= 0.0) for m in margins),
        monotonous_margins=tuple(margins.tolist()),
    )
