"""Reward distributions, bandit problems, and problem files.

Two kinds of distributions are supported: finite-support distributions on
[0, 1] (the nonparametric model) and members of three canonical one-parameter
exponential families, parameterized by their means.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import xlogy

MERGE_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-12


class ModelMismatchError(ValueError):
    """Two distributions from different models were combined."""


def _logsumexp(a: np.ndarray) -> float:
    top = a.max()
    return float(top + math.log(np.exp(a - top).sum()))


class Distribution:
    """Common interface. Subclasses are frozen dataclasses."""

    model: str = ""
    mean: float
    lower_end: float
    upper_end: float

    @property
    def mass_at_lower(self) -> float:
        raise NotImplementedError

    @property
    def mass_at_upper(self) -> float:
        raise NotImplementedError

    def log_mgf(self, lam: float) -> float:
        raise NotImplementedError

    def tilted_mean(self, lam: float) -> float:
        """Derivative of the log-MGF at ``lam``."""
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def sample_sums(self, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
        """``size`` independent sums of ``n`` i.i.d. rewards."""
        raise NotImplementedError

    def same_model(self, other: "Distribution") -> bool:
        return type(self) is type(other)


@dataclass(frozen=True)
class FiniteSupport(Distribution):
    atoms: tuple
    weights: tuple
    model = "finite"

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if atoms.size == 0 or atoms.size != weights.size:
            raise ValueError("atoms and weights must be non-empty and of equal length")
        if np.any(~np.isfinite(atoms)) or np.any(atoms < 0.0) or np.any(atoms > 1.0):
            raise ValueError("atoms must lie in [0, 1]")
        if np.any(weights < 0.0):
            raise ValueError("weights must be nonnegative")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {weights.sum()!r}, not 1")
        order = np.argsort(atoms, kind="stable")
        atoms, weights = atoms[order], weights[order]
        # merge near-duplicate atoms, drop null ones
        merged_a: list[float] = []
        merged_w: list[float] = []
        for a, w in zip(atoms, weights):
            if merged_a and a - merged_a[-1] < MERGE_TOL:
                merged_w[-1] += w
            else:
                merged_a.append(float(a))
                merged_w.append(float(w))
        keep = [(a, w) for a, w in zip(merged_a, merged_w) if w > 0.0]
        object.__setattr__(self, "atoms", tuple(a for a, _ in keep))
        object.__setattr__(self, "weights", tuple(w for _, w in keep))
        object.__setattr__(self, "_x", np.array(self.atoms))
        object.__setattr__(self, "_logw", np.log(np.array(self.weights)))

    @property
    def mean(self) -> float:
        return float(np.dot(self._x, np.exp(self._logw)))

    @property
    def lower_end(self) -> float:
        return self.atoms[0]

    @property
    def upper_end(self) -> float:
        return self.atoms[-1]

    @property
    def mass_at_lower(self) -> float:
        return self.weights[0]

    @property
    def mass_at_upper(self) -> float:
        return self.weights[-1]

    def log_mgf(self, lam: float) -> float:
        return _logsumexp(self._logw + lam * self._x)

    def tilted_log_weights(self, lam: float) -> np.ndarray:
        a = self._logw + lam * self._x
        return a - _logsumexp(a)

    def tilted_mean(self, lam: float) -> float:
        return float(np.dot(self._x, np.exp(self.tilted_log_weights(lam))))

    def sample(self, n, rng):
        cdf = np.cumsum(self.weights)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, rng.random(n), side="right")
        return self._x[np.minimum(idx, len(cdf) - 1)]

    def sample_sums(self, n, size, rng):
        counts = rng.multinomial(n, self.weights, size=size)
        return counts @ self._x


@dataclass(frozen=True)
class Bernoulli(Distribution):
    mean: float
    model = "bernoulli"

    def __post_init__(self):
        if not 0.0 < self.mean < 1.0:
            raise ValueError(f"Bernoulli mean must lie in (0, 1), got {self.mean!r}")

    lower_end = 0.0
    upper_end = 1.0
    mean_interval = (0.0, 1.0)

    @property
    def mass_at_lower(self):
        return 1.0 - self.mean

    @property
    def mass_at_upper(self):
        return self.mean

    @staticmethod
    def divergence(x: float, y: float) -> float:
        """kl(x, y), extended by continuity to x in {0, 1}."""
        return float(xlogy(x, x) - xlogy(x, y) + xlogy(1 - x, 1 - x) - xlogy(1 - x, 1 - y))

    def log_mgf(self, lam):
        p = self.mean
        # ln(1 - p + p e^lam) computed on the side that cannot overflow
        if lam > 0:
            return lam + math.log(p + (1 - p) * math.exp(-lam))
        return math.log1p(p * math.expm1(lam))

    def tilted_mean(self, lam):
        p = self.mean
        if lam > 0:
            return p / (p + (1 - p) * math.exp(-lam))
        e = math.exp(lam)
        return p * e / (1 - p + p * e)

    def sample(self, n, rng):
        return (rng.random(n) < self.mean).astype(float)

    def sample_sums(self, n, size, rng):
        return rng.binomial(n, self.mean, size=size).astype(float)


@dataclass(frozen=True)
class Gaussian(Distribution):
    mean: float
    sigma2: float = 1.0
    model = "gaussian"

    def __post_init__(self):
        if not self.sigma2 > 0.0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2!r}")
        if not math.isfinite(self.mean):
            raise ValueError("Gaussian mean must be finite")

    lower_end = -math.inf
    upper_end = math.inf
    mean_interval = (-math.inf, math.inf)
    mass_at_lower = 0.0
    mass_at_upper = 0.0

    def divergence(self, x, y):
        return (x - y) ** 2 / (2.0 * self.sigma2)

    def log_mgf(self, lam):
        return lam * self.mean + lam * lam * self.sigma2 / 2.0

    def tilted_mean(self, lam):
        return self.mean + lam * self.sigma2

    def sample(self, n, rng):
        return self.mean + math.sqrt(self.sigma2) * rng.standard_normal(n)

    def sample_sums(self, n, size, rng):
        return rng.normal(n * self.mean, math.sqrt(n * self.sigma2), size=size)

    def same_model(self, other):
        return isinstance(other, Gaussian) and other.sigma2 == self.sigma2


@dataclass(frozen=True)
class Poisson(Distribution):
    mean: float
    model = "poisson"

    def __post_init__(self):
        if not (self.mean > 0.0 and math.isfinite(self.mean)):
            raise ValueError(f"Poisson mean must be positive, got {self.mean!r}")

    lower_end = 0.0
    upper_end = math.inf
    mean_interval = (0.0, math.inf)
    mass_at_upper = 0.0

    @property
    def mass_at_lower(self):
        return math.exp(-self.mean)

    @staticmethod
    def divergence(x, y):
        return float(xlogy(x, x) - xlogy(x, y) - x + y)

    def log_mgf(self, lam):
        return self.mean * math.expm1(lam)

    def tilted_mean(self, lam):
        return self.mean * math.exp(lam)

    def sample(self, n, rng):
        return rng.poisson(self.mean, size=n).astype(float)

    def sample_sums(self, n, size, rng):
        return rng.poisson(n * self.mean, size=size).astype(float)


EXP_FAMILIES = (Bernoulli, Gaussian, Poisson)


def is_exp_family(d: Distribution) -> bool:
    return isinstance(d, EXP_FAMILIES)


def expectation_and_support(d: Distribution) -> tuple[float, float, float, float, float]:
    """Return ``(mean, m, M, mass at m, mass at M)``."""
    return d.mean, d.lower_end, d.upper_end, d.mass_at_lower, d.mass_at_upper


def check_same_model(p: Distribution, q: Distribution) -> None:
    if not p.same_model(q):
        raise ModelMismatchError(f"cannot combine {p!r} and {q!r}: different models")


def kl_divergence(p: Distribution, q: Distribution) -> float:
    """KL(p, q); +inf when p is not absolutely continuous w.r.t. q."""
    check_same_model(p, q)
    if isinstance(p, FiniteSupport):
        q_index = {a: i for i, a in enumerate(q.atoms)}
        total = 0.0
        for i, (a, w) in enumerate(zip(p.atoms, p.weights)):
            j = q_index.get(a)
            if j is None:
                return math.inf
            total += w * float(p._logw[i] - q._logw[j])
        return max(total, 0.0)
    return max(p.divergence(p.mean, q.mean), 0.0)


def sample_batch(d: Distribution, n: int, stream: np.random.Generator) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return np.empty(0)
    return d.sample(n, stream)


@dataclass(frozen=True)
class BanditProblem:
    arms: tuple
    means: tuple = field(init=False)
    best_arm: int = field(init=False)
    worst_arm: int = field(init=False)
    gaps: tuple = field(init=False)
    order: tuple = field(init=False)
    generic: bool = field(init=False)

    def __post_init__(self):
        arms = tuple(self.arms)
        if len(arms) < 2:
            raise ValueError("a bandit problem needs at least 2 arms")
        for a in arms[1:]:
            check_same_model(arms[0], a)
        means = tuple(float(a.mean) for a in arms)
        # descending mean, ties by lowest index
        order = tuple(sorted(range(len(arms)), key=lambda i: (-means[i], i)))
        best = order[0]
        # worst: smallest mean, ties by lowest index
        worst = min(range(len(arms)), key=lambda i: (means[i], i))
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "best_arm", best)
        object.__setattr__(self, "worst_arm", worst)
        object.__setattr__(self, "gaps", tuple(means[best] - m for m in means))
        object.__setattr__(self, "generic", len(set(means)) == len(means))

    @property
    def K(self) -> int:
        return len(self.arms)

    @property
    def model(self) -> str:
        return self.arms[0].model

    @property
    def best(self) -> Distribution:
        return self.arms[self.best_arm]

    @property
    def unique_optimum(self) -> bool:
        top = self.means[self.best_arm]
        return sum(m == top for m in self.means) == 1

    def ranked(self, k: int) -> Distribution:
        """Arm of rank ``k`` (1-based, descending means)."""
        return self.arms[self.order[k - 1]]

    def ranked_mean(self, k: int) -> float:
        return self.means[self.order[k - 1]]

    def require_generic(self) -> None:
        if not self.generic:
            raise ValueError("problem is not generic: two arms share the same mean")

    def require_unique_optimum(self) -> None:
        if not self.unique_optimum:
            raise ValueError("problem has several optimal arms")

    def to_dict(self) -> dict:
        first = self.arms[0]
        out: dict = {"model": first.model}
        if isinstance(first, Gaussian):
            out["sigma2"] = first.sigma2
        if isinstance(first, FiniteSupport):
            out["arms"] = [{"atoms": list(a.atoms), "weights": list(a.weights)} for a in self.arms]
        else:
            out["arms"] = [a.mean for a in self.arms]
        return out


def analyze_problem(arms: Sequence[Distribution]) -> BanditProblem:
    return BanditProblem(tuple(arms))


def problem_from_dict(data: dict) -> BanditProblem:
    """Build a problem from the JSON problem-file layout."""
    if not isinstance(data, dict):
        raise ValueError("problem must be a JSON object")
    model = data.get("model")
    arms = data.get("arms")
    if not isinstance(arms, list):
        raise ValueError("field 'arms' must be a list")
    if model == "finite":
        dists = []
        for i, a in enumerate(arms):
            if not isinstance(a, dict) or "atoms" not in a or "weights" not in a:
                raise ValueError(f"arms[{i}]: finite arms need 'atoms' and 'weights'")
            dists.append(FiniteSupport(tuple(a["atoms"]), tuple(a["weights"])))
    elif model == "bernoulli":
        dists = [Bernoulli(float(m)) for m in arms]
    elif model == "gaussian":
        if "sigma2" not in data:
            raise ValueError("gaussian problems need field 'sigma2'")
        dists = [Gaussian(float(m), float(data["sigma2"])) for m in arms]
    elif model == "poisson":
        dists = [Poisson(float(m)) for m in arms]
    else:
        raise ValueError(f"field 'model': unknown model {model!r}")
    return analyze_problem(dists)


def load_problem(path) -> BanditProblem:
    with open(path) as fh:
        return problem_from_dict(json.load(fh))
