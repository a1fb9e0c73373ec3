"""Information-theoretic complexity quantities.

Log-MGFs and their Legendre transforms, the four constrained KL infima
(``linf``), exponential tilts, the pairwise rate (inf over a threshold of
the sum of two rate functions), Chernoff information, and gap floors.

All logarithms are natural. Infinite rates are ``math.inf``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .dist_model import (
    Bernoulli,
    Distribution,
    FiniteSupport,
    Gaussian,
    Poisson,
    check_same_model,
    is_exp_family,
)
from .optimize import bisect_sign, golden_min

# |lambda| cap when bracketing the Legendre maximizer. Exponential families
# overflow past ~709; finite supports are evaluated in a shifted log domain.
EXP_FAMILY_LAMBDA_CAP = 700.0
FINITE_LAMBDA_CAP = 1e6


class Method(str, Enum):
    CLOSED_FORM_D = "closed_form_d"
    DUALITY_TILT = "duality_tilt"
    ATOM_FORMULA = "atom_formula"
    INFINITE_BY_SUPPORT = "infinite_by_support"


@dataclass(frozen=True)
class RateValue:
    value: float
    attained_at: Optional[float]
    method: Method

    def __float__(self):
        return self.value

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def _inf() -> RateValue:
    return RateValue(math.inf, None, Method.INFINITE_BY_SUPPORT)


def log_mgf(d: Distribution, lam: float) -> float:
    return d.log_mgf(lam)


def exp_family_divergence(d: Distribution, x: float, y: float) -> float:
    """Mean-parameterized KL ``d(x, y)`` within the family of ``d``."""
    return max(d.divergence(x, y), 0.0)


def _natural_shift(d: Distribution, x: float) -> float:
    """Tilt parameter moving the mean of ``d`` to ``x`` (interior x only)."""
    mu = d.mean
    if isinstance(d, Gaussian):
        return (x - mu) / d.sigma2
    if isinstance(d, Bernoulli):
        return math.log(x * (1 - mu)) - math.log((1 - x) * mu)
    if isinstance(d, Poisson):
        return math.log(x / mu)
    raise TypeError(type(d).__name__)


def _in_closure(d: Distribution, x: float) -> bool:
    lo, hi = d.mean_interval
    return lo <= x <= hi


def _in_open(d: Distribution, x: float) -> bool:
    lo, hi = d.mean_interval
    return lo < x < hi


def legendre_transform(d: Distribution, x: float) -> RateValue:
    """Numerical ``sup_lam {lam x - log_mgf(lam)}`` for ``x`` inside the support hull.

    The maximizer solves ``tilted_mean(lam) = x``; it is bracketed by doubling
    from ``[-1, 1]`` and then located with Brent's method.
    """
    mean = d.mean
    if x == mean:
        return RateValue(0.0, 0.0, Method.DUALITY_TILT)
    finite = isinstance(d, FiniteSupport)
    cap = FINITE_LAMBDA_CAP if finite else EXP_FAMILY_LAMBDA_CAP
    if finite:
        shifted = d._x - x

        def objective(lam):
            a = d._logw + lam * shifted
            top = a.max()
            return -float(top + math.log(np.exp(a - top).sum()))
    else:
        def objective(lam):
            return lam * x - d.log_mgf(lam)

    sign = 1.0 if x > mean else -1.0
    inner, outer = 0.0, sign
    while sign * (d.tilted_mean(outer) - x) < 0.0:
        if abs(outer) >= cap:
            # optimum lies beyond the cap; the value there is a lower bound
            return RateValue(max(objective(outer), 0.0), outer, Method.DUALITY_TILT)
        inner, outer = outer, min(2.0 * abs(outer), cap) * sign
    lo, hi = sorted((inner, outer))
    g_lo = d.tilted_mean(lo) - x
    g_hi = d.tilted_mean(hi) - x
    if g_lo == 0.0:
        lam = lo
    elif g_hi == 0.0:
        lam = hi
    else:
        lam = brentq(lambda t: d.tilted_mean(t) - x, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return RateValue(max(objective(lam), 0.0), lam, Method.DUALITY_TILT)


def fenchel_dual(d: Distribution, x: float) -> RateValue:
    """Legendre transform of the log-MGF of ``d`` evaluated at ``x``."""
    if is_exp_family(d):
        if not _in_closure(d, x):
            return _inf()
        value = exp_family_divergence(d, x, d.mean)
        lam = _natural_shift(d, x) if _in_open(d, x) else None
        return RateValue(value, lam, Method.CLOSED_FORM_D)
    m, M = d.lower_end, d.upper_end
    if x < m or x > M:
        return _inf()
    if m == M:
        return RateValue(0.0, 0.0, Method.DUALITY_TILT)
    if x == m:
        return RateValue(-math.log(d.mass_at_lower), None, Method.ATOM_FORMULA)
    if x == M:
        return RateValue(-math.log(d.mass_at_upper), None, Method.ATOM_FORMULA)
    return legendre_transform(d, x)


def linf(d: Distribution, x: float, side: str, strict: bool) -> RateValue:
    """Infimum of KL(zeta, d) over model members zeta with mean below/above ``x``.

    ``side`` is ``"below"`` (E(zeta) < x or <= x) or ``"above"``; ``strict``
    selects the strict inequality.
    """
    if side not in ("below", "above"):
        raise ValueError(f"side must be 'below' or 'above', got {side!r}")
    below = side == "below"
    mean = d.mean
    if is_exp_family(d):
        lo, hi = d.mean_interval
        if (below and x >= mean) or (not below and x <= mean):
            return RateValue(0.0, 0.0, Method.CLOSED_FORM_D)
        # no family member has its mean on or beyond the interval ends
        if (below and x <= lo) or (not below and x >= hi):
            return _inf()
        return fenchel_dual(d, x)
    end = d.lower_end if below else d.upper_end
    if strict and x == end:
        return _inf()
    if (below and x >= mean) or (not below and x <= mean):
        return RateValue(0.0, 0.0, Method.DUALITY_TILT)
    return fenchel_dual(d, x)


def tilt(d: Distribution, lam: float) -> FiniteSupport:
    """Exponential reweighting of a finite-support distribution by ``e^{lam x}``."""
    if not isinstance(d, FiniteSupport):
        raise ValueError("tilting is only defined here for finite-support distributions")
    if lam == 0.0:
        return d
    w = np.exp(d.tilted_log_weights(lam))
    return FiniteSupport(d.atoms, tuple(w / w.sum()))


def _check_pair(worse: Distribution, better: Distribution) -> None:
    check_same_model(worse, better)
    if not worse.mean < better.mean:
        raise ValueError(
            f"expected E(worse) < E(better), got {worse.mean!r} >= {better.mean!r}")


def pair_rate(worse: Distribution, better: Distribution) -> RateValue:
    """inf over x in [E(worse), E(better)] of phi*_worse(x) + phi*_better(x)."""
    _check_pair(worse, better)
    lo = max(worse.mean, better.lower_end)
    hi = min(better.mean, worse.upper_end)
    method = Method.CLOSED_FORM_D if is_exp_family(worse) else Method.DUALITY_TILT
    if lo > hi:
        return _inf()

    def total(x):
        return fenchel_dual(worse, x).value + fenchel_dual(better, x).value

    x, value = golden_min(total, lo, hi)
    if not math.isfinite(value):
        return _inf()
    if lo == hi:
        method = Method.ATOM_FORMULA
    return RateValue(value, x, method)


def chernoff_d(worse: Distribution, better: Distribution) -> RateValue:
    """Chernoff information: d(y, mu) at the y where d(y, mu') = d(y, mu)."""
    _check_pair(worse, better)
    if not is_exp_family(worse):
        raise ValueError("Chernoff information is computed for exponential families only")
    mu_w, mu_b = worse.mean, better.mean

    def gap(y):
        return exp_family_divergence(worse, y, mu_w) - exp_family_divergence(worse, y, mu_b)

    a, b = bisect_sign(gap, mu_w, mu_b)
    y = 0.5 * (a + b)
    return RateValue(exp_family_divergence(worse, y, mu_b), y, Method.CLOSED_FORM_D)


def _bounded_support(d: Distribution) -> bool:
    return isinstance(d, (FiniteSupport, Bernoulli))


def gap_lower_bounds(worse: Distribution, better: Distribution) -> tuple[float, float]:
    """Return ``(2 gap^2, gap^2)``: Pinsker floor on one L_inf, Hoeffding floor on the pair rate."""
    check_same_model(worse, better)
    if not (_bounded_support(worse) and _bounded_support(better)):
        raise ValueError("gap floors need distributions supported in [0, 1]")
    gap = better.mean - worse.mean
    if gap < 0:
        raise ValueError("expected E(worse) <= E(better)")
    return 2.0 * gap * gap, gap * gap


def primal_linf(d: FiniteSupport, mean_lo: float, mean_hi: float) -> float:
    """inf KL(zeta, d) over zeta on the atoms of d with E(zeta) in [mean_lo, mean_hi].

    Solved directly as a convex program over the simplex; this route does not
    use log-MGFs or tilts. Any zeta with finite KL lives on the atoms of d.
    """
    import cvxpy as cp

    w = np.array(d.weights)
    a = np.array(d.atoms)
    if mean_hi < d.lower_end or mean_lo > d.upper_end:
        return math.inf
    z = cp.Variable(len(w), nonneg=True)
    constraints = [cp.sum(z) == 1]
    if math.isfinite(mean_lo):
        constraints.append(a @ z >= mean_lo)
    if math.isfinite(mean_hi):
        constraints.append(a @ z <= mean_hi)
    prob = cp.Problem(cp.Minimize(cp.sum(cp.rel_entr(z, w))), constraints)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        return math.inf
    return max(float(prob.value), 0.0)
