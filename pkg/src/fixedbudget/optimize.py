"""Scalar search routines for convex and monotone functions."""
from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_min(f: Callable[[float], float], lo: float, hi: float,
               tol: float = 1e-12, max_iter: int = 200) -> tuple[float, float]:
    """Minimize a convex ``f`` on ``[lo, hi]``; returns ``(x, f(x))``.

    The endpoints are evaluated too, so a minimum sitting on the boundary is
    returned exactly. ``f`` may be +inf at the endpoints but should be finite
    inside.
    """
    if hi < lo:
        raise ValueError("empty interval")
    f_lo, f_hi = f(lo), f(hi)
    if hi == lo:
        return lo, f_lo
    a, b = lo, hi
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    width = tol * max(1.0, abs(lo), abs(hi))
    for _ in range(max_iter):
        if b - a <= width:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
    best = min((f1, x1), (f2, x2), (f_lo, lo), (f_hi, hi))
    return best[1], best[0]


def bisect_sign(g: Callable[[float], float], lo: float, hi: float,
                tol: float = 1e-14, max_iter: int = 200) -> tuple[float, float]:
    """Shrink ``[lo, hi]`` around a sign change of a nondecreasing ``g``.

    Assumes ``g(lo) <= 0 <= g(hi)``. Returns the final bracket.
    """
    width = tol * max(1.0, abs(lo), abs(hi))
    for _ in range(max_iter):
        if hi - lo <= width:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return lo, hi
