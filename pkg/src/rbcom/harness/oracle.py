"""Scalar references that do not touch the round-trip simulator."""

from __future__ import annotations

import math


def bisect_fixed_point(small_signal_gain: float, survival: float, saturation_power_w: float,
                       rel_tol: float = 1e-13, max_iter: int = 400) -> float:
    """Root of exp(g0 / (1 + P/P_sat)) * survival = 1 by bisection; 0 below threshold."""
    def excess(p):
        return small_signal_gain / (1.0 + p / saturation_power_w) + math.log(survival)

    if excess(0.0) <= 0.0:
        return 0.0
    lo, hi = 0.0, saturation_power_w
    while excess(hi) > 0.0:
        hi *= 2.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * hi:
            break
    return 0.5 * (lo + hi)
