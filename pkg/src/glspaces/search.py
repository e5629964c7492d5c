"""Golden-section refinement used by the norm and convolution searches."""

from __future__ import annotations

import math

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_min(f, a: float, b: float, iters: int = 40):
    """Golden-section minimum of f on [a, b]; returns (x, f(x)).

    f may return inf for infeasible points; the bracket endpoints are also
    candidates, so a minimum at the boundary is kept.
    """
    a, b = (a, b) if a <= b else (b, a)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    best_x, best_v = (c, fc) if fc <= fd else (d, fd)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        if fc < best_v:
            best_x, best_v = c, fc
        if fd < best_v:
            best_x, best_v = d, fd
    return best_x, best_v


def golden_max(f, a: float, b: float, iters: int = 40):
    x, v = golden_min(lambda t: -f(t), a, b, iters)
    return x, -v
