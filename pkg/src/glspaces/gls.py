"""The Grand Lebesgue norm: sup over p in (A, B) of |f|_p / psi(p).

The supremum is taken over the canonical endpoint-clustered grid of the
support, then refined with a golden-section pass around the best node.
Grid points where psi is +inf contribute zero (they lie outside the
space); a single divergent |f|_p strictly inside the support makes the
norm infinite.  Exponents where the quadrature refuses to conclude are
skipped and reported, never silently dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import MaxSubdivisionsExceeded
from .psi import PsiFunction, canonical_grid
from .quadrature import DEFAULT_TOL, MeasureSpace, RealFunction, lp_norm
from .search import golden_max

__all__ = ["GlsOptions", "GlsNormReport", "gls_norm"]


@dataclass(frozen=True)
class GlsOptions:
    tol: float = DEFAULT_TOL
    refine_iters: int = 24

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass
class GlsNormReport:
    value: float                      # math.inf when the norm is infinite
    argmax_p: Optional[float]
    at_boundary: Optional[str]        # 'left' | 'right' | None
    grid: list = field(default_factory=list)   # (p, ratio) pairs
    refined: bool = False
    skipped: list = field(default_factory=list)  # (p, reason)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    def to_json(self) -> dict:
        return {
            "value": "infinite" if self.is_infinite else self.value,
            "argmax_p": self.argmax_p,
            "at_boundary": self.at_boundary,
            "refined": self.refined,
            "grid": [[p, r] for p, r in self.grid],
            "skipped": [[p, why] for p, why in self.skipped],
        }


def gls_norm(f: RealFunction, psi: PsiFunction, m: MeasureSpace,
             opts: Optional[GlsOptions] = None) -> GlsNormReport:
    opts = opts or GlsOptions()
    sup = psi.support
    grid = canonical_grid(sup.lo, sup.hi)
    rows = []
    skipped = []
    best_idx = None
    best = -1.0

    for p in grid:
        pv = psi(p)
        if not math.isfinite(pv) or pv <= 0:
            skipped.append((p, "psi not finite-positive"))
            continue
        try:
            r = lp_norm(f, p, m, tol=opts.tol)
        except MaxSubdivisionsExceeded:
            skipped.append((p, "quadrature inconclusive"))
            continue
        if r.divergent:
            return GlsNormReport(value=math.inf, argmax_p=p, at_boundary=None,
                                 grid=rows, refined=False, skipped=skipped)
        ratio = r.value / pv
        rows.append((p, ratio))
        if ratio > best:
            best = ratio
            best_idx = len(rows) - 1

    if not rows:
        raise ValueError("no usable grid exponent inside the support")

    def ratio_at(p: float) -> float:
        pv = psi(p)
        if not math.isfinite(pv) or pv <= 0:
            return 0.0
        try:
            r = lp_norm(f, p, m, tol=opts.tol)
        except MaxSubdivisionsExceeded:
            return 0.0
        if r.divergent:
            return math.inf
        return r.value / pv

    argmax_p = rows[best_idx][0]
    value = best
    refined = False
    if best > 0 and opts.refine_iters > 0 and len(rows) > 1:
        lo = rows[best_idx - 1][0] if best_idx > 0 else rows[best_idx][0]
        hi = rows[best_idx + 1][0] if best_idx + 1 < len(rows) else rows[best_idx][0]
        if hi > lo:
            px, vx = golden_max(ratio_at, lo, hi, iters=opts.refine_iters)
            if math.isinf(vx):
                return GlsNormReport(value=math.inf, argmax_p=px, at_boundary=None,
                                     grid=rows, refined=True, skipped=skipped)
            if vx > value:
                value, argmax_p = vx, px
            refined = True

    at_boundary = None
    if best_idx == 0:
        at_boundary = "left"
    elif best_idx == len(rows) - 1:
        at_boundary = "right"
    return GlsNormReport(value=value, argmax_p=argmax_p, at_boundary=at_boundary,
                         grid=rows, refined=refined, skipped=skipped)
