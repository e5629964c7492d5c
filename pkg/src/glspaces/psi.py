"""Generating functions psi: (A, B) -> (0, inf] and their algebra.

A generating function is positive on an open exponent interval (A, B)
with 1 <= A < B <= inf and is formally +inf outside [A, B].  Three kinds
are supported:

* ``closed_form``  -- an expression in the variable p;
* ``natural``      -- p |-> |f|_p computed lazily by quadrature;
* ``tabulated``    -- grid values interpolated log-linearly in 1/p.

The tabulated interpolation is exact for the family c^(1/p) and, by the
interpolation inequality for Lebesgue norms (log |f|_p is convex in 1/p),
never underestimates a natural table between its nodes.  Outside the
tabulated node range the value is reported as +inf even inside (A, B):
extrapolating a chord would underestimate the blow-up at the support
boundary, which is the unsafe direction for every bound in this package.

B = inf is represented by ``math.inf``, never a large sentinel.
PsiFunction values are immutable after construction and all operations
are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidSupport, MaxSubdivisionsExceeded, NonPositiveScale, NowhereIntegrable
from .expr import Expr, compile_expr, parse, to_source
from .quadrature import (
    MeasureSpace,
    RealFunction,
    detect_lp_support,
    lp_norm,
)

__all__ = [
    "Support", "PsiFunction", "PsiValidationReport", "canonical_grid",
    "make_psi", "psi_from_expr", "psi_from_table", "natural_psi",
    "validate", "homothety", "psi_to_json", "psi_from_json",
]


@dataclass(frozen=True)
class Support:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (lo >= 1.0 and lo < hi):
            raise InvalidSupport(f"support must satisfy 1 <= A < B, got ({lo}, {hi})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def contains(self, p: float) -> bool:
        """Strict open-interval membership."""
        return self.lo < p < self.hi

    def as_json(self):
        return [self.lo, "inf" if math.isinf(self.hi) else self.hi]


def canonical_grid(lo: float, hi: float, n: int = 64) -> list[float]:
    """Exponent grid clustered toward both endpoints of (lo, hi).

    For hi = inf the grid is lo + 2^k, k = -20..20 (the k >= 0 part probes
    the tail, the k < 0 part clusters toward lo).
    """
    if math.isinf(hi):
        return [lo + 2.0 ** k for k in range(-20, 21)]
    half = n // 2
    span = 0.5 * (hi - lo)
    ratio = (2.0e-6) ** (1.0 / (half - 0.5))
    left = {lo + span * ratio ** (j + 0.5) for j in range(half)}
    right = {hi - span * ratio ** j for j in range(half)}
    return [p for p in sorted(left | right) if lo < p < hi]


class PsiFunction:
    """Immutable generating function with open support and lazy scale."""

    def __init__(self, kind: str, support: Support, scale: float = 1.0,
                 expr: Optional[Expr] = None,
                 table: Optional[Sequence] = None,
                 source: Optional[RealFunction] = None,
                 measure: Optional[MeasureSpace] = None,
                 natural_source: Optional[RealFunction] = None):
        if kind not in ("closed_form", "natural", "tabulated"):
            raise ValueError(f"unknown psi kind {kind!r}")
        if scale <= 0:
            raise NonPositiveScale(f"scale must be positive, got {scale}")
        self.kind = kind
        self.support = support
        self.scale = float(scale)
        self.expr = expr
        self.source = source
        self.measure = measure
        self.natural_source = natural_source
        self._tab_u = None
        self._tab_logv = None
        if kind == "closed_form":
            if expr is None:
                raise ValueError("closed_form psi needs an expression")
            self._fn = compile_expr(expr)
        elif kind == "natural":
            if source is None or measure is None:
                raise ValueError("natural psi needs a function and a measure")
        else:
            if not table:
                raise ValueError("tabulated psi needs grid nodes")
            pairs = sorted((float(p), float(v)) for p, v in table)
            ps = np.array([p for p, _ in pairs])
            vs = np.array([v for _, v in pairs])
            if np.any(np.diff(ps) <= 0):
                raise ValueError("tabulated nodes must have distinct p")
            if np.any(vs < 0):
                raise ValueError("tabulated values must be nonnegative")
            # store ascending in u = 1/p
            us = 1.0 / ps[::-1]
            with np.errstate(divide="ignore"):
                logv = np.log(vs[::-1])
            self._tab_u = us
            self._tab_logv = logv
            self.table = pairs

    # -- evaluation ---------------------------------------------------------

    def eval_array(self, ps) -> np.ndarray:
        ps = np.asarray(ps, dtype=float)
        out = np.full(ps.shape, math.inf)
        inside = (ps >= self.support.lo) & (ps <= self.support.hi)
        if not inside.any():
            return out
        sel = ps[inside]
        with np.errstate(all="ignore"):
            if self.kind == "closed_form":
                vals = np.asarray(self._fn(sel), dtype=float)
                vals = np.where(np.isfinite(vals), vals, math.inf)
            elif self.kind == "tabulated":
                us = 1.0 / sel
                cover = (us >= self._tab_u[0]) & (us <= self._tab_u[-1])
                vals = np.full(sel.shape, math.inf)
                if cover.any():
                    interp = np.interp(us[cover], self._tab_u, self._tab_logv)
                    vals[cover] = np.exp(interp)
            else:
                vals = np.array([self._natural_value(p) for p in np.ravel(sel)])
                vals = vals.reshape(sel.shape)
        out[inside] = self.scale * np.broadcast_to(vals, sel.shape)
        return out

    def _natural_value(self, p: float) -> float:
        try:
            r = lp_norm(self.source, p, self.measure)
        except MaxSubdivisionsExceeded:
            return math.inf
        return math.inf if r.divergent else r.value

    def __call__(self, p: float) -> float:
        return float(self.eval_array(np.asarray(float(p))))

    # -- helpers ------------------------------------------------------------

    @property
    def node_ps(self) -> Optional[np.ndarray]:
        if self.kind != "tabulated":
            return None
        return (1.0 / self._tab_u)[::-1]

    def with_scale(self, scale: float) -> "PsiFunction":
        new = PsiFunction.__new__(PsiFunction)
        new.__dict__.update(self.__dict__)
        new.scale = float(scale)
        return new

    def describe(self) -> str:
        if self.kind == "closed_form":
            core = to_source(self.expr)
        elif self.kind == "natural":
            core = f"natural[{self.source.label}]"
        else:
            core = f"table[{len(self.table)} nodes]"
        return f"{core} on ({self.support.lo}, {self.support.hi}) scale {self.scale}"


@dataclass
class PsiValidationReport:
    positivity_ok: bool
    inf_on_grid: float
    support: Support
    grid_used: list[float]

    def to_json(self):
        return {"positivity_ok": self.positivity_ok,
                "inf_on_grid": None if math.isinf(self.inf_on_grid) else self.inf_on_grid,
                "support": self.support.as_json(),
                "grid_used": self.grid_used}


def psi_from_expr(source, support) -> PsiFunction:
    e = parse(source) if isinstance(source, str) else source
    return PsiFunction("closed_form", Support(*support), expr=e)


def psi_from_table(pairs, support=None) -> PsiFunction:
    pairs = sorted((float(p), float(v)) for p, v in pairs)
    if support is None:
        lo = max(1.0, pairs[0][0] if pairs[0][0] > 1.0 else 1.0)
        hi = pairs[-1][0] if len(pairs) > 1 else pairs[0][0] + 1.0
        if hi <= lo:
            hi = lo + 1.0
        support = (lo, hi)
    return PsiFunction("tabulated", Support(*support), table=pairs)


def make_psi(kind: str, payload, support) -> PsiFunction:
    """Uniform constructor used by the CLI and JSON loaders."""
    sup = Support(*support)
    if kind == "closed_form":
        e = parse(payload) if isinstance(payload, str) else payload
        return PsiFunction("closed_form", sup, expr=e)
    if kind == "tabulated":
        return PsiFunction("tabulated", sup, table=payload)
    if kind == "natural":
        f, m = payload
        return PsiFunction("natural", sup, source=f, measure=m, natural_source=f)
    raise ValueError(f"unknown psi kind {kind!r}")


_DEFAULT_PROBES = (1.0, 1.1, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0, 6.0, 9.0)


def natural_psi(f: RealFunction, m: MeasureSpace,
                probe_grid: Optional[Sequence[float]] = None,
                tol: float = 1e-8) -> PsiFunction:
    """Tabulated generating function p |-> |f|_p.

    The admissible exponent interval (A, B) comes from the endpoint power
    laws of f (divergence detection); the table holds |f|_p at the probe
    grid plus the canonical grid of (A, B), dropping exponents where the
    quadrature refuses to conclude.
    """
    lo, hi = detect_lp_support(f, m)
    if lo is None:
        raise NowhereIntegrable(
            f"|{f.label}|_p diverges for every exponent p >= 1")
    probes = list(probe_grid) if probe_grid is not None else list(_DEFAULT_PROBES)
    nodes = sorted({p for p in probes if lo <= p < hi} |
                   set(canonical_grid(lo, hi)))
    pairs = []
    for p in nodes:
        try:
            r = lp_norm(f, p, m, tol=tol)
        except MaxSubdivisionsExceeded:
            continue
        if not r.divergent:
            pairs.append((p, r.value))
    if not pairs:
        raise NowhereIntegrable(
            f"no conclusive finite |{f.label}|_p on the probe grid")
    psi = PsiFunction("tabulated", Support(lo, hi), table=pairs,
                      source=f, measure=m, natural_source=f)
    return psi


def validate(psi: PsiFunction, grid: Optional[Sequence[float]] = None) -> PsiValidationReport:
    """Positivity check on a grid (canonical grid of the support by default)."""
    if grid is None:
        grid = canonical_grid(psi.support.lo, psi.support.hi)
    grid = [float(p) for p in grid]
    vals = psi.eval_array(np.asarray(grid))
    has_nan = bool(np.any(np.isnan(vals)))
    positivity_ok = not (has_nan or bool(np.any(vals <= 0)))
    if has_nan:
        inf_on_grid = 0.0
    else:
        inf_on_grid = float(np.min(vals)) if len(grid) else math.inf
    return PsiValidationReport(positivity_ok=positivity_ok,
                               inf_on_grid=inf_on_grid,
                               support=psi.support,
                               grid_used=grid)


def homothety(lam: float, psi: PsiFunction) -> PsiFunction:
    """Pointwise scaling T_lam[psi] = lam * psi; support is preserved."""
    if not lam > 0:
        raise NonPositiveScale(f"homothety factor must be positive, got {lam}")
    return psi.with_scale(psi.scale * float(lam))


def psi_to_json(psi: PsiFunction) -> dict:
    out = {"kind": psi.kind, "support": psi.support.as_json(), "scale": psi.scale}
    if psi.kind == "closed_form":
        out["expr"] = to_source(psi.expr)
    elif psi.kind == "tabulated":
        out["nodes"] = [[p, v] for p, v in psi.table]
    else:
        if callable(psi.source.body):
            raise ValueError("cannot serialize a natural psi over a callable")
        out["f"] = to_source(psi.source.body)
        out["measure"] = psi.measure.describe()
    return out


def _measure_from_json(d) -> MeasureSpace:
    from .quadrature import Box, RealLine, UnitInterval, fn as _fn
    dom = d["domain"]
    if dom == "unit":
        domain = UnitInterval()
    elif dom == "line":
        domain = RealLine()
    else:
        domain = Box(tuple(tuple(ab) for ab in dom["box"]))
    density = None if d.get("density") in (None, "") else _fn(d["density"])
    return MeasureSpace(domain, density)


def psi_from_json(d: dict) -> PsiFunction:
    lo, hi = d["support"]
    hi = math.inf if hi == "inf" else float(hi)
    sup = (float(lo), hi)
    scale = float(d.get("scale", 1.0))
    if d["kind"] == "closed_form":
        psi = psi_from_expr(d["expr"], sup)
    elif d["kind"] == "tabulated":
        psi = PsiFunction("tabulated", Support(*sup), table=d["nodes"])
    elif d["kind"] == "natural":
        from .quadrature import fn as _fn
        f = _fn(d["f"])
        m = _measure_from_json(d["measure"])
        psi = PsiFunction("natural", Support(*sup), source=f, measure=m,
                          natural_source=f)
    else:
        raise ValueError(f"unknown psi kind {d['kind']!r}")
    return psi.with_scale(scale) if scale != 1.0 else psi
