"""Composition operators, pushforward densities, and bound certificates.

A composition map pairs a transformation xi of the measure space with the
density h of its image measure: mu{y : xi(y) in A} = int_A h dmu.  For
strictly monotone differentiable xi on the unit interval the density is
the derivative of the inverse; powers and affine maps get closed forms,
anything else is inverted numerically.

``verify_bound`` certifies, row by row over an exponent grid, that
|f o xi|_p stays below nu(p) * ||f||, where nu is the convolution of the
two generating functions and ||f|| the Grand Lebesgue norm of f.  Rows
are compared with a relative slack; violations within the estimated
quadrature error are downgraded to warnings, never dropped.

``linear_substitute`` and ``linear_bound_check`` cover the nondegenerate
linear change of variables on R^d (d <= 3) and the fundamental-function
bound for factorable generating functions.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    FactorizationMismatch,
    InversionFailed,
    MaxSubdivisionsExceeded,
    NotMonotone,
    RangeMismatch,
    SingularMatrix,
)
from .expr import BinOp, Call, Neg, Num, Var
from .gls import GlsOptions, gls_norm
from .odot import OdotResult, odot_tabulate
from .psi import PsiFunction, canonical_grid
from .quadrature import (
    Box,
    DEFAULT_TOL,
    MeasureSpace,
    RealFunction,
    RealLine,
    UnitInterval,
    fn,
    fn_from_callable,
    lp_norm,
    real_line,
    unit_lebesgue,
)
from .search import golden_max

__all__ = [
    "CompositionMap", "BoundRow", "BoundReport", "FundamentalValue",
    "identity_map", "compose", "pushforward_density", "verify_bound",
    "holder_split", "linear_substitute", "fundamental_function",
    "linear_bound_check", "pushforward_identity_residual",
]


@dataclass
class CompositionMap:
    xi: RealFunction
    density: Optional[RealFunction]      # None marks an underivable density
    derivation: str                      # closed_form | monotone_inverse | user_supplied

    def describe(self) -> dict:
        return {"xi": self.xi.label,
                "density": None if self.density is None else self.density.label,
                "derivation": self.derivation}


def identity_map() -> CompositionMap:
    return CompositionMap(xi=fn("x"), density=fn("0*x + 1", hints=(0.0, 0.0)),
                          derivation="closed_form")


def _probe_grid(m: MeasureSpace, n: int = 64) -> np.ndarray:
    if isinstance(m.domain, RealLine):
        return np.concatenate([-(10.0 ** np.linspace(-2, 2, n // 2)),
                               10.0 ** np.linspace(-2, 2, n // 2)])
    (a, b), = m.domain.bounds
    inner = a + (b - a) * np.linspace(1e-6, 1 - 1e-6, n)
    return inner


def compose(f: RealFunction, c: CompositionMap,
            m: Optional[MeasureSpace] = None) -> RealFunction:
    """f o xi with range checking on a sample grid; singularity hints are
    re-estimated from the composed evaluations, not copied."""
    m = m or unit_lebesgue()
    xs = _probe_grid(m)
    with np.errstate(all="ignore"):
        ys = c.xi.eval_array(xs)
    if not np.all(np.isfinite(ys)):
        raise RangeMismatch(f"{c.xi.label} is not finite on the domain")
    if isinstance(m.domain, UnitInterval):
        if ys.min() < 0.0 or ys.max() > 1.0:
            raise RangeMismatch(
                f"{c.xi.label} maps the unit interval to "
                f"[{ys.min():.4g}, {ys.max():.4g}], outside the domain of {f.label}")

    def comp(xs_):
        xs_ = np.asarray(xs_, dtype=float)
        return f.eval_array(c.xi.eval_array(xs_))

    return RealFunction(comp, vectorized=True,
                        label=f"({f.label}) o ({c.xi.label})")


# -- pushforward density ----------------------------------------------------

def _as_power(e) -> Optional[float]:
    """Match x^m (m a positive literal); returns m or None."""
    if isinstance(e, Var):
        return 1.0
    if isinstance(e, BinOp) and e.op == "^" and isinstance(e.left, Var):
        ex = e.right
        if isinstance(ex, Num) and ex.value > 0:
            return float(ex.value)
    if isinstance(e, Call) and e.name == "pow" and isinstance(e.args[0], Var):
        ex = e.args[1]
        if isinstance(ex, Num) and ex.value > 0:
            return float(ex.value)
    if isinstance(e, Call) and e.name == "sqrt" and isinstance(e.args[0], Var):
        return 0.5
    return None


def _as_affine(e) -> Optional[tuple]:
    """Match a*x + b with literal coefficients; returns (a, b) or None."""
    def lit(node):
        if isinstance(node, Num):
            return float(node.value)
        if isinstance(node, Neg):
            v = lit(node.operand)
            return None if v is None else -v
        return None

    def ax(node):
        if isinstance(node, Var):
            return 1.0
        if isinstance(node, BinOp) and node.op == "*":
            c, v = lit(node.left), node.right
            if c is not None and isinstance(v, Var):
                return c
            c, v = lit(node.right), node.left
            if c is not None and isinstance(v, Var):
                return c
        if isinstance(node, Neg):
            a = ax(node.operand)
            return None if a is None else -a
        return None

    a = ax(e)
    if a is not None:
        return a, 0.0
    if isinstance(e, BinOp) and e.op in "+-":
        sign = 1.0 if e.op == "+" else -1.0
        a, b = ax(e.left), lit(e.right)
        if a is not None and b is not None:
            return a, sign * b
        b, a = lit(e.left), ax(e.right)
        if a is not None and b is not None:
            return sign * a, b
    return None


def _check_monotone(xi: RealFunction, m: MeasureSpace) -> int:
    xs = _probe_grid(m, 129)
    ys = xi.eval_array(xs)
    if not np.all(np.isfinite(ys)):
        raise NotMonotone(f"{xi.label} is not finite on the probe grid")
    d = np.diff(ys)
    if np.all(d > 0):
        return +1
    if np.all(d < 0):
        return -1
    raise NotMonotone(f"{xi.label} changes direction on the probe grid")


def pushforward_density(xi: RealFunction, m: MeasureSpace,
                        user_density: Optional[RealFunction] = None) -> CompositionMap:
    """Density of the image measure of xi against the base measure.

    Supported derivations: closed forms for recognized powers and affine
    maps of the unit interval, numerical inversion plus differentiation
    for other strictly monotone xi, or a user-supplied density.
    """
    if user_density is not None:
        return CompositionMap(xi=xi, density=user_density, derivation="user_supplied")
    if not isinstance(m.domain, UnitInterval):
        raise ValueError("density derivation is supported on the unit interval; "
                         "supply the density for other domains")
    direction = _check_monotone(xi, m)
    e = xi.body if not callable(xi.body) else None
    if e is not None:
        mm = _as_power(e)
        if mm is not None:
            expo = 1.0 / mm - 1.0
            body = BinOp("*", Num(1.0 / mm), BinOp("^", Var("x"), Num(expo)))
            h = RealFunction(body, hint_left=expo, hint_right=0.0)
            return CompositionMap(xi=xi, density=h, derivation="closed_form")
        aff = _as_affine(e)
        if aff is not None:
            a, b = aff
            lo, hi = sorted((b, a + b))

            def h_affine(zs):
                zs = np.asarray(zs, dtype=float)
                inside = (zs > lo) & (zs < hi)
                return np.where(inside, 1.0 / abs(a), 0.0)

            h = fn_from_callable(h_affine, hints=(0.0, 0.0), vectorized=True,
                                 label=f"{1.0 / abs(a)!r}*indicator({lo!r},{hi!r})")
            return CompositionMap(xi=xi, density=h, derivation="closed_form")

    # numerical route: h(z) = 1 / |xi'(inv(z))|
    lo_y = float(xi.eval_array(np.asarray([1e-12]))[0])
    hi_y = float(xi.eval_array(np.asarray([1.0 - 1e-12]))[0])
    y_min, y_max = sorted((lo_y, hi_y))

    def invert(z: float) -> float:
        if not (y_min - 1e-9 <= z <= y_max + 1e-9):
            raise InversionFailed(
                f"{z!r} outside the range [{y_min:.6g}, {y_max:.6g}] of {xi.label}")
        a, b = 1e-12, 1.0 - 1e-12
        fa = float(xi.eval_array(np.asarray([a]))[0]) - z
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = float(xi.eval_array(np.asarray([mid]))[0]) - z
            if fm == 0.0 or (b - a) < 1e-16:
                return mid
            if (fa < 0) == (fm < 0):
                a, fa = mid, fm
            else:
                b = mid
        return 0.5 * (a + b)

    def h_numeric(zs):
        zs = np.ravel(np.asarray(zs, dtype=float))
        out = np.empty_like(zs)
        for i, z in enumerate(zs):
            if not (y_min <= z <= y_max):
                out[i] = 0.0
                continue
            y = invert(z)
            step = max(1e-7, 1e-7 * abs(y))
            y0, y1 = max(1e-13, y - step), min(1.0 - 1e-13, y + step)
            d = (float(xi.eval_array(np.asarray([y1]))[0]) -
                 float(xi.eval_array(np.asarray([y0]))[0])) / (y1 - y0)
            if d == 0.0 or not math.isfinite(d):
                raise InversionFailed(f"flat derivative of {xi.label} at {y!r}")
            out[i] = 1.0 / abs(d)
        return out

    h = fn_from_callable(h_numeric, vectorized=True,
                         label=f"numeric-density[{xi.label}]")
    del direction
    return CompositionMap(xi=xi, density=h, derivation="monotone_inverse")


def pushforward_identity_residual(c: CompositionMap, m: MeasureSpace,
                                  n: int = 20, seed: int = 0,
                                  tol: float = 1e-9) -> float:
    """Max |mu{xi in (u,v)} - int_u^v h dmu| over n random rectangles.

    The left side is measured through the monotone preimage, the right by
    quadrature of the density.
    """
    if not isinstance(m.domain, UnitInterval):
        raise ValueError("identity check is defined on the unit interval")
    from .quadrature import product_fn
    rng = np.random.default_rng(seed)
    xs = np.sort(_probe_grid(m, 257))
    ys = c.xi.eval_array(xs)
    order = np.argsort(ys)
    ys_sorted, xs_sorted = ys[order], xs[order]
    w = m.density
    h_weighted = c.density if w is None else product_fn(c.density, w)
    worst = 0.0
    for _ in range(n):
        u, v = np.sort(rng.uniform(0.0, 1.0, size=2))
        if v - u < 1e-3:
            v = min(1.0, u + 1e-3)
        # preimage endpoints by interpolation + local bisection refinement
        pre_u = float(np.interp(u, ys_sorted, xs_sorted))
        pre_v = float(np.interp(v, ys_sorted, xs_sorted))
        pre_u, pre_v = _refine_preimage(c.xi, u, pre_u), _refine_preimage(c.xi, v, pre_v)
        lo, hi = sorted((pre_u, pre_v))
        if w is None:
            lhs = hi - lo
        else:
            lhs = _interval_mass(w, lo, hi, tol)
        rhs = _interval_mass(h_weighted, u, v, tol)
        worst = max(worst, abs(lhs - rhs))
    return worst


def _refine_preimage(xi: RealFunction, target: float, guess: float) -> float:
    lo = max(1e-15, guess - 1e-3)
    hi = min(1.0 - 1e-15, guess + 1e-3)
    flo = float(xi.eval_array(np.asarray([lo]))[0]) - target
    fhi = float(xi.eval_array(np.asarray([hi]))[0]) - target
    if (flo < 0) == (fhi < 0):
        return min(1.0, max(0.0, guess))
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        fm = float(xi.eval_array(np.asarray([mid]))[0]) - target
        if (flo < 0) == (fm < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _interval_mass(g: RealFunction, a: float, b: float, tol: float) -> float:
    if b <= a:
        return 0.0
    sub = MeasureSpace(Box(((a, b),)))
    r = lp_norm(g, 1.0, sub, tol=tol)
    return r.require_finite()


# -- bound reports ----------------------------------------------------------

@dataclass
class BoundRow:
    p: float
    lhs: float
    rhs: float
    margin: float
    verdict: str          # pass | warn | fail | inconclusive | no_bound
    alpha: Optional[float] = None

    def as_list(self):
        enc = lambda v: "inf" if (isinstance(v, float) and math.isinf(v)) else v  # noqa: E731
        return [self.p, enc(self.lhs), enc(self.rhs), enc(self.margin), self.verdict]


@dataclass
class BoundReport:
    rows: list
    overall: str          # pass | pass_with_warnings | fail | empty_nu_support
    inputs_digest: str
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.overall in ("pass", "pass_with_warnings")

    def to_json(self) -> dict:
        return {"overall": self.overall,
                "inputs_digest": self.inputs_digest,
                "notes": list(self.notes),
                "rows": [dict(zip(("p", "lhs", "rhs", "margin", "verdict"),
                                  r.as_list())) for r in self.rows]}

    def csv_rows(self):
        yield ("p", "lhs", "rhs", "margin", "verdict")
        for r in self.rows:
            yield tuple(repr(v) if isinstance(v, float) else str(v)
                        for v in r.as_list())


def _digest(payload) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def verify_bound(f: RealFunction, psi: PsiFunction, c: CompositionMap,
                 theta: PsiFunction, m: MeasureSpace,
                 p_grid: Sequence[float], tol_slack: float = 1e-6,
                 tol: float = DEFAULT_TOL) -> BoundReport:
    """Certify |f o xi|_p <= nu(p) * ||f|| on the exponent grid.

    When theta is the natural generating function of the density, its norm
    is asserted to be 1 and the convolution uses exactly 1.
    """
    if c.density is None:
        raise ValueError("composition map carries no density")
    notes = []
    f_norm_rep = gls_norm(f, psi, m, GlsOptions(tol=tol))
    if f_norm_rep.is_infinite:
        raise ValueError("||f|| is infinite for the supplied psi")
    f_norm = f_norm_rep.value

    if theta.natural_source is c.density:
        h_norm_rep = gls_norm(c.density, theta, m, GlsOptions(tol=tol))
        if abs(h_norm_rep.value - 1.0) > 0.05:
            raise ValueError(
                f"natural theta should have unit norm, got {h_norm_rep.value}")
        if abs(h_norm_rep.value - 1.0) > 1e-6:
            notes.append(f"natural theta norm {h_norm_rep.value!r} snapped to 1")
        h_norm = 1.0
    else:
        h_norm_rep = gls_norm(c.density, theta, m, GlsOptions(tol=tol))
        if h_norm_rep.is_infinite:
            raise ValueError("||h|| is infinite for the supplied theta")
        h_norm = h_norm_rep.value

    od = odot_tabulate(psi, theta, h_norm, p_grid)
    g = compose(f, c, m)
    rows = []
    n_feasible = 0
    for r in od.rows:
        if not r.feasible:
            rows.append(BoundRow(p=r.p, lhs=math.nan, rhs=math.inf,
                                 margin=math.inf, verdict="no_bound"))
            continue
        n_feasible += 1
        rhs = r.value * f_norm
        try:
            lhs_res = lp_norm(g, r.p, m, tol=tol)
        except MaxSubdivisionsExceeded:
            rows.append(BoundRow(p=r.p, lhs=math.nan, rhs=rhs, margin=math.nan,
                                 verdict="inconclusive", alpha=r.alpha))
            continue
        if lhs_res.divergent:
            rows.append(BoundRow(p=r.p, lhs=math.inf, rhs=rhs, margin=-math.inf,
                                 verdict="fail", alpha=r.alpha))
            continue
        lhs = lhs_res.value
        margin = rhs - lhs
        rel_viol = (lhs - rhs) / max(abs(rhs), 1e-300)
        if rel_viol <= tol_slack:
            verdict = "pass"
        elif rel_viol <= tol_slack + 10.0 * tol:
            verdict = "warn"  # violation within quadrature error
        else:
            verdict = "fail"
        rows.append(BoundRow(p=r.p, lhs=lhs, rhs=rhs, margin=margin,
                             verdict=verdict, alpha=r.alpha))

    if n_feasible == 0:
        overall = "empty_nu_support"
        notes.append("convolution support does not meet the exponent grid")
    elif any(r.verdict == "fail" for r in rows):
        overall = "fail"
    elif any(r.verdict == "warn" for r in rows):
        overall = "pass_with_warnings"
    else:
        overall = "pass"
    digest = _digest({"f": f.label, "xi": c.xi.label, "psi": psi.describe(),
                      "theta": theta.describe(), "grid": list(map(float, p_grid)),
                      "tol_slack": tol_slack})
    return BoundReport(rows=rows, overall=overall, inputs_digest=digest,
                       notes=notes)


def holder_split(f: RealFunction, h: RealFunction, m: MeasureSpace,
                 p: float, alpha: float, tol: float = DEFAULT_TOL):
    """The two sides of the split int |f|^p h dmu <= |f|_ap^p |h|_b,
    reported as (lhs, rhs) with lhs = (int |f|^p h dmu)^(1/p) and
    rhs = |f|_{alpha p} * |h|_beta^(1/p); rhs is +inf when either factor
    diverges."""
    if not alpha > 1.0:
        raise ValueError("alpha must exceed 1")
    beta = alpha / (alpha - 1.0)
    weighted = m.with_extra_density(h)
    lhs = lp_norm(f, p, weighted, tol=tol).require_finite()

    def norm_or_inf(func, q):
        r = lp_norm(func, q, m, tol=tol)
        return math.inf if r.divergent else r.value

    try:
        f_part = norm_or_inf(f, alpha * p)
    except MaxSubdivisionsExceeded:
        f_part = math.inf
    try:
        h_part = norm_or_inf(h, beta)
    except MaxSubdivisionsExceeded:
        h_part = math.inf
    rhs = f_part * h_part ** (1.0 / p) if math.isfinite(f_part) and math.isfinite(h_part) else math.inf
    return lhs, rhs


# -- linear substitution -----------------------------------------------------

def linear_substitute(f: RealFunction, A, m: Optional[MeasureSpace] = None,
                      p: float = 1.0, tol: float = DEFAULT_TOL) -> float:
    """|f(Ax)|_p for a nondegenerate d x d matrix, d <= 3.

    Contract: equals |det A|^(-1/p) |f|_p (change of variables).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise SingularMatrix(f"matrix must be square, got {A.shape}")
    d = A.shape[0]
    if d > 3:
        raise ValueError("d <= 3 only")
    det = float(np.linalg.det(A))
    if abs(det) < 1e-300:
        raise SingularMatrix("matrix is numerically singular")
    if d == 1:
        m = m or real_line()
        a = float(A[0, 0])
        g = RealFunction(lambda xs: f.eval_array(a * np.asarray(xs, dtype=float)),
                         hint_left=f.hint_left, hint_right=f.hint_right,
                         vectorized=True, label=f"({f.label})(={a}x)")
        return lp_norm(g, p, m, tol=tol).require_finite()
    # d >= 2: iterated integration of |f(Ax)|^p over R^d (compactified)
    if m is not None and not isinstance(m.domain, (RealLine, Box)):
        raise ValueError("d >= 2 substitution is defined on R^d or a box")

    def gbody(pts):
        pts = np.asarray(pts, dtype=float)
        return np.asarray(f._compiled(pts @ A.T), dtype=float)

    return _iterated_lp(gbody, d, p, tol, box_bounds=(
        m.domain.axis_bounds if m is not None and isinstance(m.domain, Box) else None))


def _iterated_lp(gbody, d, p, tol, box_bounds=None):
    level_tol = tol / (2.0 * d)

    def axis_map(axis):
        if box_bounds is not None:
            a, b = box_bounds[axis]
            return (a, b), (lambda t: t), (lambda t: np.ones_like(t))
        return (-1.0, 1.0), (lambda t: t / (1.0 - t * t)), (
            lambda t: (1.0 + t * t) / (1.0 - t * t) ** 2)

    from .quadrature import _integrate_segments  # deterministic engine

    def integrate_axis(axis, fixed):
        (lo, hi), x_of, jac = axis_map(axis)

        if axis == d - 1:
            def g(ts):
                ts = np.asarray(ts, dtype=float)
                ok = np.abs(ts) < 1.0 if box_bounds is None else np.full(ts.shape, True)
                out = np.zeros_like(ts)
                if ok.any():
                    xs = x_of(ts[ok])
                    pts = np.empty((xs.size, d))
                    for j, v in enumerate(fixed):
                        pts[:, j] = v
                    pts[:, axis] = xs
                    with np.errstate(all="ignore"):
                        vals = np.abs(gbody(pts)) ** p * jac(ts[ok])
                    vals = np.where(np.isfinite(vals), vals, 0.0)
                    out[ok] = vals
                return out
        else:
            def g(ts):
                ts = np.asarray(ts, dtype=float)
                out = np.zeros_like(ts)
                for i, t in enumerate(ts):
                    if box_bounds is None and abs(t) >= 1.0:
                        continue
                    x = float(np.asarray(x_of(np.asarray([t])))[0])
                    out[i] = integrate_axis(axis + 1, fixed + (x,)) * float(
                        np.asarray(jac(np.asarray([t])))[0])
                return out

        eps = 0.0 if box_bounds is not None else 1e-8
        val, _e, _n = _integrate_segments([(lo + eps, hi - eps, g)],
                                          level_tol, 40_000)
        return val

    i_val = max(integrate_axis(0, ()), 0.0)
    return i_val ** (1.0 / p)


# -- fundamental function ----------------------------------------------------

@dataclass
class FundamentalValue:
    delta: float
    value: float
    argmax_p: Optional[float]
    at_boundary: Optional[str]   # 'left' | 'right' | None

    def to_json(self):
        return {"delta": self.delta, "value": self.value,
                "argmax_p": self.argmax_p, "at_boundary": self.at_boundary}


def fundamental_function(tau: PsiFunction, delta: float,
                         mu_total: float = math.inf) -> FundamentalValue:
    """sup over p in supp tau of delta^(1/p) / tau(p), for 0 < delta <=
    mu(X).  When the supremum sits at a grid extreme the report carries a
    boundary marker instead of extrapolating."""
    if not 0 < delta <= mu_total:
        raise ValueError(f"delta must lie in (0, mu(X)], got {delta}")
    grid = canonical_grid(tau.support.lo, tau.support.hi)

    def ratio(p: float) -> float:
        tv = tau(p)
        if not math.isfinite(tv) or tv <= 0:
            return 0.0
        return delta ** (1.0 / p) / tv

    vals = [(p, ratio(p)) for p in grid]
    vals = [(p, v) for p, v in vals if v > 0]
    if not vals:
        raise ValueError("tau is nowhere finite-positive on its grid")
    best_i = max(range(len(vals)), key=lambda i: vals[i][1])
    p_best, v_best = vals[best_i]
    if 0 < best_i < len(vals) - 1:
        px, vx = golden_max(ratio, vals[best_i - 1][0], vals[best_i + 1][0], iters=48)
        if vx > v_best:
            p_best, v_best = px, vx
    at_boundary = "left" if best_i == 0 else "right" if best_i == len(vals) - 1 else None
    return FundamentalValue(delta=delta, value=v_best, argmax_p=p_best,
                            at_boundary=at_boundary)


def linear_bound_check(f: RealFunction, psi: PsiFunction, zeta: PsiFunction,
                       tau: PsiFunction, A, m: Optional[MeasureSpace] = None,
                       p_grid: Optional[Sequence[float]] = None,
                       tol_slack: float = 1e-6,
                       tol: float = DEFAULT_TOL) -> BoundReport:
    """Certify |f(Ax)|_p / zeta(p) <= ||f|| * phi(tau, 1/|det A|) per grid
    exponent, under the factorization psi = zeta / tau (checked to 1e-10
    relative on the grid)."""
    m = m or real_line()
    A = np.atleast_2d(np.asarray(A, dtype=float))
    det = float(np.linalg.det(A))
    if abs(det) < 1e-300:
        raise SingularMatrix("matrix is numerically singular")
    if p_grid is None:
        p_grid = [p for p in canonical_grid(psi.support.lo, psi.support.hi)][:16]
    p_grid = sorted(float(p) for p in p_grid)
    for p in p_grid:
        pv, zv, tv = psi(p), zeta(p), tau(p)
        if not all(map(math.isfinite, (pv, zv, tv))):
            raise FactorizationMismatch(
                f"psi, zeta, tau must be finite on the grid (p={p})")
        if abs(zv / tv - pv) > 1e-10 * max(abs(pv), 1e-300):
            raise FactorizationMismatch(
                f"zeta/tau != psi at p={p}: {zv / tv!r} vs {pv!r}")

    f_norm = gls_norm(f, psi, m, GlsOptions(tol=tol))
    if f_norm.is_infinite:
        raise ValueError("||f|| is infinite for the supplied psi")
    phi = fundamental_function(tau, 1.0 / abs(det))
    rhs = f_norm.value * phi.value
    rows = []
    for p in p_grid:
        lhs_norm = linear_substitute(f, A, m, p, tol=tol)
        lhs = lhs_norm / zeta(p)
        margin = rhs - lhs
        rel_viol = (lhs - rhs) / max(abs(rhs), 1e-300)
        verdict = "pass" if rel_viol <= tol_slack else (
            "warn" if rel_viol <= tol_slack + 10.0 * tol else "fail")
        rows.append(BoundRow(p=p, lhs=lhs, rhs=rhs, margin=margin, verdict=verdict))
    overall = "fail" if any(r.verdict == "fail" for r in rows) else (
        "pass_with_warnings" if any(r.verdict == "warn" for r in rows) else "pass")
    digest = _digest({"f": f.label, "A": A.tolist(), "psi": psi.describe(),
                      "zeta": zeta.describe(), "tau": tau.describe(),
                      "grid": p_grid})
    return BoundReport(rows=rows, overall=overall, inputs_digest=digest,
                       notes=[f"phi={phi.value!r} at delta={phi.delta!r}",
                              f"f_norm={f_norm.value!r}"])
