"""Warping functions f on I and admissible profile functions r on J.

A warping function f > 0 on an interval I around 0 determines a profile
r = f o h^{-1} through the reparametrization h'(s) = sqrt(1 + f'(s)^2),
h(0) = 0; conversely an admissible profile (r > 0, |r'| < 1) determines a
warping function through h~'(t) = sqrt(1 - r'(t)^2).  First and second
derivatives are propagated analytically through both conversions,

    r'(t) = f'(s) / sqrt(1 + f'(s)^2),
    r''(t) = f''(s) / (1 + f'(s)^2)^2,        t = h(s),

rather than differenced numerically from the tables.

All conversions are pure functions of immutable inputs.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import AdmissibilityError, OutsideDomainError, ValidationError
from .scalarfn import differentiate, evaluate, parse_expr

__all__ = [
    "ClosedForm", "TabulatedFunction", "WarpingFunction", "ProfileFunction",
    "QuadratureConfig", "AdmissibilityReport",
    "warp_to_profile", "profile_to_warp", "check_admissible",
    "profile_from_expr", "warping_from_expr",
]


class ClosedForm:
    """Scalar function backed by an expression tree, with exact derivatives."""

    def __init__(self, expr):
        self.expr = expr
        self._d1 = differentiate(expr)
        self._d2 = differentiate(self._d1)

    def value(self, x):
        return evaluate(self.expr, x)

    def deriv1(self, x):
        return evaluate(self._d1, x)

    def deriv2(self, x):
        return evaluate(self._d2, x)


class TabulatedFunction:
    """Samples of a function together with stored first and second
    derivatives.  Values and first derivatives are interpolated by cubic
    Hermite polynomials built from the stored slopes; the second
    derivative is the exact derivative of the interpolant of the first.
    """

    def __init__(self, grid, values, d1, d2):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        d1 = np.asarray(d1, dtype=float)
        d2 = np.asarray(d2, dtype=float)
        if not (grid.ndim == 1 and grid.shape == values.shape == d1.shape == d2.shape):
            raise ValidationError("grid, values, d1, d2 must be equal-length 1-d arrays")
        if grid.size < 2:
            raise ValidationError("need at least two samples")
        if not np.all(np.diff(grid) > 0):
            raise ValidationError("grid must be strictly increasing")
        self.grid = grid
        self.values = values
        self.d1 = d1
        self.d2 = d2
        self._value_spline = CubicHermiteSpline(grid, values, d1)
        self._d1_spline = CubicHermiteSpline(grid, d1, d2)
        self._d2_spline = self._d1_spline.derivative()
        self._inverse_spline = None

    @property
    def domain(self):
        return float(self.grid[0]), float(self.grid[-1])

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any(x < lo) or np.any(x > hi):
            bad = np.atleast_1d(x)[(np.atleast_1d(x) < lo) | (np.atleast_1d(x) > hi)]
            raise OutsideDomainError(
                f"query {bad[0]:.6g} outside tabulated domain [{lo:.6g}, {hi:.6g}]")
        return x

    def value(self, x):
        out = self._value_spline(self._check(x))
        return float(out) if np.isscalar(x) else out

    def deriv1(self, x):
        out = self._d1_spline(self._check(x))
        return float(out) if np.isscalar(x) else out

    def deriv2(self, x):
        out = self._d2_spline(self._check(x))
        return float(out) if np.isscalar(x) else out

    def inverse(self, y):
        """Invert a strictly monotone table: interpolate the swapped table,
        then apply one Newton polish step per query."""
        dv = np.diff(self.values)
        if np.all(dv > 0):
            vals, grid, slope = self.values, self.grid, self.d1
        elif np.all(dv < 0):
            vals, grid, slope = self.values[::-1], self.grid[::-1], self.d1[::-1]
        else:
            raise ValidationError("table is not strictly monotone; cannot invert")
        if self._inverse_spline is None:
            self._inverse_spline = CubicHermiteSpline(vals, grid, 1.0 / slope)
        x = self._inverse_spline(np.clip(y, vals[0], vals[-1]))
        x = np.clip(x, self.grid[0], self.grid[-1])
        x = x - (self._value_spline(x) - y) / self._d1_spline(x)
        x = np.clip(x, self.grid[0], self.grid[-1])
        return float(x) if np.isscalar(y) else x


def _require_finite_interval(interval, what):
    a, b = float(interval[0]), float(interval[1])
    if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
        raise ValidationError(f"{what} needs a finite interval (a, b) with a < b")
    return a, b


class WarpingFunction:
    """f > 0 on an open interval I around 0, with fibre dimension n."""

    def __init__(self, fn, interval, n):
        a, b = float(interval[0]), float(interval[1])
        if not a < 0.0 < b:
            raise ValidationError("the interval of a warping function must "
                                  "contain 0 (inputs with 0 outside are rejected)")
        if int(n) < 1:
            raise ValidationError("fibre dimension n must be a positive integer")
        self.fn = fn
        self.interval = (a, b)
        self.n = int(n)


class ProfileFunction:
    """Candidate profile r on an open interval J around 0 (closed form or
    tabulated); admissibility (r > 0 and |r'| < 1) is verified on demand."""

    def __init__(self, fn, interval=None):
        if interval is None:
            if not isinstance(fn, TabulatedFunction):
                raise ValidationError("closed-form profiles need an explicit interval")
            interval = fn.domain
        a, b = float(interval[0]), float(interval[1])
        if not a < 0.0 < b:
            raise ValidationError("the interval of a profile must contain 0")
        self.fn = fn
        self.interval = (a, b)

    @property
    def tabulated(self):
        return isinstance(self.fn, TabulatedFunction)

    def value(self, t):
        return self.fn.value(t)

    def deriv1(self, t):
        return self.fn.deriv1(t)

    def deriv2(self, t):
        return self.fn.deriv2(t)


@dataclass(frozen=True)
class QuadratureConfig:
    """Step control for the reparametrization integrals; `step` defaults to
    1e-4 times the interval length, capped at 1e-3."""

    step: float | None = None
    method: str = "rk4"

    def resolved_step(self, length):
        if self.step is not None:
            if self.step <= 0:
                raise ValidationError("quadrature step must be positive")
            return float(self.step)
        return min(1e-4 * length, 1e-3)


@dataclass
class AdmissibilityReport:
    min_r: float
    max_abs_r1: float
    grid: np.ndarray = field(repr=False)
    violations_positive: np.ndarray = field(repr=False)
    violations_slope: np.ndarray = field(repr=False)
    margin: float = 0.0

    @property
    def violations(self):
        return np.sort(np.concatenate([self.violations_positive,
                                       self.violations_slope]))

    @property
    def admissible(self):
        return self.violations_positive.size == 0 and self.violations_slope.size == 0

    def to_dict(self):
        return {
            "admissible": bool(self.admissible),
            "min_r": self.min_r,
            "max_abs_r1": self.max_abs_r1,
            "margin": self.margin,
            "violations_positive_t": self.violations_positive.tolist(),
            "violations_slope_t": self.violations_slope.tolist(),
        }


def _shrunk_grid(interval, grid_size):
    a, b = interval
    step = (b - a) / (grid_size + 1)
    return np.linspace(a + step, b - step, grid_size)


def check_admissible(p, grid_size=512, margin=0.0):
    """Evaluate r and r' on a grid over J (shrunk one step from each open
    end) and report every point violating r > 0 or |r'| < 1 - margin."""
    if grid_size < 2:
        raise ValidationError("grid_size must be at least 2")
    grid = _shrunk_grid(p.interval, grid_size)
    r = np.asarray(p.value(grid))
    r1 = np.asarray(p.deriv1(grid))
    bad_pos = grid[r <= 0.0]
    bad_slope = grid[np.abs(r1) >= 1.0 - margin]
    return AdmissibilityReport(
        min_r=float(np.min(r)),
        max_abs_r1=float(np.max(np.abs(r1))),
        grid=grid,
        violations_positive=bad_pos,
        violations_slope=bad_slope,
        margin=margin,
    )


def _side_nodes(lo, hi, step):
    """Uniform nodes from lo to hi (inclusive) with spacing at most step."""
    length = hi - lo
    count = max(2, int(np.ceil(length / step)) + 1)
    return np.linspace(lo, hi, count)


def _cumulative_integral(g, nodes):
    """Cumulative integral of g from nodes[0], one classical 4th-order step
    per interval (for y' = g(s) the stage sums reduce to Simpson weights)."""
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    gn = np.asarray(g(nodes))
    gm = np.asarray(g(mids))
    h = np.diff(nodes)
    increments = (h / 6.0) * (gn[:-1] + 4.0 * gm + gn[1:])
    out = np.empty_like(nodes)
    out[0] = 0.0
    np.cumsum(increments, out=out[1:])
    return out


def _two_sided_nodes(interval, step):
    """Nodes over the interval shrunk by one step per side, containing 0,
    uniform on each side of 0."""
    a, b = interval
    lo, hi = a + step, b - step
    if not lo < 0.0 < hi:
        raise ValidationError("interval too small for the requested step")
    left = _side_nodes(lo, 0.0, step)
    right = _side_nodes(0.0, hi, step)
    return np.concatenate([left[:-1], right]), left.size - 1


def _integrate_from_zero(g, nodes, zero_index):
    """Cumulative integral with value 0 at nodes[zero_index]."""
    right = _cumulative_integral(g, nodes[zero_index:])
    left = _cumulative_integral(lambda s: g(-s), -nodes[zero_index::-1])
    return np.concatenate([-left[::-1][:-1], right])


def warp_to_profile(w, cfg=QuadratureConfig()):
    """Convert a warping function into the corresponding profile.

    Integrates h'(s) = sqrt(1 + f'(s)^2) with h(0) = 0, sets J = h(I) and
    r = f o h^{-1}, and stores the analytically propagated derivatives.
    Returns (profile, h) where h is tabulated over I.
    """
    a, b = _require_finite_interval(w.interval, "warp_to_profile")
    step = cfg.resolved_step(b - a)
    s_nodes, zero_index = _two_sided_nodes((a, b), step)

    f = np.asarray(w.fn.value(s_nodes))
    if np.any(f <= 0.0):
        bad = s_nodes[f <= 0.0][0]
        raise ValidationError(f"non-positive f detected on grid (s = {bad:.6g})")
    f1 = np.asarray(w.fn.deriv1(s_nodes))
    f2 = np.asarray(w.fn.deriv2(s_nodes))

    speed = lambda s: np.sqrt(1.0 + np.asarray(w.fn.deriv1(s)) ** 2)
    t_nodes = _integrate_from_zero(speed, s_nodes, zero_index)
    if not np.all(np.diff(t_nodes) > 0):
        raise ValidationError("integrator produced a non-increasing h table "
                              "(step underflow)")

    w1 = np.sqrt(1.0 + f1 ** 2)
    r1 = f1 / w1
    r2 = f2 / (1.0 + f1 ** 2) ** 2
    table = TabulatedFunction(t_nodes, f, r1, r2)
    profile = ProfileFunction(table)

    h_d2 = f1 * f2 / w1
    h = TabulatedFunction(s_nodes, t_nodes, w1, h_d2)

    report = check_admissible(profile, grid_size=min(2048, s_nodes.size))
    if not report.admissible:
        raise AdmissibilityError("converted profile fails admissibility", report)
    return profile, h


def profile_from_expr(text, interval, var="t"):
    return ProfileFunction(ClosedForm(parse_expr(text, var)), interval)


def warping_from_expr(text, interval, n, var="s"):
    return WarpingFunction(ClosedForm(parse_expr(text, var)), interval, n)


def from_spec(spec):
    """Build a WarpingFunction or ProfileFunction from its JSON document
    { "kind": "warping"|"profile", "expr": str, "var": "s"|"t",
      "interval": [a, b], "n": int }.  Returns (object, n)."""
    try:
        kind = spec["kind"]
        expr_text = spec["expr"]
        interval = spec["interval"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"profile spec missing field: {exc}") from exc
    n = int(spec.get("n", 1))
    var = spec.get("var", "s" if kind == "warping" else "t")
    if kind == "warping":
        return warping_from_expr(expr_text, interval, n, var=var), n
    if kind == "profile":
        return profile_from_expr(expr_text, interval, var=var), n
    raise ValidationError(f"unknown profile kind {kind!r}")


def spec_to_profile(spec, cfg=QuadratureConfig()):
    """Resolve a profile spec to a ProfileFunction, converting through
    warp_to_profile when the spec describes a warping function."""
    obj, n = from_spec(spec)
    if isinstance(obj, WarpingFunction):
        prof, _ = warp_to_profile(obj, cfg)
        return prof, n
    return obj, n


def profile_to_warp(p, cfg=QuadratureConfig(), n=1):
    """Convert an admissible profile into the corresponding warping function
    (as tabulated data).  Integrates h~'(t) = sqrt(1 - r'(t)^2) with
    h~(0) = 0 and sets f = r o h~^{-1}.  Returns (warping, h~)."""
    c, d = _require_finite_interval(p.interval, "profile_to_warp")
    report = check_admissible(p, grid_size=512)
    if not report.admissible:
        raise AdmissibilityError(
            "profile is not admissible (need r > 0 and |r'| < 1)", report)
    step = cfg.resolved_step(d - c)
    t_nodes, zero_index = _two_sided_nodes((c, d), step)

    r = np.asarray(p.value(t_nodes))
    r1 = np.asarray(p.deriv1(t_nodes))
    r2 = np.asarray(p.deriv2(t_nodes))
    if np.any(np.abs(r1) >= 1.0) or np.any(r <= 0.0):
        raise AdmissibilityError("profile violates admissibility on the "
                                 "integration grid", report)

    speed = lambda t: np.sqrt(1.0 - np.asarray(p.deriv1(t)) ** 2)
    s_nodes = _integrate_from_zero(speed, t_nodes, zero_index)
    if not np.all(np.diff(s_nodes) > 0):
        raise ValidationError("integrator produced a non-increasing table "
                              "(|r'| too close to 1 or step underflow)")

    omega = 1.0 - r1 ** 2
    f1 = r1 / np.sqrt(omega)
    f2 = r2 / omega ** 2
    table = TabulatedFunction(s_nodes, r, f1, f2)
    warping = WarpingFunction(table, (s_nodes[0], s_nodes[-1]), n)

    h_tilde = TabulatedFunction(t_nodes, s_nodes, np.sqrt(omega), -r1 * r2 / np.sqrt(omega))
    return warping, h_tilde
