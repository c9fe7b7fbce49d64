"""Extrinsic geometry of the rotation Lorentzian hypersurface Q(r).

Q(r) = { (t, x) : ||x|| = r(t), t in J } in Minkowski space of dimension
n+2, for an admissible profile r.  With w(t) = sqrt(1 - r'(t)^2):

    N(t,x) = (r r', x) / (r w)            unit spacelike normal
    T(t,x) = (1, (r'/r) x) / w            unit timelike tangent
    K(t,x) = (r, r' x) / w                closed conformal field, K = r T
    A(V)   = alpha V + beta <T,V> T       shape operator
    alpha  = -1 / (r w)
    beta   = (r'' r + r'^2 - 1) / (r w^3)
    H      = alpha - beta / (n+1)         mean curvature wrt N

Instances are immutable and every evaluation is a pure function, so a
hypersurface can be shared freely between threads.
"""

from dataclasses import dataclass, field

import numpy as np

from . import minkowski as mk
from .errors import (AdmissibilityError, NumericalError, OutsideDomainError,
                     ValidationError)
from .profile import WarpingFunction, check_admissible, warp_to_profile

__all__ = [
    "RotationHypersurface", "SurfaceClassification", "NccReport", "ncc_check",
]


class RotationHypersurface:
    """Rotation hypersurface of Minkowski space with profile r and fibre
    dimension n (ambient dimension n+2)."""

    def __init__(self, profile, n, check_grid=512, margin=0.0):
        if int(n) < 1:
            raise ValidationError("fibre dimension n must be >= 1")
        report = check_admissible(profile, grid_size=check_grid, margin=margin)
        if not report.admissible:
            raise AdmissibilityError(
                "profile is not admissible on the check grid", report)
        self.profile = profile
        self.n = int(n)
        self.dim = self.n + 2

    # -- profile shorthands -------------------------------------------------

    def _in_domain(self, t):
        lo, hi = self.profile.interval
        return (np.asarray(t) >= lo) & (np.asarray(t) <= hi)

    def _require_domain(self, t):
        if not np.all(self._in_domain(t)):
            lo, hi = self.profile.interval
            raise OutsideDomainError(
                f"t outside the profile interval ({lo:.6g}, {hi:.6g})")

    def r(self, t):
        self._require_domain(t)
        return self.profile.value(t)

    def r1(self, t):
        self._require_domain(t)
        return self.profile.deriv1(t)

    def r2(self, t):
        self._require_domain(t)
        return self.profile.deriv2(t)

    def _rw(self, t):
        r = self.profile.value(t)
        r1 = self.profile.deriv1(t)
        w = np.sqrt(1.0 - np.asarray(r1) ** 2)
        return r, r1, w

    # -- point membership ---------------------------------------------------

    def _split(self, p):
        p = mk.as_vector(p)
        if p.shape[-1] != self.dim:
            raise ValidationError(f"expected ambient dimension {self.dim}, "
                                  f"got {p.shape[-1]}")
        return p[..., 0], p[..., 1:]

    def contains(self, p, tol=1e-9):
        """Whether ||x||^2 agrees with r(t)^2 within tol.  A point whose t
        lies outside J is reported distinctly by OutsideDomainError."""
        t, x = self._split(p)
        self._require_domain(t)
        rsq = np.asarray(self.profile.value(t)) ** 2
        return bool(np.all(np.abs(np.sum(x * x, axis=-1) - rsq) <= tol))

    def _require_on_surface(self, p, tol=1e-7):
        if not self.contains(p, tol=tol):
            raise ValidationError("point is not on the hypersurface")

    def project(self, p):
        """Rescale the spatial part onto radius r(t); exactly idempotent."""
        t, x = self._split(p)
        self._require_domain(t)
        norm = np.linalg.norm(x, axis=-1)
        if np.any(norm == 0.0):
            raise NumericalError("cannot project a point with zero spatial part")
        r = np.asarray(self.profile.value(t))
        out = np.array(p, dtype=float, copy=True)
        out[..., 1:] = x * (r / norm)[..., None]
        return out

    def is_tangent(self, p, v, tol=1e-9):
        """Test -r(t) r'(t) a + sum_i v_i x_i = 0 for v = (a, v_spatial)."""
        self._require_on_surface(p)
        t, x = self._split(p)
        a, vx = self._split(mk.as_vector(v))
        r, r1, _ = self._rw(t)
        residual = -r * r1 * a + np.sum(vx * x, axis=-1)
        scale = np.linalg.norm(v) * np.linalg.norm(p)
        return bool(np.all(np.abs(residual) <= tol * max(scale, 1.0)))

    # -- frames -------------------------------------------------------------

    def unit_normal(self, p):
        self._require_on_surface(p)
        t, x = self._split(p)
        r, r1, w = self._rw(t)
        out = np.empty_like(np.asarray(p, dtype=float))
        out[..., 0] = r * r1
        out[..., 1:] = x
        return out / (r * w)

    def unit_timelike(self, p):
        self._require_on_surface(p)
        t, x = self._split(p)
        r, r1, w = self._rw(t)
        out = np.empty_like(np.asarray(p, dtype=float))
        out[..., 0] = 1.0
        out[..., 1:] = (r1 / r) * x
        return out / w

    def conformal_field(self, p):
        """The closed conformal timelike field K = r(t) T and its factor
        rho = r' / sqrt(1 - r'^2)."""
        self._require_on_surface(p)
        t, x = self._split(p)
        r, r1, w = self._rw(t)
        out = np.empty_like(np.asarray(p, dtype=float))
        out[..., 0] = r
        out[..., 1:] = r1 * x
        return out / w, float(r1 / w)

    def tangent_projection(self, p, v):
        """Project an ambient vector onto the tangent space at p."""
        n_vec = self.unit_normal(p)
        return np.asarray(v, dtype=float) - mk.lorentz_inner(v, n_vec) * n_vec

    # -- shape operator -----------------------------------------------------

    def shape_coefficients(self, t):
        """(alpha, beta) of the shape operator at parameter t."""
        self._require_domain(t)
        r = np.asarray(self.profile.value(t))
        r1 = np.asarray(self.profile.deriv1(t))
        r2 = np.asarray(self.profile.deriv2(t))
        omega = 1.0 - r1 ** 2
        w = np.sqrt(omega)
        alpha = -1.0 / (r * w)
        beta = (r2 * r + r1 ** 2 - 1.0) / (r * omega * w)
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return float(alpha), float(beta)
        return alpha, beta

    def weingarten(self, p, v, tol=1e-8):
        """A(V) = alpha V + beta <T,V> T for a tangent vector V at p."""
        if not self.is_tangent(p, v, tol=tol):
            raise ValidationError("weingarten needs a tangent vector")
        t, _ = self._split(p)
        alpha, beta = self.shape_coefficients(t)
        T = self.unit_timelike(p)
        return alpha * np.asarray(v, dtype=float) + beta * mk.lorentz_inner(T, v) * T

    def mean_curvature(self, t):
        """H = alpha - beta/(n+1), the mean curvature with respect to N."""
        alpha, beta = self.shape_coefficients(t)
        return alpha - beta / (self.n + 1)

    # -- curves through a point ---------------------------------------------

    def curve_through(self, p, v):
        """Return a callable s -> point on Q with value p and velocity v at
        s = 0; v must be tangent at p.  Used by finite-difference probes."""
        if not self.is_tangent(p, v, tol=1e-8):
            raise ValidationError("curve_through needs a tangent vector")
        t0, x0 = self._split(p)
        a, vx = self._split(mk.as_vector(v))
        r0 = float(self.profile.value(t0))
        xhat = x0 / r0
        w = vx - (a * float(self.profile.deriv1(t0))) * xhat
        wnorm = np.linalg.norm(w)
        if wnorm > 0:
            what = w / wnorm
            theta = wnorm / r0
        else:
            what = np.zeros_like(xhat)
            theta = 0.0

        def gamma(s):
            t = t0 + a * s
            u = np.cos(theta * s) * xhat + np.sin(theta * s) * what
            out = np.empty(self.dim)
            out[0] = t
            out[1:] = float(self.profile.value(t)) * u
            return out

        return gamma

    # -- slices and sampled diagnostics --------------------------------------

    def slice_classification(self, t0, tol=1e-10):
        """Every slice t = t0 is totally umbilical in Q(r) with constant mean
        curvature; it is totally geodesic exactly when r'(t0) = 0."""
        self._require_domain(t0)
        r = float(self.profile.value(t0))
        r1 = float(self.profile.deriv1(t0))
        umbilic_h = r1 / (r * np.sqrt(1.0 - r1 ** 2))
        return {
            "umbilical_constant_H": umbilic_h,
            "totally_geodesic": bool(abs(r1) <= tol),
        }

    def classification_grid(self, grid_size=512):
        lo, hi = self.profile.interval
        step = (hi - lo) / (grid_size + 1)
        return np.linspace(lo + step, hi - step, grid_size)

    def classify(self, grid=None, grid_size=512, tol=None):
        """Classify the hypersurface on a parameter grid.

        Reports whether Q(r) is totally umbilical (beta == 0, with the
        fitted constants of r^2 = t^2 + a t + b), has constant mean
        curvature (the combination r^n (r'' r + r'^2 - 1)/(1-r'^2)^{3/2}
        is constant), and has proportional principal curvatures
        (r r'' = lambda (1 - r'^2) for a fitted lambda).  The three flags
        are not mutually exclusive and all residuals are reported.
        """
        if grid is None:
            grid = self.classification_grid(grid_size)
        grid = np.asarray(grid, dtype=float)
        if tol is None:
            tol = 1e-5 if self.profile.tabulated else 1e-8

        r = np.asarray(self.profile.value(grid))
        r1 = np.asarray(self.profile.deriv1(grid))
        r2 = np.asarray(self.profile.deriv2(grid))
        omega = 1.0 - r1 ** 2
        w = np.sqrt(omega)
        alpha = -1.0 / (r * w)
        beta = (r2 * r + r1 ** 2 - 1.0) / (r * omega * w)

        # totally umbilical: beta == 0; fit r^2 = t^2 + a t + b
        design = np.column_stack([grid, np.ones_like(grid)])
        coeff, *_ = np.linalg.lstsq(design, r ** 2 - grid ** 2, rcond=None)
        a_fit, b_fit = float(coeff[0]), float(coeff[1])
        umbilical = bool(np.max(np.abs(beta)) <= tol)

        # constant mean curvature: the first-integral combination is constant
        cmc_vals = r ** self.n * (r2 * r + r1 ** 2 - 1.0) / omega ** 1.5
        c_fit = float(np.mean(cmc_vals))
        cmc = bool(np.std(cmc_vals) <= tol)
        h_vals = alpha - beta / (self.n + 1)
        h_fit = float(np.mean(h_vals))

        # proportional principal curvatures: r r'' = lambda (1 - r'^2)
        lam = float(np.sum(r * r2 * omega) / np.sum(omega ** 2))
        ppc_res = r * r2 - lam * omega
        ppc = bool(np.max(np.abs(ppc_res)) <= tol)

        return SurfaceClassification(
            n=self.n,
            tol=float(tol),
            grid=grid,
            totally_umbilical=umbilical,
            a=a_fit, b=b_fit,
            umbilical_residual=np.abs(beta),
            cmc=cmc, c=c_fit, H=h_fit,
            cmc_residual=np.abs(cmc_vals - c_fit),
            ppc=ppc, lam=lam,
            ppc_residual=np.abs(ppc_res),
        )

    def sectional_curvature_umbilical(self, classification=None):
        """Constant sectional curvature 4/(4b - a^2) of a totally umbilical
        Q(r); raises unless the classification reports umbilical."""
        cls = classification or self.classify()
        if not cls.totally_umbilical:
            raise ValidationError("hypersurface is not totally umbilical")
        return 4.0 / (4.0 * cls.b - cls.a ** 2)

    def cmc_first_integral(self, grid=None, grid_size=512, tol=None):
        """For n = 1, the quantity r/sqrt(1-r'^2) + r^2 H is constant along
        a constant-mean-curvature Q(r); returns its grid deviation."""
        if self.n != 1:
            raise ValidationError("the first integral applies to n = 1 only")
        if grid is None:
            grid = self.classification_grid(grid_size)
        grid = np.asarray(grid, dtype=float)
        cls = self.classify(grid=grid, tol=tol)
        r = np.asarray(self.profile.value(grid))
        r1 = np.asarray(self.profile.deriv1(grid))
        h = self.mean_curvature(grid)
        quantity = r / np.sqrt(1.0 - r1 ** 2) + r ** 2 * h
        deviation = float(np.max(np.abs(quantity - np.mean(quantity))))
        return {
            "applicable": bool(cls.cmc),
            "value_mean": float(np.mean(quantity)),
            "max_deviation": deviation,
        }


@dataclass
class SurfaceClassification:
    n: int
    tol: float
    grid: np.ndarray = field(repr=False)
    totally_umbilical: bool = False
    a: float = 0.0
    b: float = 0.0
    umbilical_residual: np.ndarray = field(default=None, repr=False)
    cmc: bool = False
    c: float = 0.0
    H: float = 0.0
    cmc_residual: np.ndarray = field(default=None, repr=False)
    ppc: bool = False
    lam: float = 0.0
    ppc_residual: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        out = {
            "n": self.n,
            "tol": self.tol,
            "umbilical": {
                "holds": self.totally_umbilical,
                "max_residual": float(np.max(self.umbilical_residual)),
            },
            "cmc": {
                "holds": self.cmc,
                "c": self.c,
                "max_residual": float(np.max(self.cmc_residual)),
            },
            "ppc": {
                "holds": self.ppc,
                "lambda": self.lam,
                "max_residual": float(np.max(self.ppc_residual)),
            },
        }
        if self.totally_umbilical:
            out["umbilical"]["a"] = self.a
            out["umbilical"]["b"] = self.b
            out["umbilical"]["sectional_curvature"] = 4.0 / (4.0 * self.b - self.a ** 2)
        if self.cmc:
            out["cmc"]["H"] = self.H
        return out


@dataclass
class NccReport:
    """Null convergence condition evaluated in both available forms.

    On the warping side the condition reads f^2 (log f)'' <= 1; on the
    profile side r'' r + r'^2 - 1 <= 0.  At matched points t = h(s) the two
    sides are related by a positive factor (1 + f'(s)^2)^2, so they agree
    in sign.
    """

    holds: bool
    warping_grid: np.ndarray = None
    warping_values: np.ndarray = None
    profile_grid: np.ndarray = None
    profile_values: np.ndarray = None
    agreement_residual: float = None
    violation_intervals_s: list = None
    violation_intervals_t: list = None

    def to_dict(self):
        out = {"holds": self.holds}
        if self.warping_values is not None:
            out["warping_form_max"] = float(np.max(self.warping_values))
            out["violation_intervals_s"] = self.violation_intervals_s
        if self.profile_values is not None:
            out["profile_form_max"] = float(np.max(self.profile_values))
            out["violation_intervals_t"] = self.violation_intervals_t
        if self.agreement_residual is not None:
            out["matched_point_agreement_residual"] = self.agreement_residual
        return out


def _violation_intervals(grid, mask):
    """Contiguous runs of True in mask, as [lo, hi] grid intervals."""
    intervals = []
    start = None
    for i, bad in enumerate(mask):
        if bad and start is None:
            start = i
        elif not bad and start is not None:
            intervals.append([float(grid[start]), float(grid[i - 1])])
            start = None
    if start is not None:
        intervals.append([float(grid[start]), float(grid[-1])])
    return intervals


def ncc_check(source, grid_size=512, cfg=None):
    """Check the null convergence condition.

    `source` is either a WarpingFunction (both forms are evaluated, with a
    matched-point agreement residual) or a ProfileFunction /
    RotationHypersurface (profile form only).
    """
    from .profile import QuadratureConfig
    cfg = cfg or QuadratureConfig()

    if isinstance(source, WarpingFunction):
        a, b = source.interval
        step = (b - a) / (grid_size + 1)
        s_grid = np.linspace(a + step, b - step, grid_size)
        f = np.asarray(source.fn.value(s_grid))
        f1 = np.asarray(source.fn.deriv1(s_grid))
        f2 = np.asarray(source.fn.deriv2(s_grid))
        warp_form = f * f2 - f1 ** 2          # f^2 (log f)''
        warp_ok = warp_form <= 1.0 + 1e-12

        profile, h = warp_to_profile(source, cfg)
        t_grid = np.asarray(h.value(s_grid))
        lo, hi = profile.interval
        t_grid = np.clip(t_grid, lo, hi)
        r = np.asarray(profile.value(t_grid))
        r1 = np.asarray(profile.deriv1(t_grid))
        r2 = np.asarray(profile.deriv2(t_grid))
        prof_form = r2 * r + r1 ** 2 - 1.0
        prof_ok = prof_form <= 1e-12

        # identity: prof_form * (1 + f'^2)^2 = warp_form - 1 at t = h(s)
        scale = (1.0 + f1 ** 2) ** 2
        agreement = float(np.max(np.abs(prof_form * scale - (warp_form - 1.0))
                                 / (1.0 + np.abs(warp_form - 1.0))))
        return NccReport(
            holds=bool(np.all(warp_ok) and np.all(prof_ok)),
            warping_grid=s_grid,
            warping_values=warp_form,
            profile_grid=t_grid,
            profile_values=prof_form,
            agreement_residual=agreement,
            violation_intervals_s=_violation_intervals(s_grid, ~warp_ok),
            violation_intervals_t=_violation_intervals(t_grid, ~prof_ok),
        )

    profile = source.profile if isinstance(source, RotationHypersurface) else source
    lo, hi = profile.interval
    step = (hi - lo) / (grid_size + 1)
    t_grid = np.linspace(lo + step, hi - step, grid_size)
    r = np.asarray(profile.value(t_grid))
    r1 = np.asarray(profile.deriv1(t_grid))
    r2 = np.asarray(profile.deriv2(t_grid))
    prof_form = r2 * r + r1 ** 2 - 1.0
    prof_ok = prof_form <= 1e-12
    return NccReport(
        holds=bool(np.all(prof_ok)),
        profile_grid=t_grid,
        profile_values=prof_form,
        violation_intervals_t=_violation_intervals(t_grid, ~prof_ok),
    )
