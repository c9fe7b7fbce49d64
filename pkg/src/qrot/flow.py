"""Stationary spacelike submanifolds by projected mean-curvature flow.

The flow moves a constrained immersion by its mean curvature within Q(r)
(explicit Euler steps, reprojection onto the hypersurface) and stops when
sup ||H_Q|| falls below a tolerance; its fixed points are the stationary
immersions.  The module also constructs the analytic stationary families
used as initializers and oracles: spheres in slices, product geodesics of
the static cylinder Q(1), and great circles of De Sitter hyperquadrics.
"""

from dataclasses import dataclass, field

import numpy as np

from . import minkowski as mk
from .errors import NumericalError, ValidationError
from .immersion import (DiscreteImmersion, SimplicialDomain,
                        mean_curvature_in_Q, stationarity_report,
                        stationarity_terms)
from .profile import profile_from_expr
from .qsurface import RotationHypersurface

__all__ = [
    "FlowConfig", "FlowTrace", "stationarize",
    "slice_sphere", "product_geodesic", "desitter_geodesic",
    "unit_icosphere", "perturb_immersion", "refinement_study", "mesh_size",
]


# ---------------------------------------------------------------------------
# meshes

def unit_icosphere(subdivisions):
    """Vertices and triangles of a subdivided icosahedron on the unit
    sphere."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=float)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    tris = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        cache = {}
        new_tris = []

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                v = np.asarray(verts[i]) + np.asarray(verts[j])
                v /= np.linalg.norm(v)
                verts.append(tuple(v))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in tris:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_tris += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        tris = new_tris
    return np.asarray(verts, dtype=float), np.asarray(tris, dtype=np.int64)


def mesh_size(im):
    """Longest Lorentzian edge length of the immersion."""
    pos = im.positions
    simp = im.domain.simplices
    if im.k == 1:
        pairs = [(0, 1)]
    else:
        pairs = [(0, 1), (1, 2), (2, 0)]
    longest = 0.0
    for a, b in pairs:
        e = pos[simp[:, b]] - pos[simp[:, a]]
        sq = mk.lorentz_inner(e, e)
        longest = max(longest, float(np.max(sq)))
    return float(np.sqrt(longest))


# ---------------------------------------------------------------------------
# analytic stationary families

def _profile_spec_of(q_surface):
    from .scalarfn import to_string
    fn = q_surface.profile.fn
    if hasattr(fn, "expr"):
        return {
            "kind": "profile",
            "expr": to_string(fn.expr),
            "var": "t",
            "interval": list(q_surface.profile.interval),
            "n": q_surface.n,
        }
    return None


def slice_sphere(q_surface, t0, k, resolution):
    """Round k-sphere of radius r(t0) in the slice t = t0 of Q(r); for k = 1
    `resolution` is the vertex count, for k = 2 the icosphere subdivision
    level.  Stationary exactly when r'(t0) = 0."""
    if k not in (1, 2):
        raise ValidationError("k must be 1 or 2")
    if k > q_surface.n:
        raise ValidationError("slice sphere needs k <= n")
    r0 = float(q_surface.r(t0))
    d = q_surface.dim
    if k == 1:
        m = int(resolution)
        if m < 3:
            raise ValidationError("need at least 3 vertices")
        theta = 2.0 * np.pi * np.arange(m) / m
        pos = np.zeros((m, d))
        pos[:, 0] = t0
        pos[:, 1] = r0 * np.cos(theta)
        pos[:, 2] = r0 * np.sin(theta)
        domain = SimplicialDomain.loop(m)
    else:
        verts, tris = unit_icosphere(int(resolution))
        pos = np.zeros((verts.shape[0], d))
        pos[:, 0] = t0
        pos[:, 1:4] = r0 * verts
        domain = SimplicialDomain.mesh(verts.shape[0], tris, closed=True)
    return DiscreteImmersion(domain, pos, q_surface.n, constraint=q_surface,
                             constraint_spec=_profile_spec_of(q_surface))


def product_geodesic(a, turns=1, m=128, n=1):
    """Unit-speed curve s -> (a s, cos(b s), sin(b s), 0, ...) with
    b = sqrt(1 + a^2) on the static cylinder Q(1); closed exactly when
    a = 0, otherwise an open arc covering `turns` revolutions."""
    if m < 8:
        raise ValidationError("need at least 8 vertices")
    b = np.sqrt(1.0 + a * a)
    d = n + 2
    if a == 0.0:
        s = 2.0 * np.pi * np.arange(m) / m
        domain = SimplicialDomain.loop(m)
    else:
        s = np.linspace(0.0, 2.0 * np.pi * turns / b, m)
        domain = SimplicialDomain.path(m)
    pos = np.zeros((m, d))
    pos[:, 0] = a * s
    pos[:, 1] = np.cos(b * s)
    pos[:, 2] = np.sin(b * s)
    lo = min(-1.0, a * s.min() - 1.0)
    hi = max(1.0, a * s.max() + 1.0)
    profile = profile_from_expr("1", (lo, hi))
    q_surface = RotationHypersurface(profile, n)
    return DiscreteImmersion(domain, pos, n, constraint=q_surface,
                             constraint_spec=_profile_spec_of(q_surface))


def desitter_geodesic(p, v, m=128, tol=1e-10):
    """Closed curve s -> cos(s) p + sin(s) v on the De Sitter hyperquadric
    of radius R, R^2 = <p, p>; needs <v, v> = <p, p> > 0 and <p, v> = 0."""
    p = mk.as_vector(p)
    v = mk.as_vector(v)
    if p.shape != v.shape:
        raise ValidationError("p and v must have the same dimension")
    pp = float(mk.lorentz_inner(p, p))
    vv = float(mk.lorentz_inner(v, v))
    pv = float(mk.lorentz_inner(p, v))
    if vv <= 0.0:
        raise ValidationError("v must be spacelike")
    if abs(pp - vv) > tol * max(1.0, abs(pp)) or pp <= 0.0:
        raise ValidationError("p and v must satisfy <p,p> = <v,v> > 0")
    if abs(pv) > tol * max(1.0, np.sqrt(pp * vv)):
        raise ValidationError("v must be tangent at p (<p, v> = 0)")
    radius_sq = pp
    s = 2.0 * np.pi * np.arange(m) / m
    pos = np.outer(np.cos(s), p) + np.outer(np.sin(s), v)
    n = p.shape[0] - 2
    t_max = float(np.sqrt(p[0] ** 2 + v[0] ** 2)) + 1.0
    profile = profile_from_expr(f"sqrt({radius_sq!r} + t^2)", (-t_max, t_max))
    q_surface = RotationHypersurface(profile, n)
    domain = SimplicialDomain.loop(m)
    return DiscreteImmersion(domain, pos, n, constraint=q_surface,
                             constraint_spec=_profile_spec_of(q_surface))


def perturb_immersion(im, amplitude, seed=0):
    """Seeded Gaussian vertex displacement followed by reprojection onto
    the constraint surface (time components jittered as well)."""
    if im.constraint is None:
        raise ValidationError("perturbation needs a constrained immersion")
    rng = np.random.default_rng(seed)
    pos = im.positions + amplitude * rng.standard_normal(im.positions.shape)
    pos = im.constraint.project(pos)
    return im.replace_positions(pos, validate=True)


# ---------------------------------------------------------------------------
# the flow

@dataclass(frozen=True)
class FlowConfig:
    """Explicit Euler stepping; `step` defaults to 0.2 * (shortest initial
    edge length)^2, the usual parabolic cap."""

    step: float | None = None
    max_iters: int = 20000
    tol: float = 1e-4
    reproject_every: int = 1
    spacelike_guard: bool = True
    min_edge_ratio: float = 0.1      # k = 1 quality floor
    min_angle_deg: float = 10.0      # k = 2 quality floor

    def __post_init__(self):
        if self.step is not None and self.step <= 0:
            raise ValidationError("flow step must be positive")
        if self.tol <= 0:
            raise ValidationError("flow tolerance must be positive")


@dataclass
class FlowTrace:
    sup_h: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    min_metric: list = field(default_factory=list)
    mean_time: list = field(default_factory=list)
    termination: str = "max_iters"
    iterations: int = 0

    def write_csv(self, path):
        import csv
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iter", "sup_Htilde", "residual", "min_gram_eig"])
            for i, (h, r, g) in enumerate(zip(self.sup_h, self.residual,
                                              self.min_metric)):
                writer.writerow([i, f"{h:.17g}", f"{r:.17g}", f"{g:.17g}"])

    def summary(self, tol):
        return {
            "termination": self.termination,
            "iterations": self.iterations,
            "final_sup_Htilde": self.sup_h[-1] if self.sup_h else None,
            "final_residual": self.residual[-1] if self.residual else None,
            "residual_over_tol": (self.residual[-1] / tol
                                  if self.residual else None),
        }


def _min_edge(im):
    """Shortest Lorentzian edge length of the immersion."""
    pos = im.positions
    simp = im.domain.simplices
    pairs = [(0, 1)] if im.k == 1 else [(0, 1), (1, 2), (2, 0)]
    shortest = np.inf
    for a, b in pairs:
        e = pos[simp[:, b]] - pos[simp[:, a]]
        sq = mk.lorentz_inner(e, e)
        shortest = min(shortest, float(np.min(np.maximum(sq, 0.0))))
    return float(np.sqrt(shortest))


def _quality_ok(im, cfg):
    pos = im.positions
    simp = im.domain.simplices
    if im.k == 1:
        e = pos[simp[:, 1]] - pos[simp[:, 0]]
        ell = np.sqrt(np.maximum(mk.lorentz_inner(e, e), 0.0))
        return float(np.min(ell) / np.max(ell)) >= cfg.min_edge_ratio
    u = pos[simp[:, 1]] - pos[simp[:, 0]]
    v = pos[simp[:, 2]] - pos[simp[:, 0]]
    w = pos[simp[:, 2]] - pos[simp[:, 1]]
    g_uu = mk.lorentz_inner(u, u)
    g_vv = mk.lorentz_inner(v, v)
    g_ww = mk.lorentz_inner(w, w)
    g_uv = mk.lorentz_inner(u, v)
    with np.errstate(invalid="ignore"):
        cos0 = g_uv / np.sqrt(g_uu * g_vv)
        cos1 = (g_uu - g_uv) / np.sqrt(g_uu * g_ww)
        cos2 = (g_vv - g_uv) / np.sqrt(g_vv * g_ww)
        angles = np.degrees(np.arccos(np.clip(
            np.concatenate([cos0, cos1, cos2]), -1.0, 1.0)))
    return float(np.min(angles)) >= cfg.min_angle_deg


def stationarize(im, cfg=FlowConfig()):
    """Flow a closed constrained spacelike immersion toward a stationary
    one: explicit steps along the mean curvature within Q(r), reprojected
    onto the hypersurface.  Returns (final immersion, trace)."""
    if im.constraint is None:
        raise ValidationError("stationarize needs a constrained immersion")
    if not im.domain.closed:
        raise ValidationError("stationarize needs a closed domain")
    q_surface = im.constraint
    lo, hi = q_surface.profile.interval

    first_ops = im._operators()
    if first_ops["min_metric"] <= 0.0:
        raise NumericalError("initial immersion is not spacelike")
    h_min = _min_edge(im)
    step = cfg.step if cfg.step is not None else 0.2 * h_min ** 2

    trace = FlowTrace()
    current = im
    for it in range(cfg.max_iters + 1):
        ops = current._operators()
        min_metric = ops["min_metric"]
        if cfg.spacelike_guard and min_metric <= 0.0:
            trace.termination = "spacelike_guard"
            trace.iterations = it
            break
        velocity = mean_curvature_in_Q(current)
        sup_h = float(np.max(np.sqrt(np.sum(velocity ** 2, axis=1))))
        q, p_field = stationarity_terms(current)
        residual = ops["lap"] + q[:, None] * p_field
        res_sup = float(np.max(np.sqrt(np.sum(residual ** 2, axis=1))))

        trace.sup_h.append(sup_h)
        trace.residual.append(res_sup)
        trace.min_metric.append(min_metric)
        trace.mean_time.append(float(np.mean(current.times)))

        if sup_h <= cfg.tol:
            trace.termination = "tol"
            trace.iterations = it
            break
        if it == cfg.max_iters:
            trace.termination = "max_iters"
            trace.iterations = it
            break

        pos = current.positions + step * velocity
        if np.any(pos[:, 0] < lo) or np.any(pos[:, 0] > hi):
            trace.termination = "domain_exit"
            trace.iterations = it
            break
        if cfg.reproject_every and it % cfg.reproject_every == 0:
            pos = q_surface.project(pos)
        current = current.replace_positions(pos, validate=False)
        if not _quality_ok(current, cfg):
            trace.termination = "quality_floor"
            trace.iterations = it + 1
            break
    return current, trace


# ---------------------------------------------------------------------------
# refinement studies

def refinement_study(constructor, levels=3):
    """Stationarity residual under uniform refinement.

    `constructor(level)` must return a constrained immersion for
    level = 0, 1, ...; the observed order is the least-squares slope of
    log(residual) against log(h).  Residuals that sit at the rounding
    floor at every level are flagged superconvergent instead (the order
    of an exactly reproduced family is not measurable).
    """
    if levels < 3:
        raise ValidationError("need at least 3 refinement levels")
    sizes = []
    residuals = []
    for level in range(levels):
        im = constructor(level)
        sizes.append(mesh_size(im))
        residuals.append(stationarity_report(im).sup_norm)
    sizes = np.asarray(sizes)
    residuals = np.asarray(residuals)
    floor = 1e-11
    superconvergent = bool(np.all(residuals <= floor))
    if superconvergent or np.any(residuals == 0.0):
        order = None
    else:
        order = float(np.polyfit(np.log(sizes), np.log(residuals), 1)[0])
    return {
        "h": sizes.tolist(),
        "residual": residuals.tolist(),
        "order": order,
        "superconvergent": superconvergent,
    }
