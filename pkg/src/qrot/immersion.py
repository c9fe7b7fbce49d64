"""Discrete spacelike submanifolds of Minkowski space.

A DiscreteImmersion is a simplicial curve (k = 1) or triangle mesh (k = 2)
with a vertexwise map into L^{n+2}, optionally constrained to a rotation
hypersurface Q(r).  All analysis functions are pure; per-vertex results
are independent of evaluation order and the immersion is treated as
read-only throughout.

Edge lengths are Lorentzian, ell^2 = <e, e>; spacelikeness makes every
induced Gram matrix positive definite, so the usual Euclidean mesh
formulas apply verbatim to the induced metric.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from . import minkowski as mk
from ._kernels import curve_operators, tri_operators
from .errors import (DegenerateStarError, NotSpacelikeError,
                     OutsideDomainError, ValidationError)

__all__ = [
    "SimplicialDomain", "DiscreteImmersion", "StationarityReport",
    "induced_gram", "laplace_beltrami", "mean_curvature_ambient",
    "grad_time_sq", "vertex_frames", "timelike_projection_check",
    "stationarity_terms", "stationarity_report", "mean_curvature_in_Q",
    "trace_diagnostics", "integral_identity",
    "immersion_to_dict", "immersion_from_dict",
]


def _curve_order(num_vertices, edges, closed):
    """Vertex ordering realized by an edge list forming one path or cycle."""
    adjacency = [[] for _ in range(num_vertices)]
    for a, b in edges:
        if not (0 <= a < num_vertices and 0 <= b < num_vertices) or a == b:
            raise ValidationError(f"invalid edge ({a}, {b})")
        adjacency[a].append(b)
        adjacency[b].append(a)
    degrees = np.array([len(nb) for nb in adjacency])
    if closed:
        if not np.all(degrees == 2):
            raise ValidationError("closed curve must have all vertex degrees 2")
        start = 0
    else:
        ends = np.flatnonzero(degrees == 1)
        if ends.size != 2 or not np.all(degrees[degrees != 1] == 2):
            raise ValidationError("open curve must form a single path")
        start = int(ends[0])
    order = [start]
    prev = -1
    while len(order) < num_vertices:
        candidates = [v for v in adjacency[order[-1]] if v != prev]
        if not candidates:
            raise ValidationError("edges do not form a single curve")
        prev = order[-1]
        order.append(candidates[0])
    if closed and order[0] not in adjacency[order[-1]]:
        raise ValidationError("closed curve edges do not form a single cycle")
    if len(set(order)) != num_vertices:
        raise ValidationError("edges do not cover every vertex exactly once")
    return np.asarray(order, dtype=np.int64)


class SimplicialDomain:
    """A k-dimensional simplicial domain, k = 1 (curve) or k = 2 (mesh)."""

    def __init__(self, k, num_vertices, simplices, closed):
        if k not in (1, 2):
            raise ValidationError("only k = 1 and k = 2 are supported")
        self.k = int(k)
        self.num_vertices = int(num_vertices)
        self.simplices = np.asarray(simplices, dtype=np.int64)
        self.closed = bool(closed)
        if self.simplices.ndim != 2 or self.simplices.shape[1] != k + 1:
            raise ValidationError(f"simplices must be (S, {k + 1}) for k = {k}")
        if np.any(self.simplices < 0) or np.any(self.simplices >= num_vertices):
            raise ValidationError("simplex references an invalid vertex")
        if k == 1:
            self.order = _curve_order(num_vertices, self.simplices, self.closed)
            self.boundary_vertices = (np.empty(0, dtype=np.int64) if self.closed
                                      else self.order[[0, -1]])
        else:
            self.order = None
            self.boundary_vertices = self._validate_mesh()

    def _validate_mesh(self):
        edge_count = {}
        for tri in self.simplices:
            if len(set(tri.tolist())) != 3:
                raise ValidationError(f"degenerate triangle {tri.tolist()}")
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (min(a, b), max(a, b))
                edge_count[key] = edge_count.get(key, 0) + 1
        counts = np.array(list(edge_count.values()))
        if np.any(counts > 2):
            raise ValidationError("mesh is not manifold (edge in > 2 triangles)")
        boundary = sorted({v for (a, b), c in edge_count.items() if c == 1
                           for v in (a, b)})
        if self.closed and boundary:
            raise ValidationError("mesh declared closed but has boundary edges")
        return np.asarray(boundary, dtype=np.int64)

    @classmethod
    def path(cls, num_vertices):
        edges = np.column_stack([np.arange(num_vertices - 1),
                                 np.arange(1, num_vertices)])
        return cls(1, num_vertices, edges, closed=False)

    @classmethod
    def loop(cls, num_vertices):
        edges = np.column_stack([np.arange(num_vertices),
                                 (np.arange(num_vertices) + 1) % num_vertices])
        return cls(1, num_vertices, edges, closed=True)

    @classmethod
    def mesh(cls, num_vertices, triangles, closed=True):
        return cls(2, num_vertices, triangles, closed=closed)

    @property
    def interior_mask(self):
        mask = np.ones(self.num_vertices, dtype=bool)
        mask[self.boundary_vertices] = False
        return mask


class DiscreteImmersion:
    """Vertex positions in L^{n+2} over a simplicial domain, optionally
    constrained to a rotation hypersurface."""

    def __init__(self, domain, positions, ambient_n, constraint=None,
                 constraint_spec=None, validate=True, constraint_tol=1e-8):
        positions = np.ascontiguousarray(positions, dtype=float)
        if positions.shape != (domain.num_vertices, ambient_n + 2):
            raise ValidationError(
                f"positions must be ({domain.num_vertices}, {ambient_n + 2})")
        if constraint is not None and constraint.dim != ambient_n + 2:
            raise ValidationError("constraint dimension does not match ambient")
        self.domain = domain
        self.positions = positions
        self.ambient_n = int(ambient_n)
        self.constraint = constraint
        self.constraint_spec = constraint_spec
        self._cache = {}
        if validate:
            self.validate()

    @property
    def k(self):
        return self.domain.k

    @property
    def times(self):
        return self.positions[:, 0]

    def validate(self, constraint_tol=1e-8):
        ops = self._operators()
        if ops["min_metric"] <= 0.0:
            raise NotSpacelikeError(
                f"non-spacelike simplex (min induced metric {ops['min_metric']:.3e})")
        if self.constraint is not None:
            t = self.times
            lo, hi = self.constraint.profile.interval
            if np.any(t < lo) or np.any(t > hi):
                raise ValidationError("a vertex time lies outside the profile interval")
            r = np.asarray(self.constraint.profile.value(t))
            gap = np.abs(np.sum(self.positions[:, 1:] ** 2, axis=1) - r ** 2)
            if np.max(gap) > constraint_tol:
                bad = int(np.argmax(gap))
                raise ValidationError(
                    f"vertex {bad} is off the constraint surface by {gap[bad]:.3e}")

    def replace_positions(self, positions, validate=False):
        return DiscreteImmersion(self.domain, positions, self.ambient_n,
                                 constraint=self.constraint,
                                 constraint_spec=self.constraint_spec,
                                 validate=validate)

    def _operators(self):
        """Cached kernel pass: laplacian, time-gradient, measures."""
        if "ops" in self._cache:
            return self._cache["ops"]
        dom = self.domain
        if dom.k == 1:
            ordered = self.positions[dom.order]
            lap_o, grad_o, edge_sq, dual_o = curve_operators(ordered, dom.closed)
            inverse = np.empty_like(dom.order)
            inverse[dom.order] = np.arange(dom.order.size)
            lap = lap_o[inverse]
            grad0 = grad_o[inverse]
            measure = dual_o[inverse]
            min_metric = float(np.min(edge_sq))
            simplex_metric = edge_sq
        else:
            lap, grad0, measure, min_eig = tri_operators(self.positions,
                                                         dom.simplices)
            lap = lap.copy()
            lap[~dom.interior_mask] = np.nan
            min_metric = float(np.min(min_eig))
            simplex_metric = min_eig
        ops = {
            "lap": lap,
            "grad0_sq": grad0,
            "measure": measure,
            "min_metric": min_metric,
            "simplex_metric": simplex_metric,
        }
        self._cache["ops"] = ops
        return ops

    def _profile_data(self):
        if "prof" in self._cache:
            return self._cache["prof"]
        if self.constraint is None:
            raise ValidationError("operation requires a constrained immersion")
        t = self.times
        q = self.constraint
        r = np.asarray(q.profile.value(t), dtype=float)
        r1 = np.asarray(q.profile.deriv1(t), dtype=float)
        r2 = np.asarray(q.profile.deriv2(t), dtype=float)
        omega = 1.0 - r1 ** 2
        data = {"r": r, "r1": r1, "r2": r2, "omega": omega,
                "w": np.sqrt(omega)}
        self._cache["prof"] = data
        return data


# ---------------------------------------------------------------------------
# basic induced geometry

def induced_gram(im):
    """Per-simplex Gram matrices of the induced metric and their spacelike
    flags: (S, k, k) array and (S,) boolean array."""
    dom = im.domain
    pos = im.positions
    if dom.k == 1:
        e = pos[dom.simplices[:, 1]] - pos[dom.simplices[:, 0]]
        gram = mk.lorentz_inner(e, e)[:, None, None]
        if np.any(gram == 0.0):
            raise ValidationError("degenerate simplex (zero edge)")
        return gram, gram[:, 0, 0] > 0.0
    u = pos[dom.simplices[:, 1]] - pos[dom.simplices[:, 0]]
    v = pos[dom.simplices[:, 2]] - pos[dom.simplices[:, 0]]
    g_uu = mk.lorentz_inner(u, u)
    g_uv = mk.lorentz_inner(u, v)
    g_vv = mk.lorentz_inner(v, v)
    gram = np.empty((dom.simplices.shape[0], 2, 2))
    gram[:, 0, 0] = g_uu
    gram[:, 0, 1] = gram[:, 1, 0] = g_uv
    gram[:, 1, 1] = g_vv
    spacelike = (g_uu > 0.0) & (g_uu * g_vv - g_uv ** 2 > 0.0)
    return gram, spacelike


def _require_spacelike(im):
    ops = im._operators()
    if ops["min_metric"] <= 0.0:
        raise NotSpacelikeError(
            f"non-spacelike simplex (min induced metric {ops['min_metric']:.3e})")
    return ops


def laplace_beltrami(im):
    """Discrete Laplacian of the position map, (m, n+2); rows at boundary
    vertices are NaN (not evaluated)."""
    return _require_spacelike(im)["lap"]


def mean_curvature_ambient(im):
    """Mean curvature vector in the ambient space, lap / k."""
    return laplace_beltrami(im) / im.k


def grad_time_sq(im):
    """Per-vertex squared gradient of the time component psi0, from the
    per-simplex inverse Gram, averaged with simplex measures."""
    return _require_spacelike(im)["grad0_sq"]


def vertex_measures(im):
    """Lumped vertex measures (dual lengths for curves, barycentric areas
    for meshes)."""
    return _require_spacelike(im)["measure"]


# ---------------------------------------------------------------------------
# vertex tangent frames

def vertex_frames(im, tol=1e-12):
    """Orthonormal tangent frame per vertex, (m, k, n+2).

    Frames come from the span of the incident edge vectors: for curves the
    orientation-summed (centered) edge vector, for meshes Lorentz
    Gram-Schmidt over the incident edges.  A star spanning fewer than k
    spacelike directions raises DegenerateStarError.
    """
    if "frames" in im._cache:
        return im._cache["frames"]
    dom = im.domain
    pos = im.positions
    m = dom.num_vertices
    d = pos.shape[1]
    frames = np.full((m, dom.k, d), np.nan)
    if dom.k == 1:
        ordered = pos[dom.order]
        if dom.closed:
            chord = np.roll(ordered, -1, axis=0) - np.roll(ordered, 1, axis=0)
        else:
            chord = np.empty_like(ordered)
            chord[1:-1] = ordered[2:] - ordered[:-2]
            chord[0] = ordered[1] - ordered[0]
            chord[-1] = ordered[-1] - ordered[-2]
        norm_sq = mk.lorentz_inner(chord, chord)
        if np.any(norm_sq <= 0.0):
            bad = int(dom.order[np.argmin(norm_sq)])
            raise DegenerateStarError(f"non-spacelike vertex star at {bad}")
        frames[dom.order, 0] = chord / np.sqrt(norm_sq)[:, None]
    else:
        neighbors = [set() for _ in range(m)]
        for tri in dom.simplices:
            for a in range(3):
                neighbors[tri[a]].update((int(tri[(a + 1) % 3]),
                                          int(tri[(a + 2) % 3])))
        for i in range(m):
            basis = []
            for j in sorted(neighbors[i]):
                v = pos[j] - pos[i]
                u = v.copy()
                for b in basis:
                    u -= mk.lorentz_inner(u, b) * b
                q = float(mk.lorentz_inner(u, u))
                if q > tol * float(np.sum(v * v)) and q > 0.0:
                    basis.append(u / np.sqrt(q))
                if len(basis) == 2:
                    break
            if len(basis) < 2:
                raise DegenerateStarError(
                    f"vertex star at {i} spans fewer than 2 spacelike directions")
            frames[i, 0] = basis[0]
            frames[i, 1] = basis[1]
    im._cache["frames"] = frames
    return frames


def timelike_projection_sq(im):
    """||T_tangential||^2 per vertex: the squared projection of the unit
    timelike field of Q(r) onto the discrete tangent space."""
    prof = im._profile_data()
    frames = vertex_frames(im)
    t_field = np.empty_like(im.positions)
    t_field[:, 0] = 1.0
    t_field[:, 1:] = (prof["r1"] / prof["r"])[:, None] * im.positions[:, 1:]
    t_field /= prof["w"][:, None]
    proj = (-frames[..., 0] * t_field[:, None, 0]
            + np.einsum("mkj,mj->mk", frames[..., 1:], t_field[:, 1:]))
    return np.sum(proj ** 2, axis=-1)


def timelike_projection_check(im):
    """Compare ||T_tangential||^2 from the discrete frames with the closed
    form (1 - r'(psi0)^2) ||grad psi0||^2."""
    prof = im._profile_data()
    lhs = timelike_projection_sq(im)
    rhs = prof["omega"] * grad_time_sq(im)
    mask = im.domain.interior_mask
    return {
        "lhs": lhs,
        "rhs": rhs,
        "residual": np.abs(lhs - rhs),
        "sup_residual": float(np.max(np.abs(lhs - rhs)[mask])),
    }


# ---------------------------------------------------------------------------
# stationarity fields

def stationarity_terms(im):
    """Per-vertex (q, P) of the stationarity identity lap(psi) + q P = 0:
    P = (r r'(psi0), psi_1, ..., psi_{n+1}) and
    q = [k - (r'' r + r'^2 - 1) ||grad psi0||^2] / (r^2 (1 - r'^2))."""
    prof = im._profile_data()
    g0 = grad_time_sq(im)
    r, r1, r2, omega = prof["r"], prof["r1"], prof["r2"], prof["omega"]
    bracket = im.k - (r2 * r + r1 ** 2 - 1.0) * g0
    q = bracket / (r ** 2 * omega)
    p_field = np.empty_like(im.positions)
    p_field[:, 0] = r * r1
    p_field[:, 1:] = im.positions[:, 1:]
    return q, p_field


@dataclass
class StationarityReport:
    """Vertexwise stationarity residuals of a constrained immersion."""

    k: int
    ambient_n: int
    interior: np.ndarray = field(repr=False)
    laplacian: np.ndarray = field(repr=False)
    grad_time_sq: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    P: np.ndarray = field(repr=False)
    residual: np.ndarray = field(repr=False)
    residual_norm: np.ndarray = field(repr=False)
    residual_lorentz: np.ndarray = field(repr=False)
    measure: np.ndarray = field(repr=False)
    sup_norm: float = 0.0
    l2_norm: float = 0.0
    component_sup: np.ndarray = None
    forms_gap: float = 0.0
    q_min: float = 0.0
    q_positive_at_rmax: bool = True

    def to_dict(self):
        return {
            "k": self.k,
            "n": self.ambient_n,
            "num_vertices": int(self.residual.shape[0]),
            "num_interior": int(np.sum(self.interior)),
            "sup_residual_norm": self.sup_norm,
            "l2_residual_norm": self.l2_norm,
            "component_sup": self.component_sup.tolist(),
            "residual_forms_gap": self.forms_gap,
            "q_min": self.q_min,
            "q_positive_at_max_radius": self.q_positive_at_rmax,
        }

    def write_csv(self, path):
        d = self.ambient_n + 2
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["vertex", "q"] + [f"res{j}" for j in range(d)]
                            + ["res_norm"])
            for i in range(self.residual.shape[0]):
                row = [i, _fmt(self.q[i])]
                row += [_fmt(v) for v in self.residual[i]]
                row.append(_fmt(self.residual_norm[i]))
                writer.writerow(row)


def _fmt(x):
    return f"{x:.17g}"


def stationarity_report(im):
    """Residual lap(psi) + q P per vertex, together with the equivalent
    normal form alpha(psi0) [k - (r'' r + r'^2 - 1)||grad psi0||^2] N; the
    two agree to rounding since alpha N = -P / (r^2 (1 - r'^2))."""
    ops = _require_spacelike(im)
    prof = im._profile_data()
    lap = ops["lap"]
    g0 = ops["grad0_sq"]
    q, p_field = stationarity_terms(im)
    residual = lap + q[:, None] * p_field

    r, r1, r2, omega, w = (prof["r"], prof["r1"], prof["r2"], prof["omega"],
                           prof["w"])
    n_field = np.empty_like(im.positions)
    n_field[:, 0] = r * r1
    n_field[:, 1:] = im.positions[:, 1:]
    n_field /= (r * w)[:, None]
    alpha = -1.0 / (r * w)
    bracket = im.k - (r2 * r + r1 ** 2 - 1.0) * g0
    residual_alt = lap - (alpha * bracket)[:, None] * n_field

    mask = im.domain.interior_mask
    scale = 1.0 + np.max(np.abs(lap[mask])) if np.any(mask) else 1.0
    forms_gap = float(np.max(np.abs(residual - residual_alt)[mask]) / scale)

    res_norm = np.sqrt(np.sum(residual ** 2, axis=1))
    res_lorentz = np.sqrt(np.abs(mk.lorentz_inner(residual, residual)))
    measure = ops["measure"]
    sup_norm = float(np.max(res_norm[mask]))
    l2_norm = float(np.sqrt(np.sum(measure[mask] * res_norm[mask] ** 2)))
    component_sup = np.max(np.abs(residual[mask]), axis=0)

    rsq = r ** 2
    at_max = int(np.argmax(rsq))
    return StationarityReport(
        k=im.k,
        ambient_n=im.ambient_n,
        interior=mask,
        laplacian=lap,
        grad_time_sq=g0,
        q=q,
        P=p_field,
        residual=residual,
        residual_norm=res_norm,
        residual_lorentz=res_lorentz,
        measure=measure,
        sup_norm=sup_norm,
        l2_norm=l2_norm,
        component_sup=component_sup,
        forms_gap=forms_gap,
        q_min=float(np.min(q)),
        q_positive_at_rmax=bool(q[at_max] > 0.0),
    )


def mean_curvature_in_Q(im):
    """Mean curvature vector within Q(r):
    H_Q = H - (1/k) sum_i <A X_i, X_i> N, the frame sum evaluated through
    the shape operator A X = alpha X + beta <T, X> T."""
    ops = _require_spacelike(im)
    prof = im._profile_data()
    r, r1, r2, omega, w = (prof["r"], prof["r1"], prof["r2"], prof["omega"],
                           prof["w"])
    alpha = -1.0 / (r * w)
    beta = (r2 * r + r1 ** 2 - 1.0) / (r * omega * w)
    tproj = timelike_projection_sq(im)
    n_field = np.empty_like(im.positions)
    n_field[:, 0] = r * r1
    n_field[:, 1:] = im.positions[:, 1:]
    n_field /= (r * w)[:, None]
    h_ambient = ops["lap"] / im.k
    correction = alpha + (beta / im.k) * tproj
    return h_ambient - correction[:, None] * n_field


def trace_diagnostics(im):
    """Trace identities of the two Weingarten operators along the immersion:
    trace(A_P) = -k + (r'^2 + r r'' - 1) ||grad psi0||^2, compared with
    -q / alpha^2, and k ||H||^2 compared with q^2 / (k alpha^2)."""
    ops = _require_spacelike(im)
    prof = im._profile_data()
    g0 = ops["grad0_sq"]
    r, r1, r2, omega, w = (prof["r"], prof["r1"], prof["r2"], prof["omega"],
                           prof["w"])
    q, _ = stationarity_terms(im)
    alpha_sq = 1.0 / (r ** 2 * omega)

    trace_ap = -im.k + (r1 ** 2 + r * r2 - 1.0) * g0
    trace_ap_expected = -q / alpha_sq
    mask = im.domain.interior_mask
    gap_ap = np.abs(trace_ap - trace_ap_expected) / (1.0 + np.abs(trace_ap))

    h_vec = ops["lap"] / im.k
    k_h_sq = im.k * mk.lorentz_inner(h_vec, h_vec)
    k_h_sq_expected = q ** 2 / (im.k * alpha_sq)
    gap_h = np.abs(k_h_sq - k_h_sq_expected) / (1.0 + np.abs(k_h_sq_expected))

    return {
        "trace_AP": trace_ap,
        "trace_AP_expected": trace_ap_expected,
        "trace_AP_sup_gap": float(np.max(gap_ap[mask])),
        "k_H_sq": k_h_sq,
        "k_H_sq_expected": k_h_sq_expected,
        "k_H_sq_sup_gap": float(np.max(gap_h[mask])),
    }


def integral_identity(im):
    """The measure-weighted sum of q r(psi0) r'(psi0), which vanishes for
    stationary closed immersions."""
    if not im.domain.closed:
        raise ValidationError("the integral identity needs a closed domain")
    ops = _require_spacelike(im)
    prof = im._profile_data()
    q, _ = stationarity_terms(im)
    return float(np.sum(ops["measure"] * q * prof["r"] * prof["r1"]))


# ---------------------------------------------------------------------------
# file format

def immersion_to_dict(im):
    from .scalarfn import to_string
    out = {
        "k": im.k,
        "n": im.ambient_n,
        "closed": im.domain.closed,
        "vertices": im.positions.tolist(),
    }
    if im.k == 1:
        out["edges"] = im.domain.simplices.tolist()
    else:
        out["triangles"] = im.domain.simplices.tolist()
    if im.constraint_spec is not None:
        out["constraint_profile"] = im.constraint_spec
    elif im.constraint is not None:
        fn = im.constraint.profile.fn
        if hasattr(fn, "expr"):
            out["constraint_profile"] = {
                "kind": "profile",
                "expr": to_string(fn.expr),
                "var": "t",
                "interval": list(im.constraint.profile.interval),
                "n": im.constraint.n,
            }
        else:
            raise ValidationError(
                "cannot serialize a tabulated constraint without its spec")
    return out


def immersion_from_dict(d, validate=True):
    from .profile import spec_to_profile
    from .qsurface import RotationHypersurface
    try:
        k = int(d["k"])
        n = int(d["n"])
        closed = bool(d["closed"])
        vertices = np.asarray(d["vertices"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"bad immersion document: {exc}") from exc
    if k == 1:
        if "edges" not in d:
            raise ValidationError("k = 1 immersion needs an 'edges' list")
        domain = SimplicialDomain(1, vertices.shape[0], d["edges"], closed)
    else:
        if "triangles" not in d:
            raise ValidationError("k = 2 immersion needs a 'triangles' list")
        domain = SimplicialDomain(2, vertices.shape[0], d["triangles"], closed)
    constraint = None
    spec = d.get("constraint_profile")
    if spec is not None:
        prof, spec_n = spec_to_profile(spec)
        if int(spec.get("n", n)) != n:
            raise ValidationError("constraint fibre dimension disagrees with "
                                  "the immersion's 'n'")
        constraint = RotationHypersurface(prof, n)
    return DiscreteImmersion(domain, vertices, n, constraint=constraint,
                             constraint_spec=spec, validate=validate)
