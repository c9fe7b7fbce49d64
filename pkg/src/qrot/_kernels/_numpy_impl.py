"""Pure-numpy kernels for the discrete operators.

These mirror the compiled kernels in _core.pyx exactly; the package picks
whichever is available at import time.  The Lorentzian signature enters
only through the squared edge lengths -e0^2 + sum_i ei^2; everything
downstream is the standard Euclidean mesh machinery on the induced metric.

Outputs are meaningful only when every simplex is spacelike (positive
edge_sq / Gram eigenvalues); callers are expected to check the returned
edge_sq or tri_min_eig before trusting lap and grad0_sq.
"""

import numpy as np


def _edge_sq(diff):
    return -diff[:, 0] ** 2 + np.sum(diff[:, 1:] ** 2, axis=1)


def curve_operators(pos, closed):
    """Discrete Laplacian and time-gradient data for a polyline.

    pos: (m, d) float64 vertex positions, ordered along the curve (a loop
    when closed).  Returns (lap, grad0_sq, edge_sq, dual):

      lap      (m, d) second difference over Lorentzian arclength,
                      NaN at the two endpoints of an open path
      grad0_sq (m,)   length-weighted vertex average of (dpsi0/dl)^2
      edge_sq  (E,)   squared Lorentzian edge lengths, E = m or m-1
      dual     (m,)   vertex dual measure, half the incident edge lengths
    """
    pos = np.ascontiguousarray(pos, dtype=float)
    m = pos.shape[0]
    if closed:
        diff = np.roll(pos, -1, axis=0) - pos
    else:
        diff = pos[1:] - pos[:-1]
    edge_sq = _edge_sq(diff)
    with np.errstate(divide="ignore", invalid="ignore"):
        ell = np.sqrt(np.maximum(edge_sq, 0.0))
        slope = diff / ell[:, None]
        g_edge = (diff[:, 0] / ell) ** 2

        if closed:
            ell_prev = np.roll(ell, 1)
            dual = 0.5 * (ell + ell_prev)
            lap = (slope - np.roll(slope, 1, axis=0)) / dual[:, None]
            g_prev = np.roll(g_edge, 1)
            grad0_sq = (ell_prev * g_prev + ell * g_edge) / (ell_prev + ell)
        else:
            lap = np.full_like(pos, np.nan)
            dual = np.empty(m)
            dual[0] = 0.5 * ell[0]
            dual[-1] = 0.5 * ell[-1]
            dual[1:-1] = 0.5 * (ell[:-1] + ell[1:])
            lap[1:-1] = (slope[1:] - slope[:-1]) / dual[1:-1, None]
            grad0_sq = np.empty(m)
            grad0_sq[0] = g_edge[0]
            grad0_sq[-1] = g_edge[-1]
            grad0_sq[1:-1] = (ell[:-1] * g_edge[:-1] + ell[1:] * g_edge[1:]) \
                / (ell[:-1] + ell[1:])
    return lap, grad0_sq, edge_sq, dual


def tri_operators(pos, tris):
    """Cotangent Laplacian with barycentric lumped mass for a triangle mesh.

    pos: (m, d) float64, tris: (T, 3) int.  Cotangents and areas come from
    the induced (Lorentzian) Gram matrix of each triangle.  Returns
    (lap, grad0_sq, mass, tri_min_eig):

      lap        (m, d) Laplacian of the position map
      grad0_sq   (m,)   area-weighted vertex average of ||grad psi0||^2
      mass       (m,)   barycentric vertex areas
      tri_min_eig (T,)  smallest eigenvalue of each induced Gram matrix
    """
    pos = np.ascontiguousarray(pos, dtype=float)
    tris = np.ascontiguousarray(tris, dtype=np.int64)
    m = pos.shape[0]
    i0, i1, i2 = tris[:, 0], tris[:, 1], tris[:, 2]
    u = pos[i1] - pos[i0]
    v = pos[i2] - pos[i0]

    def inner(a, b):
        return -a[:, 0] * b[:, 0] + np.sum(a[:, 1:] * b[:, 1:], axis=1)

    g_uu = inner(u, u)
    g_vv = inner(v, v)
    g_uv = inner(u, v)
    det = g_uu * g_vv - g_uv ** 2

    tr = g_uu + g_vv
    disc = np.sqrt(np.maximum((g_uu - g_vv) ** 2 + 4.0 * g_uv ** 2, 0.0))
    tri_min_eig = 0.5 * (tr - disc)

    with np.errstate(divide="ignore", invalid="ignore"):
        sdet = np.sqrt(np.maximum(det, 0.0))
        area = 0.5 * sdet
        cot0 = g_uv / sdet                 # angle at vertex i0
        cot1 = (g_uu - g_uv) / sdet        # angle at vertex i1
        cot2 = (g_vv - g_uv) / sdet        # angle at vertex i2

        acc = np.zeros_like(pos)
        wsum = np.zeros(m)
        for cot, a_idx, b_idx in ((cot0, i1, i2), (cot1, i0, i2), (cot2, i0, i1)):
            w = 0.5 * cot
            np.add.at(acc, a_idx, w[:, None] * pos[b_idx])
            np.add.at(acc, b_idx, w[:, None] * pos[a_idx])
            np.add.at(wsum, a_idx, w)
            np.add.at(wsum, b_idx, w)

        mass = np.zeros(m)
        for idx in (i0, i1, i2):
            np.add.at(mass, idx, area / 3.0)
        lap = (acc - wsum[:, None] * pos) / mass[:, None]

        d1 = pos[i1, 0] - pos[i0, 0]
        d2 = pos[i2, 0] - pos[i0, 0]
        g_tri = (g_vv * d1 ** 2 - 2.0 * g_uv * d1 * d2 + g_uu * d2 ** 2) / det
        num = np.zeros(m)
        den = np.zeros(m)
        for idx in (i0, i1, i2):
            np.add.at(num, idx, area * g_tri)
            np.add.at(den, idx, area)
        grad0_sq = num / den
    return lap, grad0_sq, mass, tri_min_eig
