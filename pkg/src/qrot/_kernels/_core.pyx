# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for the discrete operators.

Semantics match _numpy_impl exactly; see that module for the API contract.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def curve_operators(pos, bint closed):
    pos = np.ascontiguousarray(pos, dtype=np.float64)
    cdef double[:, ::1] p = pos
    cdef Py_ssize_t m = p.shape[0]
    cdef Py_ssize_t d = p.shape[1]
    cdef Py_ssize_t ne = m if closed else m - 1

    lap_arr = np.full((m, d), np.nan)
    grad_arr = np.empty(m)
    edge_arr = np.empty(ne)
    dual_arr = np.empty(m)
    cdef double[:, ::1] lap = lap_arr
    cdef double[::1] grad0 = grad_arr
    cdef double[::1] edge_sq = edge_arr
    cdef double[::1] dual = dual_arr

    ell_arr = np.empty(ne)
    ge_arr = np.empty(ne)
    cdef double[::1] ell = ell_arr
    cdef double[::1] g_edge = ge_arr

    cdef Py_ssize_t i, j, nxt, prev, iprev, inext
    cdef double s, diff0, dj, lp, lc

    for i in range(ne):
        nxt = i + 1 if i + 1 < m else 0
        diff0 = p[nxt, 0] - p[i, 0]
        s = -diff0 * diff0
        for j in range(1, d):
            dj = p[nxt, j] - p[i, j]
            s += dj * dj
        edge_sq[i] = s
        ell[i] = sqrt(s) if s > 0.0 else 0.0
        g_edge[i] = (diff0 / ell[i]) ** 2 if ell[i] > 0.0 else np.nan

    for i in range(m):
        if not closed and (i == 0 or i == m - 1):
            if i == 0:
                dual[i] = 0.5 * ell[0]
                grad0[i] = g_edge[0]
            else:
                dual[i] = 0.5 * ell[ne - 1]
                grad0[i] = g_edge[ne - 1]
            continue
        prev = i - 1 if i > 0 else ne - 1
        nxt = i
        iprev = i - 1 if i > 0 else m - 1
        inext = i + 1 if i + 1 < m else 0
        lp = ell[prev]
        lc = ell[nxt]
        dual[i] = 0.5 * (lp + lc)
        grad0[i] = (lp * g_edge[prev] + lc * g_edge[nxt]) / (lp + lc)
        if lp > 0.0 and lc > 0.0:
            for j in range(d):
                lap[i, j] = ((p[inext, j] - p[i, j]) / lc
                             - (p[i, j] - p[iprev, j]) / lp) / dual[i]

    return lap_arr, grad_arr, edge_arr, dual_arr


def tri_operators(pos, tris):
    pos = np.ascontiguousarray(pos, dtype=np.float64)
    tris = np.ascontiguousarray(tris, dtype=np.int64)
    cdef double[:, ::1] p = pos
    cdef long long[:, ::1] t = tris
    cdef Py_ssize_t m = p.shape[0]
    cdef Py_ssize_t d = p.shape[1]
    cdef Py_ssize_t nt = t.shape[0]

    acc_arr = np.zeros((m, d))
    wsum_arr = np.zeros(m)
    mass_arr = np.zeros(m)
    num_arr = np.zeros(m)
    den_arr = np.zeros(m)
    mineig_arr = np.empty(nt)
    cdef double[:, ::1] acc = acc_arr
    cdef double[::1] wsum = wsum_arr
    cdef double[::1] mass = mass_arr
    cdef double[::1] num = num_arr
    cdef double[::1] den = den_arr
    cdef double[::1] mineig = mineig_arr

    cdef Py_ssize_t k, j
    cdef Py_ssize_t i0, i1, i2
    cdef double g_uu, g_vv, g_uv, det, sdet, area, tr, disc
    cdef double cot0, cot1, cot2, w, uj, vj, d1, d2, gtri

    for k in range(nt):
        i0 = t[k, 0]
        i1 = t[k, 1]
        i2 = t[k, 2]
        g_uu = -(p[i1, 0] - p[i0, 0]) * (p[i1, 0] - p[i0, 0])
        g_vv = -(p[i2, 0] - p[i0, 0]) * (p[i2, 0] - p[i0, 0])
        g_uv = -(p[i1, 0] - p[i0, 0]) * (p[i2, 0] - p[i0, 0])
        for j in range(1, d):
            uj = p[i1, j] - p[i0, j]
            vj = p[i2, j] - p[i0, j]
            g_uu += uj * uj
            g_vv += vj * vj
            g_uv += uj * vj
        det = g_uu * g_vv - g_uv * g_uv
        tr = g_uu + g_vv
        disc = (g_uu - g_vv) * (g_uu - g_vv) + 4.0 * g_uv * g_uv
        disc = sqrt(disc) if disc > 0.0 else 0.0
        mineig[k] = 0.5 * (tr - disc)

        sdet = sqrt(det) if det > 0.0 else 0.0
        area = 0.5 * sdet
        if sdet > 0.0:
            cot0 = g_uv / sdet
            cot1 = (g_uu - g_uv) / sdet
            cot2 = (g_vv - g_uv) / sdet
        else:
            cot0 = cot1 = cot2 = np.nan

        # edge (i1, i2) opposite i0, etc.
        w = 0.5 * cot0
        wsum[i1] += w
        wsum[i2] += w
        for j in range(d):
            acc[i1, j] += w * p[i2, j]
            acc[i2, j] += w * p[i1, j]
        w = 0.5 * cot1
        wsum[i0] += w
        wsum[i2] += w
        for j in range(d):
            acc[i0, j] += w * p[i2, j]
            acc[i2, j] += w * p[i0, j]
        w = 0.5 * cot2
        wsum[i0] += w
        wsum[i1] += w
        for j in range(d):
            acc[i0, j] += w * p[i1, j]
            acc[i1, j] += w * p[i0, j]

        mass[i0] += area / 3.0
        mass[i1] += area / 3.0
        mass[i2] += area / 3.0

        d1 = p[i1, 0] - p[i0, 0]
        d2 = p[i2, 0] - p[i0, 0]
        if det != 0.0:
            gtri = (g_vv * d1 * d1 - 2.0 * g_uv * d1 * d2 + g_uu * d2 * d2) / det
        else:
            gtri = np.nan
        num[i0] += area * gtri
        num[i1] += area * gtri
        num[i2] += area * gtri
        den[i0] += area
        den[i1] += area
        den[i2] += area

    lap_arr = np.empty((m, d))
    cdef double[:, ::1] lap = lap_arr
    grad_arr = np.empty(m)
    cdef double[::1] grad0 = grad_arr
    for k in range(m):
        for j in range(d):
            lap[k, j] = (acc[k, j] - wsum[k] * p[k, j]) / mass[k]
        grad0[k] = num[k] / den[k]

    return lap_arr, grad_arr, mass_arr, mineig_arr
