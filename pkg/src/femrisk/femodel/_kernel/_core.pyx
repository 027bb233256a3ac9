# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled radial-return kernel.  Mirrors _pure.radial_return_batch."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

IMPL = "cython"


def radial_return_batch(strain, eps_p, alpha, emod, nu, sigma_y0,
                        plateau_frac, eps_plateau, soft_frac, floor_frac):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] strain_a = np.ascontiguousarray(strain, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] eps_p_a = np.ascontiguousarray(eps_p, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha_a = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] emod_a = np.ascontiguousarray(emod, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sy0_a = np.ascontiguousarray(sigma_y0, dtype=np.float64)

    cdef Py_ssize_t n = strain_a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] stress = np.empty((n, 6))
    cdef cnp.ndarray[cnp.float64_t, ndim=3] tangent = np.zeros((n, 6, 6))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] eps_p_new = np.empty((n, 6))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha_new = np.empty(n)

    cdef double nu_c = nu
    cdef double plat_frac = plateau_frac
    cdef double eps_plat = eps_plateau
    cdef double soft = soft_frac
    cdef double floor_fr = floor_frac

    cdef double g, lam, kb, tr, p_mean, q, plateau, h_soft, floor, sy_cur, f
    cdef double dg, h_used, three_g, dg_soft, sy_new, scale, s_norm, c_n, theta
    cdef double ee[6]
    cdef double sv[6]
    cdef double m[6]
    cdef Py_ssize_t i, a, b

    for i in range(n):
        g = emod_a[i] / (2.0 * (1.0 + nu_c))
        lam = emod_a[i] * nu_c / ((1.0 + nu_c) * (1.0 - 2.0 * nu_c))
        kb = lam + 2.0 * g / 3.0
        for a in range(6):
            ee[a] = strain_a[i, a] - eps_p_a[i, a]
        tr = ee[0] + ee[1] + ee[2]
        for a in range(3):
            sv[a] = lam * tr + 2.0 * g * ee[a]
        for a in range(3, 6):
            sv[a] = g * ee[a]
        p_mean = (sv[0] + sv[1] + sv[2]) / 3.0
        for a in range(3):
            sv[a] -= p_mean
        q = sqrt(1.5 * (sv[0] * sv[0] + sv[1] * sv[1] + sv[2] * sv[2])
                 + 3.0 * (sv[3] * sv[3] + sv[4] * sv[4] + sv[5] * sv[5]))

        plateau = plat_frac * sy0_a[i]
        h_soft = soft * emod_a[i]
        floor = floor_fr * plateau
        if alpha_a[i] <= eps_plat:
            sy_cur = plateau
        else:
            sy_cur = plateau + h_soft * (alpha_a[i] - eps_plat)
        if sy_cur < floor:
            sy_cur = floor
        f = q - sy_cur

        dg = 0.0
        h_used = 0.0
        three_g = 3.0 * g
        if f > 0.0:
            if alpha_a[i] < eps_plat and alpha_a[i] + f / three_g <= eps_plat:
                dg = f / three_g
            else:
                dg_soft = (q - plateau - h_soft * (alpha_a[i] - eps_plat)) / (three_g + h_soft)
                sy_new = plateau + h_soft * (alpha_a[i] + dg_soft - eps_plat)
                if alpha_a[i] + dg_soft <= eps_plat:
                    sy_new = plateau
                if sy_new <= floor + 1e-300:
                    dg = (q - floor) / three_g
                else:
                    dg = dg_soft
                    h_used = h_soft

        if q > 0.0:
            scale = 1.0 - three_g * dg / q
        else:
            scale = 1.0

        for a in range(6):
            stress[i, a] = sv[a] * scale
        for a in range(3):
            stress[i, a] += p_mean

        for a in range(6):
            if q > 0.0:
                m[a] = 1.5 * sv[a] / q
            else:
                m[a] = 0.0
        for a in range(6):
            if a < 3:
                eps_p_new[i, a] = eps_p_a[i, a] + dg * m[a]
            else:
                eps_p_new[i, a] = eps_p_a[i, a] + dg * 2.0 * m[a]
        alpha_new[i] = alpha_a[i] + dg

        # Tangent: kb * 1x1 + 2 g theta * Idev + c_n * m_unit x m_unit.
        if f > 0.0:
            theta = scale
        else:
            theta = 1.0
        for a in range(3):
            for b in range(3):
                tangent[i, a, b] = kb - 2.0 * g * theta / 3.0
            tangent[i, a, a] += 2.0 * g * theta
        for a in range(3, 6):
            tangent[i, a, a] = g * theta

        if f > 0.0:
            s_norm = sqrt(sv[0] * sv[0] + sv[1] * sv[1] + sv[2] * sv[2]
                          + 2.0 * (sv[3] * sv[3] + sv[4] * sv[4] + sv[5] * sv[5]))
            if s_norm > 0.0:
                for a in range(6):
                    m[a] = sv[a] / s_norm
                c_n = 6.0 * g * g * (dg / q - 1.0 / (three_g + h_used))
                for a in range(6):
                    for b in range(6):
                        tangent[i, a, b] += c_n * m[a] * m[b]

    return stress, tangent, eps_p_new, alpha_new
