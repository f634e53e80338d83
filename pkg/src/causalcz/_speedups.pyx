# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise summation kernels (the O(targets x sources) hot loops).

Semantics must match causalcz._fallback exactly: causal sign filter on the
time coordinates (ties contribute to neither causal part), Chebyshev
exclusion ball on integer cell indices, sequential source-order summation.
"""

import numpy as np


def pairwise_invsq(double[::1] tt, double[::1] tx, double[::1] tphi,
                   long long[::1] ti, long long[::1] tj,
                   double[::1] st, double[::1] sx, double[::1] sphi,
                   long long[::1] si, long long[::1] sj,
                   double complex[::1] w,
                   double complex pref, int sign, long long excl):
    """sum_j w_j * pref / ((y_j - x_i) + i((phi_s_j + s_j) - (phi_t_i + t_i)))^2."""
    cdef Py_ssize_t nt = tt.shape[0], ns = st.shape[0]
    out = np.zeros(nt, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double dx, dimag
    cdef double complex dz, acc
    cdef long long di, dj
    for i in range(nt):
        acc = 0
        for j in range(ns):
            if sign > 0:
                if tt[i] <= st[j]:
                    continue
            elif sign < 0:
                if tt[i] >= st[j]:
                    continue
            di = ti[i] - si[j]
            if di < 0:
                di = -di
            dj = tj[i] - sj[j]
            if dj < 0:
                dj = -dj
            if di <= excl and dj <= excl:
                continue
            dx = sx[j] - tx[i]
            dimag = (sphi[j] + st[j]) - (tphi[i] + tt[i])
            dz = dx + 1j * dimag
            acc = acc + w[j] / (dz * dz)
        ov[i] = pref * acc
    return out


def pairwise_recip(double[::1] tt, long long[::1] ti,
                   double[::1] st, long long[::1] si,
                   double complex[::1] w,
                   double complex pref, int sign, long long excl):
    """sum_j w_j * pref / (t_i - s_j) over the 1-d half-line grid."""
    cdef Py_ssize_t nt = tt.shape[0], ns = st.shape[0]
    out = np.zeros(nt, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double complex acc
    cdef long long di
    for i in range(nt):
        acc = 0
        for j in range(ns):
            if sign > 0:
                if tt[i] <= st[j]:
                    continue
            elif sign < 0:
                if tt[i] >= st[j]:
                    continue
            elif tt[i] == st[j]:
                continue
            di = ti[i] - si[j]
            if di < 0:
                di = -di
            if di <= excl:
                continue
            acc = acc + w[j] / (tt[i] - st[j])
        ov[i] = pref * acc
    return out
