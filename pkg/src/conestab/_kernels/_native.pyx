# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: angular ODE RK4 marching and Sturm-sequence bisection.

Twin of _pyref.py; the arithmetic mirrors the reference implementation
operation for operation so both selections agree to rounding.
"""

from libc.math cimport tan, fabs

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline double _coef(int k, int h, double t) noexcept nogil:
    cdef double c = 0.0
    if h > 1:
        c += (h - 1) / tan(t)
    if k > 1:
        c -= (k - 1) * tan(t)
    return c


cdef inline int _nsub_c(int k, int h, double t_a, double t_b, int base) noexcept nogil:
    cdef double cmax = 0.0
    cdef int m
    if h > 1 and t_a > 0.0:
        cmax += (h - 1) / tan(t_a)
    if k > 1 and t_b < 1.5707963267948966:
        cmax += (k - 1) * tan(t_b)
    m = <int>((t_b - t_a) * cmax * 2.0) + 1
    return m if m > base else base


cdef void _rk4_span_c(int k, int h, double q, double t, double* f, double* g,
                      double t_end, int nsub) noexcept nogil:
    cdef double dt = (t_end - t) / nsub
    cdef double c1, ch, c2, th, t2
    cdef double k1f, k1g, k2f, k2g, k3f, k3g, k4f, k4g, f2, g2, f3, g3, f4, g4
    cdef double ff = f[0], gg = g[0]
    cdef int i
    for i in range(nsub):
        c1 = _coef(k, h, t)
        k1f = gg
        k1g = q * ff - c1 * gg

        th = t + 0.5 * dt
        ch = _coef(k, h, th)
        f2 = ff + 0.5 * dt * k1f
        g2 = gg + 0.5 * dt * k1g
        k2f = g2
        k2g = q * f2 - ch * g2

        f3 = ff + 0.5 * dt * k2f
        g3 = gg + 0.5 * dt * k2g
        k3f = g3
        k3g = q * f3 - ch * g3

        t2 = t + dt
        c2 = _coef(k, h, t2)
        f4 = ff + dt * k3f
        g4 = gg + dt * k3g
        k4f = g4
        k4g = q * f4 - c2 * g4

        ff = ff + dt * (k1f + 2.0 * k2f + 2.0 * k3f + k4f) / 6.0
        gg = gg + dt * (k1g + 2.0 * k2g + 2.0 * k3g + k4g) / 6.0
        t = t2
    f[0] = ff
    g[0] = gg


def angular_integrate(int k, int h, double q, double t0, double f0, double g0,
                      double t1, int nsteps):
    """Integrate from (t0, f0, g0) to t1 over nsteps macro intervals."""
    cdef double f = f0, g = g0
    cdef double dt = (t1 - t0) / nsteps
    cdef double ta, tb
    cdef int i
    with nogil:
        for i in range(nsteps):
            ta = t0 + i * dt
            tb = t0 + (i + 1) * dt if i + 1 < nsteps else t1
            _rk4_span_c(k, h, q, ta, &f, &g, tb, _nsub_c(k, h, ta, tb, 1))
    return f, g


def angular_dense(int k, int h, double q, double t0, double f0, double g0,
                  ts, int base_sub):
    """Integrate recording (f, f') at each node of ts (ts[0] may equal t0)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tarr = np.ascontiguousarray(ts, dtype=np.float64)
    cdef Py_ssize_t m = tarr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fs = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gs = np.empty(m)
    cdef double t = t0, f = f0, g = g0, ti
    cdef Py_ssize_t i
    with nogil:
        for i in range(m):
            ti = tarr[i]
            if ti > t:
                _rk4_span_c(k, h, q, t, &f, &g, ti, _nsub_c(k, h, t, ti, base_sub))
                t = ti
            fs[i] = f
            gs[i] = g
    return np.asarray(fs), np.asarray(gs)


def angular_hunt(int k, int h, double q, double t0, double f0, double g0,
                 double t_max, int nsteps):
    """March until f changes sign; return the bracketing states or None."""
    cdef double t = t0, f = f0, g = g0
    cdef double dt = (t_max - t0) / nsteps
    cdef double ta, tb, f1, g1
    cdef int i, found = 0
    cdef double r_ta = 0, r_f = 0, r_g = 0, r_tb = 0, r_f1 = 0, r_g1 = 0
    with nogil:
        for i in range(nsteps):
            ta = t0 + i * dt
            tb = t0 + (i + 1) * dt if i + 1 < nsteps else t_max
            f1 = f
            g1 = g
            _rk4_span_c(k, h, q, ta, &f1, &g1, tb, _nsub_c(k, h, ta, tb, 1))
            if (f > 0.0) != (f1 > 0.0):
                r_ta = ta; r_f = f; r_g = g
                r_tb = tb; r_f1 = f1; r_g1 = g1
                found = 1
                break
            f = f1
            g = g1
            t = tb
    if found:
        return r_ta, r_f, r_g, r_tb, r_f1, r_g1
    return None


def sturm_count(diag, off, double x):
    """Number of eigenvalues of the symmetric tridiagonal (diag, off) below x."""
    cdef cnp.float64_t[:] d = np.ascontiguousarray(diag, dtype=np.float64)
    cdef cnp.float64_t[:] e = np.ascontiguousarray(off, dtype=np.float64)
    return _sturm_count_c(d, e, x)


cdef int _sturm_count_c(cnp.float64_t[:] d, cnp.float64_t[:] e, double x) noexcept nogil:
    cdef Py_ssize_t n = d.shape[0]
    cdef int cnt = 0
    cdef double q = d[0] - x
    cdef double ei
    cdef Py_ssize_t i
    if q < 0.0:
        cnt += 1
    for i in range(1, n):
        ei = e[i - 1]
        if q == 0.0:
            q = 1e-300
        q = d[i] - x - ei * ei / q
        if q < 0.0:
            cnt += 1
    return cnt


def tridiag_smallest_eig(diag, off):
    """Smallest eigenvalue by Gershgorin-bracketed Sturm bisection."""
    cdef cnp.float64_t[:] d = np.ascontiguousarray(diag, dtype=np.float64)
    cdef cnp.float64_t[:] e = np.ascontiguousarray(off, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0]
    cdef double lo = d[0], hi = d[0], r
    cdef Py_ssize_t i
    cdef double el, er
    for i in range(n):
        el = fabs(e[i - 1]) if i > 0 else 0.0
        er = fabs(e[i]) if i < n - 1 else 0.0
        r = el + er
        if d[i] - r < lo:
            lo = d[i] - r
        if d[i] + r > hi:
            hi = d[i] + r
    cdef double mid
    cdef int it
    with nogil:
        for it in range(200):
            mid = 0.5 * (lo + hi)
            if hi - lo <= 1e-15 * (fabs(lo) + fabs(hi) + 1.0):
                break
            if _sturm_count_c(d, e, mid) >= 1:
                hi = mid
            else:
                lo = mid
    return 0.5 * (lo + hi)
