"""Python reference kernels.

The angular ODE is

    f'' = q*f - c(t)*f',      c(t) = (h-1)*cot(t) - (k-1)*tan(t),

the radial part of the Laplace-Beltrami operator on the product-sphere
cross-section: (J f')' = q*J*f with J(t) = cos^(k-1)t * sin^(h-1)t.
Start points must sit clear of the cot singularity when h >= 2; the callers
use the two-term series start.  Fixed-step RK4 over a uniform macro grid;
each macro interval is substepped so that step*|c| stays below 1/2, which
keeps the explicit scheme stable against the cot/tan blowup at the chart
edges.

The compiled twin in _native.pyx mirrors the arithmetic of this module
operation for operation; tests assert agreement.
"""

import math

import numpy as np


def _coef(k, h, t):
    c = 0.0
    if h > 1:
        c += (h - 1) / math.tan(t)
    if k > 1:
        c -= (k - 1) * math.tan(t)
    return c


def _nsub(k, h, t_a, t_b, base):
    # conservative bound for |c| on [t_a, t_b]; both ends monotone pieces
    cmax = 0.0
    if h > 1 and t_a > 0.0:
        cmax += (h - 1) / math.tan(t_a)
    if k > 1 and t_b < 1.5707963267948966:
        cmax += (k - 1) * math.tan(t_b)
    m = int((t_b - t_a) * cmax * 2.0) + 1
    return m if m > base else base


def _rk4_span(k, h, q, t, f, g, t_end, nsub):
    dt = (t_end - t) / nsub
    for _ in range(nsub):
        c1 = _coef(k, h, t)
        k1f = g
        k1g = q * f - c1 * g

        th = t + 0.5 * dt
        ch = _coef(k, h, th)
        f2 = f + 0.5 * dt * k1f
        g2 = g + 0.5 * dt * k1g
        k2f = g2
        k2g = q * f2 - ch * g2

        f3 = f + 0.5 * dt * k2f
        g3 = g + 0.5 * dt * k2g
        k3f = g3
        k3g = q * f3 - ch * g3

        t2 = t + dt
        c2 = _coef(k, h, t2)
        f4 = f + dt * k3f
        g4 = g + dt * k3g
        k4f = g4
        k4g = q * f4 - c2 * g4

        f = f + dt * (k1f + 2.0 * k2f + 2.0 * k3f + k4f) / 6.0
        g = g + dt * (k1g + 2.0 * k2g + 2.0 * k3g + k4g) / 6.0
        t = t2
    return f, g


def angular_integrate(k, h, q, t0, f0, g0, t1, nsteps):
    """Integrate from (t0, f0, g0) to t1 over nsteps macro intervals."""
    t, f, g = t0, f0, g0
    dt = (t1 - t0) / nsteps
    for i in range(nsteps):
        ta = t0 + i * dt
        tb = t0 + (i + 1) * dt if i + 1 < nsteps else t1
        f, g = _rk4_span(k, h, q, ta, f, g, tb, _nsub(k, h, ta, tb, 1))
        t = tb
    return f, g


def angular_dense(k, h, q, t0, f0, g0, ts, base_sub):
    """Integrate recording (f, f') at each node of ts (ts[0] may equal t0)."""
    m = len(ts)
    fs = np.empty(m)
    gs = np.empty(m)
    t, f, g = t0, f0, g0
    for i in range(m):
        ti = ts[i]
        if ti > t:
            f, g = _rk4_span(k, h, q, t, f, g, ti, _nsub(k, h, t, ti, base_sub))
            t = ti
        fs[i] = f
        gs[i] = g
    return fs, gs


def angular_hunt(k, h, q, t0, f0, g0, t_max, nsteps):
    """March until f changes sign; return the bracketing states or None."""
    t, f, g = t0, f0, g0
    dt = (t_max - t0) / nsteps
    for i in range(nsteps):
        ta = t0 + i * dt
        tb = t0 + (i + 1) * dt if i + 1 < nsteps else t_max
        f1, g1 = _rk4_span(k, h, q, ta, f, g, tb, _nsub(k, h, ta, tb, 1))
        if (f > 0.0) != (f1 > 0.0):
            return ta, f, g, tb, f1, g1
        f, g = f1, g1
        t = tb
    return None


def sturm_count(diag, off, x):
    """Number of eigenvalues of the symmetric tridiagonal (diag, off) below x."""
    n = len(diag)
    cnt = 0
    d = diag[0] - x
    if d < 0.0:
        cnt += 1
    for i in range(1, n):
        e = off[i - 1]
        if d == 0.0:
            d = 1e-300
        d = diag[i] - x - e * e / d
        if d < 0.0:
            cnt += 1
    return cnt


def tridiag_smallest_eig(diag, off):
    """Smallest eigenvalue of a symmetric tridiagonal matrix.

    Delegates to LAPACK's bisection/Sturm-count routine via scipy; the
    compiled kernel implements the same bisection directly.
    """
    from scipy.linalg import eigh_tridiagonal

    w = eigh_tridiagonal(
        np.asarray(diag, dtype=float),
        np.asarray(off, dtype=float),
        select="i",
        select_range=(0, 0),
        eigvals_only=True,
    )
    return float(w[0])
