# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops; see ``_fallback.py`` for the reference numpy versions."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, pow, fabs

cnp.import_array()


cdef extern from "math.h" nogil:
    void sincos(double x, double *s, double *c)


def phase_rotate(double complex[::1] u, const double[::1] V, double lam, double sigma, double s):
    """In place ``u *= exp(-i s (V + lam |u|^(2 sigma)))`` with ``0^(2 sigma) = 0``."""
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double re, im, a2, theta, c, sn, p
    # integer powers avoid pow(); the cubic and quintic cases are the common ones
    cdef int mode = 1 if sigma == 1.0 else (2 if sigma == 2.0 else 0)
    with nogil:
        for i in range(n):
            re = u[i].real
            im = u[i].imag
            theta = V[i]
            if lam != 0.0:
                a2 = re * re + im * im
                if mode == 1:
                    p = a2
                elif mode == 2:
                    p = a2 * a2
                elif a2 > 0.0:
                    p = pow(a2, sigma)
                else:
                    p = 0.0
                theta = theta + lam * p
            sincos(-s * theta, &sn, &c)
            u[i] = (re * c - im * sn) + 1j * (re * sn + im * c)


cdef inline double _herm(double y, double y0, double h, double x0, double x1,
                         double m0, double m1) nogil:
    cdef double t = (y - y0) / h
    cdef double t2 = t * t
    cdef double t3 = t2 * t
    return ((2 * t3 - 3 * t2 + 1) * x0 + (t3 - 2 * t2 + t) * h * m0
            + (-2 * t3 + 3 * t2) * x1 + (t3 - t2) * h * m1)


cdef inline double _dherm(double y, double y0, double h, double x0, double x1,
                          double m0, double m1) nogil:
    cdef double t = (y - y0) / h
    cdef double t2 = t * t
    return ((6 * t2 - 6 * t) * x0 + (3 * t2 - 4 * t + 1) * h * m0
            + (-6 * t2 + 6 * t) * x1 + (3 * t2 - 2 * t) * h * m1) / h


def invert_hermite(const double[::1] ys, const double[::1] xs, const double[::1] slopes,
                   const double[::1] targets, double tol, int maxit):
    """Invert the increasing cubic Hermite interpolant through ``(ys, xs)``.

    Returns ``(y, interval, status)`` with status 0 converged, 1 outside the
    sampled range, 2 not converged.
    """
    cdef Py_ssize_t n = ys.shape[0], m = targets.shape[0]
    out = np.empty(m, dtype=np.float64)
    idx = np.empty(m, dtype=np.intp)
    status = np.zeros(m, dtype=np.int8)
    cdef double[::1] y_out = out
    cdef Py_ssize_t[::1] j_out = idx
    cdef cnp.int8_t[::1] st = status
    cdef Py_ssize_t k, lo, hi, mid, j
    cdef double xt, y0, y1, h, x0, x1, m0, m1, y, f, df, a, b, ynew, thr
    cdef int it
    cdef bint done
    for k in range(m):
        xt = targets[k]
        j_out[k] = -1
        if not (xt >= xs[0] and xt <= xs[n - 1]):
            y_out[k] = np.nan
            st[k] = 1
            continue
        lo = 0
        hi = n - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if xs[mid] <= xt:
                lo = mid
            else:
                hi = mid
        j = lo
        j_out[k] = j
        y0 = ys[j]; y1 = ys[j + 1]; h = y1 - y0
        x0 = xs[j]; x1 = xs[j + 1]; m0 = slopes[j]; m1 = slopes[j + 1]
        thr = tol * (1.0 if fabs(xt) < 1.0 else fabs(xt))
        a = y0
        b = y1
        y = y0 if xt - x0 <= x1 - xt else y1
        done = False
        for it in range(maxit):
            f = _herm(y, y0, h, x0, x1, m0, m1) - xt
            if fabs(f) < thr:
                done = True
                break
            if f < 0:
                a = y
            else:
                b = y
            df = _dherm(y, y0, h, x0, x1, m0, m1)
            ynew = y - f / df if df > 0 else 0.5 * (a + b)
            if not (ynew > a and ynew < b):
                ynew = 0.5 * (a + b)
            y = ynew
        if not done:
            for it in range(200):
                y = 0.5 * (a + b)
                f = _herm(y, y0, h, x0, x1, m0, m1) - xt
                if fabs(f) < thr:
                    done = True
                    break
                if f < 0:
                    a = y
                else:
                    b = y
        y_out[k] = y
        st[k] = 0 if done else 2
    return out, idx, status
