"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def phase_rotate(u, V, lam, sigma, s):
    """In place ``u *= exp(-i s (V + lam |u|^(2 sigma)))`` with ``0^(2 sigma) = 0``."""
    theta = V.copy()
    if lam != 0.0:
        a2 = u.real**2 + u.imag**2
        nz = a2 > 0
        theta[nz] += lam * a2[nz] ** sigma
    u *= np.exp(-1j * s * theta)


def _herm(y, y0, h, x0, x1, m0, m1):
    t = (y - y0) / h
    t2 = t * t
    t3 = t2 * t
    return (2 * t3 - 3 * t2 + 1) * x0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * x1 + (t3 - t2) * h * m1


def _dherm(y, y0, h, x0, x1, m0, m1):
    t = (y - y0) / h
    t2 = t * t
    return ((6 * t2 - 6 * t) * x0 + (3 * t2 - 4 * t + 1) * h * m0 + (-6 * t2 + 6 * t) * x1 + (3 * t2 - 2 * t) * h * m1) / h


def invert_hermite(ys, xs, slopes, targets, tol, maxit):
    """Vectorized safeguarded Newton; same contract as the compiled kernel."""
    ys = np.asarray(ys, dtype=float)
    xs = np.asarray(xs, dtype=float)
    slopes = np.asarray(slopes, dtype=float)
    xt = np.asarray(targets, dtype=float)
    m = xt.size
    n = ys.size
    out = np.full(m, np.nan)
    idx = np.full(m, -1, dtype=np.intp)
    status = np.ones(m, dtype=np.int8)
    ok = (xt >= xs[0]) & (xt <= xs[n - 1])
    if not np.any(ok):
        return out, idx, status
    xk = xt[ok]
    j = np.clip(np.searchsorted(xs, xk, side="right") - 1, 0, n - 2)
    y0, y1 = ys[j], ys[j + 1]
    h = y1 - y0
    x0, x1, m0, m1 = xs[j], xs[j + 1], slopes[j], slopes[j + 1]
    thr = tol * np.maximum(1.0, np.abs(xk))
    a, b = y0.copy(), y1.copy()
    y = np.where(xk - x0 <= x1 - xk, y0, y1)
    done = np.zeros(xk.size, dtype=bool)
    for _ in range(maxit):
        f = _herm(y, y0, h, x0, x1, m0, m1) - xk
        done |= np.abs(f) < thr
        if done.all():
            break
        act = ~done
        a = np.where(act & (f < 0), y, a)
        b = np.where(act & (f >= 0), y, b)
        df = _dherm(y, y0, h, x0, x1, m0, m1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ynew = np.where(df > 0, y - f / df, 0.5 * (a + b))
        ynew = np.where((ynew > a) & (ynew < b), ynew, 0.5 * (a + b))
        y = np.where(act, ynew, y)
    if not done.all():
        for _ in range(200):
            act = ~done
            if not act.any():
                break
            ymid = 0.5 * (a + b)
            f = _herm(ymid, y0, h, x0, x1, m0, m1) - xk
            y = np.where(act, ymid, y)
            done |= act & (np.abs(f) < thr)
            act = ~done
            a = np.where(act & (f < 0), ymid, a)
            b = np.where(act & (f >= 0), ymid, b)
    out[ok] = y
    idx[ok] = j
    status[ok] = np.where(done, 0, 2)
    return out, idx, status
