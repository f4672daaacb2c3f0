"""Hamiltonian rays, Jacobians, eikonal phase and the WKB amplitude.

Rays solve ``x' = xi, xi' = -grad V(x)`` from ``x(0) = y, xi(0) = 0``.  Along
each ray the eikonal phase obeys ``phi' = |xi|^2/2 - V(x)`` and the
variational equations ``X' = Xi, Xi' = -hess V(x) X`` carry ``X = d x / d y``,
whose determinant is the Jacobian ``J``.  The phase convention is
``u = a exp(i phi)`` with ``d_t phi + |grad phi|^2/2 + V = 0``, so that
``grad phi(t, x(t, y)) = xi(t, y)`` and ``grad phi ~ -t grad V`` for small t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, RectBivariateSpline
from scipy.spatial import cKDTree

from . import kernels
from .grid import Grid, GridMismatch, WaveField, integrate
from .potentials import Potential, self_adjointness_guard

EPS_CAUSTIC = 1e-6
NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50

INVERT_OK, INVERT_OUT_OF_RANGE, INVERT_NO_CONVERGENCE = 0, 1, 2


class OutOfRange(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class RayState:
    t: float
    x: np.ndarray  # (d, M)
    xi: np.ndarray  # (d, M)
    dxdy: np.ndarray  # (d, d, M)
    dxidy: np.ndarray  # (d, d, M)
    phi: np.ndarray  # (M,)

    @property
    def J(self) -> np.ndarray:
        return _det(self.dxdy)


@dataclass
class RayBundle:
    potential: Potential
    y: np.ndarray  # (d, M)
    launch_shape: tuple[int, ...]
    dt_ode: float
    T: float
    times: np.ndarray
    x: np.ndarray  # (nt, d, M)
    xi: np.ndarray
    dxdy: np.ndarray  # (nt, d, d, M)
    dxidy: np.ndarray
    phi: np.ndarray  # (nt, M)
    step_times: np.ndarray
    jmin: np.ndarray
    eps_caustic: float = EPS_CAUSTIC
    caustic: float | None = None
    _splines: dict = field(default_factory=dict, repr=False)

    @property
    def d(self) -> int:
        return self.y.shape[0]

    @property
    def J(self) -> np.ndarray:
        return _det(np.moveaxis(self.dxdy, 0, -1)).T if self.d > 1 else self.dxdy[:, 0, 0, :]

    @property
    def valid_until(self) -> float:
        return float(self.times[-1])

    def record(self, i: int) -> RayState:
        return RayState(float(self.times[i]), self.x[i], self.xi[i], self.dxdy[i], self.dxidy[i], self.phi[i])

    def state_at(self, t: float) -> RayState:
        """Ray state at time ``t``, integrated from the nearest earlier record."""
        if t < -1e-15 or t > self.valid_until + 1e-12:
            raise ValueError(f"t={t} outside the valid ray window [0, {self.valid_until}]")
        i = int(np.searchsorted(self.times, t, side="right") - 1)
        i = max(i, 0)
        st = self.record(i)
        rem = t - st.t
        if abs(rem) <= 1e-14:
            return st
        n = max(1, math.ceil(rem / self.dt_ode - 1e-9))
        h = rem / n
        state = (st.x, st.xi, st.dxdy, st.dxidy, st.phi)
        for _ in range(n):
            state = _rk4(self.potential, state, h)
        return RayState(t, *state)


def _det(X: np.ndarray) -> np.ndarray:
    """Determinant over the two leading axes of ``(d, d, ...)``."""
    d = X.shape[0]
    if d == 1:
        return X[0, 0]
    if d == 2:
        return X[0, 0] * X[1, 1] - X[0, 1] * X[1, 0]
    return np.linalg.det(np.moveaxis(X, (0, 1), (-2, -1)))


def _rhs(p: Potential, state):
    x, xi, X, Xi, _ = state
    V = p.value(x)
    g = p.grad(x)
    H = p.hess(x)
    dXi = -np.einsum("ikm,kjm->ijm", H, X)
    dphi = 0.5 * np.sum(xi * xi, axis=0) - V
    return xi, -g, Xi, dXi, dphi


def _rk4(p: Potential, state, h: float):
    k1 = _rhs(p, state)
    k2 = _rhs(p, tuple(s + 0.5 * h * k for s, k in zip(state, k1)))
    k3 = _rhs(p, tuple(s + 0.5 * h * k for s, k in zip(state, k2)))
    k4 = _rhs(p, tuple(s + h * k for s, k in zip(state, k3)))
    return tuple(s + (h / 6.0) * (a + 2 * b + 2 * c + e) for s, a, b, c, e in zip(state, k1, k2, k3, k4))


def launch_points(grid: Grid, extend: float = 0.25) -> np.ndarray:
    """Launch set co-located with the grid, extended by ``extend * L`` on each side.

    Returns shape ``(d, M1[, M2])``; interior values coincide bitwise with the grid axis.
    """
    n_ext = int(math.ceil(extend * grid.N / 2))
    ax = -grid.L + grid.dx * np.arange(-n_ext, grid.N + n_ext + 1)
    return np.stack(np.meshgrid(*([ax] * grid.d), indexing="ij"))


def trace_rays(
    p: Potential,
    y_samples,
    T: float,
    dt_ode: float,
    *,
    record_every: int | None = None,
    eps_caustic: float = EPS_CAUSTIC,
) -> RayBundle:
    """Integrate rays, phase and variational equations with classic RK4.

    ``y_samples`` is ``(M,)`` for d=1 or ``(d, ...)``.  Integration stops
    after the first step where ``min J <= eps_caustic``; that time (linearly
    interpolated) is stored in ``bundle.caustic``.
    """
    verdict = self_adjointness_guard(p)
    if not verdict.accepted:
        raise ValueError(verdict.reason)
    if not (T > 0 and dt_ode > 0):
        raise ValueError("T and dt_ode must be positive")
    y = np.asarray(y_samples, dtype=float)
    if y.ndim == 1:
        y = y[None, :]
    d = y.shape[0]
    launch_shape = y.shape[1:]
    y = y.reshape(d, -1)
    M = y.shape[1]
    n_steps = max(1, math.ceil(T / dt_ode - 1e-9))
    h = T / n_steps
    if record_every is None:
        record_every = max(1, n_steps // 200)

    eye = np.broadcast_to(np.eye(d)[:, :, None], (d, d, M)).copy()
    state = (y.copy(), np.zeros((d, M)), eye, np.zeros((d, d, M)), np.zeros(M))
    rec = [state]
    times = [0.0]
    step_times = [0.0]
    jmin = [float(_det(state[2]).min())]
    caustic = None
    for n in range(1, n_steps + 1):
        new = _rk4(p, state, h)
        t = n * h
        jm = float(_det(new[2]).min())
        step_times.append(t)
        jmin.append(jm)
        if jm <= eps_caustic:
            j0 = jmin[-2]
            caustic = step_times[-2] + h * (j0 - eps_caustic) / (j0 - jm)
            if times[-1] != step_times[-2]:
                rec.append(state)
                times.append(step_times[-2])
            break
        state = new
        if n % record_every == 0 or n == n_steps:
            rec.append(state)
            times.append(t)

    def stack(i):
        return np.stack([r[i] for r in rec])

    return RayBundle(
        potential=p,
        y=y,
        launch_shape=tuple(launch_shape),
        dt_ode=h,
        T=float(T),
        times=np.array(times),
        x=stack(0),
        xi=stack(1),
        dxdy=stack(2),
        dxidy=stack(3),
        phi=stack(4),
        step_times=np.array(step_times),
        jmin=np.array(jmin),
        eps_caustic=eps_caustic,
        caustic=caustic,
    )


def caustic_time(b: RayBundle, eps_caustic: float = EPS_CAUSTIC) -> float | None:
    """First time ``min_y J <= eps_caustic``, linearly interpolated between steps."""
    below = np.nonzero(b.jmin <= eps_caustic)[0]
    if below.size == 0:
        return None
    i = int(below[0])
    if i == 0:
        return 0.0
    j0, j1 = b.jmin[i - 1], b.jmin[i]
    t0, t1 = b.step_times[i - 1], b.step_times[i]
    return float(t0 + (t1 - t0) * (j0 - eps_caustic) / (j0 - j1))


# ---------------------------------------------------------------------------
# flow inversion


def _hermite_eval(ys, vals, slopes, y, idx):
    y0 = ys[idx]
    h = ys[idx + 1] - y0
    s = (y - y0) / h
    s2, s3 = s * s, s * s * s
    return (
        (2 * s3 - 3 * s2 + 1) * vals[..., idx]
        + (s3 - 2 * s2 + s) * h * slopes[..., idx]
        + (-2 * s3 + 3 * s2) * vals[..., idx + 1]
        + (s3 - s2) * h * slopes[..., idx + 1]
    )


@dataclass(frozen=True)
class Inversion:
    """Result of inverting ``y -> x(t, y)`` at a set of target points."""

    t: float
    y: np.ndarray  # (d, P)
    status: np.ndarray  # (P,)
    phi: np.ndarray
    grad_phi: np.ndarray  # (d, P)
    J: np.ndarray

    @property
    def ok(self) -> np.ndarray:
        return self.status == INVERT_OK


def _sorted_1d(b: RayBundle):
    order = np.argsort(b.y[0])
    return order, b.y[0, order]


def invert_points(b: RayBundle, t: float, targets) -> Inversion:
    """Invert the ray map at time ``t`` for many points.

    d=1 uses safeguarded Newton on the cubic Hermite interpolant of
    ``x(t, .)`` (slopes from the variational equations); d=2 uses Newton with
    spline-interpolated Jacobians seeded from the nearest ray.
    """
    if b.caustic is not None and t >= b.caustic:
        raise ValueError(f"t={t} is at or beyond the caustic time {b.caustic}")
    tg = np.asarray(targets, dtype=float)
    if tg.ndim == 1:
        tg = tg[None, :] if b.d == 1 else tg[:, None]
    st = b.state_at(t)
    if b.d == 1:
        return _invert_1d(b, st, tg[0])
    return _invert_2d(b, st, tg)


def _invert_1d(b: RayBundle, st: RayState, xt: np.ndarray) -> Inversion:
    order, ys = _sorted_1d(b)
    xs = np.ascontiguousarray(st.x[0, order])
    X = np.ascontiguousarray(st.dxdy[0, 0, order])
    if np.any(np.diff(xs) <= 0) or np.any(X <= 0):
        raise ValueError("ray map is not monotone at this time (caustic reached)")
    y, idx, status = kernels.invert_hermite(
        np.ascontiguousarray(ys), xs, X, np.ascontiguousarray(xt), NEWTON_TOL, NEWTON_MAXIT
    )
    ok = status == INVERT_OK
    phi = np.full(xt.shape, np.nan)
    gphi = np.full(xt.shape, np.nan)
    J = np.full(xt.shape, np.nan)
    if np.any(ok):
        xi = st.xi[0, order]
        dxidy = st.dxidy[0, 0, order]
        ph = st.phi[order]
        yo, io = y[ok], idx[ok]
        phi[ok] = _hermite_eval(ys, ph, xi * X, yo, io)
        gphi[ok] = _hermite_eval(ys, xi, dxidy, yo, io)
        J[ok] = CubicSpline(ys, X)(yo)
    return Inversion(st.t, y[None, :], status, phi, gphi[None, :], J)


def _launch_axes(b: RayBundle):
    shape = b.launch_shape
    if len(shape) != 2:
        raise ValueError("2-D inversion needs a tensor launch grid")
    yy = b.y.reshape((2,) + shape)
    return yy[0][:, 0], yy[1][0, :]


def _invert_2d(b: RayBundle, st: RayState, xt: np.ndarray) -> Inversion:
    a1, a2 = _launch_axes(b)
    shape = b.launch_shape

    def spl(v):
        return RectBivariateSpline(a1, a2, v.reshape(shape), kx=3, ky=3)

    sx = [spl(st.x[i]) for i in range(2)]
    tree = cKDTree(st.x.T)
    spacing = max(a1[1] - a1[0], a2[1] - a2[0])
    dist, near = tree.query(xt.T)
    y = b.y[:, near].copy()
    P = xt.shape[1]
    status = np.full(P, INVERT_NO_CONVERGENCE, dtype=np.int8)
    status[dist > 4 * spacing * max(1.0, float(np.abs(st.dxdy).max()))] = INVERT_OUT_OF_RANGE
    active = status == INVERT_NO_CONVERGENCE
    lo = np.array([a1[0], a2[0]])[:, None]
    hi = np.array([a1[-1], a2[-1]])[:, None]
    for _ in range(NEWTON_MAXIT):
        if not active.any():
            break
        ya = y[:, active]
        r = np.stack([s.ev(ya[0], ya[1]) for s in sx]) - xt[:, active]
        thr = NEWTON_TOL * np.maximum(1.0, np.abs(xt[:, active]).max(axis=0))
        conv = np.max(np.abs(r), axis=0) < thr
        J11 = sx[0].ev(ya[0], ya[1], dx=1)
        J12 = sx[0].ev(ya[0], ya[1], dy=1)
        J21 = sx[1].ev(ya[0], ya[1], dx=1)
        J22 = sx[1].ev(ya[0], ya[1], dy=1)
        det = J11 * J22 - J12 * J21
        step = np.stack([(J22 * r[0] - J12 * r[1]) / det, (-J21 * r[0] + J11 * r[1]) / det])
        ya_new = np.where(conv, ya, ya - step)
        outside = np.any((ya_new < lo) | (ya_new > hi), axis=0)
        idx = np.nonzero(active)[0]
        status[idx[conv]] = INVERT_OK
        status[idx[outside & ~conv]] = INVERT_OUT_OF_RANGE
        y[:, idx] = ya_new
        active = status == INVERT_NO_CONVERGENCE
    ok = status == INVERT_OK
    phi = np.full(P, np.nan)
    gphi = np.full((2, P), np.nan)
    J = np.full(P, np.nan)
    if ok.any():
        yo = y[:, ok]
        phi[ok] = spl(st.phi).ev(yo[0], yo[1])
        for i in range(2):
            gphi[i, ok] = spl(st.xi[i]).ev(yo[0], yo[1])
        J[ok] = spl(st.J).ev(yo[0], yo[1])
    return Inversion(st.t, y, status, phi, gphi, J)


def invert_flow(b: RayBundle, t: float, x) -> np.ndarray:
    """Launch point ``y`` with ``x(t, y) = x``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    inv = invert_points(b, t, x.reshape(b.d, 1))
    if inv.status[0] == INVERT_OUT_OF_RANGE:
        raise OutOfRange(f"x={x.tolist()} is not covered by the rays at t={t}")
    if inv.status[0] == INVERT_NO_CONVERGENCE:
        raise NoConvergence(f"flow inversion did not converge at x={x.tolist()}, t={t}")
    y = inv.y[:, 0]
    return float(y[0]) if b.d == 1 else y


# ---------------------------------------------------------------------------
# WKB amplitude


@dataclass(frozen=True, eq=False)
class WKBDecomposition:
    grid: Grid
    t: float
    phi: np.ndarray
    grad_phi: np.ndarray
    a: np.ndarray | None
    a_tilde: np.ndarray
    mask: np.ndarray


def _periodic_interpolant(grid: Grid, values: np.ndarray):
    """Cubic periodic interpolation of grid samples; returns ``f(points (d, P))``."""
    ax = np.append(grid.axis, grid.L)
    if grid.d == 1:
        v = np.append(values, values[0])
        re = CubicSpline(ax, v.real, bc_type="periodic")
        im = CubicSpline(ax, v.imag, bc_type="periodic")

        def f(y):
            w = np.mod(y[0] + grid.L, 2 * grid.L) - grid.L
            return re(w) + 1j * im(w)

        return f
    v = np.pad(values, ((0, 1), (0, 1)), mode="wrap")
    re = RectBivariateSpline(ax, ax, v.real, kx=3, ky=3)
    im = RectBivariateSpline(ax, ax, v.imag, kx=3, ky=3)

    def f2(y):
        w = np.mod(y + grid.L, 2 * grid.L) - grid.L
        return re.ev(w[0], w[1]) + 1j * im.ev(w[0], w[1])

    return f2


def wkb_field(b: RayBundle, u0: WaveField, t: float, u_t: WaveField | None = None) -> WKBDecomposition:
    """Eikonal phase and transported amplitude ``u0(y(t,x)) / sqrt(J_t(y(t,x)))`` on the grid.

    Grid points outside the ray coverage get zero amplitude and are masked out.
    """
    grid = u0.grid
    if grid.d != b.d:
        raise ValueError("bundle and field dimensions differ")
    pts = grid.points.reshape(grid.d, -1)
    inv = invert_points(b, t, pts)
    ok = inv.ok
    interp = _periodic_interpolant(grid, u0.values)
    a_tilde = np.zeros(pts.shape[1], dtype=complex)
    a_tilde[ok] = interp(inv.y[:, ok]) / np.sqrt(inv.J[ok])
    phi = np.where(ok, inv.phi, 0.0)
    gphi = np.where(ok, inv.grad_phi, 0.0)
    shape = grid.shape
    a = None
    if u_t is not None:
        if u_t.grid != grid:
            raise GridMismatch("trajectory field and initial field live on different grids")
        a = u_t.values * np.exp(-1j * phi.reshape(shape))
    return WKBDecomposition(
        grid=grid,
        t=float(t),
        phi=phi.reshape(shape),
        grad_phi=gphi.reshape((grid.d,) + shape),
        a=a,
        a_tilde=a_tilde.reshape(shape),
        mask=ok.reshape(shape),
    )


def wkb_error(u_t: WaveField, dec: WKBDecomposition) -> float:
    """``||u_t exp(-i phi) - a_tilde||_L2`` over the covered points."""
    if u_t.grid != dec.grid:
        raise GridMismatch("field and decomposition grids differ")
    diff = (u_t.values * np.exp(-1j * dec.phi) - dec.a_tilde) * dec.mask
    return math.sqrt(integrate(dec.grid, np.abs(diff) ** 2))


# ---------------------------------------------------------------------------
# quantitative checks


@dataclass(frozen=True)
class PhaseGradientReport:
    times: np.ndarray
    max_ratio_per_t: np.ndarray
    max_ratio: float
    bound: float
    passed: bool


def phase_gradient_check(
    b: RayBundle, p: Potential, t_samples, points=None, bound: float = 10.0
) -> PhaseGradientReport:
    """Max of ``|grad phi + t grad V| / (t^2 |grad V|)`` over samples.

    Without ``points`` the ray positions themselves are used, where
    ``grad phi = xi`` exactly; otherwise the flow is inverted at ``points``.
    Points with ``|grad V| < 1e-10`` are skipped.
    """
    ts = np.atleast_1d(np.asarray(t_samples, dtype=float))
    per_t = np.full(ts.shape, np.nan)
    for i, t in enumerate(ts):
        if t <= 0:
            raise ValueError("sample times must be positive")
        if points is None:
            st = b.state_at(t)
            x, gphi = st.x, st.xi
        else:
            inv = invert_points(b, t, points)
            sel = inv.ok
            x = np.asarray(points, dtype=float).reshape(b.d, -1)[:, sel]
            gphi = inv.grad_phi[:, sel]
        gv = p.grad(x)
        gn = np.sqrt(np.sum(gv**2, axis=0))
        keep = gn >= 1e-10
        if not keep.any():
            continue
        num = np.sqrt(np.sum((gphi + t * gv) ** 2, axis=0))
        per_t[i] = float(np.max(num[keep] / (t * t * gn[keep])))
    finite = per_t[np.isfinite(per_t)]
    mr = float(finite.max()) if finite.size else 0.0
    return PhaseGradientReport(ts, per_t, mr, bound, mr <= bound)


def eikonal_residual(b: RayBundle, p: Potential, t: float, points, h: float | None = None) -> float:
    """Max ``|d_t phi + |grad phi|^2/2 + V|`` at ``points`` (centered time difference)."""
    if h is None:
        h = 10 * b.dt_ode
    pts = np.asarray(points, dtype=float).reshape(b.d, -1)
    lo = invert_points(b, t - h, pts)
    mid = invert_points(b, t, pts)
    hi = invert_points(b, t + h, pts)
    ok = lo.ok & mid.ok & hi.ok
    dphi = (hi.phi - lo.phi) / (2 * h)
    res = dphi + 0.5 * np.sum(mid.grad_phi**2, axis=0) + p.value(pts)
    return float(np.max(np.abs(res[ok])))
