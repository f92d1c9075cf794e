"""Stationary boundary-layer profiles of the inflow problem.

With the mass flux fixed by the far-field state (v, u, theta), the
stationary equations reduce to a planar autonomous system for (U, Theta)
with V = U v / u.  In deviation variables x = U - u, y = Theta - theta it
reads::

    mu x'    = x (u - R theta / u) + x^2 + R y
    kappa y' = R (u + x) y / (gamma - 1) + R theta (u + x) x / u - (u + x) x^2 / 2

The origin is a saddle when the far field is subsonic and a saddle-node
when it is sonic.  Both orbits are obtained by launching close to the
origin along the attracting direction and integrating backwards in xi,
which turns the transverse (repelling) direction into a contracting one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar

from .errors import LaunchFailure
from .gas import TOL_MACH, GasParams, ThermoState, check_state, mach
from .hermite import QuinticHermite

#: launch distance relative to max(u, theta)
EPS_LAUNCH = 1e-6
RTOL = 1e-10
GRID_RATIO = 1.05


class BLCase(str, Enum):
    NONE = "none"
    TRANSONIC = "transonic"
    SUBSONIC = "subsonic"


def bl_existence(target: ThermoState, g: GasParams, tol: float = TOL_MACH) -> BLCase:
    """Which kind of stationary layer can end at ``target``."""
    check_state(target)
    if target.u <= 0:
        return BLCase.NONE
    m = mach(target, g)
    if abs(m - 1.0) <= tol:
        return BLCase.TRANSONIC
    if m < 1.0:
        return BLCase.SUBSONIC
    return BLCase.NONE


# -- vector field ----------------------------------------------------------


def rhs(x, y, target: ThermoState, g: GasParams):
    """Right-hand side (x', y') in deviation variables; vectorised."""
    u, th = target.u, target.theta
    R, mu, ka, gm1 = g.R, g.mu, g.kappa, g.gamma - 1.0
    U = u + x
    f1 = (x * (u - R * th / u) + x * x + R * y) / mu
    f2 = (R * U * y / gm1 + R * th * U * x / u - 0.5 * U * x * x) / ka
    return f1, f2


def jac(x, y, target: ThermoState, g: GasParams):
    """Partial derivatives ((f1_x, f1_y), (f2_x, f2_y)); vectorised."""
    u, th = target.u, target.theta
    R, mu, ka, gm1 = g.R, g.mu, g.kappa, g.gamma - 1.0
    a11 = (u - R * th / u + 2 * x) / mu
    a12 = np.full_like(np.asarray(x, dtype=float), R / mu)
    a21 = (R * y / gm1 + R * th * (u + 2 * x) / u - (2 * u * x + 3 * x * x) / 2) / ka
    a22 = R * (u + x) / (gm1 * ka)
    return a11, a12, a21, a22


def jacobian_at_fixed_point(target: ThermoState, g: GasParams) -> np.ndarray:
    a11, a12, a21, a22 = jac(0.0, 0.0, target, g)
    return np.array([[float(a11), float(a12)], [float(a21), float(a22)]])


@dataclass(frozen=True)
class SaddleData:
    """Linearisation of the stationary system at its far-field fixed point.

    For a sonic far field ``lamJ2`` is zero, ``a2``/``c2`` are NaN and
    ``tangent`` is the centre direction along which the orbit arrives.
    ``unstable_line`` is the other eigendirection.
    """

    lamJ1: float
    lamJ2: float
    a2: float
    c2: float
    tangent: tuple
    unstable_line: tuple
    c2_roots: tuple = ()
    kind: BLCase = BLCase.SUBSONIC


def saddle_data(target: ThermoState, g: GasParams) -> SaddleData:
    J = jacobian_at_fixed_point(target, g)
    tr, det = np.trace(J), np.linalg.det(J)
    disc = math.sqrt(max(tr * tr - 4 * det, 0.0))
    l1, l2 = 0.5 * (tr + disc), 0.5 * (tr - disc)
    # eigenvector for eigenvalue l from the first row: (a12, l - a11)
    def evec(l):
        v = np.array([J[0, 1], l - J[0, 0]])
        v = v / np.linalg.norm(v)
        return tuple(v if v[0] >= 0 else -v)

    kind = bl_existence(target, g)
    if kind == BLCase.TRANSONIC:
        return SaddleData(l1, 0.0, math.nan, math.nan, evec(0.0), evec(l1), (), kind)

    u, th = target.u, target.theta
    R, gam, mu, ka = g.R, g.gamma, g.mu, g.kappa
    M2 = u * u / (R * gam * th)
    a2 = -R / (mu * (l1 - l2))
    b = (M2 * gam - 1) / (M2 * R * gam) - mu / (ka * (gam - 1))
    c = -mu / (M2 * R * gam * ka)
    roots = tuple(sorted(np.roots([1.0, b, c]).real))
    stable = evec(l2)
    slope_stable = stable[1] / stable[0]
    # each root defines the line dTheta/dU = (1 + a2 c2 u) / a2; keep the one
    # lying along the stable eigendirection
    slopes = [(1 + a2 * r * u) / a2 for r in roots]
    c2 = roots[int(np.argmin([abs(s - slope_stable) for s in slopes]))]
    return SaddleData(l1, l2, a2, c2, stable, evec(l1), roots, kind)


def center_coefficient(target: ThermoState, g: GasParams) -> float:
    """k in the reduced centre dynamics x' = k x^2 at a sonic far field."""
    u, th = target.u, target.theta
    return u * u * (g.gamma + 1) / (2 * (g.mu * u * u + g.kappa * (g.gamma - 1) ** 2 * th))


# -- orbit integration -----------------------------------------------------


class _Orbit(NamedTuple):
    tau: np.ndarray  # backward "time" from the launch point
    x: np.ndarray
    y: np.ndarray
    launch: tuple


def _integrate_orbit(target: ThermoState, g: GasParams, kind: BLCase, side: int, delta: float,
                     eps: float | None = None) -> _Orbit:
    """Integrate backwards from the launch point until |x| = delta."""
    u, th = target.u, target.theta
    if eps is None:
        eps = EPS_LAUNCH * max(u, th)
    sd = saddle_data(target, g)
    d = np.array(sd.tangent)
    x0 = side * eps
    y0 = x0 * d[1] / d[0]
    if delta <= eps:
        raise LaunchFailure(f"strength {delta!r} below launch distance {eps!r}")

    def f(_, z):
        f1, f2 = rhs(z[0], z[1], target, g)
        return [-f1, -f2]

    def fj(_, z):
        a11, a12, a21, a22 = jac(z[0], z[1], target, g)
        return -np.array([[a11, a12], [a21, a22]], dtype=float)

    def reach(_, z):
        return abs(z[0]) - delta

    def exit_region(_, z):
        return min(u + z[0], th + z[1])

    reach.terminal = True
    exit_region.terminal = True
    exit_region.direction = -1

    if kind == BLCase.TRANSONIC:
        span = 100.0 / (center_coefficient(target, g) * eps)
    else:
        span = 100.0 * math.log(delta / eps + 2) / abs(sd.lamJ2)
    sol = solve_ivp(f, (0.0, span), [x0, y0], method="Radau", jac=fj, rtol=RTOL,
                    atol=1e-24 * max(u, th), events=(reach, exit_region))
    if sol.status == -1:
        raise LaunchFailure(f"backward integration failed: {sol.message}")
    if sol.t_events[1].size:
        raise LaunchFailure("orbit left the physical region before reaching the requested strength")
    if not sol.t_events[0].size:
        raise LaunchFailure("orbit did not reach the requested strength")
    tau, x, y = sol.t.copy(), sol.y[0].copy(), sol.y[1].copy()
    # the event is located on the dense output; one step along the orbit
    # puts the end point exactly on |x| = delta
    f1, f2 = rhs(x[-1], y[-1], target, g)
    dx = side * delta - x[-1]
    tau[-1] -= dx / f1
    y[-1] += dx * f2 / f1
    x[-1] = side * delta
    return _Orbit(tau, x, y, (x0, y0))


@lru_cache(maxsize=64)
def _orbit_cached(key):
    v, u, th, gkey, kind, side, delta = key
    return _integrate_orbit(ThermoState(v, u, th), GasParams(*gkey), BLCase(kind), side, delta)


def _orbit(target, g, kind, side, delta):
    return _orbit_cached((target.v, target.u, target.theta,
                          (g.R, g.gamma, g.mu, g.kappa, g.A), kind.value, side, float(delta)))


# -- profiles ---------------------------------------------------------------


class BLValues(NamedTuple):
    V: np.ndarray
    U: np.ndarray
    Theta: np.ndarray
    dV: np.ndarray
    dU: np.ndarray
    dTheta: np.ndarray
    d2V: np.ndarray
    d2U: np.ndarray
    d2Theta: np.ndarray


@dataclass
class BLProfile:
    """Boundary-layer profile (V^b, U^b, Theta^b)(xi), xi >= 0.

    The export arrays ``xi, U, Theta, V, dU, dTheta`` sample a graded grid
    up to ``xi_max``; :meth:`evaluate` is valid for every xi >= 0 (past the
    integrated orbit it follows the leading-order decay law).
    """

    target: ThermoState
    g: GasParams
    case_tag: BLCase
    delta_b: float
    sigma_minus: float
    xi_max: float
    _nodes: np.ndarray = field(repr=False, default=None)
    _interp: QuinticHermite | None = field(repr=False, default=None)
    _tail: tuple = field(repr=False, default=())

    def __post_init__(self):
        grid = graded_grid(self.xi_max)
        self.xi = grid
        ev = self.evaluate(grid)
        self.U, self.Theta, self.V = ev.U, ev.Theta, ev.V
        self.dU, self.dTheta = ev.dU, ev.dTheta

    @property
    def xi_end(self) -> float:
        return 0.0 if self._nodes is None else float(self._nodes[-1])

    @property
    def left(self) -> ThermoState:
        e = self.evaluate(np.array([0.0]))
        return ThermoState(float(e.V[0]), float(e.U[0]), float(e.Theta[0]))

    def deviations(self, xi):
        """(x, y) = (U - u, Theta - theta) at xi, computed without cancellation."""
        xi = np.asarray(xi, dtype=float)
        x = np.zeros_like(xi)
        y = np.zeros_like(xi)
        if self._interp is None:
            return x, y
        inner = xi <= self.xi_end
        if np.any(inner):
            z = self._interp(xi[inner])
            x[inner], y[inner] = z[0], z[1]
        outer = ~inner
        if np.any(outer):
            s = xi[outer] - self.xi_end
            x_e, y_e, rate = self._tail
            if self.case_tag == BLCase.TRANSONIC:
                fac = 1.0 / (1.0 + rate * abs(x_e) * s)
            else:
                fac = np.exp(rate * s)
            x[outer], y[outer] = x_e * fac, y_e * fac
        return x, y

    def evaluate(self, xi) -> BLValues:
        xi = np.asarray(xi, dtype=float)
        t = self.target
        x, y = self.deviations(xi)
        if self._interp is None:
            z = np.zeros_like(xi)
            return BLValues(z + t.v, z + t.u, z + t.theta, z, z, z, z, z, z)
        f1, f2 = rhs(x, y, t, self.g)
        a11, a12, a21, a22 = jac(x, y, t, self.g)
        s1 = a11 * f1 + a12 * f2
        s2 = a21 * f1 + a22 * f2
        r = t.v / t.u
        U = t.u + x
        return BLValues(U * r, U, t.theta + y, f1 * r, f1, f2, s1 * r, s1, s2)

    def residual(self, xi) -> np.ndarray:
        """Mismatch between the interpolant's slope and the vector field.

        Normalised by the sum of the magnitudes of the individual terms of
        each equation, which is the natural scale near the fixed point where
        those terms nearly cancel.
        """
        xi = np.asarray(xi, dtype=float)
        z = self._interp(xi)
        dz = self._interp(xi, nu=1)
        x, y = z
        f1, f2 = rhs(x, y, self.target, self.g)
        t, g = self.target, self.g
        R, gm1 = g.R, g.gamma - 1.0
        U = t.u + x
        s1 = (np.abs(x * (t.u - R * t.theta / t.u)) + x * x + R * np.abs(y)) / g.mu
        s2 = (R * U * np.abs(y) / gm1 + R * t.theta * U * np.abs(x) / t.u + 0.5 * U * x * x) / g.kappa
        scale = np.maximum(np.hypot(s1, s2), 1e-300)
        return np.hypot(dz[0] - f1, dz[1] - f2) / scale


def graded_grid(xi_max: float, h0: float = 0.05, ratio: float = GRID_RATIO) -> np.ndarray:
    """0 = xi_0 < xi_1 < ... reaching xi_max, spacing growing by ``ratio``."""
    if xi_max <= 0:
        return np.array([0.0])
    n = int(math.ceil(math.log1p(xi_max * (ratio - 1) / h0) / math.log(ratio)))
    xi = h0 * (ratio ** np.arange(n + 1) - 1) / (ratio - 1)
    xi[-1] = xi_max
    return xi


def _profile_from_orbit(orb: _Orbit, target, g, kind, delta_b, xi_max) -> BLProfile:
    tau_end = orb.tau[-1]
    xi = (tau_end - orb.tau)[::-1]
    xi[0] = 0.0
    x, y = orb.x[::-1], orb.y[::-1]
    f1, f2 = rhs(x, y, target, g)
    a11, a12, a21, a22 = jac(x, y, target, g)
    d2 = np.array([a11 * f1 + a12 * f2, a21 * f1 + a22 * f2])
    interp = QuinticHermite(xi, np.array([x, y]), np.array([f1, f2]), d2)
    x_e, y_e = orb.launch
    if kind == BLCase.TRANSONIC:
        rate = center_coefficient(target, g)
    else:
        rate = saddle_data(target, g).lamJ2
    return BLProfile(target, g, kind, float(delta_b), -target.u / target.v, float(xi_max),
                     xi, interp, (x_e, y_e, rate))


def solve_bl_transonic(target: ThermoState, delta_b: float, g: GasParams,
                       xi_max: float | None = None) -> BLProfile:
    """Sonic-far-field layer with |U^b(0) - u| = delta_b.

    The orbit approaches the fixed point along the centre direction from the
    side U < u, so U^b and V^b increase while Theta^b decreases towards theta.
    """
    if bl_existence(target, g) != BLCase.TRANSONIC:
        raise LaunchFailure("target is not sonic with u > 0")
    if not 0 <= delta_b <= 0.2 * max(target.u, 1.0):
        raise LaunchFailure(f"delta_b={delta_b!r} out of range")
    if xi_max is None:
        xi_max = 1e3 / delta_b if delta_b > 0 else 0.0
    if delta_b == 0:
        return BLProfile(target, g, BLCase.TRANSONIC, 0.0, -target.u / target.v, xi_max)
    orb = _orbit(target, g, BLCase.TRANSONIC, -1, delta_b)
    return _profile_from_orbit(orb, target, g, BLCase.TRANSONIC, delta_b, xi_max)


def solve_bl_subsonic(target: ThermoState, g: GasParams, boundary: tuple | None = None,
                      delta_b: float | None = None, xi_max: float | None = None,
                      side: int = -1, tol: float = 1e-8) -> BLProfile:
    """Subsonic-far-field layer along the stable manifold.

    Give either ``boundary`` = (u_minus, theta_minus), which must lie on the
    stable manifold, or a strength ``delta_b`` = |U^b(0) - u| and a ``side``.
    """
    if bl_existence(target, g) != BLCase.SUBSONIC:
        raise LaunchFailure("target is not subsonic with u > 0")
    if boundary is not None:
        dx = boundary[0] - target.u
        side = 1 if dx > 0 else -1
        delta_b = abs(dx)
    if delta_b is None:
        raise ValueError("need boundary or delta_b")
    sd = saddle_data(target, g)
    if xi_max is None:
        xi_max = 50.0 / abs(sd.lamJ2) if delta_b > 0 else 0.0
    if delta_b == 0:
        return BLProfile(target, g, BLCase.SUBSONIC, 0.0, -target.u / target.v, xi_max)
    orb = _orbit(target, g, BLCase.SUBSONIC, side, delta_b)
    prof = _profile_from_orbit(orb, target, g, BLCase.SUBSONIC, delta_b, xi_max)
    if boundary is not None:
        miss = abs(orb.y[-1] + target.theta - boundary[1])
        if miss > tol * max(1.0, target.theta):
            raise LaunchFailure(f"boundary state is {miss:.3e} off the stable manifold")
    return prof


def sigma_theta_at(u_query: float, target: ThermoState, g: GasParams) -> float:
    """Theta on the sonic orbit where U = u_query (< u)."""
    dx = target.u - u_query
    if dx == 0:
        return target.theta
    if dx < 0:
        raise LaunchFailure("the orbit only exists on the side U < u")
    orb = _orbit(target, g, BLCase.TRANSONIC, -1, dx)
    return target.theta + float(orb.y[-1])


def sigma_membership_distance(candidate, target: ThermoState, g: GasParams) -> float:
    """Euclidean distance in the (u, theta) plane from ``candidate`` to the sonic orbit."""
    cu, cth = float(candidate[0]), float(candidate[1])
    px, py = cu - target.u, cth - target.theta
    if px == 0 and py == 0:
        return 0.0
    reach = min(2.0 * math.hypot(px, py) + 1e-3 * max(target.u, target.theta),
                0.2 * max(target.u, 1.0))
    orb = None
    while orb is None:
        try:
            orb = _orbit(target, g, BLCase.TRANSONIC, -1, reach)
        except LaunchFailure:
            reach *= 0.5
            if reach < EPS_LAUNCH * max(target.u, target.theta) * 10:
                raise
    prof = _profile_from_orbit(orb, target, g, BLCase.TRANSONIC, reach, 0.0)
    xs = np.concatenate([[0.0], orb.x])
    ys = np.concatenate([[0.0], orb.y])
    # polyline pass: fixed point, launch point, ..., far end
    ax, ay, bx, by = xs[:-1], ys[:-1], xs[1:], ys[1:]
    ex, ey = bx - ax, by - ay
    L2 = ex * ex + ey * ey
    s = np.clip(((px - ax) * ex + (py - ay) * ey) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    dist = np.hypot(ax + s * ex - px, ay + s * ey - py)
    j = int(np.argmin(dist))
    best = float(dist[j])
    if j == 0:
        return best
    # refine on the smooth curve around segment j (nodes j-1..j+1 in launch order)
    tau = orb.tau
    xi_nodes = tau[-1] - tau
    lo = xi_nodes[min(j, len(tau) - 1)]
    hi = xi_nodes[max(j - 2, 0)]
    lo, hi = min(lo, hi), max(lo, hi)

    def d2(q):
        xx, yy = prof.deviations(np.array([q]))
        return (xx[0] - px) ** 2 + (yy[0] - py) ** 2

    res = minimize_scalar(d2, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12 * max(1.0, hi)})
    return min(best, math.sqrt(res.fun))
