"""Method-of-lines solver for the inflow problem in the boundary frame.

Unknowns live on the nodes xi_j = j * dxi, j = 0..N, of [0, L].  In
conservative form, with E = R theta / (gamma - 1) + u^2 / 2::

    v_t = sigma v_xi + u_xi
    u_t = sigma u_xi - p_xi + (mu u_xi / v)_xi
    E_t = sigma E_xi - (p u)_xi + (kappa theta_xi / v + mu u u_xi / v)_xi

The transport terms are upwinded (sigma < 0 moves information into the
domain from xi = 0), pressure and work terms use central differences and
the diffusive fluxes are evaluated at cell midpoints.  Both end nodes are
Dirichlet.  Time stepping is the three-stage SSP Runge-Kutta scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import CFLCollapse, DomainError, PositivityViolation
from .gas import GasParams

CFL_DEFAULT = 0.4


@dataclass(frozen=True)
class Grid:
    N: int
    L: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 4:
            raise DomainError("need N >= 4 cells")
        if not self.L > 0:
            raise DomainError("domain length must be positive")

    @property
    def dxi(self) -> float:
        return self.L / self.N

    @property
    def xi(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.N + 1)


@dataclass
class SolutionState:
    t: float
    v: np.ndarray
    u: np.ndarray
    theta: np.ndarray

    def copy(self) -> "SolutionState":
        return SolutionState(self.t, self.v.copy(), self.u.copy(), self.theta.copy())


class NormsRecord(NamedTuple):
    t: float
    sup_phi: float
    sup_psi: float
    sup_theta: float
    l2: float
    h1: float
    energy: float


def _as_bc(bc):
    if callable(bc):
        return bc
    vals = tuple(float(x) for x in bc)
    return lambda t: vals


def stable_dt(v, u, theta, g: GasParams, sigma: float, dxi: float, cfl: float = CFL_DEFAULT) -> float:
    c = np.sqrt(g.gamma * g.R * theta) / v
    lam_max = float(np.max(np.abs(sigma) + c))
    diff = max(g.mu, g.kappa * (g.gamma - 1) / g.R)
    return cfl * min(dxi / lam_max, dxi * dxi * float(np.min(v)) / (2 * diff))


def _rhs(v, u, E, g: GasParams, sigma: float, dxi: float):
    """Time derivatives at the interior nodes 1..N-1."""
    R, gm1 = g.R, g.gamma - 1
    theta = gm1 / R * (E - 0.5 * u * u)
    p = R * theta / v
    h = dxi

    def transport(q):
        if sigma <= 0:
            return sigma * (q[1:-1] - q[:-2]) / h
        return sigma * (q[2:] - q[1:-1]) / h

    def central(q):
        return (q[2:] - q[:-2]) / (2 * h)

    vh = 0.5 * (v[1:] + v[:-1])
    uh = 0.5 * (u[1:] + u[:-1])
    du = np.diff(u) / h
    dth = np.diff(theta) / h
    fu = g.mu * du / vh
    fE = (g.kappa * dth + g.mu * uh * du) / vh
    dv = transport(v) + central(u)
    dm = transport(u) - central(p) + np.diff(fu) / h
    de = transport(E) - central(p * u) + np.diff(fE) / h
    return dv, dm, de


def integrate(initial: SolutionState, boundary, g: GasParams, grid: Grid, t_final: float,
              callbacks: Sequence[Callable] = (), snapshot_times: Sequence[float] = (),
              right=None, sigma: float | None = None, forcing: Callable | None = None,
              cfl: float = CFL_DEFAULT, dt_min: float = 1e-12) -> list[SolutionState]:
    """Advance ``initial`` to ``t_final``.

    ``boundary`` and ``right`` are (v, u, theta) tuples or callables of t
    giving the Dirichlet data at xi = 0 and xi = L (``right`` defaults to
    the initial values at xi = L).  ``sigma`` defaults to -u_/v_ from the
    boundary data at the initial time.  ``forcing(t, xi)`` may return
    additive source terms for the (v, u, E) equations.

    Snapshot times are hit exactly; at each of them (and at the start and
    end) every callback is invoked with the current state.  Returns the
    list of snapshot states.
    """
    xi = grid.xi
    if initial.v.shape != xi.shape:
        raise DomainError("initial data does not live on the grid")
    R, gm1 = g.R, g.gamma - 1
    left_bc = _as_bc(boundary)
    if right is None:
        right = (initial.v[-1], initial.u[-1], initial.theta[-1])
    right_bc = _as_bc(right)
    t = float(initial.t)
    vl, ul, thl = left_bc(t)
    if not ul > 0:
        raise DomainError("inflow boundary needs u_- > 0")
    if sigma is None:
        sigma = -ul / vl
    if not (np.all(initial.v > 0) and np.all(initial.theta > 0)):
        raise PositivityViolation("initial data not positive")
    h = grid.dxi
    xi_in = xi[1:-1]

    v = initial.v.astype(float).copy()
    u = initial.u.astype(float).copy()
    E = R * initial.theta / gm1 + 0.5 * u * u

    def set_bc(tt, v, u, E):
        for idx, bc in ((0, left_bc), (-1, right_bc)):
            bv, bu, bth = bc(tt)
            v[idx], u[idx] = bv, bu
            E[idx] = R * bth / gm1 + 0.5 * bu * bu

    def stage(tt, v, u, E):
        dv, dm, de = _rhs(v, u, E, g, sigma, h)
        if forcing is not None:
            fv, fm, fe = forcing(tt, xi_in)
            dv, dm, de = dv + fv, dm + fm, de + fe
        return dv, dm, de

    def state(tt):
        th = gm1 / R * (E - 0.5 * u * u)
        return SolutionState(tt, v.copy(), u.copy(), th)

    def emit(tt):
        s = state(tt)
        for cb in callbacks:
            cb(s)
        return s

    stops = sorted({float(x) for x in snapshot_times if t < x < t_final} | {float(t_final)})
    set_bc(t, v, u, E)
    out = [emit(t)]
    for stop in stops:
        while t < stop:
            th = gm1 / R * (E - 0.5 * u * u)
            dt = stable_dt(v, u, th, g, sigma, h, cfl)
            if not dt > dt_min * max(1.0, t):
                raise CFLCollapse(f"time step {dt!r} underflowed at t={t!r}")
            if t + dt >= stop or stop - (t + dt) < 1e-9 * dt:
                dt = stop - t
            # SSP-RK3 on the interior nodes
            q0 = (v.copy(), u.copy(), E.copy())
            k = stage(t, v, u, E)
            for arr, dq in zip((v, u, E), k):
                arr[1:-1] += dt * dq
            set_bc(t + dt, v, u, E)
            k = stage(t + dt, v, u, E)
            for arr, a0, dq in zip((v, u, E), q0, k):
                arr[1:-1] = 0.75 * a0[1:-1] + 0.25 * (arr[1:-1] + dt * dq)
            set_bc(t + 0.5 * dt, v, u, E)
            k = stage(t + 0.5 * dt, v, u, E)
            for arr, a0, dq in zip((v, u, E), q0, k):
                arr[1:-1] = a0[1:-1] / 3 + 2 / 3 * (arr[1:-1] + dt * dq)
            t = stop if dt == stop - t else t + dt
            set_bc(t, v, u, E)
            th = gm1 / R * (E - 0.5 * u * u)
            if not (np.all(v > 0) and np.all(th > 0)) or not np.all(np.isfinite(E)):
                raise PositivityViolation(f"v or theta lost positivity at t={t!r}")
        out.append(emit(t))
    return out


# -- diagnostics --------------------------------------------------------------


def phi_fn(eta):
    """Phi(eta) = eta - log(eta) - 1, accurate near eta = 1."""
    eta = np.asarray(eta, dtype=float)
    if np.any(eta <= 0):
        raise DomainError("Phi needs a positive argument")
    d = eta - 1.0
    return d - np.log1p(d)


def perturbation_norms(state: SolutionState, composite, g: GasParams, xi=None) -> NormsRecord:
    """Norms of (phi, psi, vartheta) = (v, u, theta) - (V, U, Theta) on the grid.

    ``composite`` is anything exposing node arrays ``V, U, Theta``.
    """
    V, U, Th = (np.asarray(getattr(composite, k), dtype=float) for k in ("V", "U", "Theta"))
    if xi is None:
        xi = getattr(composite, "xi")
    xi = np.asarray(xi, dtype=float)
    phi, psi, vt = state.v - V, state.u - U, state.theta - Th
    if np.any(state.v / V <= 0) or np.any(state.theta / Th <= 0):
        raise DomainError("ratios v/V and theta/Theta must be positive")
    sq = phi**2 + psi**2 + vt**2
    l2sq = float(np.trapezoid(sq, xi))
    grads = [np.gradient(q, xi) for q in (phi, psi, vt)]
    h1sq = l2sq + float(np.trapezoid(sum(d * d for d in grads), xi))
    E = g.R * Th * phi_fn(state.v / V) + 0.5 * psi**2 + g.R / (g.gamma - 1) * Th * phi_fn(state.theta / Th)
    return NormsRecord(float(state.t), float(np.max(np.abs(phi))), float(np.max(np.abs(psi))),
                       float(np.max(np.abs(vt))), math.sqrt(l2sq), math.sqrt(h1sq),
                       float(np.trapezoid(E, xi)))


def bump(xi, center: float, half_width: float):
    """C^2 bump (1 - s^2)^3 on |s| < 1, s = (xi - center) / half_width."""
    s = (np.asarray(xi, dtype=float) - center) / half_width
    return np.where(np.abs(s) < 1, (1 - s * s) ** 3, 0.0)


def boundary_cutoff(xi, width: float):
    """C^2 ramp equal to 1 at xi = 0 and 0 for xi >= width."""
    s = np.clip(np.asarray(xi, dtype=float) / width, 0.0, 1.0)
    return (1 - s) ** 3 * (1 + 3 * s + 6 * s * s)


def mass_flux_balance(states: Sequence[SolutionState], V_of_t: Callable, U_of_t: Callable,
                      xi, sigma: float):
    """Compare d/dt of the trapezoid mass of phi with the boundary flux.

    From phi_t = sigma phi_xi + psi_xi:  d/dt int phi = sigma [phi]_0^L + [psi]_0^L.
    Returns (times at midpoints, measured rate, predicted rate).
    """
    xi = np.asarray(xi, dtype=float)
    ts = np.array([s.t for s in states])
    mass, flux = [], []
    for s in states:
        phi = s.v - V_of_t(s.t)
        psi = s.u - U_of_t(s.t)
        mass.append(float(np.trapezoid(phi, xi)))
        flux.append(sigma * (phi[-1] - phi[0]) + (psi[-1] - psi[0]))
    mass, flux = np.array(mass), np.array(flux)
    rate = np.diff(mass) / np.diff(ts)
    pred = 0.5 * (flux[1:] + flux[:-1])
    return 0.5 * (ts[1:] + ts[:-1]), rate, pred


# -- stability runs against the superposition wave ---------------------------

MONITOR_TOL = 1e-8


def _gamma_tail_width(dw: float, q: int, tol: float) -> float:
    """x beyond which dw * x^q e^-x / q! stays below tol."""
    from scipy.optimize import brentq

    if dw <= 0:
        return 0.0
    lg = math.lgamma(q + 1)

    def f(x):
        return math.log(dw) + q * math.log(x) - x - lg - math.log(tol)

    return brentq(f, q, 10.0 * q + 50.0 + abs(math.log(tol)) * 2)


def default_length(case, parts, t_final: float, margin: float = 0.2) -> float:
    """Domain length covering every wave at t_final plus a relative margin."""
    from .gas import lam

    g = parts.g
    s = 1.0 + t_final
    w3r = float(lam(3, case.right.v, case.right.theta, g))
    w3l = float(lam(3, case.star_up.v, case.star_up.theta, g))
    x_tail = _gamma_tail_width(abs(w3r - w3l) * max(s, 1.0), parts.q, 1e-3 * MONITOR_TOL)
    front = (w3r - case.sigma_minus) * s + x_tail
    contact = -case.sigma_minus * t_final + 40.0 * math.sqrt(parts.profile.a_diff * s)
    return (1.0 + margin) * max(front, contact, 20.0)


def right_edge_derivatives(field) -> float:
    """Largest xi-derivative at the last node among the non-layer components."""
    comps = (field.r1, field.contact, field.r3)
    return max(float(abs(getattr(c, k)[-1])) for c in comps for k in ("dV", "dU", "dTheta"))


class StabilityRun(NamedTuple):
    grid: Grid
    norms: list
    profiles: list
    states: list
    amplitude: float


def run_stability(case, parts, g: GasParams, N: int, t_final: float, snapshot_times=(),
                  profile_times=(), L: float | None = None, bump_h1: float = 0.01,
                  bump_center: float | None = None, bump_half_width: float = 10.0,
                  cutoff_width: float = 5.0, cfl: float = CFL_DEFAULT) -> StabilityRun:
    """Perturb the superposition wave by a C^2 bump and track the perturbation.

    The bump (1 - s^2)^3 is added to each of (v, u, theta) with a common
    amplitude scaled so that the H^1 norm of the triple is ``bump_h1``.  A
    C^2 ramp near xi = 0 replaces the superposition's boundary value by the
    exact inflow state so the initial data are compatible with the boundary
    condition.
    """
    from .composite import eval_composite, eval_layer

    if L is None:
        L = default_length(case, parts, t_final)
    grid = Grid(N, L)
    xi = grid.xi
    if bump_center is None:
        bump_center = cutoff_width + 2.0 * bump_half_width
    if bump_center - bump_half_width < cutoff_width or bump_center + bump_half_width > 0.8 * L:
        raise DomainError("bump support must avoid the boundary ramp and the far field")

    f0 = eval_composite(0.0, xi, case, parts)
    b = bump(xi, bump_center, bump_half_width)
    db = np.gradient(b, xi)
    unit_h1 = math.sqrt(3.0 * (np.trapezoid(b * b, xi) + np.trapezoid(db * db, xi)))
    amp = bump_h1 / unit_h1 if unit_h1 > 0 else 0.0
    chi = boundary_cutoff(xi, cutoff_width)
    left = case.left
    v0 = f0.V + amp * b + chi * (left.v - f0.V[0])
    u0 = f0.U + amp * b + chi * (left.u - f0.U[0])
    th0 = f0.Theta + amp * b + chi * (left.theta - f0.Theta[0])
    init = SolutionState(0.0, v0, u0, th0)

    # far-field data: the stationary layer's (algebraic) tail on top of the
    # right state; the other components sit on their plateaus there, which
    # the monitor below enforces
    lay = eval_layer(parts, np.array([L]))
    rt = case.right
    right_bc = (rt.v + float(lay.devV[0]), rt.u + float(lay.devU[0]), rt.theta + float(lay.devTheta[0]))

    norms, profiles = [], []
    ptimes = {float(x) for x in profile_times}

    def observe(state):
        field = eval_composite(state.t, xi, case, parts)
        edge = right_edge_derivatives(field)
        if edge > MONITOR_TOL:
            from .errors import FarFieldContamination

            raise FarFieldContamination(f"wave derivative {edge:.3e} at the far-field node, t={state.t!r}")
        norms.append(perturbation_norms(state, field, g, xi))
        if state.t in ptimes:
            profiles.append((state, field))

    times = sorted({float(x) for x in snapshot_times} | ptimes)
    states = integrate(init, left.as_tuple(), g, grid, t_final, callbacks=(observe,),
                       snapshot_times=times, right=right_bc, sigma=case.sigma_minus, cfl=cfl)
    return StabilityRun(grid, norms, profiles, states, amp)
