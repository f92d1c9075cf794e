"""Viscous contact wave from a self-similar nonlinear diffusion profile.

The temperature diffuses according to ``Theta_t = a (Theta_x / Theta)_x``
with ``a = (gamma-1) kappa p / (R^2 gamma)``.  Its self-similar solution
``Theta(t, x) = f(x / sqrt(1+t))`` solves

    -(eta/2) f' = a (f'/f)',      f(-inf) = theta_l,  f(+inf) = theta_r,

which in ``g = log f`` is ``g'' = -eta e^g g' / (2a)``.  Writing
``g' = A exp(-h)`` with ``h' = eta e^g / (2a)`` turns it into a first-order
system whose tails are Gaussian and can be continued analytically.

From ``f`` the contact wave is assembled as::

    V^d = R Theta / p
    U^d = u_m + b Theta_x / Theta,             b = (gamma-1) kappa / (gamma R)
    Theta^d = Theta + c Theta_t,               c = (mu - b) / p

which makes the mass and momentum equations hold exactly; the energy
equation leaves the residual ``H^d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded
from scipy.optimize import root
from scipy.special import erfcx

from .errors import ConvergenceFailure, DomainError
from .gas import GasParams
from .hermite import QuinticHermite

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def diffusion_coefficient(p: float, g: GasParams) -> float:
    return (g.gamma - 1) * g.kappa * p / (g.R**2 * g.gamma)


def default_eta_max(a_diff: float) -> float:
    return 12.0 * max(1.0, math.sqrt(a_diff))


# -- finite-difference solve -------------------------------------------------


def _fd_solve(gl, gr, a, eta_max, n, max_cont=64, tol=1e-12, max_iter=50):
    """Damped Newton for g on a uniform grid, continuing in the endpoint jump."""
    eta = np.linspace(-eta_max, eta_max, n + 1)
    h = eta[1] - eta[0]
    e = eta[1:-1]
    lam, dlam = 0.0, 0.25
    g_done = np.full_like(eta, gl)
    steps = 0
    while lam < 1.0:
        target = min(1.0, lam + dlam)
        gR = gl + target * (gr - gl)
        g = g_done.copy()
        # blend towards the new right value linearly as the continuation guess
        g += (gR - g_done[-1]) * (eta + eta_max) / (2 * eta_max)
        ok = False
        for _ in range(max_iter):
            gi = g[1:-1]
            ex = np.exp(gi)
            d1 = (g[2:] - g[:-2]) / (2 * h)
            F = a * (g[2:] - 2 * gi + g[:-2]) / h**2 + 0.5 * e * ex * d1
            diag = -2 * a / h**2 + 0.5 * e * ex * d1
            up = a / h**2 + 0.25 * e * ex / h
            lo = a / h**2 - 0.25 * e * ex / h
            ab = np.zeros((3, gi.size))
            ab[0, 1:] = up[:-1]
            ab[1] = diag
            ab[2, :-1] = lo[1:]
            dg = solve_banded((1, 1), ab, -F)
            # damping: halve until the residual norm decreases
            f0 = np.linalg.norm(F)
            t = 1.0
            while t > 1e-4:
                trial = g.copy()
                trial[1:-1] += t * dg
                ti = trial[1:-1]
                Ft = a * (trial[2:] - 2 * ti + trial[:-2]) / h**2 + 0.25 * e * np.exp(ti) * (trial[2:] - trial[:-2]) / h
                if np.linalg.norm(Ft) < f0 or f0 == 0:
                    break
                t *= 0.5
            g = trial
            if np.max(np.abs(t * dg)) < tol:
                ok = True
                break
        if ok:
            g_done, lam = g, target
            dlam = min(2 * dlam, 1.0)
        else:
            dlam *= 0.5
        steps += 1
        if steps > max_cont or dlam < 1e-6:
            raise ConvergenceFailure("self-similar profile: continuation did not converge")
    return eta, g_done


# -- shooting refinement -----------------------------------------------------


def _shoot(g0, A, a, eta_max, dense=False):
    """Integrate (g, h) from eta = 0 to +-eta_max."""
    def f(eta, z):
        gp = A * math.exp(-z[1])
        return [gp, eta * math.exp(z[0]) / (2 * a)]

    out = []
    for end in (eta_max, -eta_max):
        sol = solve_ivp(f, (0.0, end), [g0, 0.0], method="DOP853", rtol=1e-13, atol=1e-15,
                        dense_output=dense)
        if not sol.success:
            raise ConvergenceFailure(sol.message)
        out.append(sol)
    return out


def _tail_integral(gp_end, alpha, eta_end, eta):
    """int_{|eta|}^{inf} gp_end exp(-alpha (z^2 - eta_end^2)) dz for |eta| >= eta_end."""
    ra = math.sqrt(alpha)
    z = np.abs(eta)
    return gp_end * 0.5 * math.sqrt(math.pi) / ra * erfcx(ra * z) * np.exp(-alpha * (z * z - eta_end**2))


@dataclass
class SelfSimilarProfile:
    """Self-similar temperature profile f(eta) and its derivatives.

    ``eta``, ``Theta_sim``, ``dTheta_sim`` sample the profile on
    [-eta_max, eta_max]; :meth:`evaluate` covers the whole line, with
    deviations from either end state kept to full relative precision in
    the Gaussian tails.
    """

    theta_left: float
    theta_right: float
    a_diff: float
    eta_max: float
    A: float = 0.0
    g0: float = 0.0
    n_nodes: int = 2001

    def __post_init__(self):
        self.gl, self.gr = math.log(self.theta_left), math.log(self.theta_right)
        self.eta = np.linspace(-self.eta_max, self.eta_max, self.n_nodes)
        self.trivial = self.theta_left == self.theta_right
        if self.trivial:
            self.Theta_sim = np.full_like(self.eta, self.theta_left)
            self.dTheta_sim = np.zeros_like(self.eta)
            return
        a, A = self.a_diff, self.A
        pos, neg = _shoot(self.g0, A, a, self.eta_max, dense=True)
        z = np.where(self.eta >= 0, 0, 1)
        G = np.empty_like(self.eta)
        Hh = np.empty_like(self.eta)
        for k, sol in enumerate((pos, neg)):
            m = z == k
            vals = sol.sol(self.eta[m])
            G[m], Hh[m] = vals[0], vals[1]
        gp = A * np.exp(-Hh)
        gpp = -self.eta * np.exp(G) * gp / (2 * a)
        hp = self.eta * np.exp(G) / (2 * a)
        hpp = (np.exp(G) + self.eta * np.exp(G) * gp) / (2 * a)
        self._interp = QuinticHermite(self.eta, np.array([G, Hh]),
                                      np.array([gp, hp]), np.array([gpp, hpp]))
        # cumulative integrals of g' from each end, interval by interval
        lo, hi = self.eta[:-1], self.eta[1:]
        seg = self._gl_integral(lo, hi)
        e_end = self.eta_max
        tail_r = float(_tail_integral(gp[-1], self.theta_right / (4 * a), e_end, e_end))
        tail_l = float(_tail_integral(gp[0], self.theta_left / (4 * a), e_end, e_end))
        # R[j] = int_{eta_j}^{inf} g',  L[j] = int_{-inf}^{eta_j} g'
        self._R = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]]) + tail_r
        self._L = np.concatenate([[0.0], np.cumsum(seg)]) + tail_l
        self._gp_end = (gp[0], gp[-1])
        ev = self.evaluate(self.eta)
        self.Theta_sim, self.dTheta_sim = ev.f, ev.f1

    def _gprime(self, eta):
        z = self._interp(eta)
        return self.A * np.exp(-z[1])

    def _gl_integral(self, lo, hi):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        pts = mid[:, None] + half[:, None] * _GL_X[None, :]
        return half * (self._gprime(pts.ravel()).reshape(pts.shape) @ _GL_W)

    class Values(NamedTuple):
        f: np.ndarray
        f1: np.ndarray
        f2: np.ndarray
        f3: np.ndarray
        dev_left: np.ndarray  # f - theta_left
        dev_right: np.ndarray  # f - theta_right

    def evaluate(self, eta) -> "SelfSimilarProfile.Values":
        eta = np.asarray(eta, dtype=float)
        shape = eta.shape
        eta = eta.ravel()
        a = self.a_diff
        if self.trivial:
            z = np.zeros_like(eta)
            v = np.full_like(eta, self.theta_left)
            return self.Values(v.reshape(shape), *(z.reshape(shape) for _ in range(5)))
        Dl = np.empty_like(eta)  # g - g_left
        Dr = np.empty_like(eta)  # g - g_right
        gp = np.empty_like(eta)
        em = self.eta_max
        inside = np.abs(eta) <= em
        if np.any(inside):
            e = eta[inside]
            j = np.clip(np.searchsorted(self.eta, e, side="right") - 1, 0, self.eta.size - 2)
            # integrate from the nearer node so the partial piece is short
            Dl[inside] = self._L[j] + self._gl_integral(self.eta[j], e)
            Dr[inside] = -(self._R[j + 1] + self._gl_integral(e, self.eta[j + 1]))
            gp[inside] = self._gprime(e)
        right = eta > em
        if np.any(right):
            al = self.theta_right / (4 * a)
            Dr[right] = -_tail_integral(self._gp_end[1], al, em, eta[right])
            Dl[right] = (self.gr - self.gl) + Dr[right]
            gp[right] = self._gp_end[1] * np.exp(-al * (eta[right] ** 2 - em**2))
        left = eta < -em
        if np.any(left):
            al = self.theta_left / (4 * a)
            Dl[left] = _tail_integral(self._gp_end[0], al, em, eta[left])
            Dr[left] = (self.gl - self.gr) + Dl[left]
            gp[left] = self._gp_end[0] * np.exp(-al * (eta[left] ** 2 - em**2))
        use_left = eta < 0
        gval = np.where(use_left, self.gl + Dl, self.gr + Dr)
        f = np.exp(gval)
        gpp = -eta * f * gp / (2 * a)
        gppp = -(f * gp + eta * f * gp * gp + eta * f * gpp) / (2 * a)
        f1 = f * gp
        f2 = f * (gpp + gp * gp)
        f3 = f * (gppp + 3 * gp * gpp + gp**3)
        dl = self.theta_left * np.expm1(Dl)
        dr = self.theta_right * np.expm1(Dr)
        return self.Values(*(q.reshape(shape) for q in (f, f1, f2, f3, dl, dr)))

    def bvp_residual(self, eta=None):
        """|-(eta/2) f' - a (f'/f)'| at the given points (default: interior nodes)."""
        if eta is None:
            eta = self.eta[1:-1]
        v = self.evaluate(eta)
        # (f'/f)' = f''/f - f'^2/f^2
        return np.abs(-0.5 * eta * v.f1 - self.a_diff * (v.f2 / v.f - (v.f1 / v.f) ** 2))


def solve_selfsimilar(theta_left: float, theta_right: float, a_diff: float,
                      eta_max: float | None = None, n_fd: int = 800) -> SelfSimilarProfile:
    """Self-similar profile joining theta_left (eta -> -inf) to theta_right.

    A finite-difference damped Newton solve with continuation in the end
    jump supplies the starting values; a two-parameter shooting in
    (g(0), g'(0)) then enforces the far-field limits to near machine
    precision.
    """
    if not (theta_left > 0 and theta_right > 0 and a_diff > 0):
        raise DomainError("need positive end temperatures and diffusion coefficient")
    if eta_max is None:
        eta_max = default_eta_max(a_diff)
    if theta_left == theta_right:
        return SelfSimilarProfile(theta_left, theta_right, a_diff, eta_max)
    gl, gr = math.log(theta_left), math.log(theta_right)
    eta, gfd = _fd_solve(gl, gr, a_diff, eta_max, n_fd)
    k = eta.size // 2
    h = eta[1] - eta[0]
    g0 = gfd[k]
    A = (gfd[k + 1] - gfd[k - 1]) / (2 * h)

    def resid(p):
        g0_, A_ = p
        pos, neg = _shoot(g0_, A_, a_diff, eta_max)
        out = []
        for sol, end, gt, th in ((pos, eta_max, gr, theta_right), (neg, -eta_max, gl, theta_left)):
            gE, hE = sol.y[0, -1], sol.y[1, -1]
            tail = float(_tail_integral(A_ * math.exp(-hE), th / (4 * a_diff), eta_max, eta_max))
            out.append(gE + math.copysign(tail, end) - gt)
        return out

    sol = root(resid, [g0, A], method="hybr", tol=1e-15)
    res = np.abs(resid(sol.x))
    if not np.all(res <= 1e-12 * max(1.0, abs(gl), abs(gr))):
        raise ConvergenceFailure(f"self-similar shooting did not converge: {res}")
    return SelfSimilarProfile(theta_left, theta_right, a_diff, eta_max, float(sol.x[1]), float(sol.x[0]))


# -- contact wave -------------------------------------------------------------


class ContactField(NamedTuple):
    t: float
    xi: np.ndarray
    V: np.ndarray
    U: np.ndarray
    Theta: np.ndarray
    dV: np.ndarray
    dU: np.ndarray
    dTheta: np.ndarray
    d2V: np.ndarray
    d2U: np.ndarray
    d2Theta: np.ndarray
    Hd: np.ndarray
    devV_left: np.ndarray
    devU_left: np.ndarray
    devTheta_left: np.ndarray
    devV_right: np.ndarray
    devU_right: np.ndarray
    devTheta_right: np.ndarray
    delta_d: float
    C_d: float


def eval_contact(t: float, xi, profile: SelfSimilarProfile, mid, star_up, sigma_minus: float,
                 g: GasParams) -> ContactField:
    """Contact wave between ``mid`` (left) and ``star_up`` (right) at time t."""
    if t < 0:
        raise DomainError("t must be non-negative")
    xi = np.asarray(xi, dtype=float)
    p = g.R * mid.theta / mid.v
    b = (g.gamma - 1) * g.kappa / (g.gamma * g.R)
    c = (g.mu - b) / p
    s = 1.0 + t
    rs = math.sqrt(s)
    x = xi + sigma_minus * t
    eta = x / rs
    ev = profile.evaluate(eta)
    f, f1, f2, f3 = ev.f, ev.f1, ev.f2, ev.f3
    Tx, Txx, Txxx = f1 / rs, f2 / s, f3 / (s * rs)
    Tt = -eta * f1 / (2 * s)
    Ttx = -(f1 + eta * f2) / (2 * s * rs)
    Ttxx = -(2 * f2 + eta * f3) / (2 * s * s)
    Ttt = eta * (3 * f1 + eta * f2) / (4 * s * s)

    V = g.R * f / p
    Vx, Vxx = g.R * Tx / p, g.R * Txx / p
    q = Tx / f
    Ux = b * (Txx / f - q * q)
    Uxx = b * (Txxx / f - 3 * q * Txx / f + 2 * q**3)
    Th = f + c * Tt
    Thx = Tx + c * Ttx
    Thxx = Txx + c * Ttxx
    Tht = Tt + c * Ttt
    P = p * Th / f
    Hd = (g.R / (g.gamma - 1) * Tht + P * Ux
          - g.kappa * (Thxx / V - Thx * Vx / V**2) - g.mu * Ux * Ux / V)
    dU = b * q
    delta_d = abs(star_up.theta - mid.theta)
    C_d = min(mid.theta, star_up.theta) / (4 * profile.a_diff)
    return ContactField(
        float(t), xi, V, mid.u + dU, Th, Vx, Ux, Thx, Vxx, Uxx, Thxx, Hd,
        g.R * ev.dev_left / p, dU, ev.dev_left + c * Tt,
        g.R * ev.dev_right / p, dU, ev.dev_right + c * Tt,
        delta_d, C_d,
    )
