"""Smooth rarefaction waves built from an inviscid Burgers solution.

The Burgers datum rises from ``w_minus`` to ``w_plus`` through a
regularised incomplete gamma function of integer order ``q + 1``::

    w0(x) = w_minus + (w_plus - w_minus) P(q + 1, x),   x >= 0
    w0(x) = w_minus,                                   x <  0

so that ``w0'`` is ``C_q x^q e^{-x}`` with ``C_q = 1/q!``.  Its solution is
found by following characteristics back to t = 0, and is lifted to a
profile of the gas system by inverting lambda_i(v, s) = w at constant
entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceFailure, DomainError
from .gas import GasParams, ThermoState, entropy, lam

Q_DEFAULT = 14


# -- incomplete gamma of integer order --------------------------------------


def gamma_pq(q: int, x):
    """Regularised lower and upper incomplete gamma P(q+1, x), Q(q+1, x).

    Series for the smaller of the two below the mean ``q + 1``; the exact
    finite sum ``Q = e^{-x} sum_{k<=q} x^k / k!`` above it.  Both keep full
    relative accuracy in the small tail.
    """
    x = np.asarray(x, dtype=float)
    a = q + 1
    P = np.zeros_like(x)
    Q = np.ones_like(x)
    pos = x > 0
    lo = pos & (x < a)
    hi = pos & ~lo
    if np.any(lo):
        xl = x[lo]
        term = np.ones_like(xl)
        total = np.ones_like(xl)
        for n in range(1, 400):
            term = term * xl / (a + n)
            total += term
            if np.all(term <= 1e-17 * total):
                break
        p = total * np.exp(a * np.log(xl) - xl - math.lgamma(a + 1))
        P[lo] = p
        Q[lo] = 1.0 - p
    if np.any(hi):
        xh = x[hi]
        term = np.ones_like(xh)
        total = np.ones_like(xh)
        for k in range(1, a):
            term = term * xh / k
            total += term
        qv = np.exp(-xh) * total
        Q[hi] = qv
        P[hi] = 1.0 - qv
    return P, Q


@dataclass(frozen=True)
class BurgersWave:
    w_minus: float
    w_plus: float
    q: int = Q_DEFAULT

    def __post_init__(self):
        if not self.w_minus <= self.w_plus:
            raise DomainError("need w_minus <= w_plus")
        if int(self.q) != self.q or self.q < 1:
            raise DomainError("q must be a positive integer")

    @property
    def C_q(self) -> float:
        return 1.0 / math.factorial(self.q)

    @property
    def dw(self) -> float:
        return self.w_plus - self.w_minus

    def w0(self, x):
        P, _ = gamma_pq(self.q, x)
        return self.w_minus + self.dw * P

    def dw0(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 0
        xp = x[pos]
        out[pos] = self.dw * np.exp(self.q * np.log(xp) - xp - math.lgamma(self.q + 1))
        return out

    def d2w0(self, x):
        x = np.asarray(x, dtype=float)
        d1 = self.dw0(x)
        return np.where(x > 0, d1 * (self.q / np.where(x > 0, x, 1.0) - 1.0), 0.0)


class BurgersValues(NamedTuple):
    w: np.ndarray
    x0: np.ndarray
    P: np.ndarray  # (w - w_minus) / dw
    Q: np.ndarray  # (w_plus - w) / dw
    w_y: np.ndarray
    w_yy: np.ndarray


def foot_points(bw: BurgersWave, s: float, y, tol: float = 1e-13, max_iter: int = 200):
    """Solve y = x0 + w0(x0) s for x0 (vectorised, safeguarded Newton)."""
    y = np.asarray(y, dtype=float)
    x0 = y - bw.w_minus * s
    todo = np.flatnonzero(x0 > 0)
    if todo.size == 0 or s == 0 or bw.dw == 0:
        return x0
    yy = y[todo]
    lo = np.maximum(0.0, yy - bw.w_plus * s)
    hi = yy - bw.w_minus * s
    # start from the centred-fan guess, clipped into the bracket
    z = np.clip(0.5 * (lo + hi), lo, hi)
    active = np.ones(yy.size, dtype=bool)
    f_prev = np.full(yy.size, np.inf)
    for _ in range(max_iter):
        ia = np.flatnonzero(active)
        if ia.size == 0:
            break
        za = z[ia]
        F = za + bw.w0(za) * s - yy[ia]
        dF = 1.0 + bw.dw0(za) * s
        neg = F < 0
        lo[ia] = np.where(neg, za, lo[ia])
        hi[ia] = np.where(neg, hi[ia], za)
        step = F / dF
        zn = za - step
        # Newton can cycle across the steep front; bisect when it stalls
        slow = np.abs(F) > 0.5 * f_prev[ia]
        f_prev[ia] = np.abs(F)
        bad = (zn <= lo[ia]) | (zn >= hi[ia]) | slow
        zn = np.where(bad, 0.5 * (lo[ia] + hi[ia]), zn)
        # the tolerance follows the unknown: near a steep front F is large
        # even for an x0 error of a few ulps
        tol_abs = tol * (1.0 + np.abs(za))
        done = (np.abs(zn - za) <= tol_abs) | (hi[ia] - lo[ia] <= tol_abs) | (F == 0)
        z[ia] = np.where(F == 0, za, zn)
        active[ia[done]] = False
    if np.any(active):
        raise ConvergenceFailure("characteristic foot points did not converge")
    x0[todo] = z
    return x0


def burgers_eval(bw: BurgersWave, s: float, y) -> BurgersValues:
    """Burgers solution w(s, y) from the datum w0, with y-derivatives."""
    if s < 0:
        raise DomainError("shifted time must be non-negative")
    y = np.asarray(y, dtype=float)
    x0 = foot_points(bw, s, y)
    P, Q = gamma_pq(bw.q, x0)
    d1 = bw.dw0(x0)
    d2 = bw.d2w0(x0)
    den = 1.0 + d1 * s
    w = np.where(P <= 0.5, bw.w_minus + bw.dw * P, bw.w_plus - bw.dw * Q)
    return BurgersValues(w, x0, P, Q, d1 / den, d2 / den**3)


# -- lift to the gas system --------------------------------------------------


class RarefactionField(NamedTuple):
    i: int
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
    # deviations from the right anchor (exact zeros on the right plateau)
    devV: np.ndarray
    devU: np.ndarray
    devTheta: np.ndarray
    # deviations from the left anchor (exact zeros on the left plateau)
    devV_left: np.ndarray
    devU_left: np.ndarray
    devTheta_left: np.ndarray
    delta_ri: float


def _check_anchors(i, left: ThermoState, right: ThermoState, g: GasParams, tol=1e-9):
    sl = float(entropy(left.v, left.theta, g))
    sr = float(entropy(right.v, right.theta, g))
    if abs(sl - sr) > tol * max(1.0, abs(sl)):
        raise DomainError("anchors do not share an isentrope")
    ok = right.v >= left.v if i == 1 else right.v <= left.v
    if not ok:
        raise DomainError(f"anchors are not on the {i}-rarefaction branch")


def _lift(i, r_log, anchor: ThermoState, g: GasParams):
    """Deviations (V, U, Theta) - anchor for log(w / w_anchor) = r_log."""
    gp1, gm1 = g.gamma + 1.0, g.gamma - 1.0
    beta = gm1 / gp1
    c_a = math.sqrt(g.R * g.gamma * anchor.theta)
    sgn = 1.0 if i == 1 else -1.0
    dV = anchor.v * np.expm1(-2.0 / gp1 * r_log)
    dTh = anchor.theta * np.expm1(2 * beta * r_log)
    dU = -sgn * 2 * c_a / gm1 * np.expm1(beta * r_log)
    return dV, dU, dTh


def eval_rarefaction(i: int, t: float, xi, anchor_left: ThermoState, anchor_right: ThermoState,
                     sigma_minus: float, g: GasParams, q: int = Q_DEFAULT) -> RarefactionField:
    """Smooth i-rarefaction at time t on the grid ``xi``.

    lambda_i(V, Theta)(t, xi) = w(1 + t, xi + sigma_minus (1 + t)).
    """
    if i not in (1, 3):
        raise ValueError("family must be 1 or 3")
    _check_anchors(i, anchor_left, anchor_right, g)
    xi = np.asarray(xi, dtype=float)
    wl = float(lam(i, anchor_left.v, anchor_left.theta, g))
    wr = float(lam(i, anchor_right.v, anchor_right.theta, g))
    bw = BurgersWave(wl, max(wl, wr), q)
    s = 1.0 + t
    bv = burgers_eval(bw, s, xi + sigma_minus * s)
    dw = bw.dw
    gp1 = g.gamma + 1.0
    beta = (g.gamma - 1.0) / gp1

    use_left = bv.P <= 0.5
    rl = np.log1p(dw * bv.P / wl)
    rr = np.log1p(-dw * bv.Q / wr) if dw > 0 else np.zeros_like(xi)
    dVl, dUl, dTl = _lift(i, rl, anchor_left, g)
    dVr, dUr, dTr = _lift(i, rr, anchor_right, g)
    V = np.where(use_left, anchor_left.v + dVl, anchor_right.v + dVr)
    U = np.where(use_left, anchor_left.u + dUl, anchor_right.u + dUr)
    Th = np.where(use_left, anchor_left.theta + dTl, anchor_right.theta + dTr)
    # deviation from the right plateau without cancellation on either side
    devV = np.where(use_left, (anchor_left.v - anchor_right.v) + dVl, dVr)
    devU = np.where(use_left, (anchor_left.u - anchor_right.u) + dUl, dUr)
    devT = np.where(use_left, (anchor_left.theta - anchor_right.theta) + dTl, dTr)
    lvV = np.where(use_left, dVl, (anchor_right.v - anchor_left.v) + dVr)
    lvU = np.where(use_left, dUl, (anchor_right.u - anchor_left.u) + dUr)
    lvT = np.where(use_left, dTl, (anchor_right.theta - anchor_left.theta) + dTr)

    w = bv.w
    a1 = bv.w_y / w
    a2 = bv.w_yy / w
    aV = -2.0 / gp1
    aT = 2 * beta
    dV = aV * V * a1
    dT = aT * Th * a1
    dU = 2.0 / gp1 * V * bv.w_y
    d2V = aV * V * ((aV - 1) * a1 * a1 + a2)
    d2T = aT * Th * ((aT - 1) * a1 * a1 + a2)
    d2U = 2.0 / gp1 * (dV * bv.w_y + V * bv.w_yy)
    return RarefactionField(i, float(t), xi, V, U, Th, dV, dU, dT, d2V, d2U, d2T,
                            devV, devU, devT, lvV, lvU, lvT, anchor_right.u - anchor_left.u)


def fan_state(i: int, zeta, anchor_left: ThermoState, anchor_right: ThermoState,
              sigma_minus: float, g: GasParams):
    """Centred rarefaction fan in the boundary frame as a function of zeta = xi / (1 + t)."""
    zeta = np.asarray(zeta, dtype=float)
    wl = float(lam(i, anchor_left.v, anchor_left.theta, g))
    wr = float(lam(i, anchor_right.v, anchor_right.theta, g))
    w = np.clip(zeta + sigma_minus, wl, wr)
    rl = np.log(w / wl)
    dV, dU, dT = _lift(i, rl, anchor_left, g)
    return anchor_left.v + dV, anchor_left.u + dU, anchor_left.theta + dT


def burgers_fv_reference(bw: BurgersWave, s_final: float, x_lo: float, x_hi: float, n: int = 20000,
                         cfl: float = 0.4):
    """Second-order MUSCL finite-volume solution of w_s + (w^2/2)_x = 0 from s = 0.

    Godunov flux with minmod-limited reconstruction and SSP-RK2; cell
    averages of the datum are taken exactly from the incomplete gamma
    antiderivative.  Returns cell centres and averages at ``s_final``.
    """
    edges = np.linspace(x_lo, x_hi, n + 1)
    dx = edges[1] - edges[0]
    centres = 0.5 * (edges[1:] + edges[:-1])
    # exact cell averages: int w0 = w_minus x + dw * int_0^x P(q+1, y) dy
    def W(x):
        x = np.asarray(x, dtype=float)
        xp = np.maximum(x, 0.0)
        P, _ = gamma_pq(bw.q, xp)
        P2, _ = gamma_pq(bw.q + 1, xp)
        # int_0^x P(a, y) dy = x P(a, x) - a P(a+1, x)
        return bw.w_minus * x + bw.dw * (xp * P - (bw.q + 1) * P2)

    w = np.diff(W(edges)) / dx

    def godunov(wl, wr):
        fl, fr = 0.5 * wl * wl, 0.5 * wr * wr
        shock = wl > wr
        f = np.where(shock, np.maximum(fl, fr), np.minimum(fl, fr))
        sonic = (~shock) & (wl < 0) & (wr > 0)
        return np.where(sonic, 0.0, f)

    def rhs(w):
        wp = np.concatenate([[w[0], w[0]], w, [w[-1], w[-1]]])
        d = np.diff(wp)
        slope = np.where(d[:-1] * d[1:] > 0, np.sign(d[1:]) * np.minimum(abs(d[:-1]), abs(d[1:])), 0.0)
        wc = wp[1:-1]
        wl = (wc + 0.5 * slope)[:-1]
        wr = (wc - 0.5 * slope)[1:]
        F = godunov(wl, wr)
        return -(F[1:] - F[:-1]) / dx

    s = 0.0
    while s < s_final:
        dt = min(cfl * dx / max(np.abs(w).max(), 1e-12), s_final - s)
        w1 = w + dt * rhs(w)
        w = 0.5 * (w + w1 + dt * rhs(w1))
        s += dt
    return centres, w
