"""Rarefaction wave curves and the intermediate states of the four-wave pattern.

Along an i-rarefaction curve the entropy is constant and the Riemann
invariant ``u -+ 2c/(gamma-1)`` is preserved, so every curve has a closed
form.  Writing ``c_a`` for the sound speed at the anchor::

    theta = theta_a (v_a / v)^(gamma-1)
    u     = u_a + sgn_i 2 c_a / (gamma-1) (1 - (v / v_a)^((1-gamma)/2))

with ``sgn_1 = +1`` and ``sgn_3 = -1``.  In terms of pressure the
velocity is affine in ``p^((gamma-1)/(2 gamma))``, which makes the
1-3 matching problem explicit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from . import boundary_layer as bl
from .errors import DomainError, InvalidRegion, InvalidStrengths, LaunchFailure, NoSolution
from .gas import GasParams, Regime, ThermoState, check_state, classify, entropy, pressure

log = logging.getLogger(__name__)

_SGN = {1: 1.0, 3: -1.0}


def _sgn(i: int) -> float:
    try:
        return _SGN[i]
    except KeyError:
        raise ValueError(f"family must be 1 or 3, got {i}") from None


def curve_state(i: int, anchor: ThermoState, v: float, g: GasParams) -> ThermoState:
    """Point with specific volume ``v`` on the i-curve through ``anchor`` (no branch check)."""
    if not v > 0:
        raise DomainError("v must be positive")
    gm1 = g.gamma - 1.0
    c_a = math.sqrt(g.R * g.gamma * anchor.theta)
    lr = math.log(v / anchor.v)
    theta = anchor.theta * math.exp(-gm1 * lr)
    du = _sgn(i) * 2 * c_a / gm1 * -math.expm1(-0.5 * gm1 * lr)
    return ThermoState(v, anchor.u + du, theta)


def curve_state_at_u(i: int, anchor: ThermoState, u: float, g: GasParams) -> ThermoState:
    """Point with velocity ``u`` on the i-curve through ``anchor``."""
    gm1 = g.gamma - 1.0
    c_a = math.sqrt(g.R * g.gamma * anchor.theta)
    w = 1.0 - _sgn(i) * gm1 * (u - anchor.u) / (2 * c_a)  # (v/v_a)^((1-gamma)/2)
    if not w > 0:
        raise DomainError("velocity beyond the vacuum point of the curve")
    v = anchor.v * w ** (-2.0 / gm1)
    return ThermoState(v, u, anchor.theta * w**2)


def rarefaction_branch(i: int, anchor: ThermoState, v: float, g: GasParams) -> ThermoState:
    """State on the i-rarefaction branch issuing from the left state ``anchor``.

    The admissible branch, on which the characteristic speed increases
    from its anchor value, is ``v >= v_anchor`` for i = 1 and
    ``v <= v_anchor`` for i = 3.
    """
    check_state(anchor)
    _sgn(i)
    if (i == 1 and v < anchor.v) or (i == 3 and v > anchor.v) or not v > 0:
        raise DomainError(f"v={v!r} is not on the admissible {i}-branch of {anchor}")
    return curve_state(i, anchor, v, g)


def transonic_point_on_r1(mid: ThermoState, g: GasParams) -> ThermoState:
    """The sonic state (u = c) on the 1-curve through ``mid`` with v < v_mid.

    Requires ``u_m`` subsonic-positive or with the sonic point reachable
    through the admissible part of the curve.
    """
    gm1 = g.gamma - 1.0
    c_m = math.sqrt(g.R * g.gamma * mid.theta)
    # with w = (v/v_m)^((1-gamma)/2):  u = u_m + 2 c_m (1 - w)/(gamma-1),  c = c_m w
    w = (mid.u + 2 * c_m / gm1) / (c_m * (1 + 2 / gm1))
    if not w >= 1.0:
        raise InvalidStrengths("the sonic point of the 1-curve is not behind the mid state")
    v = mid.v * w ** (-2.0 / gm1)
    return ThermoState(v, mid.u + 2 * c_m * (1 - w) / gm1, mid.theta * w * w)


# -- case description -------------------------------------------------------


@dataclass(frozen=True)
class Strengths:
    delta_b: float = 0.0
    delta_r1: float = 0.0
    delta_d: float = 0.0
    delta_r3: float = 0.0
    delta: float = 0.0

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("delta_b", "delta_r1", "delta_d", "delta_r3", "delta")}


@dataclass(frozen=True)
class CaseSetup:
    """End states, intermediate states and wave strengths of one experiment."""

    left: ThermoState
    right: ThermoState
    star: ThermoState
    mid: ThermoState
    star_up: ThermoState
    sigma_minus: float
    strengths: Strengths = field(default_factory=Strengths)
    delta_b_velocity: float = 0.0

    def to_dict(self) -> dict:
        out = {k: getattr(self, k).to_dict() for k in ("left", "right", "star", "mid", "star_up")}
        out["sigma_minus"] = self.sigma_minus
        out["strengths"] = self.strengths.to_dict()
        return out

    @classmethod
    def from_dict(cls, d: dict, g: GasParams) -> "CaseSetup":
        st = {k: ThermoState(**{q: float(d[k][q]) for q in ("v", "u", "theta")})
              for k in ("left", "right", "star", "mid", "star_up")}
        return _finish(st["left"], st["right"], st["star"], st["mid"], st["star_up"], g)


def _strengths(left, right, star, mid, star_up) -> Strengths:
    delta = math.sqrt((right.v - left.v) ** 2 + (right.u - left.u) ** 2 + (right.theta - left.theta) ** 2)
    return Strengths(
        delta_b=math.hypot(star.u - left.u, star.theta - left.theta),
        delta_r1=mid.u - star.u,
        delta_d=abs(star_up.theta - mid.theta),
        delta_r3=right.u - star_up.u,
        delta=delta,
    )


def _finish(left, right, star, mid, star_up, g) -> CaseSetup:
    return CaseSetup(left, right, star, mid, star_up, -star.u / star.v,
                     _strengths(left, right, star, mid, star_up), star.u - left.u)


def medium_residuals(case: CaseSetup, g: GasParams) -> np.ndarray:
    """The nine defining relations of the intermediate states, each scaled to be relative."""
    L, Rt, s, m, su = case.left, case.right, case.star, case.mid, case.star_up
    gm1 = g.gamma - 1.0
    u_scale = max(abs(Rt.u), abs(L.u), math.sqrt(g.R * g.gamma * Rt.theta))
    r1 = curve_state(1, s, m.v, g).u  # velocity reached along the 1-curve from the star state
    r3 = curve_state(3, Rt, su.v, g).u
    return np.array([
        (L.u / L.v - s.u / s.v) / (s.u / s.v),
        (s.u - math.sqrt(g.R * g.gamma * s.theta)) / s.u,
        bl.sigma_membership_distance((L.u, L.theta), s, g) / max(s.u, s.theta),
        (m.u - r1) / u_scale,
        (s.v**gm1 * s.theta - m.v**gm1 * m.theta) / (m.v**gm1 * m.theta),
        (m.u - su.u) / u_scale,
        (m.theta / m.v - su.theta / su.v) / (su.theta / su.v),
        (su.u - r3) / u_scale,
        (su.v**gm1 * su.theta - Rt.v**gm1 * Rt.theta) / (Rt.v**gm1 * Rt.theta),
    ])


def _match_13(star: ThermoState, right: ThermoState, g: GasParams):
    """Common pressure and velocity of the 1-curve from ``star`` and the 3-curve through ``right``."""
    gm1 = g.gamma - 1.0
    b = gm1 / (2 * g.gamma)
    cs = math.sqrt(g.R * g.gamma * star.theta)
    cr = math.sqrt(g.R * g.gamma * right.theta)
    ps, pr = pressure(star.v, star.theta, g), pressure(right.v, right.theta, g)
    # u1(z) = u_s + 2 cs/gm1 (1 - z/zs),  u3(z) = u_r - 2 cr/gm1 (1 - z/zr),  z = p^b
    zs, zr = ps**b, pr**b
    num = star.u - right.u + 2 * (cs + cr) / gm1
    if not num > 0:
        raise NoSolution("the 1- and 3-curves only meet in vacuum")
    z = num / (2 * cs / (gm1 * zs) + 2 * cr / (gm1 * zr))
    p = z ** (1 / b)
    mid = curve_state(1, star, star.v * (ps / p) ** (1 / g.gamma), g)
    star_up = curve_state(3, right, right.v * (pr / p) ** (1 / g.gamma), g)
    return mid, star_up


def _sigma_theta(u_query: float, target: ThermoState, g: GasParams) -> float:
    dx = target.u - u_query
    if dx <= 10 * bl.EPS_LAUNCH * max(target.u, target.theta):
        # inside the launch neighbourhood the orbit is the centre direction
        return target.theta + (g.gamma - 1) * target.theta / target.u * dx
    return bl.sigma_theta_at(u_query, target, g)


def solve_medium_states(left: ThermoState, right: ThermoState, g: GasParams,
                        max_iter: int = 200, tol: float = 1e-8) -> CaseSetup:
    """Recover the intermediate states from the end states.

    The ray condition and sonic condition make the star state a function of
    ``u_*`` alone.  The 1-3 match is explicit for each ``u_*``; the
    remaining scalar condition, that the left state lie on the sonic
    orbit of the star state, is a monotone equation in ``u_*`` solved by
    bracketing and Brent's method.
    """
    check_state(left)
    check_state(right)
    if not left.u > 0:
        raise DomainError("inflow requires u_minus > 0")
    m = left.u / left.v
    Rg = g.R * g.gamma

    def star_of(us):
        return ThermoState(us / m, us, us * us / Rg)

    def r(us):
        return left.theta - _sigma_theta(left.u, star_of(us), g)

    r0 = r(left.u)
    scale = max(left.theta, 1.0)
    if abs(r0) <= 1e-13 * scale:
        us = left.u
    elif r0 < 0:
        raise NoSolution("the left state lies beyond every sonic orbit through its ray")
    else:
        # centre-direction estimate: theta_- = theta_* + (gamma-1) theta_*/u_* (u_* - u_-)
        lo = left.u
        hi = left.u * (1 + 1e-4)
        it = 0
        while True:
            try:
                rh = r(hi)
            except LaunchFailure:
                rh = -1.0
            if rh < 0:
                break
            lo = hi
            hi = left.u + 2 * (hi - left.u)
            it += 1
            if it > max_iter:
                raise NoSolution("could not bracket the star velocity")
        try:
            us = brentq(r, lo, hi, xtol=1e-15 * left.u, rtol=1e-15, maxiter=max_iter)
        except (ValueError, RuntimeError, LaunchFailure) as exc:
            raise NoSolution(f"star velocity root failed: {exc}") from exc
    star = star_of(us)
    if classify(star, g).regime != Regime.TRANSONIC or star.u <= 0:
        raise InvalidRegion(f"recovered star state {star} is not sonic with u > 0")
    mid, star_up = _match_13(star, right, g)
    case = _finish(left, right, star, mid, star_up, g)
    st = case.strengths
    if st.delta_r1 < -1e-12 * scale or st.delta_r3 < -1e-12 * scale:
        raise NoSolution("the data call for a shock; only rarefaction branches are admitted")
    res = np.abs(medium_residuals(case, g))
    if not np.all(res <= tol):
        raise NoSolution(f"residuals too large: {res}")
    return case


def generate_case(right: ThermoState, strengths, g: GasParams, contact_sign: int = 1,
                  tol_u: float = 1e-12) -> CaseSetup:
    """Build a consistent case by walking the curves back from the right state.

    ``strengths`` holds ``delta_b`` (velocity gap u_* - u_- across the
    layer), ``delta_r1``, ``delta_d`` and ``delta_r3``.  Only the
    thermodynamic part (v_+, theta_+) of ``right`` is binding: the sonic
    condition at the star state fixes the velocity level, so ``u_+`` is
    recomputed and a warning is logged when it differs from the input.
    """
    check_state(right)
    if isinstance(strengths, dict):
        sd = {k: float(strengths.get(k, 0.0)) for k in ("delta_b", "delta_r1", "delta_d", "delta_r3")}
    else:
        sd = {k: float(getattr(strengths, k)) for k in ("delta_b", "delta_r1", "delta_d", "delta_r3")}
    if any(x < 0 or not math.isfinite(x) for x in sd.values()):
        raise InvalidStrengths(f"strengths must be finite and >= 0: {sd}")
    try:
        # velocities relative to u_+ first; the level is fixed at the end
        rel_right = ThermoState(right.v, 0.0, right.theta)
        star_up = curve_state_at_u(3, rel_right, -sd["delta_r3"], g)
        th_m = star_up.theta + contact_sign * sd["delta_d"]
        if not th_m > 0:
            raise InvalidStrengths("contact strength drives theta_m non-positive")
        mid = ThermoState(star_up.v * th_m / star_up.theta, star_up.u, th_m)
        star = curve_state_at_u(1, mid, mid.u - sd["delta_r1"], g)
    except DomainError as exc:
        raise InvalidStrengths(str(exc)) from exc
    shift = math.sqrt(g.R * g.gamma * star.theta) - star.u
    star, mid, star_up = (replace(s, u=s.u + shift) for s in (star, mid, star_up))
    u_plus = shift
    if abs(u_plus - right.u) > tol_u * max(1.0, abs(right.u)):
        log.warning("u_plus refitted from %r to %r so that the star state is sonic", right.u, u_plus)
    right = ThermoState(right.v, u_plus, right.theta)
    db = sd["delta_b"]
    if db == 0:
        left = star
    else:
        try:
            th_l = _sigma_theta(star.u - db, star, g)
        except LaunchFailure as exc:
            raise InvalidStrengths(f"boundary-layer strength too large: {exc}") from exc
        u_l = star.u - db
        left = ThermoState(u_l * star.v / star.u, u_l, th_l)
    for s in (left, star, mid, star_up, right):
        if not (s.v > 0 and s.theta > 0):
            raise InvalidStrengths(f"intermediate state {s} is not physical")
    if left.u <= 0:
        raise InvalidStrengths("boundary-layer strength exceeds the star velocity")
    return _finish(left, right, star, mid, star_up, g)


def entropy_jumps(case: CaseSetup, g: GasParams) -> tuple[float, float]:
    """Entropy differences across the two rarefactions (both should vanish)."""
    s = lambda z: float(entropy(z.v, z.theta, g))  # noqa: E731
    return s(case.mid) - s(case.star), s(case.right) - s(case.star_up)
