"""Superposition of the four waves, its residuals and wave-interaction integrals."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import boundary_layer as bl
from .contact_wave import (ContactField, SelfSimilarProfile, diffusion_coefficient, eval_contact,
                           solve_selfsimilar)
from .errors import PositivityViolation
from .gas import GasParams, lam
from .quadrature import integrate_panels, panel_edges
from .rarefaction import Q_DEFAULT, RarefactionField, eval_rarefaction
from .wave_curves import CaseSetup

log = logging.getLogger(__name__)

#: exponents of the interaction bounds; None marks exponential decay
STATED_RATES = (-13 / 16, -1.0, -7 / 8, None, None, None, -2.0, -1.0, -1.0, None, None, None)
ENTRY_NAMES = tuple(f"I{k}" for k in range(1, 13)) + ("G_L1", "H_L1", "G_L2", "H_L2")


@dataclass
class WaveParts:
    """Time-independent ingredients of the superposition for one case."""

    case: CaseSetup
    g: GasParams
    layer: bl.BLProfile
    profile: SelfSimilarProfile
    q: int = Q_DEFAULT


def build_parts(case: CaseSetup, g: GasParams, q: int = Q_DEFAULT) -> WaveParts:
    star = case.star
    db = case.delta_b_velocity
    if db > 0:
        layer = bl.solve_bl_transonic(star, db, g)
    else:
        layer = bl.solve_bl_transonic(star, 0.0, g, xi_max=0.0)
    p = g.R * case.mid.theta / case.mid.v
    prof = solve_selfsimilar(case.mid.theta, case.star_up.theta, diffusion_coefficient(p, g))
    return WaveParts(case, g, layer, prof, q)


class LayerField(NamedTuple):
    V: np.ndarray
    U: np.ndarray
    Theta: np.ndarray
    dV: np.ndarray
    dU: np.ndarray
    dTheta: np.ndarray
    d2V: np.ndarray
    d2U: np.ndarray
    d2Theta: np.ndarray
    devV: np.ndarray
    devU: np.ndarray
    devTheta: np.ndarray


@dataclass
class CompositeField:
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
    layer: LayerField
    r1: RarefactionField
    contact: ContactField
    r3: RarefactionField
    case: CaseSetup


def eval_layer(parts: WaveParts, xi) -> LayerField:
    star = parts.case.star
    x, y = parts.layer.deviations(xi)
    ev = parts.layer.evaluate(xi)
    r = star.v / star.u
    return LayerField(*ev, x * r, x, y)


def eval_composite(t: float, xi, case: CaseSetup, parts: WaveParts, check: bool = True) -> CompositeField:
    """Superposition (V, U, Theta) with analytic xi-derivatives up to second order."""
    xi = np.asarray(xi, dtype=float)
    g = parts.g
    s = case.sigma_minus
    b = eval_layer(parts, xi)
    r1 = eval_rarefaction(1, t, xi, case.star, case.mid, s, g, parts.q)
    d = eval_contact(t, xi, parts.profile, case.mid, case.star_up, s, g)
    r3 = eval_rarefaction(3, t, xi, case.star_up, case.right, s, g, parts.q)
    rt = case.right
    # sum of deviations from each component's right state; equals the
    # plain superposition identity but keeps plateaus exact
    V = rt.v + b.devV + r1.devV + d.devV_right + r3.devV
    U = rt.u + b.devU + r1.devU + d.devU_right + r3.devU
    Th = rt.theta + b.devTheta + r1.devTheta + d.devTheta_right + r3.devTheta
    parts_ = (b, r1, d, r3)
    tot = [sum(getattr(p, k) for p in parts_) for k in ("dV", "dU", "dTheta", "d2V", "d2U", "d2Theta")]
    if check and not (np.all(V > 0) and np.all(Th > 0)):
        raise PositivityViolation("superposition has non-positive V or Theta; strengths too large")
    return CompositeField(float(t), xi, V, U, Th, *tot, b, r1, d, r3, case)


def eval_sources(field: CompositeField, g: GasParams):
    """Residuals (G, H) left in the momentum and energy equations by the superposition."""
    R, mu, ka = g.R, g.mu, g.kappa

    def P(c):
        return R * c.Theta / c.V

    def Px(c):
        return R * (c.dTheta * c.V - c.Theta * c.dV) / c.V**2

    def flux_x(num, dnum, c):
        # d/dxi (num / V)
        return dnum / c.V - num * c.dV / c.V**2

    f, b, r1, d, r3 = field, field.layer, field.r1, field.contact, field.r3
    G = (Px(f) - Px(b) - Px(r1) - Px(d) - Px(r3)
         - mu * (flux_x(f.dU, f.d2U, f) - flux_x(b.dU, b.d2U, b) - flux_x(d.dU, d.d2U, d)))
    H = (P(f) * f.dU - P(b) * b.dU - P(r1) * r1.dU - P(d) * d.dU - P(r3) * r3.dU
         - ka * (flux_x(f.dTheta, f.d2Theta, f) - flux_x(b.dTheta, b.d2Theta, b) - flux_x(d.dTheta, d.d2Theta, d))
         - mu * (f.dU**2 / f.V - b.dU**2 / b.V - d.dU**2 / d.V)
         + d.Hd)
    return G, H


def integrand_table(field: CompositeField, g: GasParams) -> np.ndarray:
    """Rows: the twelve interaction integrands, then |G|, |H|, G^2, H^2."""
    b, r1, d, r3 = field.layer, field.r1, field.contact, field.r3
    a = np.abs
    rows = [
        a(b.dV * r1.devV_left) + a(r1.dV * b.devV),
        a(b.dV * d.devV_left) + a(d.dV * b.devV),
        a(b.dV * r3.devV_left) + a(r3.dV * b.devV),
        a(d.dV * r1.devV) + a(r1.dV * d.devV_left),
        a(d.dV * r3.devV_left) + a(r3.dV * d.devV_right),
        a(r1.dV * r3.devV_left) + a(r3.dV * r1.devV),
        a(b.dV * d.dV),
        a(b.dV * r1.dV),
        a(b.dV * r3.dV),
        a(d.dV * r1.dV),
        a(d.dV * r3.dV),
        a(r1.dV * r3.dV),
    ]
    G, H = eval_sources(field, g)
    rows += [a(G), a(H), G * G, H * H]
    return np.array(rows)


def far_edge(t: float, case: CaseSetup, g: GasParams, parts: WaveParts) -> float:
    """A xi beyond which every non-layer component sits on its right plateau to below 1e-300."""
    s = 1.0 + t
    w3 = float(lam(3, case.right.v, case.right.theta, g))
    # incomplete-gamma tail Q(q+1, x) drops below 1e-300 near x = 700 + 2 q
    tail = 700.0 + 2.0 * parts.q + 50.0
    contact_width = 40.0 * math.sqrt(parts.profile.a_diff * s / min(case.mid.theta, case.star_up.theta))
    x_d = -case.sigma_minus * t + contact_width
    return max((w3 - case.sigma_minus) * s + tail, x_d, 10.0)


class InteractionReport(NamedTuple):
    t: float
    I: tuple
    G_L1: float
    H_L1: float
    G_L2: float
    H_L2: float
    errors: tuple

    def row(self) -> list:
        return [self.t, *self.I, self.G_L1, self.H_L1, self.G_L2, self.H_L2]


def interaction_integrals(t: float, case: CaseSetup, parts: WaveParts, rtol: float = 1e-10,
                          width: float = 1.0) -> InteractionReport:
    """All twelve interaction integrals and the source norms at time t."""
    g = parts.g

    def fun(x):
        return integrand_table(eval_composite(t, x, case, parts, check=False), g)

    edges = panel_edges(far_edge(t, case, g, parts), width=width, breaks=(parts.layer.xi_end,))
    vals, errs = integrate_panels(fun, edges, rtol=rtol)
    loose = errs > rtol * np.abs(vals) + 1e-300
    if np.any(loose):
        names = [n for n, bad in zip(ENTRY_NAMES, loose) if bad]
        log.warning("t=%g: quadrature tolerance not reached for %s", t, ", ".join(names))
    I = tuple(float(v) for v in vals[:12])
    return InteractionReport(float(t), I, float(vals[12]), float(vals[13]),
                             math.sqrt(vals[14]), math.sqrt(vals[15]), tuple(float(e) for e in errs))
