import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inflow_ns.contact_wave import diffusion_coefficient, eval_contact, solve_selfsimilar
from inflow_ns.errors import DomainError
from inflow_ns.gas import GasParams, ThermoState
from inflow_ns.harness.fitting import fit_decay


@pytest.fixture(scope="module")
def prof():
    return solve_selfsimilar(1.0, 1.05, 1.0)


def test_constant_profile():
    p = solve_selfsimilar(1.0, 1.0, 1.0)
    assert np.all(p.Theta_sim == 1.0) and np.all(p.dTheta_sim == 0.0)


def test_grid_self_consistency():
    a = solve_selfsimilar(1.0, 1.05, 1.0, n_fd=400)
    b = solve_selfsimilar(1.0, 1.05, 1.0, n_fd=800)
    assert abs(a.evaluate(0.0).f - b.evaluate(0.0).f) <= 1e-6


def test_monotone_and_endpoints(prof):
    assert np.all(prof.dTheta_sim > 0)
    assert np.all(np.diff(prof.Theta_sim) >= 0)
    assert abs(prof.Theta_sim[0] - 1.0) <= 1e-8 and abs(prof.Theta_sim[-1] - 1.05) <= 1e-8


def test_bvp_residual(prof):
    assert np.max(prof.bvp_residual()) <= 1e-8
    far = np.linspace(-40, 40, 801)
    assert np.max(prof.bvp_residual(far)) <= 1e-8


@settings(max_examples=12, deadline=None)
@given(tl=st.floats(0.5, 2.0), tr=st.floats(0.5, 2.0), a=st.floats(0.1, 5.0))
def test_selfsimilar_properties(tl, tr, a):
    p = solve_selfsimilar(tl, tr, a)
    assert np.max(p.bvp_residual()) <= 1e-8
    d = np.diff(p.Theta_sim) * np.sign(tr - tl)
    assert np.all(d >= -1e-15)


def test_rejects_bad_input():
    with pytest.raises(DomainError):
        solve_selfsimilar(-1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        solve_selfsimilar(1.0, 1.0, 0.0)


def _contact(base_case, base_parts, gas, t, xi):
    c = base_case
    return eval_contact(t, xi, base_parts.profile, c.mid, c.star_up, c.sigma_minus, gas)


def test_volume_identity(base_case, base_parts, gas):
    xi = np.linspace(0, 100, 501)
    d = _contact(base_case, base_parts, gas, 5.0, xi)
    p = gas.R * base_case.mid.theta / base_case.mid.v
    eta = (xi + base_case.sigma_minus * 5.0) / math.sqrt(6.0)
    f = base_parts.profile.evaluate(eta).f
    assert np.max(np.abs(d.V - gas.R * f / p)) <= 1e-12


def test_zero_strength_contact(gas):
    m = ThermoState(1.0, 1.2, 1.0)
    p = solve_selfsimilar(1.0, 1.0, diffusion_coefficient(1.0, gas))
    d = eval_contact(3.0, np.linspace(0, 50, 51), p, m, m, -1.2, gas)
    assert np.all(d.V == 1.0) and np.all(d.U == 1.2) and np.all(d.Theta == 1.0)
    assert np.all(d.Hd == 0.0)


def test_boundary_mismatch_decays(base_case, base_parts, gas):
    ts = np.linspace(1, 200, 30)
    m = []
    for t in ts:
        d = _contact(base_case, base_parts, gas, t, np.array([0.0]))
        m.append(math.sqrt(d.devV_left[0] ** 2 + d.devU_left[0] ** 2 + d.devTheta_left[0] ** 2))
    f = fit_decay(ts, m, kind="exponential")
    assert f.slope < 0 and f.r2 >= 0.98


def test_gaussian_envelope(base_case, base_parts, gas):
    c = base_case
    vals = []
    for t in (1.0, 10.0, 50.0, 200.0):
        x = np.linspace(-8, 8, 801) * math.sqrt(1 + t)
        xi = x - c.sigma_minus * t
        d = _contact(base_case, base_parts, gas, t, xi)
        dev = np.minimum(np.abs(d.devTheta_left), np.abs(d.devTheta_right))
        vals.append(np.max(dev * np.exp(0.5 * d.C_d * x * x / (1 + t))))
    assert max(vals) / min(vals) < 10


def test_residual_envelope(base_case, base_parts, gas):
    c = base_case
    out = []
    for t in (1.0, 5.0, 20.0, 80.0, 200.0):
        xi = np.linspace(-10, 10, 801) * math.sqrt(1 + t) - c.sigma_minus * t
        d = _contact(base_case, base_parts, gas, t, xi[xi >= 0])
        out.append(np.max(np.abs(d.Hd)) * (1 + t) ** 2)
    assert max(out) / min(out) < 5


def test_velocity_gradient_envelope(base_case, base_parts, gas):
    c = base_case
    out = []
    for t in (1.0, 10.0, 100.0, 200.0):
        xi = np.linspace(-10, 10, 2001) * math.sqrt(1 + t) - c.sigma_minus * t
        d = _contact(base_case, base_parts, gas, t, xi[xi >= 0])
        out.append(np.max(np.abs(d.dU)) * (1 + t))
    assert max(out) / min(out) < 2


def test_far_field_limit(base_case, base_parts, gas):
    c = base_case
    for t in (0.0, 10.0, 100.0):
        xi = base_parts.profile.eta_max * math.sqrt(1 + t) - c.sigma_minus * t
        d = _contact(base_case, base_parts, gas, t, np.array([xi]))
        assert abs(d.V[0] - c.star_up.v) < 1e-6
        assert abs(d.U[0] - c.star_up.u) < 1e-6
        assert abs(d.Theta[0] - c.star_up.theta) < 1e-6


def test_momentum_equation_exact(base_case, base_parts, gas):
    # V_t - sigma V_xi = U_xi and U_t - sigma U_xi + P_xi = mu (U_xi / V)_xi hold exactly
    c, s, h = base_case, base_case.sigma_minus, 1e-3
    t = 4.0
    xi = np.linspace(1, 20, 39)

    def f(tt, x):
        return _contact(base_case, base_parts, gas, tt, x)

    d = f(t, xi)
    Vt = (f(t + h, xi).V - f(t - h, xi).V) / (2 * h)
    assert np.max(np.abs(Vt - s * d.dV - d.dU)) <= 1e-7
    P = lambda q: gas.R * q.Theta / q.V  # noqa: E731
    Ut = (f(t + h, xi).U - f(t - h, xi).U) / (2 * h)
    Px = (P(f(t, xi + h)) - P(f(t, xi - h))) / (2 * h)
    visc = ((f(t, xi + h).dU / f(t, xi + h).V) - (f(t, xi - h).dU / f(t, xi - h).V)) / (2 * h)
    assert np.max(np.abs(Ut - s * d.dU + Px - gas.mu * visc)) <= 1e-7
