import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from inflow_ns.composite import build_parts, eval_composite, eval_layer
from inflow_ns.errors import CFLCollapse, DomainError, PositivityViolation
from inflow_ns.gas import GasParams, ThermoState
from inflow_ns.harness.suites import mms_errors, steady_state_drift
from inflow_ns.solver import (Grid, SolutionState, boundary_cutoff, bump, integrate, mass_flux_balance,
                              perturbation_norms, phi_fn, run_stability, stable_dt)
from inflow_ns.wave_curves import generate_case


def test_grid_validation():
    assert Grid(10, 5.0).dxi == 0.5
    assert Grid(10, 5.0).xi.size == 11
    with pytest.raises(DomainError):
        Grid(2, 1.0)
    with pytest.raises(DomainError):
        Grid(10, 0.0)


@pytest.mark.parametrize("state", [ThermoState(1.0, 1.29, 1.0), ThermoState(0.5, 0.3, 2.0)])
def test_constant_state_is_steady(gas, state):
    assert steady_state_drift(gas, state, N=128, t_final=5.0) <= 1e-12


def test_stable_dt_formula(gas):
    v, u, th = np.array([1.0, 0.5]), np.zeros(2), np.array([1.0, 2.0])
    sig, h = -1.2, 0.1
    lam = abs(sig) + math.sqrt(1.4 * 2.0) / 0.5
    want = 0.4 * min(h / lam, h * h * 0.5 / (2 * max(1.0, 0.4)))
    assert stable_dt(v, u, th, gas, sig, h) == pytest.approx(want, rel=1e-14)


def test_cfl_collapse(gas):
    grid = Grid(16, 1.0)
    one = np.ones(17)
    init = SolutionState(0.0, one, one, one)
    with pytest.raises(CFLCollapse):
        integrate(init, (1.0, 1.0, 1.0), gas, grid, 1.0, dt_min=1.0)


def test_integrate_rejects_bad_data(gas):
    grid = Grid(16, 1.0)
    one = np.ones(17)
    with pytest.raises(DomainError):
        integrate(SolutionState(0.0, one, one, one), (1.0, 0.0, 1.0), gas, grid, 1.0)
    with pytest.raises(PositivityViolation):
        integrate(SolutionState(0.0, -one, one, one), (1.0, 1.0, 1.0), gas, grid, 1.0)
    with pytest.raises(DomainError):
        integrate(SolutionState(0.0, one[:-1], one, one), (1.0, 1.0, 1.0), gas, grid, 1.0)


def test_snapshots_hit_exactly(gas):
    grid = Grid(32, 4.0)
    one = np.ones(33)
    seen = []
    out = integrate(SolutionState(0.0, one, one, one), (1.0, 1.0, 1.0), gas, grid, 1.0,
                    callbacks=(lambda s: seen.append(s.t),), snapshot_times=(0.25, 0.5))
    assert [s.t for s in out] == [0.0, 0.25, 0.5, 1.0]
    assert seen == [0.0, 0.25, 0.5, 1.0]


def test_manufactured_solution_converges(gas):
    e = mms_errors(gas, Ns=(50, 100, 200), t_final=1.0)
    orders = np.log2(e[:-1] / e[1:])
    assert np.all(np.diff(e) < 0)
    assert np.all(orders > 0.9)


def test_stationary_layer_drift(gas):
    c = generate_case(ThermoState(1.0, 0.0, 1.0), dict(delta_b=0.02), gas)
    p = build_parts(c, gas)
    L = 60.0
    lay = eval_layer(p, np.array([L]))
    rb = (c.right.v + lay.devV[0], c.right.u + lay.devU[0], c.right.theta + lay.devTheta[0])
    finals, drift = {}, {}
    for N in (150, 300):
        grid = Grid(N, L)
        f = eval_composite(0.0, grid.xi, c, p)
        out = integrate(SolutionState(0.0, f.V, f.U, f.Theta), c.left.as_tuple(), gas, grid, 10.0,
                        right=rb, sigma=c.sigma_minus)
        s = finals[N] = out[-1]
        drift[N] = max(np.max(np.abs(s.v - f.V)), np.max(np.abs(s.u - f.U)), np.max(np.abs(s.theta - f.Theta)))
    a, b = finals[150], finals[300]
    err = max(np.max(np.abs(a.v - b.v[::2])), np.max(np.abs(a.u - b.u[::2])),
              np.max(np.abs(a.theta - b.theta[::2])))
    assert drift[150] <= 10 * err
    assert drift[300] < 0.6 * drift[150]


def test_mass_bookkeeping(gas, base_case, base_parts):
    gaps = []
    for N in (400, 800):
        r = run_stability(base_case, base_parts, gas, N, 2.0, snapshot_times=np.arange(0.1, 2.0, 0.1))
        xi = r.grid.xi

        def field(t, k):
            return getattr(eval_composite(t, xi, base_case, base_parts), k)

        _, rate, pred = mass_flux_balance(r.states, lambda t: field(t, "V"), lambda t: field(t, "U"),
                                          xi, base_case.sigma_minus)
        gaps.append(np.max(np.abs(rate - pred)))
        assert gaps[-1] <= 0.02 * np.max(np.abs(pred))
    assert gaps[1] < 0.7 * gaps[0]


@given(st.floats(0.8, 1.25))
def test_phi_quadratic_equivalence(eta):
    d2 = (eta - 1) ** 2
    assert d2 / 4 - 1e-15 <= phi_fn(eta) <= d2 + 1e-15


def test_phi_fine_sample():
    eta = np.linspace(0.8, 1.25, 100001)
    p = phi_fn(eta)
    assert np.all(p >= (eta - 1) ** 2 / 4) and np.all(p <= (eta - 1) ** 2)
    assert phi_fn(1.0) == 0.0
    with pytest.raises(DomainError):
        phi_fn(0.0)


def test_norms_vanish_on_composite(gas, base_case, base_parts):
    xi = np.linspace(0, 200, 801)
    f = eval_composite(3.0, xi, base_case, base_parts)
    n = perturbation_norms(SolutionState(3.0, f.V, f.U, f.Theta), f, gas)
    assert n.t == 3.0
    assert all(x == 0 for x in n[1:])


AMP = st.just(0.0) | st.floats(1e-3, 0.3) | st.floats(-0.3, -1e-3)


@settings(max_examples=40, deadline=None)
@given(AMP, AMP, AMP, st.floats(5, 50))
def test_energy_positive(a, b, c, center):
    g = GasParams()
    xi = np.linspace(0, 60, 601)
    V, U, Th = 1 + 0.1 * np.sin(xi / 7), 0.5 + 0 * xi, 1 + 0.05 * np.cos(xi / 5)

    class F:
        pass

    f = F()
    f.V, f.U, f.Theta = V, U, Th
    w = bump(xi, center, 3.0)
    n = perturbation_norms(SolutionState(0.0, V * (1 + a * w), U + b * w, Th * (1 + c * w)), f, g, xi)
    assert all(x >= 0 for x in n[1:])
    if a or b or c:
        assert n.energy > 0
    else:
        assert n.energy == 0


def test_norms_reject_nonpositive_ratio(gas):
    xi = np.linspace(0, 1, 5)
    f = SolutionState(0.0, np.ones(5), np.ones(5), np.ones(5))
    f.V, f.U, f.Theta = f.v, f.u, f.theta
    with pytest.raises(DomainError):
        perturbation_norms(SolutionState(0.0, -np.ones(5), np.ones(5), np.ones(5)), f, gas, xi)


def test_bump_and_cutoff():
    xi = np.linspace(0, 20, 2001)
    b = bump(xi, 10.0, 3.0)
    assert b.max() == 1.0 and np.all(b[np.abs(xi - 10) >= 3] == 0)
    ch = boundary_cutoff(xi, 5.0)
    assert ch[0] == 1.0 and np.all(ch[xi >= 5] == 0)
    # C^2 at the ends of the ramp
    h = xi[1] - xi[0]
    d2 = np.diff(ch, 2) / h**2
    assert abs(d2[0]) < 0.05 and np.max(np.abs(np.diff(d2))) < 0.05


def test_run_stability_initial_data(gas, base_case, base_parts):
    r = run_stability(base_case, base_parts, gas, 400, 0.5, bump_h1=0.01)
    s0 = r.states[0]
    left = base_case.left
    assert (s0.v[0], s0.u[0], s0.theta[0]) == pytest.approx(left.as_tuple(), abs=1e-14)
    # the bump alone carries the requested H1 norm
    unit = 3 * 10.0 * (quad(lambda x: (1 - x * x) ** 6, -1, 1)[0]
                       + quad(lambda x: (6 * x * (1 - x * x) ** 2) ** 2, -1, 1)[0] / 100.0)
    assert r.amplitude * math.sqrt(unit) == pytest.approx(0.01, rel=1e-3)
    assert r.norms[0].h1 >= 0.01
    with pytest.raises(DomainError):
        run_stability(base_case, base_parts, gas, 400, 0.5, bump_center=2.0)
