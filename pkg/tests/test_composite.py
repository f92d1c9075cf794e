
import numpy as np
import pytest

from inflow_ns import composite

from inflow_ns.composite import (ENTRY_NAMES, build_parts, eval_composite, eval_sources, far_edge,
                                 integrand_table, interaction_integrals)
from inflow_ns.errors import PositivityViolation
from inflow_ns.gas import GasParams, ThermoState
from inflow_ns.harness.config import load_config
from inflow_ns.harness.suites import Context, fd_residual_order
from inflow_ns.quadrature import integrate_panels, panel_edges
from inflow_ns.wave_curves import generate_case

XI = np.linspace(0, 400, 2001)


def test_superposition_identity(base_case, base_parts, gas):
    c = base_case
    for t in (0.0, 7.0, 150.0):
        f = eval_composite(t, XI, c, base_parts)
        b, r1, d, r3 = f.layer, f.r1, f.contact, f.r3
        for k, ref in (("V", "v"), ("U", "u"), ("Theta", "theta")):
            plain = (getattr(b, k) + getattr(r1, k) + getattr(d, k) + getattr(r3, k)
                     - (getattr(c.star, ref) + getattr(c.mid, ref) + getattr(c.star_up, ref)))
            assert np.max(np.abs(getattr(f, k) - plain)) <= 1e-12
        assert np.all(f.V > 0) and np.all(f.Theta > 0)


def test_zero_strengths_give_constant_field():
    g = GasParams()
    c = generate_case(ThermoState(1.0, 0.0, 1.0), {}, g)
    p = build_parts(c, g)
    f = eval_composite(5.0, XI, c, p)
    assert np.all(f.V == c.right.v) and np.all(f.U == c.right.u) and np.all(f.Theta == c.right.theta)
    G, H = eval_sources(f, g)
    assert np.all(G == 0) and np.all(H == 0)


def test_far_field(base_case, base_parts, gas):
    c = base_case
    t = 20.0
    xi = np.linspace(0, far_edge(t, c, gas, base_parts), 50)
    f = eval_composite(t, xi, c, base_parts)
    # every wave except the algebraically decaying layer sits on its plateau
    for part, ref in ((f.r1, c.mid), (f.contact, c.star_up), (f.r3, c.right)):
        assert abs(part.V[-1] - ref.v) < 1e-6
        assert abs(part.U[-1] - ref.u) < 1e-6
        assert abs(part.Theta[-1] - ref.theta) < 1e-6
    # what is left is exactly the layer deviation
    assert f.V[-1] - c.right.v == pytest.approx(f.layer.devV[-1], abs=1e-15)
    assert abs(f.layer.devV[-1]) < 0.1 * abs(c.star.v - c.left.v)


def test_boundary_value_at_initial_time(base_case, base_parts):
    c = base_case
    f = eval_composite(0.0, np.array([0.0]), c, base_parts)
    d = f.contact
    for k, ref in (("V", "v"), ("U", "u"), ("Theta", "theta")):
        want = getattr(c.left, ref) + getattr(d, k)[0] - getattr(c.mid, ref)
        assert getattr(f, k)[0] == pytest.approx(want, abs=1e-12)


def test_positivity_violation(base_case, base_parts, monkeypatch):
    real = composite.eval_layer

    def deep_layer(parts, xi):
        b = real(parts, xi)
        return b._replace(devV=b.devV - 10.0)

    monkeypatch.setattr(composite, "eval_layer", deep_layer)
    with pytest.raises(PositivityViolation):
        eval_composite(1.0, XI, base_case, base_parts)
    eval_composite(1.0, XI, base_case, base_parts, check=False)


def test_sources_match_finite_difference_residual():
    ctx = Context(load_config(None, {"verify.output_dir": "/tmp/unused"}))
    og, oh, errs = fd_residual_order(ctx)
    assert og == pytest.approx(2.0, abs=0.2) and oh == pytest.approx(2.0, abs=0.2)
    assert errs[1][0] < 1e-6 and errs[1][1] < 1e-6


def test_interaction_entries_nonnegative(base_case, base_parts):
    r = interaction_integrals(30.0, base_case, base_parts)
    assert all(x >= 0 for x in r.row()[1:])
    assert len(r.row()) == 1 + len(ENTRY_NAMES)


def test_contact_free_entries_vanish(gas):
    c = generate_case(ThermoState(1.0, 0.0, 1.0), dict(delta_b=0.02, delta_r1=0.05, delta_r3=0.05), gas)
    p = build_parts(c, gas)
    r = interaction_integrals(20.0, c, p)
    for k in (2, 4, 5, 7, 10, 11):
        assert r.I[k - 1] == 0.0
    assert r.I[0] > 0 and r.I[7] > 0


def test_quadrature_accuracy(base_case, base_parts):
    t = 50.0
    r = interaction_integrals(t, base_case, base_parts, rtol=1e-10)
    fine = interaction_integrals(t, base_case, base_parts, rtol=1e-13, width=0.25)
    a, b = np.array(r.row()[1:]), np.array(fine.row()[1:])
    m = b > 0
    assert np.max(np.abs(a[m] - b[m]) / b[m]) <= 1e-9


def test_integrand_rows(base_case, base_parts, gas):
    f = eval_composite(10.0, XI, base_case, base_parts)
    rows = integrand_table(f, gas)
    assert rows.shape == (16, XI.size)
    assert np.all(rows >= 0)
    assert np.allclose(rows[14], rows[12] ** 2) and np.allclose(rows[15], rows[13] ** 2)


def test_panel_quadrature_known_integrals():
    def fun(x):
        return np.array([np.exp(-x), 1 / (1 + x) ** 2, x ** 4 * np.exp(-x)])

    vals, errs = integrate_panels(fun, panel_edges(30.0))
    assert vals == pytest.approx([1.0, 1.0 - 1e-15, 24.0], rel=1e-10)
    assert np.all(errs <= 1e-10 * np.abs(vals))


def test_panel_edges():
    e = panel_edges(10.0, width=2.0, breaks=(3.3, -1.0))
    assert e[0] == 0 and 3.3 in e and np.all(np.diff(e) > 0)
    assert e[-1] >= 1e15
