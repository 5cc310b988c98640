import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypflow import fields as fl
from hypflow import flows
from hypflow.fields import OneFormField, PolarGrid, ScalarField
from hypflow.flows import BoundaryTrace, NotHarmonicError


@pytest.fixture(scope="module")
def g():
    return PolarGrid.from_geodesic(1.0, 1.0, 8.0, 128, 64)


# --- boundary traces ------------------------------------------------------------


def test_trace_samples_interpolate():
    x = np.array([0.0, 1.0, 0.0, -1.0, 0.5, 0.2, -0.3, 0.1])
    t = BoundaryTrace.from_samples(x)
    assert np.allclose(t.samples(len(x)), x, atol=1e-14)


def test_trace_cosine_from_samples():
    th = 2 * np.pi * np.arange(16) / 16
    t = BoundaryTrace.from_samples(np.cos(th))
    assert t.cos[1] == pytest.approx(1.0, abs=1e-14)
    assert np.max(np.abs(np.delete(t.cos, 1))) < 1e-14 and np.max(np.abs(t.sin)) < 1e-14


def test_trace_json_round_trip(tmp_path):
    t = BoundaryTrace((0.1, 1.0, 0.0, 0.3), (0.0, 0.2, -0.4))
    p = tmp_path / "phi.json"
    p.write_text(json.dumps(t.to_json()))
    u = BoundaryTrace.from_json(p)
    assert np.array_equal(u.cos, t.cos) and np.array_equal(u.sin, t.sin)
    s = BoundaryTrace.from_json({"kind": "samples", "values": [1.0, 2.0, 3.0]})
    assert np.allclose(s.samples(3), [1, 2, 3])
    with pytest.raises(ValueError):
        BoundaryTrace.from_json({"kind": "spline"})
    with pytest.raises(ValueError):
        BoundaryTrace((math.nan,), ())


def test_trace_extrema_and_nonconstant():
    t = BoundaryTrace((0.0, 1.0), (0.0,))
    assert t.extrema() == pytest.approx((-1.0, 1.0), abs=1e-12)
    assert t.nonconstant
    assert not BoundaryTrace.constant(3.0).nonconstant
    assert t.scaled(2.5).extrema()[1] == pytest.approx(2.5, abs=1e-12)


# --- harmonic extension ----------------------------------------------------------


def test_constant_trace_extends_constantly(g):
    F = flows.poisson_harmonic(BoundaryTrace.constant(2.0), g)
    assert np.all(F.values == 2.0)


def test_cosine_trace_extends_to_y1(g, cos_trace):
    for method in ("fourier", "quadrature"):
        F = flows.poisson_harmonic(cos_trace, g, method)
        assert np.max(np.abs(F.values - g.y1)) < 1e-10


def test_fourier_matches_quadrature():
    g = PolarGrid.from_geodesic(1.0, 1.0, 5.0, 48, 32)
    t = BoundaryTrace((0.2, 0.5, -0.3, 0.0, 0.1), (0.0, 0.4, 0.0, 0.25))
    A = flows.poisson_harmonic(t, g, "fourier").values
    B = flows.poisson_harmonic(t, g, "quadrature").values
    assert np.max(np.abs(A - B)) < 1e-9
    with pytest.raises(ValueError):
        flows.poisson_harmonic(t, g, "spectral")


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=9))
def test_maximum_principle(samples):
    g = PolarGrid.from_geodesic(1.0, 1.0, 6.0, 32, 32)
    t = BoundaryTrace.from_samples(samples)
    F = flows.poisson_harmonic(t, g).values
    lo, hi = t.extrema()
    assert F.min() >= lo - 1e-9 and F.max() <= hi + 1e-9


def test_extension_is_harmonic(g):
    t = BoundaryTrace((0.0, 1.0, 0.5), (0.0, 0.0, -0.3))
    F = flows.poisson_harmonic(t, g)
    assert flows.harmonic_defect(F) < 1e-4


# --- potential flows --------------------------------------------------------------


def test_potential_flow_constant(g):
    s = flows.potential_flow(flows.poisson_harmonic(BoundaryTrace.constant(0.7), g))
    assert np.max(np.abs(s.v.v1)) < 1e-10 and np.max(np.abs(s.v.v2)) < 1e-10
    assert np.allclose(s.P.values, -2 * 0.7)
    mom, mass = flows.residual_sup(s)
    assert mom < 1e-10 and mass < 1e-10


def test_potential_flow_irrotational(potential_state):
    scale = np.max(potential_state.v.norm_values())
    assert np.max(np.abs(potential_state.omega.values)) < 1e-5 * scale


def test_potential_flow_residual_small(potential_state):
    mom, mass = flows.residual_sup(potential_state)
    assert mom < 1e-3 and mass < 1e-3


def test_potential_flow_rejects_nonharmonic(g):
    with pytest.raises(NotHarmonicError):
        flows.potential_flow(ScalarField(g, g.col(g.rho) * np.ones(g.shape)))
    with pytest.raises(ValueError):
        flows.potential_flow(flows.poisson_harmonic(BoundaryTrace.constant(1.0), g), a=2.0)


def test_velocity_log_slope(potential_state):
    g = potential_state.grid
    sup = np.max(potential_state.v.norm_values(), axis=1)
    sel = g.rho >= 4.0
    slope = np.polyfit(g.rho[sel], np.log(sup[sel]), 1)[0]
    assert slope == pytest.approx(-g.a, rel=0.1)


# --- advection and residual ---------------------------------------------------------


def test_advection_of_gradient(potential_state):
    # for dF with F harmonic, nabla_v v = d(|v|^2 / 2)
    v = potential_state.v
    adv = flows.advection(v)
    ref = fl.gradient(ScalarField(v.grid, 0.5 * fl.hyperbolic_norm_form(v).values ** 2))
    sl = slice(4, -4)
    err = np.max((adv - ref).norm_values()[sl])
    assert err < 1e-5 * np.max(adv.norm_values())


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3))
def test_advection_quadratic(alpha):
    g = PolarGrid.from_geodesic(1.0, 1.0, 4.0, 24, 16)
    F = flows.poisson_harmonic(BoundaryTrace((0.0, 1.0, 0.2), (0.0, 0.3)), g)
    v = fl.gradient(F)
    a1 = flows.advection(v * alpha)
    a0 = flows.advection(v)
    assert np.allclose(a1.v1, alpha**2 * a0.v1, atol=1e-12) and np.allclose(a1.v2, alpha**2 * a0.v2, atol=1e-12)


def test_residual_zero_field(g):
    s = flows.FlowState(OneFormField.zeros(g), ScalarField(g, np.zeros(g.shape)), ScalarField(g, np.zeros(g.shape)))
    mom, mass = flows.ns_residual(s)
    assert np.all(mom.norm_values() == 0) and np.all(mass.values == 0)


def test_residual_affine_in_pressure(potential_state):
    g = potential_state.grid
    eps = 0.3
    s2 = flows.FlowState(potential_state.v, potential_state.P + ScalarField(g, eps * g.y1), potential_state.omega)
    m1, _ = flows.ns_residual(potential_state)
    m2, _ = flows.ns_residual(s2)
    d = m2 - m1
    assert np.max(np.abs(d.v1 - eps)) < 1e-6 and np.max(np.abs(d.v2)) < 1e-6


# --- pressure recovery -----------------------------------------------------------


def test_recover_pressure_zero(g):
    P = flows.recover_pressure(OneFormField.zeros(g))
    assert np.max(np.abs(P.values)) < 1e-14


def test_recover_pressure_matches_exact(potential_state):
    P, info = flows.recover_pressure(potential_state.v, return_info=True)
    ref = potential_state.P.values
    ref = ref - np.mean(ref[0])
    assert np.max(np.abs(P.values - ref)) < 1e-3 * np.max(np.abs(ref))
    assert abs(info.period) < 1e-6 and info.compatibility_defect < 1e-3


# --- ray limits ---------------------------------------------------------------------


@pytest.mark.parametrize("a", [1.0, 2.0])
def test_pressure_ray_limits(a):
    g = PolarGrid.from_geodesic(a, 1.0, 8.0, 192, 64)
    s = flows.potential_flow(flows.poisson_harmonic(BoundaryTrace((0.0, 1.0), (0.0,)), g))
    rl = flows.pressure_ray_limits(s.P, [0.0, np.pi / 2, np.pi], (5.0, 8.0))
    assert rl.limits[0] == pytest.approx(-2 * a * a, abs=1e-3 * a * a)
    assert rl.limits[2] == pytest.approx(2 * a * a, abs=1e-3 * a * a)
    assert rl.max_gap == pytest.approx(4 * a * a, rel=1e-3)


def test_ray_gap_linear_in_amplitude(g, cos_trace):
    gaps = []
    for c in (0.5, 1.0):
        s = flows.potential_flow(flows.poisson_harmonic(cos_trace.scaled(c), g))
        gaps.append(flows.pressure_ray_limits(s.P, np.linspace(0, 2 * np.pi, 8, endpoint=False), (5.0, 8.0)).max_gap)
    # the quadratic term vanishes at infinity, so the gap is linear
    assert gaps[1] == pytest.approx(2 * gaps[0], rel=1e-3)


def test_ray_window_too_narrow(potential_state):
    with pytest.raises(ValueError):
        flows.pressure_ray_limits(potential_state.P, [0.0], (7.99, 8.0))
