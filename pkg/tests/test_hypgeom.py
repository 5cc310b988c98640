import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypflow import hypgeom as hg
from hypflow.hypgeom import ChartPoint, GeometryError, HyperboloidPoint

a_st = st.floats(min_value=1e-2, max_value=20.0)
chart_st = st.tuples(st.floats(-0.99, 0.99), st.floats(-0.99, 0.99)).filter(lambda p: p[0] ** 2 + p[1] ** 2 < 0.98)


# --- model maps -------------------------------------------------------------


def test_vertex_maps_to_centre():
    for a in (0.5, 1.0, 3.0):
        y = hg.to_chart(HyperboloidPoint(1 / a, 0.0, 0.0), a)
        assert (y.y1, y.y2) == (0.0, 0.0)


def test_to_chart_example():
    with mpmath.workdps(40):
        expected = 1 / (mpmath.sqrt(2) + 1)
    y = hg.to_chart(HyperboloidPoint(math.sqrt(2), 1.0, 0.0), 1.0)
    assert y.y1 == pytest.approx(float(expected), abs=1e-15)
    assert y.y1 == pytest.approx(0.414214, abs=1e-6)


def test_from_chart_examples():
    p = hg.from_chart(ChartPoint(0.0, 0.0), 1.0)
    assert (p.x0, p.x1, p.x2) == (1.0, 0.0, 0.0)
    p = hg.from_chart(ChartPoint(0.5, 0.0), 1.0)
    assert p.x0 == pytest.approx(5 / 3, rel=1e-15)
    assert p.x1 == pytest.approx(4 / 3, rel=1e-15)
    assert p.x2 == 0.0


def test_invalid_points_rejected():
    with pytest.raises(GeometryError):
        hg.to_chart(HyperboloidPoint(2.0, 0.0, 0.0), 1.0)
    with pytest.raises(GeometryError):
        hg.from_chart(ChartPoint(1.0, 0.0), 1.0)
    with pytest.raises(GeometryError):
        hg.from_chart(ChartPoint(0.0, 1 - 1e-9), 1.0)
    with pytest.raises(GeometryError):
        hg.conformal_factor(ChartPoint(0.0, 0.0), 0.0)


@settings(max_examples=200)
@given(chart_st, a_st)
def test_round_trip_and_hyperboloid(y, a):
    p = hg.from_chart(ChartPoint(*y), a)
    q = p.as_array()
    assert -hg.lorentz(q, q) == pytest.approx(1 / a**2, rel=1e-12)
    back = hg.to_chart(p, a)
    assert back.y1 == pytest.approx(y[0], abs=1e-12)
    assert back.y2 == pytest.approx(y[1], abs=1e-12)


def test_round_trip_thousand_points():
    rng = np.random.default_rng(1)
    r = np.sqrt(rng.uniform(0, 0.98, 1000))
    t = rng.uniform(0, 2 * np.pi, 1000)
    for ri, ti in zip(r, t):
        y = ChartPoint(ri * math.cos(ti), ri * math.sin(ti))
        back = hg.to_chart(hg.from_chart(y, 1.3), 1.3)
        assert abs(back.y1 - y.y1) < 1e-12 and abs(back.y2 - y.y2) < 1e-12


# --- metric quantities --------------------------------------------------------


def test_conformal_factor_examples():
    assert hg.conformal_factor(ChartPoint(0, 0), 1.0) == 2.0
    assert hg.conformal_factor(ChartPoint(0.5, 0), 1.0) == pytest.approx(8 / 3, rel=1e-15)
    assert hg.conformal_factor(ChartPoint(0, 0), 2.0) == 1.0


def test_dist_origin_examples():
    assert hg.dist_origin(ChartPoint(0.5, 0), 1.0) == pytest.approx(math.log(3), rel=1e-15)
    assert hg.dist_origin(ChartPoint(0, 0), 2.5) == 0.0
    for a in (0.3, 1.0, 4.0):
        for th in np.linspace(0, 2 * np.pi, 7):
            r = math.tanh(a / 2)
            assert hg.dist_origin(ChartPoint(r * math.cos(th), r * math.sin(th)), a) == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=200)
@given(chart_st, a_st)
def test_dist_matches_dist_origin(y, a):
    o = hg.from_chart(ChartPoint(0, 0), a)
    p = hg.from_chart(ChartPoint(*y), a)
    assert hg.dist(o, p, a) == pytest.approx(hg.dist_origin(ChartPoint(*y), a), rel=1e-10, abs=1e-12)


@settings(max_examples=200)
@given(chart_st, chart_st, chart_st, st.floats(0, 2 * math.pi), st.floats(0.1, 5.0))
def test_dist_metric_axioms_and_rotation(y, z, w, phi, a):
    p, q, s = (hg.from_chart(ChartPoint(*u), a) for u in (y, z, w))
    d_pq = hg.dist(p, q, a)
    assert d_pq >= 0
    assert hg.dist(p, p, a) == 0.0
    assert d_pq == pytest.approx(hg.dist(q, p, a), rel=1e-12, abs=1e-14)
    assert d_pq <= hg.dist(p, s, a) + hg.dist(s, q, a) + 1e-9
    c, sn = math.cos(phi), math.sin(phi)

    def rot(u):
        return HyperboloidPoint(u.x0, c * u.x1 - sn * u.x2, sn * u.x1 + c * u.x2)

    assert hg.dist(rot(p), rot(q), a) == pytest.approx(d_pq, rel=1e-10, abs=1e-10)


def test_ball_radius():
    assert hg.ball_radius_in_chart(1.0, 1.0) == pytest.approx(0.4621172, abs=1e-7)
    assert hg.ball_radius_in_chart(1e-12, 1.0) < 1e-11
    R = np.linspace(0.1, 10, 50)
    r = hg.ball_radius_in_chart(R, 0.7)
    assert np.all(np.diff(r) > 0) and r[-1] < 1
    for Ri in R[:20]:
        rr = hg.ball_radius_in_chart(Ri, 0.7)
        assert hg.dist_origin(ChartPoint(rr, 0.0), 0.7) == pytest.approx(Ri, rel=1e-12)


# --- r(a) ----------------------------------------------------------------------


def test_r_of_a_true_value():
    with mpmath.workdps(40):
        e = mpmath.e
        ref = float(mpmath.log((1 + 3 * e) / (3 + e)))
    assert hg.r_of_a(1.0) == pytest.approx(ref, rel=1e-15)
    # the six-digit anchor 0.470600 is 1.5e-5 off; the true value rounds to 0.470615
    assert round(hg.r_of_a(1.0), 6) == 0.470615


def test_r_of_a_two_forms_agree():
    a = np.logspace(-3, 2, 400)
    assert np.max(np.abs(hg.r_of_a(a) - hg.r_of_a_atanh(a))) < 1e-12


def test_r_of_a_half_radius_property():
    for a in np.logspace(-2, 1.5, 30):
        r = hg.r_of_a(a)
        assert r < 1
        assert hg.ball_radius_in_chart(r, a) == pytest.approx(0.5 * math.tanh(a / 2), rel=1e-12)


def test_r_of_a_large_a_stable():
    assert np.isfinite(hg.r_of_a(800.0))
    assert hg.r_of_a(800.0) == pytest.approx(math.log(3) / 800, rel=1e-12)


# --- Laplacian of distance, rates, constants -----------------------------------


def test_laplacian_of_distance():
    assert hg.laplacian_of_distance(1.0, 1.0) == pytest.approx(1.3130353, abs=1e-7)
    assert hg.laplacian_of_distance(50.0, 2.0) == pytest.approx(2.0, rel=1e-15)
    rho = np.linspace(0.1, 10, 100)
    v = hg.laplacian_of_distance(rho, 1.5)
    assert np.all(np.diff(v) < 0) and np.all(v > 1.5)
    with pytest.raises(GeometryError):
        hg.laplacian_of_distance(0.0, 1.0)


def test_delta_examples():
    assert hg.delta_rate(1.0, 1.0) == pytest.approx(math.sqrt(2) / 2, abs=1e-12)
    assert hg.delta_rate(1.0, 0.0) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(GeometryError):
        hg.delta_rate(1.0, -0.1)


@settings(max_examples=1000)
@given(st.floats(1e-3, 50.0), st.floats(0.0, 100.0))
def test_delta_quadratic_margin(a, v):
    d = hg.delta_rate(a, v)
    tau1, tau2 = hg.decay_roots(a, v)
    assert 0 < d < tau2
    assert tau1 < 0
    assert d * d + (v - a) * d - 2 * a * a < 0
    assert hg.barrier_factor(a, v, d) > 0


def _A_oracle(a):
    with mpmath.workdps(50):
        a = mpmath.mpf(a)
        x = mpmath.exp(a / 2)
        ch = (x + 1 / x) / 2
        th = (x - 1 / x) / (x + 1 / x)
        sa = (x**2 - x**-2) / 2
        ca = (x**2 + x**-2) / 2
        A1 = mpmath.sqrt(th / a) * ch**4 * ca
        A2 = a * (th * (ch**4 * ca**2 + sa**2) + 1 / th + sa)
        A3 = ch**2 * (th * sa * (ch**2 * ca + 1) + 1)
        return float(A1), float(A2), float(A3)


@pytest.mark.parametrize("a", [1e-3, 0.1, 1.0, 2.0, 7.5, 30.0])
def test_estimate_constants_against_exponential_form(a):
    got = hg.estimate_constants(a)
    for g, e in zip(got, _A_oracle(a)):
        assert g == pytest.approx(e, rel=1e-12)
        assert g > 0 and math.isfinite(g)


def test_estimate_constants_growth_and_precise_mode():
    a = np.linspace(1, 20, 40)
    A1 = [hg.estimate_constants(x)[0] for x in a]
    assert np.all(np.diff(A1) > 0)
    big = hg.estimate_constants(300.0, precise=True)
    assert all(mpmath.isfinite(x) and x > 0 for x in big)
    assert not math.isfinite(hg.estimate_constants(300.0)[0])


def test_poincare_constant():
    assert hg.poincare_constant(1.0, 1.0, 2.0) == 580.0
    assert hg.poincare_constant(2.0, 1.0, 2.0) == 37.0
    assert hg.poincare_constant(1.5, 1.0, 1e8) == pytest.approx(4 / 1.5**2, rel=1e-12)
    gaps = np.linspace(0.1, 10, 30)
    vals = [hg.poincare_constant(1.0, 1.0, 1.0 + g) for g in gaps]
    assert np.all(np.diff(vals) < 0)
    with pytest.raises(GeometryError):
        hg.poincare_constant(1.0, 2.0, 2.0)


def test_amplitude():
    assert hg.amplitude_A(1.0, 1.0, 1.0, 0.0) == 0.0
    assert hg.amplitude_A(1.0, 1.0, 1.0, 1.0) == pytest.approx(math.e, rel=1e-15)
    A = hg.amplitude_A(1.0, 0.7, 2.3, 0.4)
    assert A * math.exp(-0.7 * 2.3) == pytest.approx(0.4, rel=1e-14)


def test_trig_identity_suite():
    rep = hg.trig_identity_suite()
    assert rep["equality_pass"] and rep["inequality_pass"]
    assert rep["a_min"] == pytest.approx(1e-3) and rep["a_max"] == pytest.approx(100.0)
    assert 1 + math.tanh(0.5) * math.sinh(1.0) == pytest.approx(1.5430806, abs=1e-7)
    assert 2 * math.cosh(1) ** 2 - ((1 + math.tanh(0.5) ** 2) * math.sinh(1) ** 2 + math.tanh(0.5) * math.sinh(1) + 1) > 0


def test_constants_table_keys():
    t = hg.constants_table(1.0)
    assert set(t) == {"a", "r_a", "delta", "A1", "A2", "A3", "poincare_C"}
    assert t["poincare_C"] == 580.0 and t["delta"] == 1.0
