import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypflow import fields as fl
from hypflow.fields import GridError, OneFormField, PolarGrid, ScalarField


def area(a, R0, R1):
    return 2 * math.pi * (math.cosh(a * R1) - math.cosh(a * R0)) / a**2


# --- grid -------------------------------------------------------------------


def test_grid_validation():
    with pytest.raises(GridError):
        PolarGrid(1.0, 0.2, 0.9, 8, 16)
    with pytest.raises(GridError):
        PolarGrid(1.0, 0.2, 0.9, 32, 24)
    with pytest.raises(GridError):
        PolarGrid(1.0, 0.2, 1.0, 32, 16)
    with pytest.raises(GridError):
        PolarGrid(1.0, 0.5, 0.4, 32, 16)


def test_grid_nodes():
    g = PolarGrid.from_geodesic(1.5, 1.0, 6.0, 64, 32)
    assert g.r[0] == pytest.approx(math.tanh(0.75), rel=1e-14)
    assert np.all(np.diff(g.r) > 0)
    assert np.allclose(np.diff(g.rho), g.h_rho, rtol=1e-10)
    assert g.h_theta == pytest.approx(2 * math.pi / 32)
    assert g == PolarGrid.from_geodesic(1.5, 1.0, 6.0, 64, 32)
    assert hash(g) == hash(PolarGrid.from_geodesic(1.5, 1.0, 6.0, 64, 32))


# --- norms --------------------------------------------------------------------


def test_form_norm_examples():
    g = PolarGrid(1.0, 0.5, 0.9, 16, 16)
    v = fl.form_from_functions(g, lambda y1, y2: 1.0, lambda y1, y2: 0.0)
    assert fl.hyperbolic_norm_form(v).values[0, 0] == pytest.approx(0.375, rel=1e-14)
    g2 = PolarGrid(2.0, 1e-4, 0.5, 16, 16)
    v = fl.form_from_functions(g2, lambda y1, y2: 3.0, lambda y1, y2: 4.0)
    assert fl.hyperbolic_norm_form(v).values[0, 0] == pytest.approx(5.0, rel=1e-7)


def test_tensor_norm_examples():
    g = PolarGrid(1.0, 0.5, 0.9, 16, 16)
    one = np.ones(g.shape)
    T = fl.TwoTensorField(g, one, 0 * one, 0 * one, 0 * one)
    assert fl.hyperbolic_norm_tensor(T).values[0, 0] == pytest.approx(9 / 64, rel=1e-14)
    Z = fl.TwoTensorField(g, 0 * one, 0 * one, 0 * one, 0 * one)
    assert np.all(fl.hyperbolic_norm_tensor(Z).values == 0)
    g2 = PolarGrid(2.0, 1e-4, 0.5, 16, 16)
    T2 = fl.TwoTensorField(g2, 3 * np.ones(g2.shape), 4 * np.ones(g2.shape), 0 * np.ones(g2.shape), 0 * np.ones(g2.shape))
    assert fl.hyperbolic_norm_tensor(T2).values[0, 0] == pytest.approx(5.0, rel=1e-7)


# --- covariant gradient ---------------------------------------------------------


def test_covariant_gradient_hand_value():
    g = PolarGrid(1.0, 0.3, 0.9, 32, 16)
    v = fl.form_from_functions(g, lambda y1, y2: 1.0, lambda y1, y2: 0.0)
    T = fl.covariant_gradient(v)
    assert T.t11[0, 0] == pytest.approx(-2 * 0.3 / (1 - 0.09), abs=1e-12)
    assert T.t11[0, 0] == pytest.approx(-0.659341, abs=1e-6)


def test_christoffel_terms_vanish_near_centre():
    g = PolarGrid(1.0, 1e-6, 0.5, 16, 16)
    c = fl.christoffel_terms(g, np.ones(g.shape), np.zeros(g.shape))
    assert max(abs(x[0]).max() for x in c) < 1e-5


def _analytic_gradient(y1, y2):
    v1 = np.sin(2 * y1) * y2**2
    v2 = np.cos(y1 + 2 * y2)
    d11, d21 = 2 * np.cos(2 * y1) * y2**2, 2 * np.sin(2 * y1) * y2
    d12, d22 = -np.sin(y1 + 2 * y2), -2 * np.sin(y1 + 2 * y2)
    q = 1 - y1**2 - y2**2
    t11 = d11 + (-2 * y1 * v1 + 2 * y2 * v2) / q
    t12 = d12 + (-2 * y2 * v1 - 2 * y1 * v2) / q
    t21 = d21 + (-2 * y2 * v1 - 2 * y1 * v2) / q
    t22 = d22 + (2 * y1 * v1 - 2 * y2 * v2) / q
    return (v1, v2), (t11, t12, t21, t22)


def test_covariant_gradient_fourth_order():
    errs = []
    for n in (32, 64, 128):
        g = PolarGrid.from_geodesic(1.0, 0.5, 2.0, n, n)
        (v1, v2), exact = _analytic_gradient(g.y1, g.y2)
        T = fl.covariant_gradient(OneFormField(g, v1, v2))
        errs.append(max(np.max(np.abs(t - e)) for t, e in zip((T.t11, T.t12, T.t21, T.t22), exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.5), (errs, orders)


# --- vorticity, divergence, Laplace-Beltrami ------------------------------------


def test_rotation_vorticity_and_expansion_divergence():
    g = PolarGrid(1.0, 0.01, 0.8, 64, 32)
    rot = fl.form_from_functions(g, lambda y1, y2: -y2, lambda y1, y2: y1)
    om = fl.vorticity(rot).values
    expected = g.col(g.one_minus_r2**2) / 4 * 2 * np.ones(g.shape)
    assert np.max(np.abs(om - expected)) < 1e-5
    assert om[0, 0] == pytest.approx(0.5, abs=1e-3)
    exp_ = fl.form_from_functions(g, lambda y1, y2: y1, lambda y1, y2: y2)
    dv = fl.divergence(exp_).values
    assert np.max(np.abs(dv + expected)) < 1e-5
    assert dv[0, 0] == pytest.approx(-0.5, abs=1e-3)


def test_exact_forms_have_no_vorticity():
    g = PolarGrid.from_geodesic(1.0, 1.0, 5.0, 96, 64)
    v = fl.form_from_functions(g, lambda y1, y2: 2 * y1 * y2 + np.cos(y1), lambda y1, y2: y1**2 + 3 * y2**2)
    assert np.max(np.abs(fl.vorticity(v).values)) < 1e-4


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_vorticity_divergence_linear(al, be):
    g = PolarGrid.from_geodesic(1.0, 1.0, 4.0, 32, 16)
    u = fl.form_from_functions(g, lambda y1, y2: y1 * y2, lambda y1, y2: np.sin(y1))
    w = fl.form_from_functions(g, lambda y1, y2: y2**2, lambda y1, y2: y1 - y2)
    comb = u * al + w * be
    for op in (fl.vorticity, fl.divergence):
        lhs = op(comb).values
        rhs = al * op(u).values + be * op(w).values
        assert np.allclose(lhs, rhs, atol=1e-10)


def test_laplace_beltrami_constant_and_distance():
    g = PolarGrid.from_geodesic(1.3, 1.0, 6.0, 64, 16)
    assert np.max(np.abs(fl.laplace_beltrami(ScalarField(g, np.full(g.shape, 4.2))).values)) < 1e-10
    rho = ScalarField(g, g.rho_mesh.copy())
    lb = fl.laplace_beltrami(rho).values
    assert np.max(np.abs(lb - g.col(1.3 / np.tanh(1.3 * g.rho)))) < 1e-9


def test_laplace_beltrami_barrier_converges():
    a, d = 1.0, 0.8
    errs = []
    for n in (32, 64, 128):
        g = PolarGrid.from_geodesic(a, 1.0, 6.0, n, 16)
        f = ScalarField(g, np.exp(-d * g.rho_mesh))
        exact = g.col((d * d - d * a / np.tanh(a * g.rho)) * np.exp(-d * g.rho))
        errs.append(np.max(np.abs(fl.laplace_beltrami(f).values - exact)))
    assert np.all(np.log2(np.array(errs[:-1]) / errs[1:]) > 1.8)


# --- streamfunction ---------------------------------------------------------------


def test_pure_circulation_form():
    g = PolarGrid.from_geodesic(1.0, 1.0, 6.0, 64, 32)
    v = fl.streamfunction_to_velocity(ScalarField(g, np.zeros(g.shape)), 2 * math.pi)
    r2 = g.y1**2 + g.y2**2
    assert np.allclose(v.v1, -g.y2 / r2, rtol=1e-12)
    assert np.allclose(v.v2, g.y1 / r2, rtol=1e-12)
    assert np.max(np.abs(fl.vorticity(v).values)) < 1e-9
    assert np.max(np.abs(fl.divergence(v).values)) < 1e-12


def test_streamfunction_divergence_free_and_vorticity():
    errs = []
    for n in (32, 64, 128):
        g = PolarGrid.from_geodesic(1.0, 1.0, 5.0, n, 32)
        psi = ScalarField(g, np.exp(-((g.rho_mesh - 3) ** 2)) * (1 + 0.5 * np.cos(2 * g.theta_mesh)))
        v = fl.streamfunction_to_velocity(psi, 0.7)
        assert np.max(np.abs(fl.divergence(v).values)) < 1e-12
        errs.append(np.max(np.abs(fl.vorticity(v).values + fl.laplace_beltrami(psi).values)))
    assert np.log2(errs[1] / errs[2]) > 1.8
    g = PolarGrid.from_geodesic(1.0, 1.0, 5.0, 32, 16)
    v = fl.streamfunction_to_velocity(ScalarField(g, g.rho_mesh.copy()), 0.0)
    assert np.max(np.abs(fl.divergence(v).values)) < 1e-12
    assert np.max(np.abs(v.polar()[0])) < 1e-12


def test_streamfunction_linear():
    g = PolarGrid.from_geodesic(1.0, 1.0, 5.0, 32, 16)
    p1 = ScalarField(g, np.sin(g.rho_mesh) * np.cos(g.theta_mesh))
    p2 = ScalarField(g, g.rho_mesh**2)
    lhs = fl.streamfunction_to_velocity(p1 * 2.0 + p2 * -1.5, 1.25)
    rhs = fl.streamfunction_to_velocity(p1, 1.0) * 2.0 + fl.streamfunction_to_velocity(p2, 0.5) * -1.5
    assert np.allclose(lhs.v1, rhs.v1, atol=1e-12) and np.allclose(lhs.v2, rhs.v2, atol=1e-12)


# --- quadrature and norms -----------------------------------------------------------


@pytest.mark.parametrize("a,R0,R1", [(1.0, 1.0, 4.0), (0.5, 2.0, 6.0), (2.0, 0.5, 3.0)])
def test_annulus_area(a, R0, R1):
    g = PolarGrid.from_geodesic(a, R0, R1, 256, 256)
    one = ScalarField(g, np.ones(g.shape))
    assert fl.integrate(one) == pytest.approx(area(a, R0, R1), rel=1e-3)
    mid = 0.5 * (R0 + R1) + 0.3 * g.h_rho
    assert fl.integrate(one, R0, mid) + fl.integrate(one, mid, R1) == pytest.approx(fl.integrate(one), rel=1e-12)
    assert fl.integrate(one, R0 + 0.5, R1 - 0.5) == pytest.approx(area(a, R0 + 0.5, R1 - 0.5), rel=1e-3)
    assert fl.integrate(ScalarField(g, np.zeros(g.shape))) == 0.0


def test_integrate_region_outside_grid():
    g = PolarGrid.from_geodesic(1.0, 1.0, 4.0, 32, 16)
    with pytest.raises(GridError):
        fl.integrate(ScalarField(g, np.ones(g.shape)), 0.5, 3.0)


@pytest.mark.parametrize("p", [4 / 3, 2.0, 4.0])
def test_lp_norm_constant_norm(p):
    g = PolarGrid.from_geodesic(1.0, 1.0, 4.0, 256, 64)
    c = 0.7
    v = OneFormField(g, c * g.col(g.lam) * np.ones(g.shape), np.zeros(g.shape))
    assert fl.lp_norm(v, p) == pytest.approx(area(1.0, 1.0, 4.0) ** (1 / p) * c, rel=1e-3)
    assert fl.lp_norm(v, p, 1.0, 2.0) < fl.lp_norm(v, p, 1.0, 3.0)
    assert fl.lp_norm(OneFormField.zeros(g), p) == 0.0


def test_sup_on_circle():
    g = PolarGrid.from_geodesic(1.0, 1.0, 6.0, 128, 16)
    assert fl.sup_on_circle(ScalarField(g, np.zeros(g.shape)), 3.0) == 0.0
    f = ScalarField(g, np.exp(-g.rho_mesh))
    assert fl.sup_on_circle(f, g.rho[40]) == pytest.approx(math.exp(-g.rho[40]), rel=1e-14)
    R = 3.123
    assert fl.sup_on_circle(f, R) == pytest.approx(math.exp(-R), rel=1e-3)
    lin = ScalarField(g, 2.0 + 5.0 * g.col(g.r) * np.ones(g.shape))
    r = math.tanh(R / 2)
    assert fl.sup_on_circle(lin, R) == pytest.approx(2.0 + 5.0 * r, rel=1e-13)
    with pytest.raises(GridError):
        fl.sup_on_circle(f, 7.0)


# --- structural inequalities -----------------------------------------------------------


def _random_form(g, rng):
    c = rng.normal(size=6)
    return fl.form_from_functions(
        g,
        lambda y1, y2: c[0] * np.sin(3 * y1 + c[1]) + c[2] * y2**2,
        lambda y1, y2: c[3] * np.cos(2 * y2 + c[4]) + c[5] * y1 * y2,
    )


def test_exterior_derivative_bounded_by_gradient():
    rng = np.random.default_rng(3)
    g = PolarGrid.from_geodesic(1.0, 1.0, 4.0, 32, 32)
    for _ in range(100):
        T = fl.covariant_gradient(_random_form(g, rng))
        dv = fl.antisymmetric_part_norm(T).values
        gv = fl.hyperbolic_norm_tensor(T).values
        assert np.all(dv <= gv * (1 + 1e-12) + 1e-300)


def test_bochner_weitzenbock_integrated():
    for a in (0.7, 1.0, 1.6):
        g = PolarGrid.from_geodesic(a, 1.0, 9.0, 256, 32)
        psi = ScalarField(g, np.exp(-((g.rho_mesh - 4.0) ** 2) / 0.5) * (1 + 0.4 * np.sin(g.theta_mesh) + 0.2 * np.cos(3 * g.theta_mesh)))
        v = fl.streamfunction_to_velocity(psi, 0.0)
        grad = fl.dirichlet_energy(v)
        om = fl.integrate(ScalarField(g, fl.vorticity(v).values ** 2))
        vv = fl.integrate(ScalarField(g, v.norm_values() ** 2))
        assert grad == pytest.approx(om + a * a * vv, rel=1e-3)
