"""Numerical checks of the decay theorems and a priori inequalities.

Statements about limits at infinity are tested through finite-grid
surrogates: monotone tails, threshold reductions and log-linear rate fits.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import fields as fl
from .. import flows, hypgeom
from ..fields import PolarGrid
from .reports import CutoffSpec, DecayReport, InequalityReport, _jsonable, fit_log_slope, inequality


def ring_sup(x) -> np.ndarray:
    """Max over theta of the pointwise hyperbolic norm, one value per ring."""
    return np.max(fl.pointwise_norm(x), axis=1)


# ---------------------------------------------------------------------------
# velocity decay


def check_velocity_decay(s: flows.FlowState, reduction: float = 1e-2, tail_frac: float = 0.5) -> DecayReport:
    """Sup of |v|_a over geodesic balls of radius r(a) along a radial sweep.

    The ball around a point at distance rho is replaced by the full annulus
    rho - r(a) <= rho' <= rho + r(a), which contains it. Passes when the tail
    of the sweep is nonincreasing, the last value is below ``reduction`` times
    the first and the fitted decay rate is nonnegative.
    """
    g = s.grid
    r_a = hypgeom.r_of_a(g.a)
    sups = ring_sup(s.v)
    centers = np.flatnonzero((g.rho >= g.rho_in + r_a) & (g.rho <= g.rho_out - r_a))
    if len(centers) < 4:
        raise ValueError("grid window too small for the velocity sweep")
    radii = g.rho[centers]
    ball = np.array([np.max(sups[np.abs(g.rho - g.rho[i]) <= r_a + 1e-12]) for i in centers])
    if np.max(ball) == 0:
        return DecayReport("velocity_decay", radii.tolist(), ball.tolist(), [0.0] * len(ball), math.inf, 0.0,
                           (float(radii[0]), float(radii[-1])), True, True, {"r_a": r_a})
    k0 = int(len(ball) * (1 - tail_frac))
    tail = ball[k0:]
    monotone = bool(np.all(np.diff(tail) <= 1e-12 * np.max(tail)))
    reduced = bool(ball[-1] < reduction * ball[0])
    rate = -fit_log_slope(radii[k0:], tail)
    passed = monotone and reduced and rate >= 0
    return DecayReport(
        "velocity_decay",
        radii.tolist(),
        ball.tolist(),
        [reduction * float(ball[0])] * len(ball),
        rate,
        0.0,
        (float(radii[k0]), float(radii[-1])),
        passed,
        False,
        {"r_a": r_a, "monotone_tail": monotone, "final_over_initial": float(ball[-1] / ball[0]), "reduction": reduction},
    )


# ---------------------------------------------------------------------------
# vorticity decay


def sup_velocity_beyond(v: fl.OneFormField, R1: float) -> float:
    g = v.grid
    n = v.norm_values()
    return max(float(np.max(n[g.rho >= R1])), fl.sup_on_circle(v, R1))


def check_vorticity_decay(s: flows.FlowState, R1: float, fit_hi: float | None = None, rate_frac: float = 0.05) -> DecayReport:
    """Pointwise bound |omega| <= A e^{-delta rho} beyond R1, plus an empirical rate fit.

    delta comes from the sup of |v|_a over rho >= R1 and A from the sup of
    |omega| on the circle rho = R1. The fit window is [R1, R_out - 1].
    """
    g = s.grid
    a = g.a
    if not g.rho_in < R1 < g.rho_out:
        raise ValueError("R1 must lie inside the grid")
    v_inf = sup_velocity_beyond(s.v, R1)
    delta = hypgeom.delta_rate(a, v_inf)
    om_R1 = fl.sup_on_circle(s.omega, R1)
    A = hypgeom.amplitude_A(a, delta, R1, om_R1)
    sel = g.rho > R1
    rings = g.rho[sel]
    om = np.abs(s.omega.values[sel])
    bound = A * np.exp(-delta * rings)
    ok_nodes = om <= bound[:, None] * (1 + 1e-12)
    frac = float(np.mean(ok_nodes))
    sups = np.max(om, axis=1)
    radii = np.concatenate([[R1], rings])
    sup_values = np.concatenate([[om_R1], sups])
    bound_values = A * np.exp(-delta * radii)
    hi = g.rho_out - 1.0 if fit_hi is None else fit_hi
    win = (radii >= R1) & (radii <= hi)
    details = {
        "v_inf": v_inf,
        "delta": delta,
        "A": A,
        "omega_sup_R1": om_R1,
        "fraction_nodes_ok": frac,
        "violations": int(np.sum(~ok_nodes)),
        "worst_ratio": float(np.max(om / bound[:, None])) if A > 0 else 0.0,
        "R1": R1,
    }
    if np.max(np.abs(s.omega.values[g.rho >= R1])) < 1e-14:
        return DecayReport("vorticity_decay", radii.tolist(), sup_values.tolist(), bound_values.tolist(), math.inf,
                           delta, (R1, hi), True, True, details)
    if win.sum() < 3:
        raise ValueError("window too small for the rate fit")
    rate = -fit_log_slope(radii[win], sup_values[win])
    rep = DecayReport("vorticity_decay", radii.tolist(), sup_values.tolist(), bound_values.tolist(), rate, delta,
                      (R1, hi), False, False, details)
    details["rate_ok"] = rep.rate_ok(rate_frac)
    details["pointwise_ok"] = frac == 1.0
    rep.passed = bool(details["rate_ok"] and details["pointwise_ok"])
    return rep


# ---------------------------------------------------------------------------
# barrier


@dataclass
class BarrierReport:
    a: float
    delta: float
    v_inf: float
    factor: float
    min_margin: float
    min_nodal_margin: float
    passed: bool

    def to_json(self) -> dict:
        return _jsonable(asdict(self))


def check_barrier(a: float, delta: float, v_inf: float, grid: PolarGrid | None = None, R1: float | None = None) -> BarrierReport:
    """Upper bound on L(e^{-delta rho}) with worst-case advection, L f = Laplace f - 2a^2 f - g(v, grad f).

    Nodewise L(e^{-delta rho}) <= e^{-delta rho} (delta^2 - delta a coth(a rho) + delta v_inf - 2a^2)
    <= e^{-delta rho} (delta^2 + delta (v_inf - a) - 2a^2). Passes iff the
    constant factor -(delta^2 + (v_inf - a) delta - 2a^2) is strictly positive.
    """
    factor = hypgeom.barrier_factor(a, v_inf, delta)
    if grid is None:
        rho = np.linspace(1.0, 10.0, 256)
    else:
        rho = grid.rho if R1 is None else grid.rho[grid.rho >= R1]
    e = np.exp(-delta * rho)
    bound = e * (delta * delta + delta * (v_inf - a) - 2 * a * a)
    nodal = e * (delta * delta - delta * a / np.tanh(a * rho) + delta * v_inf - 2 * a * a)
    tol = 1e-12 * max(a * a, delta * delta, 1.0)
    return BarrierReport(a, delta, v_inf, factor, float(np.min(-bound)), float(np.min(-nodal)), bool(factor > tol))


def barrier_sweep(a_values=(0.5, 1.0, 2.0, 4.0), v_fracs=(0.0, 0.5, 1.0, 2.0)) -> dict:
    rows = []
    for a in a_values:
        for f in v_fracs:
            v_inf = f * a
            rows.append(check_barrier(a, hypgeom.delta_rate(a, v_inf), v_inf).to_json())
    mn = min(r["factor"] for r in rows)
    return {"rows": rows, "min_factor": mn, "passed": all(r["passed"] for r in rows)}


# ---------------------------------------------------------------------------
# integral inequalities


def check_poincare(v: fl.OneFormField, a: float, R0: float, R1: float) -> InequalityReport:
    """Integral of |v|_a^2 over rho >= R1 against C times the Dirichlet energy over rho >= R0."""
    g = v.grid
    C = hypgeom.poincare_constant(a, R0, R1)
    lo = max(R0, g.rho_in)
    lhs = fl.integrate(fl.ScalarField(g, v.norm_values() ** 2), R1, g.rho_out)
    energy = fl.dirichlet_energy(v, lo, g.rho_out)
    return inequality("poincare", lhs, C * energy, C=C, energy=energy, R0=R0, R1=R1)


def gradient_norm_sq(f: fl.ScalarField) -> np.ndarray:
    return fl.gradient(f).norm_values() ** 2


def check_h1_vorticity(s: flows.FlowState, R0: float, R1: float, cut: CutoffSpec | None = None) -> InequalityReport:
    """Integral of |grad omega|_a^2 beyond R1 against the energy and annulus terms."""
    g = s.grid
    a = g.a
    cut = CutoffSpec(R0, R1) if cut is None else cut
    if not (g.rho_in <= R0 + 1e-12 and cut.mid >= g.rho_in and R1 < g.rho_out):
        raise ValueError("annulus outside grid")
    lhs = fl.integrate(fl.ScalarField(g, gradient_norm_sq(s.omega)), R1, g.rho_out)
    energy = fl.dirichlet_energy(s.v, max(R0, g.rho_in), g.rho_out)
    C = cut.constant(a)
    ann = fl.integrate(fl.ScalarField(g, s.omega.values**2 * (1 + s.v.norm_values())), cut.mid, R1)
    rhs = 2 * a * a * energy + C * ann
    return inequality("h1_vorticity", lhs, rhs, C=C, energy=energy, annulus=ann, R0=R0, R1=R1)


# ---------------------------------------------------------------------------
# pressure at infinity


@dataclass
class PressureReport:
    directions: list[float]
    limits: list[float]
    expected: list[float]
    gap: float
    expected_gap: float
    max_ray_error: float
    passed: bool
    vacuous: bool = False
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return _jsonable(asdict(self))


def check_pressure_nonconvergence(
    phi: flows.BoundaryTrace,
    a: float,
    grid: PolarGrid,
    n_dirs: int = 8,
    window: tuple[float, float] | None = None,
    ray_tol: float = 0.05,
    gap_frac: float = 0.9,
) -> PressureReport:
    """Pressure of the potential flow with boundary data phi has direction-dependent limits.

    Directions are n_dirs uniform angles plus the extremal points of phi.
    Each ray limit must be within ray_tol of -2a^2 phi, measured against
    the scale 2a^2 max|phi|, and the spread must reach gap_frac of 2a^2 (max phi - min phi).
    """
    if abs(a - grid.a) > 1e-15 * a:
        raise ValueError("curvature differs from the grid's")
    F = flows.poisson_harmonic(phi, grid)
    s = flows.potential_flow(F, a)
    lo_phi, hi_phi = phi.extrema()
    dense = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
    vals = phi(dense)
    dirs = np.concatenate([2 * np.pi * np.arange(n_dirs) / n_dirs, [dense[np.argmax(vals)], dense[np.argmin(vals)]]])
    if window is None:
        window = (grid.rho_in + 0.6 * (grid.rho_out - grid.rho_in), grid.rho_out)
    rays = flows.pressure_ray_limits(s.P, dirs, window)
    expected = -2 * a * a * phi(dirs)
    scale = 2 * a * a * max(abs(lo_phi), abs(hi_phi))
    expected_gap = 2 * a * a * (hi_phi - lo_phi)
    err = np.abs(rays.limits - expected)
    max_err = float(np.max(err) / scale) if scale > 0 else float(np.max(err))
    details = {"window": list(window), "fit_rms": rays.fit_rms.tolist(), "phi_min": lo_phi, "phi_max": hi_phi}
    if not phi.nonconstant:
        return PressureReport(dirs.tolist(), rays.limits.tolist(), expected.tolist(), rays.max_gap, 0.0, max_err, True, True, details)
    passed = bool(max_err <= ray_tol and rays.max_gap >= gap_frac * expected_gap)
    return PressureReport(dirs.tolist(), rays.limits.tolist(), expected.tolist(), rays.max_gap, expected_gap, max_err, passed, False, details)


# ---------------------------------------------------------------------------
# exact potential flow and the radial transport oracle


def convergence_orders(errors) -> list[float]:
    """Observed orders log2(e_k / e_{k+1}) for a sequence of grid halvings."""
    e = np.asarray(errors, dtype=float)
    return [float(np.log2(e[k] / e[k + 1])) for k in range(len(e) - 1)]


@dataclass
class ResidualReport:
    grids: list[list[int]]
    momentum: list[float]
    mass: list[float]
    orders: list[float]
    tol: float
    min_order: float
    passed: bool

    def to_json(self) -> dict:
        return _jsonable(asdict(self))


def check_exact_residual(phi: flows.BoundaryTrace, a: float, R0: float, R_out: float, grids, tol: float = 1e-3,
                         min_order: float = 1.8) -> ResidualReport:
    """Momentum residual of the potential flow on successively refined grids.

    Passes when the finest residual is below tol and every observed order
    reaches min_order.
    """
    mom, mass = [], []
    for n_r, n_t in grids:
        g = PolarGrid.from_geodesic(a, R0, R_out, n_r, n_t)
        m, d = flows.residual_sup(flows.potential_flow(flows.poisson_harmonic(phi, g), a))
        mom.append(m)
        mass.append(d)
    orders = convergence_orders(mom)
    passed = mom[-1] < tol and all(o >= min_order for o in orders)
    return ResidualReport([list(x) for x in grids], mom, mass, orders, tol, min_order, bool(passed))


@dataclass
class TransportOracleReport:
    max_rel_error: float
    worst_rho: float
    fitted_rate: float
    delta: float
    max_principle: bool
    rtol: float
    passed: bool

    def to_json(self) -> dict:
        return _jsonable(asdict(self))


def check_transport_oracle(a: float = 1.0, R0: float = 1.0, R_out: float = 8.0, n_r: int = 256, n_theta: int = 16,
                           rtol: float = 1e-3, fit_lo: float | None = None, fit_hi: float | None = None) -> TransportOracleReport:
    """Zero-velocity vorticity solve with omega = 1 on the wall and 0 outside, against the ODE oracle.

    Every ring except the outer Dirichlet ring is compared in relative error.
    The decay rate is fitted over [R0 + 1, R_out - 1] and compared with delta(a, 0).
    """
    from .. import oracles, solver

    g = PolarGrid.from_geodesic(a, R0, R_out, n_r, n_theta)
    om = solver.vorticity_transport_solve(None, 1.0, g)
    w, _ = oracles.radial_vorticity_profile(a, g.rho_in, g.rho_out, g.rho)
    num = om.values
    rel = np.max(np.abs(num[:-1] - w[:-1, None]), axis=1) / np.abs(w[:-1])
    k = int(np.argmax(rel))
    lo = R0 + 1.0 if fit_lo is None else fit_lo
    hi = R_out - 1.0 if fit_hi is None else fit_hi
    win = (g.rho >= lo) & (g.rho <= hi)
    rate = -fit_log_slope(g.rho[win], np.max(np.abs(num[win]), axis=1))
    delta = hypgeom.delta_rate(a, 0.0)
    mp = bool(np.all(num >= -1e-12) and np.all(num <= 1 + 1e-12))
    passed = rel[k] <= rtol and rate > delta and mp
    return TransportOracleReport(float(rel[k]), float(g.rho[k]), rate, delta, mp, rtol, bool(passed))
