"""Randomized audits of the a priori inequalities.

Each audit draws its inputs from a seeded generator, so identical seeds give
identical reports. Random velocity fields come from Gaussian-bump
streamfunctions and are therefore divergence free.
"""
from __future__ import annotations

import math

import numpy as np

from .. import fields as fl
from .. import solver
from ..fields import PolarGrid
from .checks import check_h1_vorticity, check_poincare, check_vorticity_decay
from .reports import AuditReport

# ---------------------------------------------------------------------------
# gradient estimate for the pulled-back form on the unit geodesic ball


def _bump_form(rng: np.random.Generator, Rc: float, n_bumps: int = 3):
    """Random sum of Gaussians per component, with analytic partial derivatives."""
    centres = Rc * np.sqrt(rng.uniform(0, 1, (2, n_bumps))) * 0.8
    angles = rng.uniform(0, 2 * np.pi, (2, n_bumps))
    cx, cy = centres * np.cos(angles), centres * np.sin(angles)
    width = Rc * rng.uniform(0.15, 0.6, (2, n_bumps))
    amp = rng.normal(size=(2, n_bumps))

    def comp(j, y1, y2):
        val = d1 = d2 = 0.0
        for m in range(n_bumps):
            dx, dy, s2 = y1 - cx[j, m], y2 - cy[j, m], width[j, m] ** 2
            e = amp[j, m] * np.exp(-(dx * dx + dy * dy) / (2 * s2))
            val = val + e
            d1 = d1 - dx / s2 * e
            d2 = d2 - dy / s2 * e
        return val, d1, d2

    return comp


def pullback_gradient_sides(comp, a: float, n_r: int = 48, n_theta: int = 96) -> tuple[float, float]:
    """Both sides of the pulled-back gradient estimate on the chart disk of B_O(1)."""
    Rc = math.tanh(a / 2)
    x, w = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * Rc * (x + 1)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    rr, tt = np.meshgrid(r, th, indexing="ij")
    y1, y2 = rr * np.cos(tt), rr * np.sin(tt)
    wq = np.outer(0.5 * Rc * w * r, np.full(n_theta, 2 * np.pi / n_theta))
    u1, u11, u12 = comp(0, y1, y2)
    u2, u21, u22 = comp(1, y1, y2)
    q = 1 - rr * rr
    lam = 2 / (a * q)
    # (nabla u)_ij = d_i u_j + c_ij
    t11 = u11 + (-2 * y1 * u1 + 2 * y2 * u2) / q
    t12 = u21 + (-2 * y2 * u1 - 2 * y1 * u2) / q
    t21 = u12 + (-2 * y2 * u1 - 2 * y1 * u2) / q
    t22 = u22 + (2 * y1 * u1 - 2 * y2 * u2) / q
    lhs = float(np.sum(wq * (u11**2 + u12**2 + u21**2 + u22**2)))
    grad_sq = float(np.sum(wq * lam**-2 * (t11**2 + t12**2 + t21**2 + t22**2)))
    u_sq = float(np.sum(wq * (u1**2 + u2**2)))
    rhs = 32 * (math.cosh(a / 2) ** 4 / a**2 * grad_sq + math.sinh(a) ** 2 * u_sq)
    return lhs, rhs


def audit_pullback_gradient(samples: int = 100, seed: int = 0, a_range=(0.2, 3.0)) -> AuditReport:
    rng = np.random.default_rng(seed)
    viol, worst = 0, 0.0
    for _ in range(samples):
        a = math.exp(rng.uniform(math.log(a_range[0]), math.log(a_range[1])))
        lhs, rhs = pullback_gradient_sides(_bump_form(rng, math.tanh(a / 2)), a)
        worst = max(worst, lhs / rhs)
        viol += lhs > rhs
    return AuditReport("pullback_gradient", samples, int(viol), worst, seed)


# ---------------------------------------------------------------------------
# random divergence-free fields on an exterior grid


def bump_streamfunction(grid: PolarGrid, rng: np.random.Generator, lo: float, hi: float, modes: int = 3) -> fl.ScalarField:
    """psi = Gaussian in rho times a random low-order trigonometric polynomial."""
    centre = rng.uniform(lo, hi)
    width = rng.uniform(0.3, 0.8)
    ang = np.full(grid.n_theta, rng.normal())
    for k in range(1, modes + 1):
        ang = ang + rng.normal() / k * np.cos(k * grid.theta) + rng.normal() / k * np.sin(k * grid.theta)
    radial = np.exp(-((grid.rho - centre) ** 2) / (2 * width * width))
    return fl.ScalarField(grid, np.outer(radial, ang))


def _random_field(rng, a: float, R0: float, n_r: int, n_theta: int):
    grid = PolarGrid.from_geodesic(a, R0, R0 + 7.0, n_r, n_theta)
    psi = bump_streamfunction(grid, rng, R0 + 0.5, R0 + 4.5)
    return grid, fl.streamfunction_to_velocity(psi, 0.0)


def audit_poincare(samples: int = 100, seed: int = 0, R0: float = 1.0, n_r: int = 192, n_theta: int = 32) -> AuditReport:
    rng = np.random.default_rng(seed)
    viol = vac = 0
    worst = 0.0
    for _ in range(samples):
        a = rng.uniform(0.5, 2.0)
        R1 = R0 + rng.uniform(0.25, 2.0)
        _, v = _random_field(rng, a, R0, n_r, n_theta)
        rep = check_poincare(v, a, R0, R1)
        vac += rep.vacuous
        viol += not rep.passed
        worst = max(worst, rep.ratio)
    return AuditReport("poincare", samples, int(viol), worst, seed, int(vac))


def audit_ladyzhenskaya(samples: int = 100, seed: int = 0, R0: float = 1.0, n_r: int = 128, n_theta: int = 32,
                        stable_tol: float = 0.10) -> AuditReport:
    """Ratio ||w||_4 / (||w||_2 + ||grad w||_2) at two resolutions."""
    rng = np.random.default_rng(seed)
    ratios = {n_r: [], 2 * n_r: []}
    for _ in range(samples):
        a = rng.uniform(0.5, 2.0)
        state = rng.bit_generator.state
        for n in ratios:
            rng.bit_generator.state = state
            grid, w = _random_field(rng, a, R0, n, n_theta)
            den = fl.lp_norm(w, 2) + math.sqrt(fl.dirichlet_energy(w))
            ratios[n].append(fl.lp_norm(w, 4) / den if den > 0 else 0.0)
    coarse, fine = max(ratios[n_r]), max(ratios[2 * n_r])
    change = abs(fine - coarse) / fine if fine > 0 else 0.0
    finite = bool(np.all(np.isfinite(ratios[n_r] + ratios[2 * n_r])))
    viol = int(not finite) + int(change > stable_tol)
    return AuditReport("ladyzhenskaya", samples, viol, fine, seed, 0,
                       {"coarse_max": coarse, "fine_max": fine, "refinement_change": change, "finite": finite})


# ---------------------------------------------------------------------------
# solver outputs: H1 vorticity estimate, pointwise vorticity bound, Poincare


def random_solver_config(rng: np.random.Generator, n_r: int = 64, n_theta: int = 32) -> tuple[solver.SolverConfig, float]:
    a = rng.uniform(0.5, 1.5)
    U = rng.choice([-1.0, 1.0]) * rng.uniform(0.05, 0.5)
    wc = tuple(rng.uniform(-0.5, 0.5, 2).tolist())
    ws = tuple(rng.uniform(-0.5, 0.5, 2).tolist())
    cfg = solver.SolverConfig(a=a, R0=1.0, R_out=7.0, n_r=n_r, n_theta=n_theta, wall_speed=float(U),
                              wall_cos=wc, wall_sin=ws, tol=1e-8, max_iters=60)
    return cfg, float(1.0 + rng.uniform(0.5, 2.0))


def audit_solver_outputs(samples: int = 100, seed: int = 0, n_r: int = 64, n_theta: int = 32) -> dict[str, AuditReport]:
    rng = np.random.default_rng(seed)
    names = ("h1_vorticity", "vorticity_bound", "poincare_solver")
    viol = dict.fromkeys(names, 0)
    worst = dict.fromkeys(names, 0.0)
    vac = dict.fromkeys(names, 0)
    unconverged = 0
    for _ in range(samples):
        cfg, R1 = random_solver_config(rng, n_r, n_theta)
        state, rep = solver.picard_solve(cfg)
        unconverged += not rep.converged
        h1 = check_h1_vorticity(state, cfg.R0, R1)
        vd = check_vorticity_decay(state, R1)
        po = check_poincare(state.v, cfg.a, cfg.R0, R1)
        for name, passed, ratio, vacuous in (
            ("h1_vorticity", h1.passed, h1.ratio, h1.vacuous),
            ("vorticity_bound", vd.details["violations"] == 0, vd.details["worst_ratio"], vd.vacuous),
            ("poincare_solver", po.passed, po.ratio, po.vacuous),
        ):
            viol[name] += not passed
            worst[name] = max(worst[name], ratio)
            vac[name] += vacuous
    return {n: AuditReport(n, samples, int(viol[n]), float(worst[n]), seed, int(vac[n]),
                           {"grid": [n_r, n_theta], "unconverged": unconverged}) for n in names}


def audit_all(samples: int = 100, seed: int = 0) -> dict[str, AuditReport]:
    out = {"pullback_gradient": audit_pullback_gradient(samples, seed),
           "poincare": audit_poincare(samples, seed),
           "ladyzhenskaya": audit_ladyzhenskaya(samples, seed)}
    out.update(audit_solver_outputs(samples, seed))
    return out
