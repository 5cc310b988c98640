"""Independent reference solutions used to check the discrete solvers."""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp


def radial_vorticity_profile(a: float, R0: float, R_out: float, rho, rtol: float = 1e-12):
    """Solution of w'' + a coth(a rho) w' - 2a^2 w = 0 with w(R0) = 1, w(R_out) = 0.

    Shoots backward from R_out with w = 0, w' = -1, then normalises by the
    value at R0. Returns (w, w') at the requested radii.
    """
    rho = np.asarray(rho, dtype=float)

    def rhs(t, y):
        return [y[1], -a / math.tanh(a * t) * y[1] + 2 * a * a * y[0]]

    pts = np.unique(np.concatenate([rho, [R0]]))[::-1]
    sol = solve_ivp(rhs, (R_out, R0), [0.0, -1.0], method="DOP853", rtol=rtol, atol=1e-14, t_eval=pts, dense_output=True)
    if not sol.success:
        raise RuntimeError(sol.message)
    y = sol.sol(rho)
    w0 = sol.sol(R0)[0]
    return y[0] / w0, y[1] / w0


def decay_exponents(a: float) -> tuple[float, float]:
    """Exponents of the radial vorticity ODE at large rho: e^{-2a rho} and e^{a rho}."""
    return 2.0 * a, -a


def rotating_obstacle_flow(a: float, R0: float, R_out: float, U: float, rho):
    """Radially symmetric flow around an obstacle spinning at tangential speed U.

    Vorticity is the truncated decaying profile scaled so that the azimuthal
    speed f = omega' / (2 a^2) equals U at the wall; this is the unique radial
    profile with single-valued pressure. Returns (omega, f) at rho.
    """
    w, dw = radial_vorticity_profile(a, R0, R_out, np.concatenate([[R0], np.atleast_1d(rho)]))
    c = 2 * a * a * U / dw[0]
    return c * w[1:], c * dw[1:] / (2 * a * a)


def couette_wall_vorticity(R_in: float, R_out_: float, U_in: float) -> float:
    """Euclidean Couette flow between cylinders (inner moving at U_in, outer fixed).

    u_theta = A r + B / r, vorticity 2A is constant; this is the wall value.
    """
    A = -U_in * R_in / (R_out_**2 - R_in**2)
    return 2 * A
