"""Closed-form geometry of the hyperbolic plane H^2(-a^2).

Two models are used: the upper sheet of the hyperboloid
x0^2 - x1^2 - x2^2 = 1/a^2 in Minkowski space, and the Poincare disk chart
with metric lambda(y)^2 |dy|^2, lambda = 2 / (a (1 - |y|^2)).

Everything here is a pure function of immutable values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

# chart points closer than this to the unit circle are rejected
BOUNDARY_MARGIN = 1e-8
HYPERBOLOID_RTOL = 1e-12

# Above these curvatures the double-precision constants overflow; use
# ``estimate_constants(a, precise=True)`` there.
A1_OVERFLOW = 236.0
A2_OVERFLOW = 176.0


class GeometryError(ValueError):
    """Raised for points outside the model or invalid parameters."""


@dataclass(frozen=True)
class HyperboloidPoint:
    x0: float
    x1: float
    x2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x0, self.x1, self.x2])


@dataclass(frozen=True)
class ChartPoint:
    y1: float
    y2: float

    @property
    def radius(self) -> float:
        return math.hypot(self.y1, self.y2)


@dataclass(frozen=True)
class RateConstants:
    delta: float
    A1: float
    A2: float
    A3: float
    A: float


def _check_a(a: float) -> None:
    if not a > 0:
        raise GeometryError(f"curvature parameter must be positive, got {a!r}")


def lorentz(v, w) -> float:
    """Minkowski form -v0 w0 + v1 w1 + v2 w2."""
    return -v[0] * w[0] + v[1] * w[1] + v[2] * w[2]


def check_hyperboloid(p: HyperboloidPoint, a: float) -> None:
    _check_a(a)
    target = 1.0 / a**2
    q = -lorentz(p.as_array(), p.as_array())
    scale = max(target, p.x0**2)
    if p.x0 <= 0 or abs(q - target) > HYPERBOLOID_RTOL * scale * 10:
        raise GeometryError(f"{p} is not on the hyperboloid of curvature -{a}^2")


def _check_chart(r2: float) -> None:
    if not r2 < (1.0 - BOUNDARY_MARGIN) ** 2:
        raise GeometryError(f"chart point with |y|^2={r2} is outside the disk (margin {BOUNDARY_MARGIN})")


def to_chart(p: HyperboloidPoint, a: float) -> ChartPoint:
    check_hyperboloid(p, a)
    d = p.x0 + 1.0 / a
    return ChartPoint(p.x1 / d, p.x2 / d)


def from_chart(y: ChartPoint, a: float) -> HyperboloidPoint:
    _check_a(a)
    r2 = y.y1**2 + y.y2**2
    _check_chart(r2)
    q = 1.0 - r2
    # x0 = (1 + r^2) / (a (1 - r^2)) avoids the 2/q - 1 cancellation
    return HyperboloidPoint((1.0 + r2) / (a * q), 2 * y.y1 / (a * q), 2 * y.y2 / (a * q))


def conformal_factor(y, a: float):
    """lambda = 2 / (a (1 - |y|^2)); accepts a ChartPoint or an array of radii."""
    _check_a(a)
    if isinstance(y, ChartPoint):
        r2 = y.y1**2 + y.y2**2
        _check_chart(r2)
        return 2.0 / (a * (1.0 - r2))
    r = np.asarray(y, dtype=float)
    return 2.0 / (a * (1.0 - r * r))


def dist_origin(y, a: float):
    """Geodesic distance from the disk centre: (2/a) atanh(|y|)."""
    _check_a(a)
    if isinstance(y, ChartPoint):
        r = y.radius
        _check_chart(r * r)
        return 2.0 * math.atanh(r) / a
    return 2.0 * np.arctanh(np.asarray(y, dtype=float)) / a


def dist(p: HyperboloidPoint, q: HyperboloidPoint, a: float) -> float:
    """Two-point distance from cosh(a rho) = -a^2 <p, q>.

    Small separations lose accuracy in arccosh, so the chord length
    |p - q|_L = (2/a) sinh(a rho / 2) is used there instead.
    """
    check_hyperboloid(p, a)
    check_hyperboloid(q, a)
    d = p.as_array() - q.as_array()
    chord2 = lorentz(d, d)
    if chord2 <= 0:
        return 0.0
    half = a * math.sqrt(chord2) / 2.0
    if half < 1.0:
        return 2.0 * math.asinh(half) / a
    c = -a * a * lorentz(p.as_array(), q.as_array())
    return math.acosh(max(c, 1.0)) / a


def ball_radius_in_chart(R, a: float):
    """Chart radius tanh(a R / 2) of the geodesic ball B_O(R)."""
    _check_a(a)
    return np.tanh(a * np.asarray(R, dtype=float) / 2.0) if np.ndim(R) else math.tanh(a * R / 2.0)


def r_of_a(a):
    """(1/a) log((1 + 3 e^a) / (3 + e^a)), written to avoid cancellation and overflow."""
    a_arr = np.asarray(a, dtype=float)
    if np.any(a_arr <= 0):
        raise GeometryError("curvature parameter must be positive")
    small = np.minimum(a_arr, 700.0)
    # ratio - 1 = 2 (e^a - 1) / (3 + e^a)
    low = np.log1p(2.0 * np.expm1(small) / (3.0 + np.exp(small)))
    em = np.exp(-a_arr)
    high = math.log(3.0) + np.log1p(em / 3.0) - np.log1p(3.0 * em)
    out = np.where(a_arr < 20.0, low, high) / a_arr
    return float(out) if out.ndim == 0 else out


def r_of_a_atanh(a):
    """Same radius from the half-chart-ball characterisation (2/a) atanh(tanh(a/2) / 2)."""
    a_arr = np.asarray(a, dtype=float)
    out = 2.0 * np.arctanh(0.5 * np.tanh(a_arr / 2.0)) / a_arr
    return float(out) if out.ndim == 0 else out


def laplacian_of_distance(rho, a: float):
    """Laplace-Beltrami of the distance function, a coth(a rho)."""
    _check_a(a)
    rho_arr = np.asarray(rho, dtype=float)
    if np.any(rho_arr <= 0):
        raise GeometryError("distance Laplacian is singular at rho = 0")
    out = a / np.tanh(a * rho_arr)
    return float(out) if out.ndim == 0 else out


def _quadratic_root(a: float, v_inf: float) -> float:
    # positive root of t^2 + (v - a) t - 2 a^2 = 0, cancellation-free
    b = v_inf - a
    disc = math.sqrt(b * b + 8.0 * a * a)
    if b > 0:
        return 4.0 * a * a / (disc + b)
    return 0.5 * (disc - b)


def delta_rate(a: float, v_inf: float) -> float:
    """Vorticity decay rate, half the positive root of t^2 + (v_inf - a) t - 2a^2."""
    _check_a(a)
    if v_inf < 0:
        raise GeometryError("sup norm of velocity must be nonnegative")
    return 0.5 * _quadratic_root(a, v_inf)


def decay_roots(a: float, v_inf: float) -> tuple[float, float]:
    """Both roots (tau1 < 0 < tau2) of t^2 + (v_inf - a) t - 2a^2 = 0."""
    tau2 = _quadratic_root(a, v_inf)
    return -2.0 * a * a / tau2, tau2


def barrier_factor(a: float, v_inf: float, delta: float) -> float:
    """-(delta^2 + (v_inf - a) delta - 2 a^2); positive means e^{-delta rho} is a supersolution."""
    return -(delta * delta + (v_inf - a) * delta - 2.0 * a * a)


def estimate_constants(a: float, precise: bool = False):
    """Coefficients (A1, A2, A3) of the local sup-norm estimate for Stokes flow.

    In double precision they overflow near a = 176 (A2) and a = 236 (A1);
    ``precise=True`` evaluates with mpmath and returns mpf values.
    """
    _check_a(a)
    if precise:
        m = mpmath.mpf(a)
        h = m / 2
        th, ch, sa, ca = mpmath.tanh(h), mpmath.cosh(h), mpmath.sinh(m), mpmath.cosh(m)
        A1 = m ** mpmath.mpf(-0.5) * mpmath.sqrt(th) * ch**4 * ca
        A2 = m * (th * (ch**4 * ca**2 + sa**2) + 1 / th + sa)
        A3 = ch**2 * (th * sa * (ch**2 * ca + 1) + 1)
        return A1, A2, A3
    h = a / 2.0
    th = math.tanh(h)
    with np.errstate(over="ignore"):
        ch, sa, ca = np.cosh(h), np.sinh(a), np.cosh(a)
        A1 = a**-0.5 * math.sqrt(th) * ch**4 * ca
        A2 = a * (th * (ch**4 * ca**2 + sa**2) + 1.0 / th + sa)
        A3 = ch**2 * (th * sa * (ch**2 * ca + 1.0) + 1.0)
    return float(A1), float(A2), float(A3)


def poincare_constant(a: float, R0: float, R1: float) -> float:
    """(2/a^2) {2 + (18/a^2) (4 / (R1 - R0))^2}."""
    _check_a(a)
    if not R1 > R0 > 0:
        raise GeometryError(f"need R1 > R0 > 0, got R0={R0}, R1={R1}")
    return (2.0 / a**2) * (2.0 + (18.0 / a**2) * (4.0 / (R1 - R0)) ** 2)


def amplitude_A(a: float, delta: float, R1: float, omega_sup: float) -> float:
    """exp(delta R1) * sup |omega| on the circle rho = R1."""
    _check_a(a)
    if delta < 0 or R1 <= 0 or omega_sup < 0:
        raise GeometryError("amplitude needs delta >= 0, R1 > 0, omega_sup >= 0")
    return math.exp(delta * R1) * omega_sup


def rate_constants(a: float, v_inf: float, R1: float, omega_sup: float) -> RateConstants:
    delta = delta_rate(a, v_inf)
    A1, A2, A3 = estimate_constants(a)
    return RateConstants(delta, A1, A2, A3, amplitude_A(a, delta, R1, omega_sup))


def trig_identity_suite(a_values=None) -> dict:
    """Check the two hyperbolic-trig relations used to simplify the Stokes estimate.

    The equality 1 + tanh(a/2) sinh a = cosh a is checked in double precision;
    the inequality is checked by its slack 2 cosh^2 a - LHS, computed in
    extended precision because it is relatively tiny for large a.
    """
    if a_values is None:
        a_values = np.logspace(-3, 2, 201)
    worst_eq = 0.0
    min_slack_rel = math.inf
    ok_ineq = True
    with mpmath.workdps(150):
        for a in a_values:
            lhs = 1.0 + math.tanh(a / 2) * math.sinh(a)
            worst_eq = max(worst_eq, abs(lhs - math.cosh(a)) / math.cosh(a))
            m = mpmath.mpf(float(a))
            th, sa, ca = mpmath.tanh(m / 2), mpmath.sinh(m), mpmath.cosh(m)
            left = (1 + th**2) * sa**2 + th * sa + 1
            slack = 2 * ca**2 - left
            ok_ineq = ok_ineq and slack > 0
            min_slack_rel = min(min_slack_rel, float(slack / (2 * ca**2)))
    return {
        "a_min": float(np.min(a_values)),
        "a_max": float(np.max(a_values)),
        "count": len(a_values),
        "equality_max_rel_error": worst_eq,
        "equality_pass": worst_eq <= 1e-10,
        "inequality_min_rel_slack": min_slack_rel,
        "inequality_pass": bool(ok_ineq),
    }


def constants_table(a: float, R0: float = 1.0, R1: float = 2.0, v_inf: float | None = None) -> dict:
    """The JSON-exportable constants record for one curvature."""
    A1, A2, A3 = estimate_constants(a)
    return {
        "a": a,
        "r_a": r_of_a(a),
        "delta": delta_rate(a, 0.0 if v_inf is None else v_inf),
        "A1": A1,
        "A2": A2,
        "A3": A3,
        "poincare_C": poincare_constant(a, R0, R1),
    }
