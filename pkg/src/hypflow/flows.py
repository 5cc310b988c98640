"""Harmonic-potential flows, the stationary Navier-Stokes residual and pressure recovery.

A bounded harmonic F with continuous boundary values phi gives the exact
solution v = dF, P = -2a^2 F - |dF|_a^2 / 2. Because P tends to -2a^2 phi
along each geodesic ray, nonconstant phi gives a pressure with no limit at
infinity.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import fields as fl
from .fields import OneFormField, PolarGrid, ScalarField
from .snapshot import load_extra, load_snapshot, save_snapshot


class NotHarmonicError(ValueError):
    pass


class CompatibilityError(ValueError):
    pass


# ---------------------------------------------------------------------------
# boundary data at infinity


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """A real function on the circle at infinity, stored as Fourier coefficients.

    phi(theta) = cos[0] + sum_k (cos[k] cos(k theta) + sin[k] sin(k theta)),
    with sin[0] ignored. Sample input is converted through its trigonometric
    interpolant.
    """

    cos: np.ndarray
    sin: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.cos, dtype=float))
        s = np.atleast_1d(np.asarray(self.sin, dtype=float))
        n = max(len(c), len(s), 1)
        c = np.pad(c, (0, n - len(c)))
        s = np.pad(s, (0, n - len(s)))
        s[0] = 0.0
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(s))):
            raise ValueError("boundary trace must be finite")
        object.__setattr__(self, "cos", c)
        object.__setattr__(self, "sin", s)

    @classmethod
    def constant(cls, c: float) -> "BoundaryTrace":
        return cls(np.array([c]), np.array([0.0]))

    @classmethod
    def from_samples(cls, values) -> "BoundaryTrace":
        x = np.asarray(values, dtype=float)
        if x.ndim != 1 or len(x) < 1:
            raise ValueError("samples must be a nonempty 1D sequence")
        n = len(x)
        X = np.fft.rfft(x) / n
        c = 2 * X.real
        s = -2 * X.imag
        c[0] = X[0].real
        if n % 2 == 0:
            # Nyquist mode: keep the cosine, which interpolates the samples
            c[-1] = X[-1].real
            s[-1] = 0.0
        return cls(c, s)

    @property
    def n_modes(self) -> int:
        return len(self.cos)

    def __call__(self, theta) -> np.ndarray:
        th = np.asarray(theta, dtype=float)
        k = np.arange(self.n_modes)
        ang = np.multiply.outer(th, k)
        return np.cos(ang) @ self.cos + np.sin(ang) @ self.sin

    def samples(self, n: int) -> np.ndarray:
        return self(2 * np.pi * np.arange(n) / n)

    def _check_samples(self) -> np.ndarray:
        return self.samples(max(64, 8 * self.n_modes))

    @property
    def nonconstant(self) -> bool:
        x = self._check_samples()
        return bool(np.max(x) - np.min(x) > 1e-12)

    def extrema(self) -> tuple[float, float]:
        """Min and max over a dense uniform sample."""
        n = max(4096, 64 * self.n_modes)
        x = self.samples(n)
        return float(np.min(x)), float(np.max(x))

    def scaled(self, c: float) -> "BoundaryTrace":
        return BoundaryTrace(self.cos * c, self.sin * c)

    def to_json(self) -> dict:
        return {"kind": "fourier", "cos": [float(x) for x in self.cos], "sin": [float(x) for x in self.sin]}

    @classmethod
    def from_json(cls, obj) -> "BoundaryTrace":
        if isinstance(obj, (str, Path)):
            obj = json.loads(Path(obj).read_text())
        kind = obj.get("kind")
        if kind == "samples":
            return cls.from_samples(obj["values"])
        if kind == "fourier":
            return cls(np.asarray(obj.get("cos", [0.0]), dtype=float), np.asarray(obj.get("sin", [0.0]), dtype=float))
        raise ValueError(f"unknown boundary trace kind {kind!r}")


# ---------------------------------------------------------------------------
# flow state


@dataclass(frozen=True, eq=False)
class FlowState:
    v: OneFormField
    P: ScalarField
    omega: ScalarField
    psi: ScalarField | None = None
    circulation: float = 0.0
    a: float = field(default=math.nan)

    def __post_init__(self):
        if math.isnan(self.a):
            object.__setattr__(self, "a", self.v.grid.a)

    @property
    def grid(self) -> PolarGrid:
        return self.v.grid

    def components(self) -> dict[str, np.ndarray]:
        out = {"v1": self.v.v1, "v2": self.v.v2, "P": self.P.values, "omega": self.omega.values}
        if self.psi is not None:
            out["psi"] = self.psi.values
        return out

    def save(self, csv_path) -> None:
        save_snapshot(csv_path, self.grid, self.components(), {"circulation": self.circulation})

    @classmethod
    def load(cls, csv_path, circulation: float | None = None) -> "FlowState":
        grid, comp = load_snapshot(csv_path)
        if circulation is None:
            circulation = float(load_extra(csv_path).get("circulation", 0.0))
        psi = ScalarField(grid, comp["psi"]) if "psi" in comp else None
        return cls(
            OneFormField(grid, comp["v1"], comp["v2"]),
            ScalarField(grid, comp["P"]),
            ScalarField(grid, comp["omega"]),
            psi,
            circulation,
        )


# ---------------------------------------------------------------------------
# harmonic extension


def _quadrature_points(r: float, n_theta: int) -> int:
    # trapezoid error for the Poisson kernel behaves like r^M
    need = 40.0 / max(1.0 - r, 1e-12)
    m = n_theta
    while m < need:
        m *= 2
    return m


def poisson_harmonic(phi: BoundaryTrace, grid: PolarGrid, method: str = "fourier") -> ScalarField:
    """Bounded harmonic extension of phi into the disk, sampled on the grid.

    Harmonic functions of the hyperbolic metric are exactly the Euclidean
    harmonic functions of the chart, so this is the Poisson integral of phi.
    ``fourier`` sums r^k times the modes of phi; ``quadrature`` applies the
    Poisson kernel by the trapezoid rule with enough boundary points for the
    kernel width 1 - r at each ring.
    """
    if method == "fourier":
        k = np.arange(phi.n_modes)
        rk = np.power.outer(grid.r, k)
        ang = np.multiply.outer(grid.theta, k)
        return ScalarField(grid, (rk * phi.cos) @ np.cos(ang).T + (rk * phi.sin) @ np.sin(ang).T)
    if method == "quadrature":
        out = np.empty(grid.shape)
        for i, r in enumerate(grid.r):
            m = _quadrature_points(r, grid.n_theta)
            t = 2 * np.pi * np.arange(m) / m
            kern = (1 - r * r) / (1 - 2 * r * np.cos(t) + r * r)
            # circular convolution of the kernel with the boundary samples
            conv = np.fft.irfft(np.fft.rfft(kern) * np.fft.rfft(phi.samples(m)), m) / m
            out[i] = conv[:: m // grid.n_theta]
        return ScalarField(grid, out)
    raise ValueError(f"unknown method {method!r}")


def harmonic_defect(F: ScalarField, skip: int = 2) -> float:
    """Largest |Laplace-Beltrami F| away from the two boundary ring pairs."""
    lb = fl.laplace_beltrami(F).values
    return float(np.max(np.abs(lb[skip:-skip])))


def potential_flow(F: ScalarField, a: float | None = None, harmonic_tol: float | None = 1e-3) -> FlowState:
    """The exact solution v = dF, P = -2a^2 F - |dF|_a^2 / 2 built from a harmonic F."""
    grid = F.grid
    a = grid.a if a is None else a
    if abs(a - grid.a) > 1e-15 * grid.a:
        raise ValueError("curvature differs from the grid's")
    if harmonic_tol is not None:
        scale = max(1.0, float(np.max(np.abs(F.values))))
        defect = harmonic_defect(F)
        if defect > harmonic_tol * scale:
            raise NotHarmonicError(f"F is not harmonic: defect {defect:.3e} > {harmonic_tol * scale:.3e}")
    v = fl.gradient(F)
    P = ScalarField(grid, -2 * a * a * F.values - 0.5 * fl.hyperbolic_norm_form(v).values ** 2)
    return FlowState(v, P, fl.vorticity(v), None, 0.0, a)


# ---------------------------------------------------------------------------
# residuals


def advection(v: OneFormField) -> OneFormField:
    """nabla_v v in chart components: lambda^-2 sum_i v_i (nabla v)_ij."""
    T = fl.covariant_gradient(v)
    w = v.grid.col(v.grid.lam) ** -2
    return OneFormField(v.grid, w * (v.v1 * T.t11 + v.v2 * T.t21), w * (v.v1 * T.t12 + v.v2 * T.t22))


def viscous_term(v: OneFormField) -> OneFormField:
    """2 Def* Def v for divergence-free v, i.e. -Laplacian v + 2a^2 v.

    The first part is written in chart components as lambda^-2 (-Laplacian_e v_i)
    plus a first-order curl coupling; for divergence-free v it equals
    (d2 omega, -d1 omega).
    """
    g = v.grid
    a = g.a
    c = -fl._curl_e(v)  # d2 v1 - d1 v2
    k = a * a * g.col(g.one_minus_r2)
    m1 = -g.lb(v.v1) + k * g.y2 * c + 2 * a * a * v.v1
    m2 = -g.lb(v.v2) - k * g.y1 * c + 2 * a * a * v.v2
    return OneFormField(g, m1, m2)


def momentum_without_pressure(v: OneFormField) -> OneFormField:
    return viscous_term(v) + advection(v)


def ns_residual(s: FlowState) -> tuple[OneFormField, ScalarField]:
    """Momentum residual 2Def*Def v + nabla_v v + dP, and the codifferential d*v."""
    mom = momentum_without_pressure(s.v) + fl.gradient(s.P)
    return mom, fl.divergence(s.v)


def residual_sup(s: FlowState, skip: int = 0) -> tuple[float, float]:
    """Sup of |momentum|_a and |d*v| over nodes, optionally skipping boundary rings."""
    mom, mass = ns_residual(s)
    sl = slice(skip, s.grid.n_r - skip)
    return float(np.max(mom.norm_values()[sl])), float(np.max(np.abs(mass.values[sl])))


# ---------------------------------------------------------------------------
# pressure recovery


@dataclass(frozen=True)
class PressureSolveInfo:
    compatibility_defect: float
    multiplier: float
    period: float


def pressure_period(N: OneFormField, ring: int | None = None) -> float:
    """Circulation of N around a ring (default: a quarter of the way out).

    Nonzero means N is not the differential of a single-valued pressure.
    """
    g = N.grid
    ring = g.n_r // 4 if ring is None else ring
    vr, vt = N.polar()
    return float(np.sum(vt[ring]) * g.h_theta * g.r[ring])


def recover_pressure(v: OneFormField, a: float | None = None, compat_tol: float = 1e-2, return_info: bool = False):
    """Pressure with dP as close as possible to -(2Def*Def v + nabla_v v).

    Solves Laplace-Beltrami P = -div(N) with the Neumann data P_rho = -N(d/drho)
    on both rings, gauge fixed by zero mean on the innermost ring. The system
    is bordered with a multiplier on the constant mode, which absorbs the
    discrete compatibility defect.
    """
    g = v.grid
    if a is not None and abs(a - g.a) > 1e-15 * g.a:
        raise ValueError("curvature differs from the grid's")
    N = momentum_without_pressure(v)
    if not N.is_finite():
        raise ValueError("nonfinite momentum")
    Nr, _ = N.polar()
    rhs = g.col(g.lam) ** -2 * fl._div_e(N)
    flux = -Nr / g.col(g.lam)  # target P_rho

    # continuous compatibility: area integral of Laplacian = boundary flux
    area_int = -g.integrate(rhs)
    bnd = g.h_theta * (g.s[-1] * np.sum(flux[-1]) - g.s[0] * np.sum(flux[0]))
    scale = g.integrate(np.abs(rhs)) + g.h_theta * (g.s[-1] * np.sum(np.abs(flux[-1])) + g.s[0] * np.sum(np.abs(flux[0])))
    defect = abs(area_int - bnd) / scale if scale > 0 else 0.0
    if defect > compat_tol:
        raise CompatibilityError(f"Neumann data incompatible: relative defect {defect:.3e}")

    nt, n = g.n_theta, g.n_r * g.n_theta
    L = g.lb_matrix.tolil()
    b = (-rhs).ravel().copy()
    It = sp.identity(nt, format="csr")
    Dn = sp.kron(g.D_rho, It).tocsr()
    for ring in (0, g.n_r - 1):
        rows = range(ring * nt, (ring + 1) * nt)
        for row in rows:
            L.rows[row] = list(Dn[row].indices)
            L.data[row] = list(Dn[row].data)
        b[ring * nt : (ring + 1) * nt] = flux[ring]
    ones = np.ones((n, 1))
    gauge = np.zeros((1, n))
    gauge[0, :nt] = 1.0 / nt
    A = sp.bmat([[L.tocsr(), sp.csr_matrix(ones)], [sp.csr_matrix(gauge), None]], format="csc")
    sol = spla.splu(A).solve(np.concatenate([b, [0.0]]))
    P = ScalarField(g, sol[:n].reshape(g.shape))
    info = PressureSolveInfo(defect, float(sol[n]), pressure_period(N))
    return (P, info) if return_info else P


# ---------------------------------------------------------------------------
# ray limits


@dataclass(frozen=True)
class RayLimits:
    directions: np.ndarray
    limits: np.ndarray
    decay_coeffs: np.ndarray
    fit_rms: np.ndarray
    max_gap: float
    window: tuple[float, float]
    n_rings: int

    def to_json(self) -> dict:
        return {
            "directions": self.directions.tolist(),
            "limits": self.limits.tolist(),
            "decay_coeffs": self.decay_coeffs.tolist(),
            "fit_rms": self.fit_rms.tolist(),
            "max_gap": self.max_gap,
            "window": list(self.window),
            "n_rings": self.n_rings,
        }


def values_along_rays(f: ScalarField, directions) -> np.ndarray:
    """Trigonometric interpolation in theta of every ring; shape (n_r, n_dirs)."""
    g = f.grid
    X = np.fft.rfft(f.values, axis=1) / g.n_theta
    k = np.arange(X.shape[1])
    w = np.where((k == 0) | ((g.n_theta % 2 == 0) & (k == g.n_theta // 2)), 1.0, 2.0)
    ang = np.multiply.outer(k, np.asarray(directions, dtype=float))
    return (X.real * w) @ np.cos(ang) - (X.imag * w) @ np.sin(ang)


def pressure_ray_limits(P: ScalarField, directions, rho_window) -> RayLimits:
    """Limit of P along geodesic rays, from a fit P = L + c e^{-a rho} over the window."""
    g = P.grid
    lo, hi = rho_window
    mask = (g.rho >= lo - 1e-12) & (g.rho <= hi + 1e-12)
    if mask.sum() < 3:
        raise ValueError(f"window [{lo}, {hi}] holds {int(mask.sum())} rings, need at least 3")
    dirs = np.asarray(directions, dtype=float)
    vals = values_along_rays(P, dirs)[mask]
    rho = g.rho[mask]
    A = np.column_stack([np.ones_like(rho), np.exp(-g.a * (rho - rho[-1]))])
    coef, *_ = np.linalg.lstsq(A, vals, rcond=None)
    rms = np.sqrt(np.mean((A @ coef - vals) ** 2, axis=0))
    limits = coef[0]
    gap = float(np.max(limits) - np.min(limits)) if len(limits) else 0.0
    return RayLimits(dirs, limits, coef[1] * math.exp(g.a * rho[-1]), rms, gap, (float(lo), float(hi)), int(mask.sum()))
