"""Scalar fields, 1-forms and (0,2)-tensors sampled on an annular polar grid.

Nodes are uniform in geodesic radius rho and in angle theta. Fields store
chart components in the Poincare disk (v = v1 dy1 + v2 dy2); derivatives are
taken in (rho, theta) and converted with d/dr = lambda d/drho, where
lambda = 2 / (a (1 - r^2)) is the conformal factor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import hypgeom
from .stencils import apply_axis0, apply_axis1, diff_matrix, periodic_diff_matrix


class GridError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PolarGrid:
    """Tensor grid on the chart annulus r_in <= |y| <= r_out."""

    a: float
    r_in: float
    r_out: float
    n_r: int
    n_theta: int

    def __post_init__(self):
        if not self.a > 0:
            raise GridError("curvature parameter must be positive")
        if not 0 < self.r_in < self.r_out < 1:
            raise GridError(f"need 0 < r_in < r_out < 1, got {self.r_in}, {self.r_out}")
        if self.r_out > 1 - hypgeom.BOUNDARY_MARGIN:
            raise GridError("outer radius too close to the ideal boundary")
        if self.n_r < 16:
            raise GridError("n_r must be at least 16")
        if self.n_theta < 16 or self.n_theta & (self.n_theta - 1):
            raise GridError("n_theta must be a power of two, at least 16")

    @classmethod
    def from_geodesic(cls, a: float, R0: float, R_out: float, n_r: int, n_theta: int) -> "PolarGrid":
        return cls(a, math.tanh(a * R0 / 2), math.tanh(a * R_out / 2), n_r, n_theta)

    def __eq__(self, other):
        return isinstance(other, PolarGrid) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def key(self):
        return (self.a, self.r_in, self.r_out, self.n_r, self.n_theta)

    def describe(self) -> dict:
        return {"a": self.a, "r_in": self.r_in, "r_out": self.r_out, "n_r": self.n_r, "n_theta": self.n_theta}

    # radial geometry -------------------------------------------------
    @cached_property
    def rho_in(self) -> float:
        return 2 * math.atanh(self.r_in) / self.a

    @cached_property
    def rho_out(self) -> float:
        return 2 * math.atanh(self.r_out) / self.a

    @cached_property
    def rho(self) -> np.ndarray:
        return np.linspace(self.rho_in, self.rho_out, self.n_r)

    @cached_property
    def h_rho(self) -> float:
        return (self.rho_out - self.rho_in) / (self.n_r - 1)

    @cached_property
    def theta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_theta) / self.n_theta

    @cached_property
    def h_theta(self) -> float:
        return 2 * np.pi / self.n_theta

    @cached_property
    def r(self) -> np.ndarray:
        return np.tanh(self.a * self.rho / 2)

    @cached_property
    def one_minus_r2(self) -> np.ndarray:
        # sech^2(a rho / 2), exact even where r is within rounding of 1
        return 1.0 / np.cosh(self.a * self.rho / 2) ** 2

    @cached_property
    def lam(self) -> np.ndarray:
        return 2.0 / (self.a * self.one_minus_r2)

    @cached_property
    def s(self) -> np.ndarray:
        """Circumference factor sinh(a rho) / a (the metric is drho^2 + s^2 dtheta^2)."""
        return np.sinh(self.a * self.rho) / self.a

    @cached_property
    def coth_term(self) -> np.ndarray:
        return self.a / np.tanh(self.a * self.rho)

    # meshes, shape (n_r, n_theta) -------------------------------------
    @cached_property
    def rho_mesh(self) -> np.ndarray:
        return np.repeat(self.rho[:, None], self.n_theta, axis=1)

    @cached_property
    def theta_mesh(self) -> np.ndarray:
        return np.repeat(self.theta[None, :], self.n_r, axis=0)

    @cached_property
    def cos(self) -> np.ndarray:
        return np.cos(self.theta_mesh)

    @cached_property
    def sin(self) -> np.ndarray:
        return np.sin(self.theta_mesh)

    @cached_property
    def y1(self) -> np.ndarray:
        return self.r[:, None] * self.cos

    @cached_property
    def y2(self) -> np.ndarray:
        return self.r[:, None] * self.sin

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_r, self.n_theta)

    def col(self, radial: np.ndarray) -> np.ndarray:
        return radial[:, None]

    # difference operators ---------------------------------------------
    @cached_property
    def D_rho(self):
        return diff_matrix(self.n_r, self.h_rho, 1)

    @cached_property
    def D2_rho(self):
        return diff_matrix(self.n_r, self.h_rho, 2)

    @cached_property
    def D_theta(self):
        return periodic_diff_matrix(self.n_theta, self.h_theta, 1)

    @cached_property
    def D2_theta(self):
        return periodic_diff_matrix(self.n_theta, self.h_theta, 2)

    @cached_property
    def lb_matrix(self) -> sp.csr_matrix:
        """Laplace-Beltrami on the flattened (ring-major) node vector."""
        It = sp.identity(self.n_theta, format="csr")
        Ir = sp.identity(self.n_r, format="csr")
        return (
            sp.kron(self.D2_rho, It)
            + sp.diags(np.repeat(self.coth_term, self.n_theta)) @ sp.kron(self.D_rho, It)
            + sp.diags(np.repeat(self.s**-2, self.n_theta)) @ sp.kron(Ir, self.D2_theta)
        ).tocsr()

    def d_rho(self, f: np.ndarray) -> np.ndarray:
        return apply_axis0(self.D_rho, f)

    def d2_rho(self, f: np.ndarray) -> np.ndarray:
        return apply_axis0(self.D2_rho, f)

    def d_theta(self, f: np.ndarray) -> np.ndarray:
        return apply_axis1(self.D_theta, f)

    def d2_theta(self, f: np.ndarray) -> np.ndarray:
        return apply_axis1(self.D2_theta, f)

    def d_r(self, f: np.ndarray) -> np.ndarray:
        """Chart radial derivative d/dr = lambda d/drho."""
        return self.col(self.lam) * self.d_rho(f)

    def partials(self, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Cartesian chart partials (d/dy1 f, d/dy2 f)."""
        fr = self.d_r(f)
        ft = self.d_theta(f) / self.col(self.r)
        return self.cos * fr - self.sin * ft, self.sin * fr + self.cos * ft

    def euclid_laplacian(self, f: np.ndarray) -> np.ndarray:
        return self.col(self.lam**2) * self.lb(f)

    def lb(self, f: np.ndarray) -> np.ndarray:
        """Laplace-Beltrami in geodesic polar form f'' + a coth(a rho) f' + f_tt / s^2."""
        return self.d2_rho(f) + self.col(self.coth_term) * self.d_rho(f) + self.d2_theta(f) / self.col(self.s**2)

    # quadrature -------------------------------------------------------
    def radial_weights(self, rho_lo: float | None = None, rho_hi: float | None = None) -> np.ndarray:
        """Trapezoid weights in rho for integrals over rho_lo <= rho <= rho_hi.

        Partial cells are integrated exactly for the piecewise-linear
        interpolant, so the rule stays second order for any window.
        """
        lo = self.rho_in if rho_lo is None else rho_lo
        hi = self.rho_out if rho_hi is None else rho_hi
        tol = 1e-12 * max(1.0, self.rho_out)
        if lo < self.rho_in - tol or hi > self.rho_out + tol or hi < lo:
            raise GridError(f"region [{lo}, {hi}] not inside grid [{self.rho_in}, {self.rho_out}]")
        lo, hi = max(lo, self.rho_in), min(hi, self.rho_out)
        w = np.zeros(self.n_r)
        x = self.rho
        h = self.h_rho
        for i in range(self.n_r - 1):
            alpha, beta = max(lo, x[i]), min(hi, x[i + 1])
            if beta <= alpha:
                continue
            # integral over [alpha, beta] of the hat functions of nodes i, i+1
            ta, tb = (alpha - x[i]) / h, (beta - x[i]) / h
            w[i] += h * ((tb - tb**2 / 2) - (ta - ta**2 / 2))
            w[i + 1] += h * (tb**2 - ta**2) / 2
        return w

    def integrate(self, values: np.ndarray, rho_lo: float | None = None, rho_hi: float | None = None) -> float:
        """Integral of a scalar sample array against the hyperbolic area form."""
        w = self.radial_weights(rho_lo, rho_hi) * self.s
        return float(self.h_theta * np.sum(w[:, None] * values))

    def ring_index(self, rho: float) -> tuple[int, float]:
        """Bracketing ring i and fraction t with rho = (1-t) rho_i + t rho_{i+1}."""
        tol = 1e-12 * max(1.0, self.rho_out)
        if rho < self.rho_in - tol or rho > self.rho_out + tol:
            raise GridError(f"rho={rho} outside grid range [{self.rho_in}, {self.rho_out}]")
        x = (min(max(rho, self.rho_in), self.rho_out) - self.rho_in) / self.h_rho
        i = min(int(math.floor(x)), self.n_r - 2)
        return i, x - i

    def scalar(self, values) -> "ScalarField":
        return ScalarField(self, np.broadcast_to(np.asarray(values, dtype=float), self.shape).copy())


class _Arith:
    """Linear-space arithmetic for fields on a common grid."""

    _parts: tuple[str, ...] = ()

    def _combine(self, other, op):
        if isinstance(other, type(self)):
            if other.grid != self.grid:
                raise GridError("fields live on different grids")
            return type(self)(self.grid, *(op(getattr(self, p), getattr(other, p)) for p in self._parts))
        return type(self)(self.grid, *(op(getattr(self, p), other) for p in self._parts))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, c):
        return type(self)(self.grid, *(getattr(self, p) * c for p in self._parts))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(getattr(self, p))) for p in self._parts)


@dataclass(frozen=True, eq=False)
class ScalarField(_Arith):
    grid: PolarGrid
    values: np.ndarray
    _parts = ("values",)

    def norm_values(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True, eq=False)
class OneFormField(_Arith):
    grid: PolarGrid
    v1: np.ndarray
    v2: np.ndarray
    _parts = ("v1", "v2")

    @classmethod
    def zeros(cls, grid: PolarGrid) -> "OneFormField":
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape))

    def polar(self) -> tuple[np.ndarray, np.ndarray]:
        """Euclidean polar components (v . e_r, v . e_theta) of the chart vector."""
        g = self.grid
        return g.cos * self.v1 + g.sin * self.v2, -g.sin * self.v1 + g.cos * self.v2

    def norm_values(self) -> np.ndarray:
        return hyperbolic_norm_form(self).values


@dataclass(frozen=True, eq=False)
class TwoTensorField(_Arith):
    """Components t_jk of sum t_jk dy^j (x) dy^k; the first index is the derivative slot."""

    grid: PolarGrid
    t11: np.ndarray
    t12: np.ndarray
    t21: np.ndarray
    t22: np.ndarray
    _parts = ("t11", "t12", "t21", "t22")

    def norm_values(self) -> np.ndarray:
        return hyperbolic_norm_tensor(self).values


def _inv_lam(grid: PolarGrid) -> np.ndarray:
    return grid.col(1.0 / grid.lam)


def christoffel_terms(grid: PolarGrid, v1: np.ndarray, v2: np.ndarray):
    """Connection corrections c_jk so that (nabla v)_jk = d_j v_k + c_jk."""
    q = grid.col(grid.one_minus_r2)
    y1, y2 = grid.y1, grid.y2
    c11 = (-2 * y1 * v1 + 2 * y2 * v2) / q
    c12 = (-2 * y2 * v1 - 2 * y1 * v2) / q
    c22 = (2 * y1 * v1 - 2 * y2 * v2) / q
    return c11, c12, c12, c22


def gradient(f: ScalarField) -> OneFormField:
    """Exterior derivative dF, chart components (d1 F, d2 F)."""
    d1, d2 = f.grid.partials(f.values)
    return OneFormField(f.grid, d1, d2)


def covariant_gradient(v: OneFormField) -> TwoTensorField:
    """Levi-Civita covariant derivative of a 1-form in chart components."""
    g = v.grid
    d1v1, d2v1 = g.partials(v.v1)
    d1v2, d2v2 = g.partials(v.v2)
    c11, c12, c21, c22 = christoffel_terms(g, v.v1, v.v2)
    return TwoTensorField(g, d1v1 + c11, d1v2 + c12, d2v1 + c21, d2v2 + c22)


def hyperbolic_norm_form(v: OneFormField) -> ScalarField:
    """|v|_a = (a (1 - |y|^2) / 2) |(v1, v2)|."""
    return ScalarField(v.grid, _inv_lam(v.grid) * np.hypot(v.v1, v.v2))


def hyperbolic_norm_tensor(T: TwoTensorField) -> ScalarField:
    w = _inv_lam(T.grid) ** 2
    return ScalarField(T.grid, w * np.sqrt(T.t11**2 + T.t12**2 + T.t21**2 + T.t22**2))


def antisymmetric_part_norm(T: TwoTensorField) -> ScalarField:
    """Norm of the alternation (T - T^t)/2; the pointwise bound |dv| <= |nabla v| uses this."""
    w = _inv_lam(T.grid) ** 2
    return ScalarField(T.grid, w * np.abs(T.t12 - T.t21) / math.sqrt(2))


def _curl_e(v: OneFormField) -> np.ndarray:
    # d1 v2 - d2 v1 = (1/r) (d_r(r v_t) - d_t v_r)
    g = v.grid
    vr, vt = v.polar()
    r = g.col(g.r)
    return (g.d_r(r * vt) - g.d_theta(vr)) / r


def _div_e(v: OneFormField) -> np.ndarray:
    g = v.grid
    vr, vt = v.polar()
    r = g.col(g.r)
    return (g.d_r(r * vr) + g.d_theta(vt)) / r


def vorticity(v: OneFormField) -> ScalarField:
    """omega = *dv = lambda^-2 (d1 v2 - d2 v1)."""
    return ScalarField(v.grid, _inv_lam(v.grid) ** 2 * _curl_e(v))


def divergence(v: OneFormField) -> ScalarField:
    """Codifferential d*v = -lambda^-2 (d1 v1 + d2 v2)."""
    return ScalarField(v.grid, -(_inv_lam(v.grid) ** 2) * _div_e(v))


def euclidean_divergence(v: OneFormField) -> ScalarField:
    return ScalarField(v.grid, _div_e(v))


def laplace_beltrami(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, f.grid.lb(f.values))


def dtheta_form(grid: PolarGrid) -> OneFormField:
    """The harmonic 1-form dtheta = (-y2 dy1 + y1 dy2) / |y|^2."""
    r2 = grid.col(grid.r**2)
    return OneFormField(grid, -grid.y2 / r2, grid.y1 / r2)


def streamfunction_to_velocity(psi: ScalarField, circulation: float = 0.0) -> OneFormField:
    """v = -*dpsi + (circulation / 2 pi) dtheta, so that vorticity(v) = -Laplace(psi).

    Built from the polar derivatives so the discrete divergence vanishes to
    rounding: r v_r = psi_theta and v_t = -psi_r + circulation / (2 pi r).
    """
    g = psi.grid
    r = g.col(g.r)
    vr = g.d_theta(psi.values) / r
    vt = -g.d_r(psi.values) + circulation / (2 * np.pi * r)
    return OneFormField(g, g.cos * vr - g.sin * vt, g.sin * vr + g.cos * vt)


def pointwise_norm(x) -> np.ndarray:
    return x.norm_values()


def integrate(f, rho_lo: float | None = None, rho_hi: float | None = None) -> float:
    values = f.values if isinstance(f, ScalarField) else np.asarray(f)
    grid = f.grid
    return grid.integrate(values, rho_lo, rho_hi)


def lp_norm(x, p: float, rho_lo: float | None = None, rho_hi: float | None = None) -> float:
    """(integral of |x|_a^p dVol)^(1/p) over the geodesic annulus [rho_lo, rho_hi]."""
    if p <= 0:
        raise ValueError("p must be positive")
    n = pointwise_norm(x)
    return x.grid.integrate(n**p, rho_lo, rho_hi) ** (1.0 / p)


def ring_values(x, rho: float) -> np.ndarray:
    """Pointwise norm on the circle rho, interpolated linearly in chart radius."""
    g = x.grid
    n = pointwise_norm(x)
    i, _ = g.ring_index(rho)
    r_target = math.tanh(g.a * rho / 2)
    r0, r1 = g.r[i], g.r[i + 1]
    t = (r_target - r0) / (r1 - r0)
    return (1 - t) * n[i] + t * n[i + 1]


def sup_on_circle(x, rho: float) -> float:
    return float(np.max(ring_values(x, rho)))


def sup_on_annulus(x, rho_lo: float, rho_hi: float) -> float:
    """Max of |x|_a over nodes with rho_lo <= rho <= rho_hi plus the interpolated end circles."""
    g = x.grid
    n = pointwise_norm(x)
    mask = (g.rho >= rho_lo) & (g.rho <= rho_hi)
    best = float(np.max(n[mask])) if mask.any() else 0.0
    for edge in (rho_lo, rho_hi):
        if g.rho_in <= edge <= g.rho_out:
            best = max(best, sup_on_circle(x, edge))
    return best


def dirichlet_energy(v: OneFormField, rho_lo: float | None = None, rho_hi: float | None = None) -> float:
    """Integral of |nabla v|_a^2."""
    return integrate(ScalarField(v.grid, hyperbolic_norm_tensor(covariant_gradient(v)).values ** 2), rho_lo, rho_hi)


def from_function(grid: PolarGrid, fn) -> ScalarField:
    """Sample fn(y1, y2) at the grid nodes."""
    return ScalarField(grid, np.asarray(fn(grid.y1, grid.y2), dtype=float) * np.ones(grid.shape))


def form_from_functions(grid: PolarGrid, fn1, fn2) -> OneFormField:
    ones = np.ones(grid.shape)
    return OneFormField(grid, fn1(grid.y1, grid.y2) * ones, fn2(grid.y1, grid.y2) * ones)
