"""Stationary Navier-Stokes flow past a disk obstacle, vorticity-streamfunction form.

Unknowns on the truncated exterior annulus R0 <= rho <= R_out are the
streamfunction psi, the vorticity omega and the circulation Gamma, with
v = -*dpsi + (Gamma / 2 pi) dtheta. The equations are

    Laplace psi = -omega,
    Laplace omega - 2a^2 omega - g(v, grad omega) = 0,

with psi = 0 on both rings, omega = 0 on the outer ring, a Thom-type wall
formula tying omega at the obstacle to the prescribed tangential wall speed,
and (when Gamma is not given) the condition that the pressure be single
valued. Picard iteration freezes the advecting velocity.
"""
from __future__ import annotations

import configparser
import json
import math
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import fields as fl
from . import flows
from . import linalg
from .fields import OneFormField, PolarGrid, ScalarField
from .stencils import upwind_first


class ConfigError(ValueError):
    pass


class SolverNaNError(RuntimeError):
    """Raised when an iterate turns nonfinite; ``state`` holds the last finite iterate."""

    def __init__(self, msg: str, state: "flows.FlowState | None", report: "SolveReport"):
        super().__init__(msg)
        self.state = state
        self.report = report


@dataclass(frozen=True)
class SolverConfig:
    a: float = 1.0
    R0: float = 1.0
    R_out: float = 8.0
    n_r: int = 128
    n_theta: int = 64
    # wall tangential speed U (1 + sum_k c_k cos k theta + s_k sin k theta)
    wall_speed: float = 0.0
    wall_cos: tuple[float, ...] = ()
    wall_sin: tuple[float, ...] = ()
    # None: chosen so the pressure is single valued
    circulation: float | None = None
    relaxation: float = 0.7
    tol: float = 1e-8
    max_iters: int = 200
    scheme: str = "coupled"
    linear_solver: str = "direct"
    wall_order: int = 2
    R1: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "wall_cos", tuple(float(x) for x in self.wall_cos))
        object.__setattr__(self, "wall_sin", tuple(float(x) for x in self.wall_sin))
        self.validate()

    def validate(self) -> None:
        if not self.a > 0:
            raise ConfigError("a must be positive")
        if not self.R0 > 0:
            raise ConfigError("R0 must be positive")
        if not self.R_out > self.R0 + 2:
            raise ConfigError(f"need R_out > R0 + 2, got R0={self.R0}, R_out={self.R_out}")
        if not 0 < self.relaxation <= 1:
            raise ConfigError("relaxation must lie in (0, 1]")
        if not self.tol >= 1e-12:
            raise ConfigError("tol must be at least 1e-12")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be positive")
        if self.scheme not in ("coupled", "segregated"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.linear_solver not in ("direct", "sor", "bicgstab"):
            raise ConfigError(f"unknown linear solver {self.linear_solver!r}")
        if self.wall_order not in (1, 2, 3):
            raise ConfigError("wall_order must be 1, 2 or 3")
        if self.scheme == "segregated" and self.circulation is None:
            raise ConfigError("the segregated scheme needs an explicit circulation")
        if not self.R0 < self.measure_R1 < self.R_out:
            raise ConfigError("R1 must lie strictly between R0 and R_out")
        if not all(math.isfinite(x) for x in (self.wall_speed, *self.wall_cos, *self.wall_sin)):
            raise ConfigError("wall data must be finite")
        try:
            self.grid()
        except fl.GridError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def measure_R1(self) -> float:
        return self.R0 + 1.0 if self.R1 is None else self.R1

    def grid(self) -> PolarGrid:
        return PolarGrid.from_geodesic(self.a, self.R0, self.R_out, self.n_r, self.n_theta)

    def wall_data(self) -> np.ndarray:
        th = 2 * np.pi * np.arange(self.n_theta) / self.n_theta
        prof = np.ones_like(th)
        for k, c in enumerate(self.wall_cos, start=1):
            prof += c * np.cos(k * th)
        for k, s in enumerate(self.wall_sin, start=1):
            prof += s * np.sin(k * th)
        return self.wall_speed * prof

    # ini round trip ----------------------------------------------------
    @classmethod
    def from_ini(cls, source) -> "SolverConfig":
        """Read from a path or from INI text with sections [geometry], [boundary], [iteration]."""
        cp = configparser.ConfigParser()
        try:
            if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and "[" not in source):
                path = Path(source)
                if not path.is_file():
                    raise ConfigError(f"config file {path} not found")
                cp.read(path)
            else:
                cp.read_string(source)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        known = {
            "geometry": {"a": float, "R0": float, "R_out": float, "n_r": int, "n_theta": int, "R1": float},
            "boundary": {"wall_speed": float, "wall_cos": _floats, "wall_sin": _floats, "circulation": _circulation},
            "iteration": {
                "relaxation": float,
                "tol": float,
                "max_iters": int,
                "scheme": str,
                "linear_solver": str,
                "wall_order": int,
            },
        }
        kw = {}
        for section in cp.sections():
            if section not in known:
                if section in ("suite", "checks"):
                    continue
                raise ConfigError(f"unknown section [{section}]")
            lookup = {k.lower(): (k, conv) for k, conv in known[section].items()}
            for key, raw in cp[section].items():
                if key not in lookup:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                name, conv = lookup[key]
                try:
                    kw[name] = conv(raw.strip())
                except ValueError as exc:
                    raise ConfigError(f"bad value for {name}: {raw!r}") from exc
        return cls(**kw)

    def to_ini(self) -> str:
        circ = "auto" if self.circulation is None else repr(self.circulation)
        lines = [
            "[geometry]",
            f"a = {self.a!r}",
            f"R0 = {self.R0!r}",
            f"R_out = {self.R_out!r}",
            f"n_r = {self.n_r}",
            f"n_theta = {self.n_theta}",
        ]
        if self.R1 is not None:
            lines.append(f"R1 = {self.R1!r}")
        lines += [
            "",
            "[boundary]",
            f"wall_speed = {self.wall_speed!r}",
            f"wall_cos = {', '.join(repr(x) for x in self.wall_cos)}",
            f"wall_sin = {', '.join(repr(x) for x in self.wall_sin)}",
            f"circulation = {circ}",
            "",
            "[iteration]",
            f"relaxation = {self.relaxation!r}",
            f"tol = {self.tol!r}",
            f"max_iters = {self.max_iters}",
            f"scheme = {self.scheme}",
            f"linear_solver = {self.linear_solver}",
            f"wall_order = {self.wall_order}",
            "",
        ]
        return "\n".join(lines)

    def to_json(self) -> dict:
        d = asdict(self)
        d["wall_cos"] = list(self.wall_cos)
        d["wall_sin"] = list(self.wall_sin)
        return d


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(x) for x in raw.replace(",", " ").split()) if raw else ()


def _circulation(raw: str):
    return None if raw.lower() in ("auto", "none", "") else float(raw)


@dataclass
class SolveReport:
    iterations: int = 0
    converged: bool = False
    diverged: bool = False
    trivial: bool = False
    residual_history: list[float] = field(default_factory=list)
    momentum_residual: float = 0.0
    momentum_residual_interior: float = 0.0
    mass_residual: float = 0.0
    vorticity_residual: float = 0.0
    energy: float = 0.0
    sup_v_R1: float = 0.0
    sup_v: float = 0.0
    circulation: float = 0.0
    pressure_period: float = 0.0
    R1: float = 0.0

    def residual_ratios(self) -> list[float]:
        h = self.residual_history
        return [h[k + 1] / h[k] for k in range(len(h) - 1) if h[k] > 0]

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# discrete operators


@lru_cache(maxsize=None)
def hermite_wall_weights(m: int) -> tuple[np.ndarray, float]:
    """Weights with f''(0) ~ sum_{k<=m} alpha_k f(k) + beta f'(0) on a unit grid, exact to degree m+1."""
    n = m + 2
    M = np.zeros((n, n))
    rhs = np.zeros(n)
    for p in range(n):
        M[p, : m + 1] = np.arange(m + 1, dtype=float) ** p
        M[p, m + 1] = 1.0 if p == 1 else 0.0
        rhs[p] = 2.0 if p == 2 else 0.0
    sol = np.linalg.solve(M, rhs)
    return sol[: m + 1], float(sol[m + 1])


def _wall_coeffs(grid: PolarGrid, order: int):
    alpha, beta = hermite_wall_weights(order)
    h = grid.h_rho
    return alpha / h**2, beta / h + grid.coth_term[0]


def wall_vorticity(psi: ScalarField, wall_data, grid: PolarGrid | None = None, order: int = 1, circulation: float = 0.0):
    """Wall vorticity from psi near the obstacle and the prescribed tangential speed.

    omega = -(psi_rr + a coth(a R0) psi_r) on the wall, with psi_r = -U + Gamma / (2 pi s(R0))
    and psi_rr from a one-sided fit to psi on ``order + 1`` rings plus psi_r
    (order 1 is Thom's formula).
    """
    grid = psi.grid if grid is None else grid
    U = np.broadcast_to(np.asarray(wall_data, dtype=float), (grid.n_theta,))
    alpha, b = _wall_coeffs(grid, order)
    dpsi = -U + circulation / (2 * np.pi * grid.s[0])
    return -(alpha @ psi.values[: len(alpha)]) - b * dpsi


def _polar_unit_components(v: OneFormField) -> tuple[np.ndarray, np.ndarray]:
    vr, vt = v.polar()
    inv = 1.0 / v.grid.col(v.grid.lam)
    return vr * inv, vt * inv


def advection_matrix(v: OneFormField) -> sp.csr_matrix:
    """Second-order upwind discretisation of f -> g(v, grad f) = v_rho f_rho + v_theta f_theta / s."""
    g = v.grid
    vrho, vth = _polar_unit_components(v)
    vth = vth / g.col(g.s)
    It = sp.identity(g.n_theta, format="csr")
    Ir = sp.identity(g.n_r, format="csr")
    out = sp.csr_matrix((g.n_r * g.n_theta,) * 2)
    for comp, op_pos, op_neg in (
        (vrho, sp.kron(upwind_first(g.n_r, g.h_rho, True), It), sp.kron(upwind_first(g.n_r, g.h_rho, False), It)),
        (vth, sp.kron(Ir, upwind_first(g.n_theta, g.h_theta, True, True)), sp.kron(Ir, upwind_first(g.n_theta, g.h_theta, False, True))),
    ):
        c = comp.ravel()
        if np.any(c != 0):
            out = out + sp.diags(np.maximum(c, 0)) @ op_pos + sp.diags(np.minimum(c, 0)) @ op_neg
    return out.tocsr()


def _ring_masks(grid: PolarGrid):
    nt, N = grid.n_theta, grid.n_r * grid.n_theta
    inner = np.zeros(N)
    inner[:nt] = 1
    outer = np.zeros(N)
    outer[-nt:] = 1
    return inner, outer, 1 - inner - outer


def transport_operator(v: OneFormField | None, grid: PolarGrid) -> sp.csr_matrix:
    L = grid.lb_matrix - 2 * grid.a**2 * sp.identity(grid.n_r * grid.n_theta, format="csr")
    if v is not None:
        L = L - advection_matrix(v)
    return L.tocsr()


def vorticity_transport_solve(
    v: OneFormField | None,
    bc,
    grid: PolarGrid | None = None,
    outer=0.0,
    method: str = "direct",
    tol: float = 1e-12,
    return_info: bool = False,
):
    """Solve Laplace omega - 2a^2 omega - g(v, grad omega) = 0 with Dirichlet data on both rings."""
    grid = v.grid if grid is None else grid
    if v is not None and v.grid != grid:
        raise fl.GridError("velocity lives on a different grid")
    inner, outer_m, interior = _ring_masks(grid)
    A = sp.diags(interior) @ transport_operator(v, grid) + sp.diags(inner + outer_m)
    b = np.zeros(grid.n_r * grid.n_theta)
    nt = grid.n_theta
    b[:nt] = np.broadcast_to(np.asarray(bc, dtype=float), (nt,))
    b[-nt:] = np.broadcast_to(np.asarray(outer, dtype=float), (nt,))
    x, info = linalg.solve(A.tocsr(), b, method=method, tol=tol)
    out = ScalarField(grid, x.reshape(grid.shape))
    return (out, info) if return_info else out


def stream_poisson_solve(
    omega: ScalarField, psi_bc=(0.0, 0.0), method: str = "direct", tol: float = 1e-12, return_info: bool = False
):
    """Solve Laplace psi = -omega with psi given on the inner and outer rings."""
    grid = omega.grid
    inner, outer_m, interior = _ring_masks(grid)
    A = sp.diags(interior) @ grid.lb_matrix + sp.diags(inner + outer_m)
    b = -(omega.values.ravel() * interior)
    nt = grid.n_theta
    b[:nt] = np.broadcast_to(np.asarray(psi_bc[0], dtype=float), (nt,))
    b[-nt:] = np.broadcast_to(np.asarray(psi_bc[1], dtype=float), (nt,))
    x, info = linalg.solve(A.tocsr(), b, method=method, tol=tol)
    out = ScalarField(grid, x.reshape(grid.shape))
    return (out, info) if return_info else out


# ---------------------------------------------------------------------------
# coupled system


class _Coupled:
    """Block system for (psi, omega[, Gamma]) with the advecting velocity frozen."""

    def __init__(self, cfg: SolverConfig, grid: PolarGrid, U: np.ndarray):
        self.cfg, self.grid, self.U = cfg, grid, U
        self.auto = cfg.circulation is None
        g = grid
        nt, N = g.n_theta, g.n_r * g.n_theta
        self.N = N
        inner, outer, interior = _ring_masks(g)
        self.interior = interior
        I = sp.identity(N, format="csr")
        alpha, b = _wall_coeffs(g, cfg.wall_order)
        e = np.zeros((1, g.n_r))
        e[0, : len(alpha)] = alpha
        It = sp.identity(nt, format="csr")
        wall_psi = sp.vstack([sp.kron(sp.csr_matrix(e), It), sp.csr_matrix((N - nt, N))]).tocsr()
        self.A_psi = sp.hstack([sp.diags(interior) @ g.lb_matrix + sp.diags(inner + outer), sp.diags(interior) @ I]).tocsr()
        self.wall_psi = wall_psi
        self.diff_omega = sp.diags(interior) @ (g.lb_matrix - 2 * g.a**2 * I) + sp.diags(inner + outer)
        self.gamma_col = np.zeros(N)
        self.gamma_col[:nt] = b / (2 * np.pi * g.s[0])
        self.rhs_omega = np.zeros(N)
        self.rhs_omega[:nt] = b * U
        # single-valued pressure: mean omega_rho on the wall = 2 a^2 mean U
        dr = g.D_rho.getrow(0).toarray().ravel() / nt
        self.period_row = np.concatenate([np.zeros(N), np.kron(dr, np.ones(nt))])
        self.period_rhs = 2 * g.a**2 * float(np.mean(U))
        self.mask_interior = sp.diags(interior)

    def velocity(self, x: np.ndarray) -> OneFormField:
        psi = ScalarField(self.grid, x[: self.N].reshape(self.grid.shape))
        return fl.streamfunction_to_velocity(psi, self.gamma(x))

    def gamma(self, x: np.ndarray) -> float:
        return float(x[2 * self.N]) if self.auto else float(self.cfg.circulation)

    def system(self, v: OneFormField | None):
        adv = advection_matrix(v) if v is not None else None
        D = self.diff_omega if adv is None else (self.diff_omega - self.mask_interior @ adv)
        A_om = sp.hstack([self.wall_psi, D]).tocsr()
        A = sp.vstack([self.A_psi, A_om]).tocsr()
        b = np.concatenate([np.zeros(self.N), self.rhs_omega])
        if self.auto:
            col = sp.csr_matrix(np.concatenate([np.zeros(self.N), self.gamma_col])[:, None])
            A = sp.bmat([[A, col], [sp.csr_matrix(self.period_row[None, :]), None]], format="csr")
            b = np.concatenate([b, [self.period_rhs]])
        else:
            b = b - np.concatenate([np.zeros(self.N), self.gamma_col]) * self.cfg.circulation
        return A, b

    def residual(self, x: np.ndarray) -> float:
        A, b = self.system(self.velocity(x))
        scale = max(np.max(np.abs(b)), np.max(np.abs(A @ x)) if np.any(x) else 0.0, 1e-300)
        return float(np.max(np.abs(A @ x - b)) / scale)


def _finish(cfg: SolverConfig, grid: PolarGrid, psi: ScalarField, omega: ScalarField, circulation: float, report: SolveReport):
    v = fl.streamfunction_to_velocity(psi, circulation)
    P, info = flows.recover_pressure(v, return_info=True)
    state = flows.FlowState(v, P, omega, psi, circulation, grid.a)
    mom, mass = flows.ns_residual(state)
    mn = mom.norm_values()
    R1 = cfg.measure_R1
    report.momentum_residual = float(np.max(mn))
    report.momentum_residual_interior = float(np.max(mn[2:-2]))
    report.mass_residual = float(np.max(np.abs(mass.values)))
    report.energy = fl.dirichlet_energy(v)
    report.sup_v_R1 = fl.sup_on_annulus(v, R1, grid.rho_out)
    report.sup_v = float(np.max(v.norm_values()))
    report.circulation = circulation
    report.pressure_period = info.period
    report.R1 = R1
    return state


def _vorticity_residual(grid: PolarGrid, psi: ScalarField, omega_nodes: np.ndarray, circulation: float) -> float:
    v = fl.streamfunction_to_velocity(psi, circulation)
    r = transport_operator(v, grid) @ omega_nodes.ravel()
    _, _, interior = _ring_masks(grid)
    scale = max(float(np.max(np.abs(grid.lb_matrix @ omega_nodes.ravel()))), 1e-300)
    return float(np.max(np.abs(r * interior)) / scale)


def trivial_state(grid: PolarGrid) -> flows.FlowState:
    z = np.zeros(grid.shape)
    return flows.FlowState(OneFormField(grid, z, z.copy()), ScalarField(grid, z.copy()), ScalarField(grid, z.copy()), ScalarField(grid, z.copy()), 0.0, grid.a)


def picard_solve(cfg: SolverConfig, log=None) -> tuple[flows.FlowState, SolveReport]:
    """Picard iteration with relaxation; returns the final state and a report."""
    grid = cfg.grid()
    U = cfg.wall_data()
    report = SolveReport(R1=cfg.measure_R1)
    if not np.any(U) and not cfg.circulation:
        report.trivial = True
        report.converged = True
        report.iterations = 1
        report.residual_history = [0.0]
        state = trivial_state(grid)
        return _finish(cfg, grid, state.psi, state.omega, 0.0, report), report
    if cfg.scheme == "segregated":
        return _segregated(cfg, grid, U, report, log)

    sysm = _Coupled(cfg, grid, U)
    n_unk = 2 * sysm.N + (1 if sysm.auto else 0)
    x = np.zeros(n_unk)
    last_good = x.copy()
    v = None
    lu = linalg.ReusableLU(tol=min(cfg.tol / 10, 1e-10)) if cfg.linear_solver == "direct" else None
    for k in range(1, cfg.max_iters + 1):
        A, b = sysm.system(v)
        if lu is not None:
            x_new, _ = lu(A, b, x0=x)
        else:
            x_new, _ = linalg.solve(A, b, method=cfg.linear_solver, tol=cfg.tol / 10)
        alpha = 1.0 if k == 1 else cfg.relaxation
        x = x + alpha * (x_new - x)
        if not np.all(np.isfinite(x)):
            report.iterations, report.diverged = k, True
            raise SolverNaNError(f"nonfinite iterate at iteration {k}", _dump(grid, sysm, last_good), report)
        last_good = x.copy()
        v = sysm.velocity(x)
        res = sysm.residual(x)
        report.residual_history.append(res)
        report.iterations = k
        if log:
            log(f"iter {k}: residual {res:.3e}")
        if res < cfg.tol:
            report.converged = True
            break
    report.diverged = not report.converged
    psi = ScalarField(grid, x[: sysm.N].reshape(grid.shape))
    gamma = sysm.gamma(x)
    omega_nodes = x[sysm.N : 2 * sysm.N].reshape(grid.shape)
    report.vorticity_residual = _vorticity_residual(grid, psi, omega_nodes, gamma)
    state = _finish(cfg, grid, psi, ScalarField(grid, omega_nodes), gamma, report)
    return state, report


def _dump(grid: PolarGrid, sysm: _Coupled, x: np.ndarray) -> flows.FlowState:
    psi = ScalarField(grid, x[: sysm.N].reshape(grid.shape))
    omega = ScalarField(grid, x[sysm.N : 2 * sysm.N].reshape(grid.shape))
    gamma = sysm.gamma(x)
    return flows.FlowState(fl.streamfunction_to_velocity(psi, gamma), ScalarField(grid, np.zeros(grid.shape)), omega, psi, gamma, grid.a)


def _segregated(cfg: SolverConfig, grid: PolarGrid, U: np.ndarray, report: SolveReport, log):
    gamma = float(cfg.circulation)
    psi = ScalarField(grid, np.zeros(grid.shape))
    omega = ScalarField(grid, np.zeros(grid.shape))
    for k in range(1, cfg.max_iters + 1):
        v = fl.streamfunction_to_velocity(psi, gamma)
        wall = wall_vorticity(psi, U, grid, cfg.wall_order, gamma)
        try:
            om_new = vorticity_transport_solve(v, wall, grid, method=cfg.linear_solver, tol=cfg.tol / 10)
            omega_next = omega + cfg.relaxation * (om_new - omega)
            psi_new = stream_poisson_solve(omega_next, method=cfg.linear_solver, tol=cfg.tol / 10)
        except linalg.LinearSolveError:
            psi_new = ScalarField(grid, np.full(grid.shape, np.nan))
        if not psi_new.is_finite():
            report.iterations, report.diverged = k, True
            last = flows.FlowState(fl.streamfunction_to_velocity(psi, gamma), ScalarField(grid, np.zeros(grid.shape)),
                                   omega, psi, gamma, grid.a)
            raise SolverNaNError(f"nonfinite iterate at iteration {k}", last, report)
        omega = omega_next
        change = float(np.max(np.abs(psi_new.values - psi.values)) / max(np.max(np.abs(psi_new.values)), 1e-300))
        psi = psi_new
        report.residual_history.append(change)
        report.iterations = k
        if log:
            log(f"iter {k}: change {change:.3e}")
        if change < cfg.tol:
            report.converged = True
            break
    report.diverged = not report.converged
    report.vorticity_residual = _vorticity_residual(grid, psi, omega.values, gamma)
    return _finish(cfg, grid, psi, omega, gamma, report), report


def with_overrides(cfg: SolverConfig, **kw) -> SolverConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
