"""Sup-norm ratio for manufactured linear Stokes instances on Euclidean disks.

An instance is a polynomial streamfunction psi and pressure P on D(R);
u = (d2 psi, -d1 psi) is divergence free and F = -Lap u + grad P makes
(u, P, F) an exact solution. The ratio

    ||u||_inf(D(R/2)) / (R^{1/2} ||F||_{4/3} + R^{-1} ||u||_2 + ||grad u||_2)

is invariant under u_R(y) = R^-2 u(Ry), P_R(y) = R^-1 P(Ry), F_R(y) = F(Ry).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P2

from .reports import _jsonable


def _d(c: np.ndarray, axis: int) -> np.ndarray:
    return P2.polyder(c, axis=axis)


@dataclass(frozen=True, eq=False)
class StokesInstance:
    """psi[i, j] and p[i, j] are coefficients of y1^i y2^j."""

    psi: np.ndarray
    p: np.ndarray
    R: float = 1.0

    def velocity_coeffs(self):
        return _d(self.psi, 1), -_d(self.psi, 0)

    def forcing_coeffs(self):
        """F = -Lap u + grad P as coefficient arrays."""
        u1, u2 = self.velocity_coeffs()
        shape = _shape(u1, self.p)

        def lap(c):
            return _pad(_d(_d(c, 0), 0), c.shape) + _pad(_d(_d(c, 1), 1), c.shape)

        F1 = -_pad(lap(u1), shape) + _pad(_d(self.p, 0), shape)
        F2 = -_pad(lap(u2), shape) + _pad(_d(self.p, 1), shape)
        return F1, F2

    def rescaled(self, R: float) -> "StokesInstance":
        """The instance on D(self.R / R) given by the scaling laws with factor R."""
        i, j = np.indices(self.psi.shape)
        k, l = np.indices(self.p.shape)
        return StokesInstance(self.psi * R ** (i + j - 3.0), self.p * R ** (k + l - 1.0), self.R / R)


def _shape(a: np.ndarray, b: np.ndarray) -> tuple[int, int]:
    return max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1])


def _pad(c: np.ndarray, shape) -> np.ndarray:
    out = np.zeros(shape)
    n0, n1 = min(c.shape[0], shape[0]), min(c.shape[1], shape[1])
    out[:n0, :n1] = c[:n0, :n1]
    return out


def random_instance(rng: np.random.Generator, degree: int = 5, R: float = 1.0) -> StokesInstance:
    """Random polynomial instance on D(R), coefficients of order one after scaling to the unit disk."""
    psi = np.zeros((degree + 1, degree + 1))
    p = np.zeros((degree, degree))
    for i in range(degree + 1):
        for j in range(degree + 1 - i):
            psi[i, j] = rng.normal() if i + j >= 2 else 0.0
    for i in range(degree):
        for j in range(degree - i):
            p[i, j] = rng.normal() if i + j >= 1 else 0.0
    base = StokesInstance(psi, p, 1.0)
    return base if R == 1.0 else base.rescaled(1.0 / R)


@dataclass(frozen=True)
class Quadrature:
    n_r: int = 32
    n_theta: int = 64
    n_sup_r: int = 48
    n_sup_theta: int = 96

    def refined(self) -> "Quadrature":
        return Quadrature(2 * self.n_r, 2 * self.n_theta, 2 * self.n_sup_r, 2 * self.n_sup_theta)


def _disk_nodes(R: float, n_r: int, n_t: int):
    x, w = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * R * (x + 1)
    wr = 0.5 * R * w * r
    th = 2 * np.pi * np.arange(n_t) / n_t
    rr, tt = np.meshgrid(r, th, indexing="ij")
    return rr * np.cos(tt), rr * np.sin(tt), np.outer(wr, np.full(n_t, 2 * np.pi / n_t))


def _ev(c, y1, y2):
    return P2.polyval2d(y1, y2, c)


def norms(inst: StokesInstance, q: Quadrature = Quadrature()) -> dict:
    R = inst.R
    y1, y2, w = _disk_nodes(R, q.n_r, q.n_theta)
    u1c, u2c = inst.velocity_coeffs()
    F1c, F2c = inst.forcing_coeffs()
    u1, u2 = _ev(u1c, y1, y2), _ev(u2c, y1, y2)
    grads = [_ev(_d(c, ax), y1, y2) for c in (u1c, u2c) for ax in (0, 1)]
    F = np.hypot(_ev(F1c, y1, y2), _ev(F2c, y1, y2))
    F43 = float(np.sum(w * F ** (4 / 3)) ** 0.75)
    u2n = float(np.sqrt(np.sum(w * (u1 * u1 + u2 * u2))))
    g2n = float(np.sqrt(np.sum(w * sum(gg * gg for gg in grads))))
    # sup over D(R/2): polar sample including the centre
    r = 0.5 * R * np.linspace(0, 1, q.n_sup_r)
    th = 2 * np.pi * np.arange(q.n_sup_theta) / q.n_sup_theta
    s1, s2 = np.outer(r, np.cos(th)), np.outer(r, np.sin(th))
    sup = float(np.max(np.hypot(_ev(u1c, s1, s2), _ev(u2c, s1, s2))))
    denom = np.sqrt(R) * F43 + u2n / R + g2n
    return {"sup": sup, "F_43": F43, "u_2": u2n, "grad_u_2": g2n, "ratio": float(sup / denom) if denom > 0 else 0.0}


@dataclass
class StokesReport:
    ratios: dict
    invariance_error: float
    refinement_change: float
    spread_across_R: float
    passed: bool
    vacuous: bool = False
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return _jsonable(asdict(self))


def check_stokes_supnorm_ratio(
    instances: list[StokesInstance],
    R_values=(0.5, 1.0, 2.0),
    quad: Quadrature = Quadrature(),
    stable_tol: float = 0.10,
    invariance_tol: float = 1e-6,
) -> StokesReport:
    """Empirical sup of the ratio across instances, per R.

    Each instance lives on D(1); its copy on D(R) is built from the scaling
    laws and evaluated independently there. Invariance compares the ratio of
    each copy with the D(1) original. Stability compares the empirical sup
    under quadrature refinement and across R.
    """
    sups, fine_sups, inv = {}, {}, 0.0
    for R in R_values:
        vals, fine = [], []
        for inst in instances:
            base = norms(inst, quad)["ratio"]
            scaled = inst.rescaled(1.0 / R)
            rr = norms(scaled, quad)["ratio"]
            if base > 0:
                inv = max(inv, abs(rr - base) / base)
            elif rr != 0:
                inv = max(inv, abs(rr))
            vals.append(rr)
            fine.append(norms(scaled, quad.refined())["ratio"])
        sups[R] = max(vals) if vals else 0.0
        fine_sups[R] = max(fine) if fine else 0.0
    ref = max((abs(fine_sups[R] - sups[R]) / sups[R] for R in R_values if sups[R] > 0), default=0.0)
    pos = [v for v in sups.values() if v > 0]
    spread = (max(pos) / min(pos) - 1.0) if pos else 0.0
    passed = inv <= invariance_tol and ref <= stable_tol and spread <= stable_tol
    return StokesReport({repr(R): v for R, v in sups.items()}, float(inv), float(ref), float(spread), bool(passed),
                        not pos, {"fine_ratios": {repr(R): v for R, v in fine_sups.items()}, "instances": len(instances)})
