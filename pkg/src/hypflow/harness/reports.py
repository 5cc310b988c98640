"""Report records shared by the checks, plus the cutoff functions."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else repr(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def fit_log_slope(rho: np.ndarray, values: np.ndarray) -> float:
    """Least-squares slope of log(values) against rho; nan when fewer than two positive values."""
    rho = np.asarray(rho, dtype=float)
    values = np.asarray(values, dtype=float)
    ok = values > 1e-300
    if ok.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(rho[ok], np.log(values[ok]), 1)
    return float(slope)


@dataclass
class DecayReport:
    """Circle sup-norms along a radial sweep and the fitted exponential decay.

    ``fitted_rate`` is the decay rate -d log(sup)/d rho (positive for decay);
    ``slope`` is the raw log-linear slope.
    """

    name: str
    radii: list[float]
    sup_values: list[float]
    bound_values: list[float]
    fitted_rate: float
    theoretical_rate: float
    fit_window: tuple[float, float]
    passed: bool
    vacuous: bool = False
    details: dict = field(default_factory=dict)

    @property
    def slope(self) -> float:
        return -self.fitted_rate

    @property
    def margin(self) -> float:
        return self.fitted_rate - self.theoretical_rate

    def rate_ok(self, frac: float = 0.05) -> bool:
        return self.margin >= -frac * self.theoretical_rate

    def to_json(self) -> dict:
        d = asdict(self)
        d["margin"] = self.margin
        d["slope"] = self.slope
        return _jsonable(d)

    def write_csv(self, path) -> None:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        with p.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["rho", "sup_value", "bound_value"])
            for r, s, b in zip(self.radii, self.sup_values, self.bound_values):
                w.writerow([repr(float(r)), repr(float(s)), repr(float(b))])


@dataclass
class InequalityReport:
    """lhs <= rhs check. Vacuous when both sides are negligible."""

    name: str
    lhs: float
    rhs: float
    passed: bool
    vacuous: bool = False
    details: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        if self.vacuous:
            return 0.0
        return self.lhs / self.rhs if self.rhs > 0 else math.inf

    def to_json(self) -> dict:
        d = asdict(self)
        d["ratio"] = self.ratio
        return _jsonable(d)


def inequality(name: str, lhs: float, rhs: float, floor: float = 1e-14, **details) -> InequalityReport:
    if abs(lhs) < floor and abs(rhs) < floor:
        return InequalityReport(name, lhs, rhs, True, True, details)
    return InequalityReport(name, lhs, rhs, bool(lhs <= rhs), False, details)


@dataclass
class AuditReport:
    """Outcome of an inequality checked over many randomized inputs."""

    name: str
    samples: int
    violations: int
    max_ratio: float
    seed: int
    vacuous: int = 0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.samples > 0

    def to_json(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return _jsonable(d)


# ---------------------------------------------------------------------------
# cutoffs


def smoothstep5(t):
    """Quintic smoothstep: 0 for t <= 0, 1 for t >= 1, C^2 in between."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t**3 * (10 - 15 * t + 6 * t * t)


def smoothstep5_d1(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    return np.where(inside, 30 * t * t * (1 - t) ** 2, 0.0)


def smoothstep5_d2(t):
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    return np.where(inside, 60 * t * (1 - t) * (1 - 2 * t), 0.0)


@dataclass(frozen=True)
class CutoffSpec:
    """phi1 ramps from 0 at (R0+R1)/2 to 1 at R1; phi2 falls from 1 at 1 to 0 at 2."""

    R0: float
    R1: float

    def __post_init__(self):
        if not self.R1 > self.R0 > 0:
            raise ValueError("cutoff needs R1 > R0 > 0")

    @property
    def mid(self) -> float:
        return 0.5 * (self.R0 + self.R1)

    @property
    def width(self) -> float:
        return self.R1 - self.mid

    def phi1(self, rho):
        return smoothstep5((np.asarray(rho) - self.mid) / self.width)

    def phi1_d1(self, rho):
        return smoothstep5_d1((np.asarray(rho) - self.mid) / self.width) / self.width

    def phi1_d2(self, rho):
        return smoothstep5_d2((np.asarray(rho) - self.mid) / self.width) / self.width**2

    @staticmethod
    def phi2(t):
        return 1.0 - smoothstep5(np.asarray(t) - 1.0)

    @staticmethod
    def phi2_d1(t):
        return -smoothstep5_d1(np.asarray(t) - 1.0)

    def constant(self, a: float, samples: int = 20001) -> float:
        """sup |Laplace(phi1 o rho)| + sup |grad(phi1 o rho)| over the ramp."""
        rho = np.linspace(self.mid, self.R1, samples)
        d1 = self.phi1_d1(rho)
        lap = self.phi1_d2(rho) + a / np.tanh(a * rho) * d1
        return float(np.max(np.abs(lap)) + np.max(np.abs(d1)))

    def validate(self, samples: int = 4001) -> dict:
        """Check the sandwich and slope conditions on dense samples."""
        rho = np.linspace(0.0, self.R1 + 2.0, samples)
        p1, d1 = self.phi1(rho), self.phi1_d1(rho)
        in_ramp = (rho >= self.mid) & (rho <= self.R1)
        ok1 = bool(
            np.all(p1[rho >= self.R1] >= 1 - 1e-15)
            and np.all(p1[rho < self.mid] <= 1e-15)
            and np.all((p1 >= 0) & (p1 <= 1))
            and np.all(np.abs(d1) <= 4.0 / (self.R1 - self.R0) + 1e-12)
            and np.all(d1[~in_ramp] == 0)
        )
        t = np.linspace(0.0, 3.0, samples)
        p2, d2 = self.phi2(t), self.phi2_d1(t)
        ok2 = bool(
            np.all(p2[t <= 1] >= 1 - 1e-15)
            and np.all(p2[t >= 2] <= 1e-15)
            and np.all((p2 >= 0) & (p2 <= 1))
            and np.all(np.abs(d2) <= 2.0)
            and np.all(d2[(t < 1) | (t > 2)] == 0)
        )
        return {
            "phi1_ok": ok1,
            "phi2_ok": ok2,
            "phi1_max_slope": float(np.max(np.abs(d1))),
            "phi1_slope_bound": 4.0 / (self.R1 - self.R0),
            "phi2_max_slope": float(np.max(np.abs(d2))),
        }
