"""Suite runner: executes selected checks and assembles one JSON report.

The report carries no timings or host data, so the same seed and config
give byte-identical output.
"""
from __future__ import annotations

import configparser
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .. import __version__, flows, hypgeom, solver
from ..solver import ConfigError, SolverConfig
from . import audits, checks, stokes
from .reports import _jsonable

ALL_CHECKS = ("constants", "barrier", "exact", "pressure", "transport", "solve", "stokes", "audits")


@dataclass(frozen=True)
class Thresholds:
    residual_tol: float = 1e-3
    min_order: float = 1.8
    velocity_reduction: float = 1e-2
    rate_frac: float = 0.05
    ray_tol: float = 0.05
    gap_frac: float = 0.9
    constant_gap_tol: float = 1e-3
    oracle_rtol: float = 1e-3
    stokes_stable_tol: float = 0.10
    stokes_invariance_tol: float = 1e-6


@dataclass(frozen=True)
class SuiteConfig:
    checks: tuple[str, ...] = ALL_CHECKS
    seed: int = 0
    a: float = 1.0
    R0: float = 1.0
    R_out: float = 8.0
    R1: float = 2.0
    exact_grid: tuple[int, int] = (256, 256)
    exact_levels: int = 3
    phi_cos: tuple[float, ...] = (0.0, 1.0)
    phi_sin: tuple[float, ...] = ()
    audit_samples: int = 100
    stokes_instances: int = 8
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(wall_speed=0.5, n_r=128, n_theta=64, R1=2.0))
    thresholds: Thresholds = Thresholds()

    def __post_init__(self):
        bad = [c for c in self.checks if c not in ALL_CHECKS]
        if bad:
            raise ConfigError(f"unknown checks: {', '.join(bad)}")
        if not self.a > 0:
            raise ConfigError("a must be positive")
        if not self.R0 < self.R1 < self.R_out - 1:
            raise ConfigError("need R0 < R1 < R_out - 1")
        if self.exact_levels < 2:
            raise ConfigError("exact_levels must be at least 2")
        n_r, n_t = self.exact_grid
        if n_r >> (self.exact_levels - 1) < 16 or n_t >> (self.exact_levels - 1) < 16:
            raise ConfigError("exact grid too coarse for the requested refinement levels")
        if self.audit_samples < 1 or self.stokes_instances < 1:
            raise ConfigError("sample counts must be positive")

    @property
    def phi(self) -> flows.BoundaryTrace:
        n = max(len(self.phi_cos), len(self.phi_sin) + 1, 1)
        c = list(self.phi_cos) + [0.0] * (n - len(self.phi_cos))
        s = [0.0] + list(self.phi_sin) + [0.0] * (n - 1 - len(self.phi_sin))
        return flows.BoundaryTrace(tuple(c), tuple(s))

    def exact_grids(self) -> list[tuple[int, int]]:
        n_r, n_t = self.exact_grid
        return [(n_r >> k, n_t >> k) for k in range(self.exact_levels - 1, -1, -1)]

    @classmethod
    def from_ini(cls, source) -> "SuiteConfig":
        """Suite keys live in [suite] and [checks]; solver keys in [geometry], [boundary], [iteration]."""
        text = Path(source).read_text() if _is_path(source) else source
        if _is_path(source) and not Path(source).is_file():
            raise ConfigError(f"config file {source} not found")
        cp = configparser.ConfigParser()
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config: {exc}") from exc
        solver_cfg = SolverConfig.from_ini(text) if any(s in cp for s in ("geometry", "boundary", "iteration")) else None
        kw: dict = {}
        if "suite" in cp:
            conv = {
                "checks": lambda r: tuple(x.strip() for x in r.replace(",", " ").split()),
                "seed": int,
                "a": float,
                "r0": float,
                "r_out": float,
                "r1": float,
                "exact_grid": parse_grid,
                "exact_levels": int,
                "phi_cos": _floats,
                "phi_sin": _floats,
                "audit_samples": int,
                "stokes_instances": int,
            }
            names = {"r0": "R0", "r_out": "R_out", "r1": "R1"}
            for key, raw in cp["suite"].items():
                if key not in conv:
                    raise ConfigError(f"unknown key {key!r} in [suite]")
                try:
                    kw[names.get(key, key)] = conv[key](raw.strip())
                except ValueError as exc:
                    raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        if "checks" in cp:
            tf = {f: float for f in Thresholds.__dataclass_fields__}
            tkw = {}
            for key, raw in cp["checks"].items():
                if key not in tf:
                    raise ConfigError(f"unknown threshold {key!r} in [checks]")
                try:
                    tkw[key] = float(raw)
                except ValueError as exc:
                    raise ConfigError(f"bad value for {key}: {raw!r}") from exc
            kw["thresholds"] = Thresholds(**tkw)
        if solver_cfg is not None:
            kw["solver"] = solver_cfg
        return cls(**kw)

    def to_json(self) -> dict:
        d = asdict(self)
        d["solver"] = self.solver.to_json()
        return _jsonable(d)


def _is_path(source) -> bool:
    return isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and "[" not in source)


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(x) for x in raw.replace(",", " ").split()) if raw else ()


def parse_grid(text: str) -> tuple[int, int]:
    """'NRxNT' -> (NR, NT)."""
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"grid must look like 128x64, got {text!r}")
    return int(parts[0]), int(parts[1])


# ---------------------------------------------------------------------------
# individual suite entries; each returns a json-ready dict with passed / vacuous


def run_constants(cfg: SuiteConfig, out: Path | None) -> dict:
    table = hypgeom.constants_table(cfg.a, cfg.R0, cfg.R1)
    trig = hypgeom.trig_identity_suite()
    r_diff = abs(hypgeom.r_of_a(cfg.a) - hypgeom.r_of_a_atanh(cfg.a))
    passed = bool(trig["equality_pass"] and trig["inequality_pass"] and r_diff <= 1e-12)
    return {"passed": passed, "vacuous": False, "table": table, "trig": trig, "r_closed_form_diff": r_diff}


def run_barrier(cfg: SuiteConfig, out: Path | None) -> dict:
    sweep = checks.barrier_sweep()
    return {"passed": sweep["passed"], "vacuous": False, **sweep}


def run_exact(cfg: SuiteConfig, out: Path | None) -> dict:
    th = cfg.thresholds
    res = checks.check_exact_residual(cfg.phi, cfg.a, cfg.R0, cfg.R_out, cfg.exact_grids(), th.residual_tol, th.min_order)
    n_r, n_t = cfg.exact_grid
    g = flows.PolarGrid.from_geodesic(cfg.a, cfg.R0, cfg.R_out, n_r, n_t)
    s = flows.potential_flow(flows.poisson_harmonic(cfg.phi, g), cfg.a)
    vel = checks.check_velocity_decay(s, th.velocity_reduction)
    if out is not None:
        vel.write_csv(out / "exact_velocity_decay.csv")
        s.save(out / "exact_state.csv")
    return {"passed": res.passed and vel.passed, "vacuous": False, "residual": res.to_json(), "velocity_decay": vel.to_json()}


def run_pressure(cfg: SuiteConfig, out: Path | None) -> dict:
    th = cfg.thresholds
    n_r, n_t = cfg.exact_grid
    g = flows.PolarGrid.from_geodesic(cfg.a, cfg.R0, cfg.R_out, n_r, n_t)
    rep = checks.check_pressure_nonconvergence(cfg.phi, cfg.a, g, ray_tol=th.ray_tol, gap_frac=th.gap_frac)
    const = checks.check_pressure_nonconvergence(flows.BoundaryTrace.constant(5.0), cfg.a, g)
    const_ok = const.gap < th.constant_gap_tol
    return {"passed": bool((rep.passed or rep.vacuous) and const_ok), "vacuous": rep.vacuous, "nonconstant": rep.to_json(),
            "constant": const.to_json(), "constant_gap_ok": const_ok}


def run_transport(cfg: SuiteConfig, out: Path | None) -> dict:
    rep = checks.check_transport_oracle(cfg.a, cfg.R0, cfg.R_out, rtol=cfg.thresholds.oracle_rtol)
    return {"passed": rep.passed, "vacuous": False, **rep.to_json()}


def run_solve(cfg: SuiteConfig, out: Path | None) -> dict:
    th = cfg.thresholds
    scfg = replace(cfg.solver, R1=cfg.R1) if cfg.solver.R1 is None else cfg.solver
    state, rep = solver.picard_solve(scfg)
    R1 = scfg.measure_R1
    vort = checks.check_vorticity_decay(state, R1, rate_frac=th.rate_frac)
    vel = checks.check_velocity_decay(state, th.velocity_reduction)
    poin = checks.check_poincare(state.v, scfg.a, scfg.R0, R1)
    h1 = checks.check_h1_vorticity(state, scfg.R0, R1)
    if out is not None:
        vort.write_csv(out / "solve_vorticity_decay.csv")
        vel.write_csv(out / "solve_velocity_decay.csv")
        state.save(out / "solve_state.csv")
    parts = {"vorticity_decay": vort, "velocity_decay": vel, "poincare": poin, "h1_vorticity": h1}
    real = [p.passed for p in parts.values() if not p.vacuous]
    return {
        "passed": bool(rep.converged and all(real)),
        "vacuous": all(p.vacuous for p in parts.values()),
        "solver": scfg.to_json(),
        "report": rep.to_json(),
        **{k: p.to_json() for k, p in parts.items()},
    }


def run_stokes(cfg: SuiteConfig, out: Path | None) -> dict:
    rng = np.random.default_rng(cfg.seed)
    inst = [stokes.random_instance(rng) for _ in range(cfg.stokes_instances)]
    th = cfg.thresholds
    rep = stokes.check_stokes_supnorm_ratio(inst, stable_tol=th.stokes_stable_tol, invariance_tol=th.stokes_invariance_tol)
    return {"passed": rep.passed, **rep.to_json()}


def run_audits(cfg: SuiteConfig, out: Path | None) -> dict:
    reps = audits.audit_all(cfg.audit_samples, cfg.seed)
    return {"passed": all(r.passed for r in reps.values()), "vacuous": False, **{k: r.to_json() for k, r in reps.items()}}


RUNNERS = {
    "constants": run_constants,
    "barrier": run_barrier,
    "exact": run_exact,
    "pressure": run_pressure,
    "transport": run_transport,
    "solve": run_solve,
    "stokes": run_stokes,
    "audits": run_audits,
}


def run_suite(cfg: SuiteConfig, out: str | Path | None = None, log=None) -> tuple[int, dict]:
    """Run the selected checks. Returns (exit code, report).

    Exit 0 iff every non-vacuous check passed; 1 otherwise, including a check
    that raised, whose error is recorded in the partial report.
    """
    out = None if out is None else Path(out)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    results = {}
    for name in cfg.checks:
        if log:
            log(f"running {name}")
        try:
            results[name] = _jsonable(RUNNERS[name](cfg, out))
        except Exception as exc:  # recorded, suite continues
            results[name] = {"passed": False, "vacuous": False, "error": f"{type(exc).__name__}: {exc}"}
        if log:
            log(f"{name}: {'pass' if results[name]['passed'] else 'FAIL'}")
    ok = all(r["passed"] or r.get("vacuous", False) for r in results.values())
    report = {
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.to_json(),
        "checks": results,
        "summary": {n: ("vacuous" if r.get("vacuous") and r["passed"] else "pass" if r["passed"] else "fail")
                    for n, r in results.items()},
        "passed": ok,
    }
    if out is not None:
        (out / "suite_report.json").write_text(dumps(report))
    return (0 if ok else 1), report


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False, default=_fallback)


def _fallback(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    raise TypeError(f"not serialisable: {type(x).__name__}")
