"""Numerical verification of decay theorems and a priori inequalities."""
from .checks import (
    check_barrier,
    check_exact_residual,
    check_h1_vorticity,
    check_poincare,
    check_pressure_nonconvergence,
    check_transport_oracle,
    check_velocity_decay,
    check_vorticity_decay,
)
from .reports import AuditReport, CutoffSpec, DecayReport, InequalityReport
from .stokes import check_stokes_supnorm_ratio
from .suite import SuiteConfig, run_suite

__all__ = [
    "AuditReport",
    "CutoffSpec",
    "DecayReport",
    "InequalityReport",
    "SuiteConfig",
    "check_barrier",
    "check_exact_residual",
    "check_h1_vorticity",
    "check_poincare",
    "check_pressure_nonconvergence",
    "check_stokes_supnorm_ratio",
    "check_transport_oracle",
    "check_velocity_decay",
    "check_vorticity_decay",
    "run_suite",
]
