"""Stationary Navier-Stokes flow on exterior domains of the hyperbolic plane.

Modules: hypgeom (closed-form geometry and constants), fields (grids and
differential forms), flows (exact potential flows, residuals, pressure),
solver (vorticity-streamfunction Picard iteration) and harness (checks,
audits, suite and command line).
"""
__version__ = "0.1.0"
