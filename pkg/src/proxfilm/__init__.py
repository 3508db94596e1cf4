"""Solver suite and diagnostics harness for the degenerate fourth-order
thin-film gradient flow w_t = [(w_hh + c0)^{-3}]_hh on the unit torus."""

from .diagnostics import (AtomReport, DiagnosticsRecord, Trajectory, detect_atoms,
                          dissipation_report, strong_residual, vi_residual)
from .energy import EnergyParams, big_phi, energy_E, grad_phi, mass, phi, psi
from .grid import Field, Grid, cosine_field, d2, norms, poisson_solve, zero_field
from .oracles import (StationaryParams, brute_force_prox, linear_decay_rate,
                      stationary_parabola)
from .prox import ProxConfig, ProxResult, evolve, resolvent
from .slope import SlopeConfig, slope_step, u_from_w, u_rhs, w_from_u

__all__ = [
    "AtomReport", "DiagnosticsRecord", "EnergyParams", "Field", "Grid",
    "ProxConfig", "ProxResult", "SlopeConfig", "StationaryParams", "Trajectory",
    "big_phi", "brute_force_prox", "cosine_field", "d2", "detect_atoms",
    "dissipation_report", "energy_E", "evolve", "grad_phi", "linear_decay_rate",
    "mass", "norms", "phi", "poisson_solve", "psi", "resolvent", "slope_step",
    "stationary_parabola", "strong_residual", "u_from_w", "u_rhs", "vi_residual",
    "w_from_u", "zero_field",
]
