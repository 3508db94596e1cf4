"""Explicit integrator for the slope form u_t = -u^2 (u^3)_hhhh, plus the
exact transforms between u and w.

The slope engine is a cross-check for the proximal solver, valid only while
u stays bounded away from zero (min u > u_floor); near degeneracy only the
implicit w-engine is meaningful.  Under the shared discrete operators the
two semi-discrete flows are exactly equivalent via u = 1/(d2 w + c0), so
any disagreement measures time-discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import EnergyParams
from .errors import NonPositiveCurvature, NonPositiveSlope, SlopeDegenerate
from .grid import Field, Grid, d2_values, d4_values, poisson_solve

RK4_REAL_AXIS = 2.785  # stability interval of the classical 4-stage method


@dataclass(frozen=True)
class SlopeConfig:
    dt: float
    safety: float = 0.25
    u_floor: float = 1e-3

    def __post_init__(self):
        if self.dt <= 0.0 or not 0.0 < self.safety <= 1.0 or self.u_floor <= 0.0:
            raise ValueError("need dt > 0, safety in (0,1], u_floor > 0")


def u_rhs(u: Field, grid: Grid | None = None) -> Field:
    """-u^2 * d2(d2(u^3)); total on strictly positive slopes."""
    grid = grid or u.grid
    vals = u.values
    if np.min(vals) <= 0.0:
        raise NonPositiveSlope(f"min(u) = {np.min(vals):.3e} <= 0")
    return Field(grid, -vals**2 * d4_values(grid, vals**3))


def _biharmonic_sym_max(grid: Grid) -> float:
    if grid.d2_kind == "fd3":
        lam2_max = 4.0 * grid.n**2
    else:
        lam2_max = (math.pi * grid.n) ** 2
    return lam2_max**2


def stable_dt(u_max: float, grid: Grid, safety: float) -> float:
    """Largest step the linearized stiffness 3*u^4*Lambda2(k)^2 tolerates.

    The classical safety*dh^4/(3 max u^4) rule overestimates the stable step
    by the symbol factor (Lambda2_max * dh^2)^2, so the cap here divides by
    the actual peak of the biharmonic symbol; it is always at least as
    strict as the classical rule.
    """
    return safety * RK4_REAL_AXIS / (3.0 * u_max**4 * _biharmonic_sym_max(grid))


def slope_step_dt(u: Field, cfg: SlopeConfig) -> tuple[Field, float]:
    """One RK4 step of size min(cfg.dt, CFL cap); rejects and halves on sign loss.

    Returns (u_next, dt_used); at most 20 halvings.  Raises SlopeDegenerate
    when u is at or below u_floor (the explicit engine's validity region
    ends there).
    """
    vals = u.values
    if np.min(vals) <= cfg.u_floor:
        raise SlopeDegenerate(f"min(u) = {np.min(vals):.3e} <= u_floor = {cfg.u_floor}")
    grid = u.grid
    dt = min(cfg.dt, stable_dt(float(np.max(vals)), grid, cfg.safety))

    def rhs(x: np.ndarray) -> np.ndarray:
        return -(x**2) * d4_values(grid, x**3)

    for _ in range(20):
        k1 = rhs(vals)
        k2 = rhs(vals + 0.5 * dt * k1)
        k3 = rhs(vals + 0.5 * dt * k2)
        k4 = rhs(vals + dt * k3)
        new = vals + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if np.min(new) > 0.0:
            return Field(grid, new), dt
        dt *= 0.5
    raise SlopeDegenerate("positivity lost even after 20 step halvings")


def slope_step(u: Field, cfg: SlopeConfig) -> Field:
    return slope_step_dt(u, cfg)[0]


def integrate_slope(u0: Field, t_final: float, cfg: SlopeConfig,
                    observer=None) -> tuple[Field, float, int]:
    """Advance u0 to exactly t_final; returns (u, t, accepted_steps).

    Raw-array inner loop (a trajectory is hundreds of thousands of explicit
    steps; per-step Field construction would dominate the runtime).
    SlopeDegenerate propagates with the current time attached.
    observer(t, values) is called after each accepted step.
    """
    grid = u0.grid
    vals = u0.values.copy()
    sym_max = _biharmonic_sym_max(grid)

    def rhs(x: np.ndarray) -> np.ndarray:
        return -(x**2) * d4_values(grid, x**3)

    t, steps = 0.0, 0
    while t < t_final and (t_final - t) > 1e-9 * cfg.dt:
        if float(np.min(vals)) <= cfg.u_floor:
            raise SlopeDegenerate(f"min(u) = {np.min(vals):.3e} <= u_floor", t=t)
        cap = cfg.safety * RK4_REAL_AXIS / (3.0 * float(np.max(vals)) ** 4 * sym_max)
        dt = min(cfg.dt, t_final - t, cap)
        for _ in range(20):
            k1 = rhs(vals)
            k2 = rhs(vals + 0.5 * dt * k1)
            k3 = rhs(vals + 0.5 * dt * k2)
            k4 = rhs(vals + dt * k3)
            new = vals + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if float(np.min(new)) > 0.0:
                break
            dt *= 0.5
        else:
            raise SlopeDegenerate("positivity lost even after 20 step halvings", t=t)
        vals = new
        t += dt
        steps += 1
        if observer is not None:
            observer(t, vals)
    return Field(grid, vals), t, steps


def u_from_w(w: Field, p: EnergyParams) -> Field:
    """u = 1/(d2 w + c0), the exact discrete change of variables."""
    g = d2_values(w.grid, w.values) + p.c0
    if np.min(g) <= 0.0:
        raise NonPositiveCurvature(f"min(d2 w + c0) = {np.min(g):.3e} <= 0")
    return Field(w.grid, 1.0 / g)


def w_from_u(u: Field) -> tuple[Field, float]:
    """Solve d2(w) = 1/u - c0 with c0 = dh*sum(1/u); returns (w, c0).

    The mean of 1/u - c0 vanishes by construction, which is exactly the
    compatibility condition of the periodic Poisson problem.
    """
    vals = u.values
    if np.min(vals) <= 0.0:
        raise NonPositiveSlope(f"min(u) = {np.min(vals):.3e} <= 0")
    recip = 1.0 / vals
    c0 = float(np.mean(recip))
    w = poisson_solve(Field(u.grid, recip - c0))
    return w, c0
