"""Implicit time stepping for w_t = [(w_hh + c0)^{-3}]_hh as a proximal flow.

One step solves the resolvent subproblem

    w_next = argmin_{mean-zero v}  phi(v) + ||v - w||_l2^2 / (2 tau)

by a safeguarded Newton method: SPD Newton systems, Armijo backtracking on
the subproblem objective, and an interior-point fraction-to-boundary rule
keeping d2(v) + c0 strictly positive.  The ball indicator psi is monitored
by the driver, never enforced: the flow provably stays inside, so a
violation is a bug signal rather than a modeling choice.

Fallbacks on Newton failure, in order: restart from a curvature-floor
truncation of w (lift d2 w by delta on the near-degenerate set,
mean-corrected), then shrink tau geometrically down to tau_min.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import Trajectory, record_step
from .energy import EnergyParams, phi_of_curvature, psi
from .errors import DomainViolation, NewtonDiverged
from .grid import Field, d2_matrix, d2_values, inner, l2_norm, poisson_solve, project_mean

ARMIJO_C1 = 1e-4


@dataclass(frozen=True)
class ProxConfig:
    tau: float
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    boundary_fraction: float = 0.01
    tau_shrink: float = 0.5
    tau_min: float | None = None

    def __post_init__(self):
        if self.tau_min is None:
            object.__setattr__(self, "tau_min", self.tau / 2.0**20)
        if not self.tau > self.tau_min > 0.0:
            raise ValueError(f"need tau > tau_min > 0, got tau={self.tau}, tau_min={self.tau_min}")
        if not 0.0 < self.boundary_fraction < 1.0:
            raise ValueError(f"boundary_fraction must lie in (0,1), got {self.boundary_fraction}")


@dataclass(frozen=True)
class ProxResult:
    w_next: Field
    iterations: int
    residual_norm: float
    objective_decrease: float
    tau_used: float
    tol_effective: float = 0.0  # max(target tolerance, float64 residual floor)


def _fp_residual_floor(grid, v: np.ndarray, g: np.ndarray, tau: float) -> float:
    """Attainable accuracy of the residual evaluation in float64.

    Two stacked d2 applications amplify rounding by the squared symbol peak,
    and the (v - w)/tau term carries eps*|v|/tau; below this level the
    computed residual is noise, not defect.
    """
    eps = float(np.finfo(float).eps)
    lam2_max = 4.0 * grid.n**2 if grid.d2_kind == "fd3" else (math.pi * grid.n) ** 2
    g_min = float(np.min(g))
    v_inf = float(np.max(np.abs(v), initial=0.0))
    return eps * (lam2_max * (g_min**-3 + lam2_max * v_inf * g_min**-4) + v_inf / tau)


def _newton(w_vals: np.ndarray, tau: float, grid, p: EnergyParams, cfg: ProxConfig,
            v0: np.ndarray | None = None):
    """Solve the resolvent subproblem from initial guess v0 (default w).

    Succeeds at the target tolerance, or at the float64 residual floor once
    progress stagnates there.  Returns (v, iterations, residual_norm,
    tol_effective) or None when the iteration budget or the line search is
    exhausted.
    """
    n = grid.n
    tol = cfg.newton_tol * (1.0 + l2_norm(w_vals))
    D2 = d2_matrix(n, grid.d2_kind)
    eye_over_tau = np.eye(n) / tau

    def objective(g: np.ndarray, vals: np.ndarray) -> float:
        diff = vals - w_vals
        return phi_of_curvature(g) + float(np.dot(diff, diff)) / n / (2.0 * tau)

    v = w_vals.copy() if v0 is None else v0.copy()
    g = d2_values(grid, v) + p.c0
    if np.min(g) <= 0.0:
        return None
    obj = objective(g, v)
    best_norm, best_v, stalled = math.inf, None, 0

    for it in range(cfg.newton_max_iter + 1):
        resid = project_mean((v - w_vals) / tau - d2_values(grid, g**-3))
        res_norm = l2_norm(resid)
        floor = _fp_residual_floor(grid, v, g, tau)
        if res_norm <= tol:
            return v, it, res_norm, max(tol, floor)
        if res_norm < 0.7 * best_norm:
            best_norm, best_v, stalled = res_norm, v, 0
        else:
            stalled += 1
        if stalled >= 2 and best_norm <= floor:
            return best_v, it, best_norm, max(tol, floor)
        if it == cfg.newton_max_iter:
            return None

        jac = eye_over_tau + 3.0 * (D2 * g**-4) @ D2  # I/tau + 3 D2 diag(g^-4) D2, SPD
        try:
            direction = np.linalg.solve(jac, -resid)
        except np.linalg.LinAlgError:
            return None
        direction = project_mean(direction)
        slope = inner(resid, direction, grid)
        if slope >= 0.0:
            return None  # not a descent direction; numerical breakdown
        dg = d2_values(grid, direction)

        # fraction-to-boundary: g + alpha*dg >= boundary_fraction * g per cell
        shrinking = dg < 0.0
        alpha = 1.0
        if np.any(shrinking):
            alpha = min(1.0, float(np.min(
                (1.0 - cfg.boundary_fraction) * g[shrinking] / -dg[shrinking])))

        # near the minimizer the demanded decrease sits below the float64
        # noise floor of the objective; accept on no-significant-increase there
        noise = 1e-15 * (1.0 + abs(obj))
        accepted = False
        for _ in range(60):
            cand = project_mean(v + alpha * direction)
            g_cand = d2_values(grid, cand) + p.c0
            if np.min(g_cand) > 0.0:
                obj_cand = objective(g_cand, cand)
                if obj_cand <= obj + ARMIJO_C1 * alpha * slope + noise:
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            return None
        v, g, obj = cand, g_cand, obj_cand
    return None


def _truncated_guess(w_vals: np.ndarray, grid, p: EnergyParams, cfg: ProxConfig):
    """Curvature-floor restart: lift d2 w by delta on {d2 w + c0 <= delta}, mean-corrected."""
    delta = 10.0 * cfg.boundary_fraction * p.c0
    g = d2_values(grid, w_vals) + p.c0
    lifted = g <= delta
    if not np.any(lifted) or np.all(lifted):
        return None
    lift = delta * lifted.astype(float)
    lift = project_mean(lift)
    return w_vals + poisson_solve(Field(grid, lift)).values


def resolvent(w: Field, cfg: ProxConfig, p: EnergyParams) -> ProxResult:
    """One proximal step (I + tau * grad phi)^{-1} w, with internal tau fallback.

    Raises DomainViolation when w is outside the domain of phi and
    NewtonDiverged when no tau >= tau_min admits a converged Newton solve.
    """
    grid = w.grid
    g0 = d2_values(grid, w.values) + p.c0
    if np.min(g0) <= 0.0:
        raise DomainViolation(f"resolvent input has min(d2 w + c0) = {np.min(g0):.3e} <= 0")
    phi_w = phi_of_curvature(g0)

    tau = cfg.tau
    while True:
        sol = _newton(w.values, tau, grid, p, cfg)
        if sol is None:
            guess = _truncated_guess(w.values, grid, p, cfg)
            if guess is not None:
                sol = _newton(w.values, tau, grid, p, cfg, v0=guess)
        if sol is not None:
            v, iterations, res_norm, tol_eff = sol
            g_v = d2_values(grid, v) + p.c0
            decrease = phi_w - (phi_of_curvature(g_v)
                                + l2_norm(v - w.values) ** 2 / (2.0 * tau))
            return ProxResult(
                w_next=Field(grid, v),
                iterations=iterations,
                residual_norm=res_norm,
                objective_decrease=decrease,
                tau_used=tau,
                tol_effective=tol_eff,
            )
        tau *= cfg.tau_shrink
        if tau < cfg.tau_min:
            raise NewtonDiverged(
                f"Newton failed for all tau down to tau_min={cfg.tau_min:.3e}")


def evolve(w0: Field, t_final: float, cfg: ProxConfig, p: EnergyParams) -> Trajectory:
    """Implicit-Euler trajectory on [0, t_final] with per-step diagnostics.

    Preconditions: w0 in the domain of phi and inside the invariant ball.
    The tau sequence actually used is recorded; the final step is clipped
    to land on t_final exactly.
    """
    g0 = d2_values(w0.grid, w0.values) + p.c0
    if np.min(g0) <= 0.0:
        raise DomainViolation("evolve: initial datum outside domain of phi")
    if psi(w0, p) != 0.0:
        raise DomainViolation("evolve: initial datum outside the invariant ball")
    if t_final <= 0.0:
        raise ValueError(f"t_final must be positive, got {t_final}")

    traj = Trajectory(fields=[w0], times=[0.0])
    t = 0.0
    w = w0
    step_index = 0
    while t < t_final and (t_final - t) > 1e-9 * cfg.tau:
        tau_step = min(cfg.tau, t_final - t)
        step_cfg = cfg if tau_step == cfg.tau else replace(cfg, tau=tau_step, tau_min=None)
        try:
            result = resolvent(w, step_cfg, p)
        except NewtonDiverged as err:
            raise NewtonDiverged(f"step {step_index}: {err}", step_index=step_index) from err
        t += result.tau_used
        w_next = result.w_next
        wdot = Field(w.grid, (w_next.values - w.values) / result.tau_used)
        record = record_step(t, w_next, wdot, p)
        if psi(w_next, p) != 0.0:
            raise DomainViolation(
                f"step {step_index}: invariant ball violated, tilde_v = {record.tilde_v:.6g}")
        traj.fields.append(w_next)
        traj.times.append(t)
        traj.records.append(record)
        traj.taus.append(result.tau_used)
        w = w_next
        step_index += 1
    return traj
