"""Independent ground-truth generators used by tests and the check suite.

Three oracles, deliberately disjoint from the production solver paths:

* the explicit piecewise-parabola steady state whose distributional second
  derivative is -a + a*delta_0 (an atom of mass a at h = 0),
* the linearized decay rate of small cosine perturbations about w == 0,
* a projected-gradient prox solver sharing nothing with the Newton path
  beyond energetics evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import EnergyParams, grad_phi, phi_of_curvature, shifted_curvature
from .errors import NoConvergence
from .grid import (Field, Grid, _d2_symbol, d2_symbol, d2_values, inner, l2_norm,
                   project_mean)


def _grid_symbol(grid: Grid) -> np.ndarray:
    return _d2_symbol(grid.n, grid.d2_kind)


@dataclass(frozen=True)
class StationaryParams:
    """Atom mass a in (0, c0); keeps the absolutely continuous part c0 - a positive."""

    a: float
    c0: float

    def __post_init__(self):
        if not 0.0 < self.a < self.c0:
            raise ValueError(f"need 0 < a < c0, got a={self.a}, c0={self.c0}")


def parabola_profile(h: np.ndarray | float, a: float = 2.0) -> np.ndarray | float:
    """Continuum steady profile (a/2) * (-(h - 1/2)^2 + 1/12) on [0, 1).

    Periodic extension is C^1 except at h = 0, where the slope jumps by a;
    a = 2 reproduces the textbook normalization with w(0) = -1/6.
    """
    return 0.5 * a * (-((np.asarray(h) - 0.5) ** 2) + 1.0 / 12.0)


def stationary_parabola(sp: StationaryParams, grid: Grid) -> Field:
    """Sampled steady profile, projected to zero mean.

    The atom is realized as the exact d2 of the sampled kink (one cell of
    height ~ a/dh), never as a hand-built delta column, so the datum stays
    in the range of the discrete operators.  Off the kink, d2 w = -a
    exactly for fd3 (second difference of a quadratic).
    """
    vals = parabola_profile(grid.centers(), sp.a)
    return Field(grid, project_mean(vals))


def linear_decay_rate(k: int, c0: float, grid: Grid) -> tuple[float, float]:
    """(continuum, grid-corrected) decay rates of the mode-k cosine amplitude.

    Linearizing (w_hh + c0)^{-3} about w == 0 gives
    w_t = -3 c0^{-4} * Lambda2(k)^2 * w for w = eps*cos(2 pi k h), with
    Lambda2 the second-derivative symbol; the continuum symbol is -(2 pi k)^2.
    """
    if not 1 <= k <= grid.n // 4:
        raise ValueError(f"mode k={k} outside [1, n/4] = [1, {grid.n // 4}]")
    continuum = 3.0 * c0**-4 * (2.0 * math.pi * k) ** 4
    corrected = 3.0 * c0**-4 * d2_symbol(grid, k) ** 2
    return continuum, corrected


def random_smooth_field(grid: Grid, p: EnergyParams, seed: int, k_max: int = 3,
                        curvature_margin: float = 0.5) -> Field:
    """Seeded random low-mode field scaled to keep min(d2 w + c0) >= margin * c0."""
    rng = np.random.default_rng(seed)
    h = grid.centers()
    vals = np.zeros(grid.n)
    for k in range(1, k_max + 1):
        a_k, b_k = rng.standard_normal(2)
        vals += a_k * np.cos(2 * math.pi * k * h) + b_k * np.sin(2 * math.pi * k * h)
    w = Field(grid, project_mean(vals))
    g = shifted_curvature(w, p)
    dip = float(np.max(p.c0 - g, initial=0.0))
    if dip > 0.0:
        # worst cell sits at g = c0 - dip * s after scaling by s
        s = (1.0 - curvature_margin) * p.c0 / dip
        w = Field(grid, w.values * min(1.0, s))
    return w


def brute_force_prox(w: Field, tau: float, p: EnergyParams,
                     grad_tol: float = 1e-9, max_iter: int = 10**6) -> Field:
    """Minimize phi(v) + ||v - w||^2 / (2 tau) by projected gradient descent.

    Armijo backtracking with domain backoff; restricted to n <= 32.  Shares
    only energetics evaluations with the Newton path, so agreement between
    the two is evidence, not tautology.  Steps are capped by a local
    Lipschitz estimate so the descent map keeps contracting once objective
    decreases fall below the float64 noise floor.
    """
    if w.grid.n > 32:
        raise ValueError(f"brute-force oracle limited to n <= 32, got n={w.grid.n}")
    grid = w.grid
    w0 = w.values
    lam2_max = float(np.max(np.abs(_grid_symbol(grid))))

    def curvature(vals: np.ndarray) -> np.ndarray:
        return d2_values(grid, vals) + p.c0

    def objective(g: np.ndarray, vals: np.ndarray) -> float:
        diff = vals - w0
        return phi_of_curvature(g) + float(np.dot(diff, diff)) / grid.n / (2.0 * tau)

    v = w0.copy()
    g = curvature(v)
    if np.min(g) <= 0.0:
        raise ValueError("prox input outside domain of phi")
    obj = objective(g, v)
    gnorm = math.inf
    step = None
    for _ in range(max_iter):
        grad = project_mean(-d2_values(grid, g**-3) + (v - w0) / tau)
        gnorm = l2_norm(grad)
        if gnorm <= grad_tol:
            return Field(grid, project_mean(v))
        step_cap = 1.8 / (1.0 / tau + 3.0 * float(np.max(g**-4)) * lam2_max**2)
        step = step_cap if step is None else min(step, step_cap)
        noise = 1e-15 * (1.0 + abs(obj))
        while True:
            cand = project_mean(v - step * grad)
            g_cand = curvature(cand)
            if np.min(g_cand) > 0.0:
                obj_cand = objective(g_cand, cand)
                if obj_cand <= obj - 1e-4 * step * gnorm**2 + noise:
                    break
            step *= 0.5
            if step < 1e-300:
                raise NoConvergence("projected-gradient line search underflow")
        v, g, obj = cand, g_cand, obj_cand
        step = min(2.0 * step, step_cap)
    raise NoConvergence(f"projected gradient: {max_iter} iterations, |grad| = {gnorm:.3e}")


def stationary_defect(w: Field, p: EnergyParams, k_max: int = 3) -> float:
    """Defect of the steady equation measured against smooth test functions.

    grad_phi at a discrete atom is a one-cell dipole whose pointwise size
    diverges like dh^-2, but whose action on C^2 test functions is O(dh) --
    the topology the measure-valued solution concept lives in.  Returns
    max_k |<grad_phi(w), zeta_k>| over the normalized family
    zeta = cos/sin(2 pi k h) / (2 pi k)^2, k = 1..k_max.
    """
    g = grad_phi(w, p)
    h = w.grid.centers()
    worst = 0.0
    for k in range(1, k_max + 1):
        scale = (2.0 * math.pi * k) ** 2
        for zeta in (np.cos(2 * math.pi * k * h), np.sin(2 * math.pi * k * h)):
            worst = max(worst, abs(inner(g.values, zeta / scale, w.grid)))
    return worst


def fit_decay_rate(times: np.ndarray, amplitudes: np.ndarray) -> float:
    """Least-squares slope of log amplitude vs t, negated (a decay rate)."""
    if np.min(amplitudes) <= 0.0:
        raise ValueError("amplitudes must stay positive for a log fit")
    slope = np.polyfit(times, np.log(amplitudes), 1)[0]
    return -float(slope)


def mode_amplitude(f: Field, k: int) -> float:
    """Magnitude of the mode-k cosine/sine amplitude of a real grid function."""
    return 2.0 * abs(np.fft.rfft(f.values)[k]) / f.grid.n
