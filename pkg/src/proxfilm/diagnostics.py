"""Per-step and per-trajectory checks derived from the proved structure.

Every record row re-states a theorem as a number: energy dissipation,
conservation of the curvature mass, positivity, the invariant ball, the
variational-inequality residual, and the strong-form residual.  Atom
detection compares matched windows across an n vs 2n refinement pair;
mass that persists under refinement is not an O(dh) density feature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import (EnergyParams, energy_E, mass, phi, phi_plus_psi,
                     shifted_curvature)
from .errors import DomainViolation, GridMismatch, NonPositiveCurvature
from .grid import Field, d2_values, format_float, inner, l2_norm, norms, project_mean

DIAGNOSTICS_HEADER = "t,phi,E,mass,min_g,tilde_v,step_norm,vi_min,strong_residual"


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    phi: float
    E: float  # may be the +inf sentinel at spiky states
    mass: float
    min_g: float
    tilde_v: float
    step_norm: float
    vi_min: float
    strong_residual: float

    def csv_row(self) -> str:
        return ",".join(format_float(getattr(self, name)) for name in DIAGNOSTICS_HEADER.split(","))


@dataclass
class Trajectory:
    """Time series of fields plus one DiagnosticsRecord per accepted step."""

    fields: list[Field]
    times: list[float]
    records: list[DiagnosticsRecord] = field(default_factory=list)
    taus: list[float] = field(default_factory=list)

    @property
    def t_final(self) -> float:
        return self.times[-1]

    @property
    def final(self) -> Field:
        return self.fields[-1]


@dataclass(frozen=True)
class AtomReport:
    cell_positions: list[float]
    coarse_mass: list[float]
    fine_mass: list[float]
    ratio: list[float]

    def __len__(self) -> int:
        return len(self.cell_positions)


def vi_samples(w: Field, p: EnergyParams) -> list[Field]:
    """Finite test family for the variational inequality.

    Mirrors the directions the existence proof tests with: the zero state,
    scalings (1 +/- s) w, and smooth normalized perturbations
    w +/- eps*sin(2 pi k h)/(2 pi k)^2 with eps sized to stay in the domain.
    """
    grid = w.grid
    out = [Field(grid, np.zeros(grid.n))]
    for s in (0.1, 0.5):
        out.append(Field(grid, (1.0 + s) * w.values))
        out.append(Field(grid, (1.0 - s) * w.values))
    g = shifted_curvature(w, p)
    min_g = float(np.min(g))
    h = grid.centers()
    for k in (1, 2, 3):
        bump = np.sin(2 * math.pi * k * h) / (2 * math.pi * k) ** 2
        d2b = d2_values(grid, bump)
        lim = float(np.max(np.abs(d2b)))
        eps = 0.5 * min_g / lim if lim > 0 else 0.0
        out.append(Field(grid, project_mean(w.values + eps * bump)))
        out.append(Field(grid, project_mean(w.values - eps * bump)))
    return out


def vi_residual(w: Field, wdot: Field, p: EnergyParams,
                samples: list[Field] | None = None) -> float:
    """min over the sample family of <wdot, v-w> + (phi+psi)(v) - (phi+psi)(w).

    Nonnegative (to solver tolerance) exactly when (w, wdot) satisfies the
    discrete variational inequality on the family; infeasible samples are
    skipped.
    """
    base = phi_plus_psi(w, p)
    if base == math.inf:
        raise DomainViolation("vi_residual: w outside the domain of phi+psi")
    if samples is None:
        samples = vi_samples(w, p)
    best = math.inf
    for v in samples:
        val = phi_plus_psi(v, p)
        if val == math.inf:
            continue
        best = min(best, inner(wdot, Field(w.grid, v.values - w.values)) + val - base)
    return best


def strong_residual(w: Field, wdot: Field, p: EnergyParams) -> float:
    """|| wdot - d2((d2 w + c0)^{-3}) ||_l2, the defect of the strong form."""
    g = shifted_curvature(w, p)
    if np.min(g) <= 0.0:
        raise NonPositiveCurvature("strong_residual: min(d2 w + c0) <= 0")
    return l2_norm(wdot.values - d2_values(w.grid, g**-3))


def record_step(t: float, w: Field, wdot: Field, p: EnergyParams) -> DiagnosticsRecord:
    g = shifted_curvature(w, p)
    return DiagnosticsRecord(
        t=t,
        phi=phi(w, p),
        E=energy_E(w, p),
        mass=mass(w, p),
        min_g=float(np.min(g)),
        tilde_v=norms(w).tilde_v,
        step_norm=l2_norm(wdot.values),
        vi_min=vi_residual(w, wdot, p),
        strong_residual=strong_residual(w, wdot, p),
    )


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float  # worst slack; negative means violated by |margin|
    worst_index: int | None = None  # record index achieving the worst margin

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "margin": float(self.margin),
                "worst_index": self.worst_index}


def _worst(margins: list[float]) -> tuple[float, int]:
    idx = int(np.argmin(margins))
    return margins[idx], idx


def dissipation_report(traj: Trajectory, p: EnergyParams) -> list[CheckResult]:
    """Worst-case margins for the per-trajectory dissipation statements.

    phi nonincreasing step to step (tol 1e-12); E(t_n) <= E(t_0)(1+1e-8)+1e-12
    whenever E starts finite; step norms never exceed the first step norm
    (slack 1e-6).  A failed check reports the violating margin and the index
    of the offending record.
    """
    if not traj.records:
        raise ValueError("dissipation_report needs a nonempty trajectory")
    recs = traj.records
    phis = [phi(traj.fields[0], p)] + [r.phi for r in recs]
    phi_margin, phi_idx = _worst([phis[i] - phis[i + 1] + 1e-12 for i in range(len(phis) - 1)])

    e0 = energy_E(traj.fields[0], p)
    if math.isfinite(e0):
        e_margin, e_idx = _worst([e0 * (1.0 + 1e-8) + 1e-12 - r.E for r in recs])
    else:
        e_margin, e_idx = math.inf, None  # dissipation statement presumes finite initial E
    s0 = recs[0].step_norm
    step_margin, step_idx = _worst([s0 + 1e-6 - r.step_norm for r in recs])
    return [
        CheckResult("phi_nonincreasing", phi_margin >= 0.0, phi_margin, phi_idx),
        CheckResult("E_dissipation", e_margin >= 0.0, e_margin, e_idx),
        CheckResult("step_norm_bound", step_margin >= 0.0, step_margin, step_idx),
    ]


def _window_mass(values: np.ndarray, n: int, center_h: float, half_width: float) -> float:
    idx = [j for j in range(n) if _torus_dist(j / n, center_h) <= half_width + 1e-12]
    return sum(values[j] for j in idx) / n


def _torus_dist(a: float, b: float) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def detect_atoms(run_coarse: Trajectory, run_fine: Trajectory, threshold: float,
                 ratio_cutoff: float = 0.9) -> AtomReport:
    """Flag concentration of curvature mass that survives grid refinement.

    Windows of width 4*dh_coarse around strict local maxima of d2 w on the
    coarse final field; an atom needs window mass > threshold (absolute
    units; callers typically pass a fraction of c0) and fine/coarse mass
    ratio >= ratio_cutoff over the matched physical window.
    """
    wc, wf = run_coarse.final, run_fine.final
    nc, nf = wc.grid.n, wf.grid.n
    if nf != 2 * nc:
        raise GridMismatch(f"need resolutions 1:2, got {nc} and {nf}")
    curv_c = d2_values(wc.grid, wc.values)
    curv_f = d2_values(wf.grid, wf.values)
    dh_c = wc.grid.dh
    half = 2.0 * dh_c

    positions, coarse_mass, fine_mass, ratios = [], [], [], []
    if not math.isfinite(threshold):
        return AtomReport(positions, coarse_mass, fine_mass, ratios)
    left = np.roll(curv_c, 1)
    right = np.roll(curv_c, -1)
    for i in np.flatnonzero((curv_c > left) & (curv_c > right)):
        center = i / nc
        m_c = _window_mass(curv_c, nc, center, half)
        if m_c <= threshold:
            continue
        m_f = _window_mass(curv_f, nf, center, half)
        r = m_f / m_c
        if r >= ratio_cutoff:
            positions.append(center)
            coarse_mass.append(m_c)
            fine_mass.append(m_f)
            ratios.append(r)
    return AtomReport(positions, coarse_mass, fine_mass, ratios)


def write_diagnostics_csv(path, traj: Trajectory) -> None:
    with open(path, "w") as fh:
        fh.write(DIAGNOSTICS_HEADER + "\n")
        for rec in traj.records:
            fh.write(rec.csv_row() + "\n")
