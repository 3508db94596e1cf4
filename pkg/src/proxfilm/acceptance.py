"""Executable acceptance battery; shared by `proxfilm check` and the test suite.

Each criterion returns a CriterionResult with the worst margin actually
observed (positive = slack, negative = violation) so failures are
quantitative, and prints one pass/fail line.  Criteria 3 and 6 leave their
CSV artifacts behind when an output directory is given; those files are the
contract the plotting frontend consumes.
"""

from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diagnostics import (DIAGNOSTICS_HEADER, detect_atoms, dissipation_report,
                          write_diagnostics_csv)
from .energy import EnergyParams, grad_phi, phi
from .grid import Field, Grid, cosine_field, format_float, inner, l2_norm, write_snapshot
from .oracles import (StationaryParams, brute_force_prox, fit_decay_rate,
                      linear_decay_rate, mode_amplitude, random_smooth_field,
                      stationary_defect, stationary_parabola)
from .prox import ProxConfig, evolve, resolvent
from .slope import SlopeConfig, integrate_slope, stable_dt, u_from_w, w_from_u


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    margin: float
    elapsed: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] criterion {self.cid}: {self.name} "
                f"(margin={self.margin:.3e}, {self.elapsed:.1f}s) {self.detail}")

    def as_dict(self) -> dict:
        return {"id": self.cid, "name": self.name, "passed": bool(self.passed),
                "margin": float(self.margin), "elapsed": float(self.elapsed),
                "detail": self.detail}


def _smooth_run(n: int = 128, eps: float = 0.01, tau: float = 1e-7, t_final: float = 1e-5):
    p = EnergyParams(c0=1.0)
    traj = evolve(cosine_field(Grid(n), 1, eps), t_final, ProxConfig(tau=tau), p)
    return traj, p


def criterion_1_nonexpansive(pairs: int = 100, n: int = 64) -> CriterionResult:
    """||J x - J y|| <= ||x - y|| + 1e-10 over seeded random domain pairs."""
    t0 = time.perf_counter()
    p = EnergyParams(c0=1.0)
    grid = Grid(n)
    worst = math.inf
    for tau in (1e-6, 1e-4):
        cfg = ProxConfig(tau=tau)
        for seed in range(pairs):
            x = random_smooth_field(grid, p, seed=2 * seed)
            y = random_smooth_field(grid, p, seed=2 * seed + 1)
            jx = resolvent(x, cfg, p).w_next
            jy = resolvent(y, cfg, p).w_next
            slack = l2_norm(x.values - y.values) + 1e-10 - l2_norm(jx.values - jy.values)
            worst = min(worst, slack)
    return CriterionResult(1, "resolvent nonexpansiveness", worst >= 0.0, worst,
                           time.perf_counter() - t0)


def criterion_2_oracle(seeds: int = 20) -> CriterionResult:
    """Newton resolvent vs brute-force prox, l2 gap <= 1e-6 on n in {8, 16}."""
    t0 = time.perf_counter()
    p = EnergyParams(c0=1.0)
    tau = 1e-4
    worst_gap = 0.0
    for n in (8, 16):
        grid = Grid(n)
        for seed in range(seeds):
            w = random_smooth_field(grid, p, seed=seed)
            newton = resolvent(w, ProxConfig(tau=tau), p).w_next
            brute = brute_force_prox(w, tau, p)
            worst_gap = max(worst_gap, l2_norm(newton.values - brute.values))
    return CriterionResult(2, "oracle equivalence", worst_gap <= 1e-6, 1e-6 - worst_gap,
                           time.perf_counter() - t0, detail=f"max gap {worst_gap:.3e}")


def criterion_3_dissipation(traj=None, p=None) -> CriterionResult:
    """Dissipation suite on the smooth run: phi, E, step norm, mass, positivity, ball."""
    t0 = time.perf_counter()
    if traj is None:
        traj, p = _smooth_run()
    recs = traj.records
    margins = {}
    reports = {c.name: c for c in dissipation_report(traj, p)}
    margins["phi_nonincreasing"] = reports["phi_nonincreasing"].margin
    margins["E_dissipation"] = reports["E_dissipation"].margin
    grad0 = l2_norm(grad_phi(traj.fields[0], p).values)
    margins["step_norm_vs_grad0"] = min(grad0 * (1.0 + 1e-6) - r.step_norm for r in recs)
    margins["mass"] = min(1e-12 - abs(r.mass - p.c0) for r in recs)
    margins["min_g"] = min(r.min_g for r in recs)
    margins["tilde_v"] = min(2.0 * p.c0 + 1.0 - r.tilde_v for r in recs)
    worst = min(margins.values())
    detail = "; ".join(f"{k}={v:.2e}" for k, v in margins.items())
    return CriterionResult(3, "dissipation suite", worst > 0.0, worst,
                           time.perf_counter() - t0, detail=detail)


def criterion_4_decay(n: int = 128, eps: float = 1e-4) -> CriterionResult:
    """Fitted decay rate within 0.5% of grid-corrected, 2% of continuum, k in {1,2}."""
    t0 = time.perf_counter()
    p = EnergyParams(c0=1.0)
    grid = Grid(n)
    worst = math.inf
    details = []
    for k in (1, 2):
        traj = evolve(cosine_field(grid, k, eps), 1e-5, ProxConfig(tau=1e-7), p)
        amps = np.array([mode_amplitude(f, k) for f in traj.fields])
        rate = fit_decay_rate(np.array(traj.times), amps)
        continuum, corrected = linear_decay_rate(k, p.c0, grid)
        dev_corr = abs(rate / corrected - 1.0)
        dev_cont = abs(rate / continuum - 1.0)
        worst = min(worst, 0.005 - dev_corr, 0.02 - dev_cont)
        details.append(f"k={k}: dev_grid={dev_corr:.2e}, dev_cont={dev_cont:.2e}")
    return CriterionResult(4, "linearized decay rates", worst >= 0.0, worst,
                           time.perf_counter() - t0, detail="; ".join(details))


def criterion_5_stationary() -> CriterionResult:
    """Stationary singular datum: defect order >= 0.8 and one atom of mass ~ a."""
    t0 = time.perf_counter()
    a, c0 = 1.0, 2.0
    p = EnergyParams(c0=c0)
    sp = StationaryParams(a=a, c0=c0)
    defects = [stationary_defect(stationary_parabola(sp, Grid(n)), p)
               for n in (64, 128, 256, 512)]
    orders = [math.log2(defects[i] / defects[i + 1]) for i in range(len(defects) - 1)]
    order_margin = min(orders) - 0.8

    trajs = []
    for n in (128, 256):
        w0 = stationary_parabola(sp, Grid(n))
        trajs.append(evolve(w0, 5e-8, ProxConfig(tau=1e-8), p))
    report = detect_atoms(trajs[0], trajs[1], threshold=0.05 * c0)
    atom_ok = (len(report) == 1 and abs(report.cell_positions[0]) < 1e-12
               and abs(report.coarse_mass[0] - a) <= 0.1 * a)
    atom_margin = (0.1 * a - abs(report.coarse_mass[0] - a)) if len(report) == 1 else -1.0
    margin = min(order_margin, atom_margin)
    detail = (f"orders={['%.2f' % o for o in orders]}, atoms={len(report)}, "
              f"mass={report.coarse_mass[0]:.4f}" if len(report) == 1 else
              f"orders={['%.2f' % o for o in orders]}, atoms={len(report)}")
    return CriterionResult(5, "stationary singular solution", order_margin >= 0.0 and atom_ok,
                           margin, time.perf_counter() - t0, detail=detail)


def compare_engines(n: int = 128, tau: float = 1e-7, t_final: float = 1e-5,
                    eps: float = 0.1, safety: float = 0.9, sample_every: int = 4):
    """Shared prox-vs-slope comparison; returns (mismatch_rel, rows) for compare.csv."""
    grid = Grid(n)
    u0 = Field(grid, 1.0 + eps * np.cos(2.0 * math.pi * grid.centers()))
    w0, c0 = w_from_u(u0)
    p = EnergyParams(c0=c0)
    traj = evolve(w0, t_final, ProxConfig(tau=tau), p)
    dt = stable_dt(float(np.max(u0.values)), grid, safety)
    cfg = SlopeConfig(dt=dt, safety=1.0, u_floor=1e-3)

    u0_norm = l2_norm(u0.values)
    rows = []
    u, t_slope = u0, 0.0
    sample_idx = list(range(0, len(traj.times), sample_every))
    if sample_idx[-1] != len(traj.times) - 1:
        sample_idx.append(len(traj.times) - 1)
    for idx in sample_idx:
        t_target = traj.times[idx]
        if t_target > t_slope:
            u, t_seg, _ = integrate_slope(u, t_target - t_slope, cfg)
            t_slope += t_seg
        u_prox = u_from_w(traj.fields[idx], p)
        rows.append((t_target, l2_norm(u_prox.values - u.values) / u0_norm))
    return rows[-1][1], rows


def criterion_6_cross_model() -> CriterionResult:
    """Prox vs slope mismatch <= 1e-3, improving under tau/dt halving, order >= 0.8."""
    t0 = time.perf_counter()
    mismatches = []
    rows_coarsest = None
    for level in range(2):
        tau = 1e-7 / 2**level
        safety = 0.9 / 2**level
        m, rows = compare_engines(tau=tau, safety=safety)
        if rows_coarsest is None:
            rows_coarsest = rows
        mismatches.append(m)
    order = math.log2(mismatches[0] / mismatches[1])
    margin = min(1e-3 - mismatches[0], order - 0.8)
    detail = f"mismatch={mismatches[0]:.3e}, halving order={order:.2f}"
    return CriterionResult(6, "cross-model agreement", margin >= 0.0, margin,
                           time.perf_counter() - t0, detail=detail), rows_coarsest


def criterion_7_vi(traj=None, p=None) -> CriterionResult:
    """vi_min >= -1e-8 at every accepted step; strong residual within its bound."""
    t0 = time.perf_counter()
    if traj is None:
        traj, p = _smooth_run()
    vi_margin = min(r.vi_min + 1e-8 for r in traj.records)
    # strong form: residual at (w_{n+1}, dw/tau) is the Newton residual; bound
    # 10 * (newton_tol + tau * local Lipschitz of grad_phi along the step)
    worst_strong = -math.inf
    for k, r in enumerate(traj.records):
        w_prev, w_next = traj.fields[k], traj.fields[k + 1]
        tau = traj.taus[k]
        lip = l2_norm(grad_phi(w_next, p).values - grad_phi(w_prev, p).values) / max(
            l2_norm(w_next.values - w_prev.values), 1e-300)
        bound = 10.0 * (1e-10 + tau * lip * r.step_norm)
        worst_strong = max(worst_strong, r.strong_residual - bound)
    margin = min(vi_margin, -worst_strong)
    return CriterionResult(7, "variational inequality + strong form", margin >= 0.0,
                           margin, time.perf_counter() - t0,
                           detail=f"vi_margin={vi_margin:.2e}")


def criterion_8_gradient(seeds: int = 20, n: int = 64) -> CriterionResult:
    """Directional finite differences of phi match <grad_phi, v> to relative 1e-6.

    Central differences: the one-sided truncation term (s/2)<Hv,v> is not a
    gradient defect and would drown the measurement on directions nearly
    orthogonal to the gradient.
    """
    t0 = time.perf_counter()
    p = EnergyParams(c0=1.0)
    grid = Grid(n)
    s = 1e-6
    worst = 0.0
    for seed in range(seeds):
        w = random_smooth_field(grid, p, seed=seed)
        v = random_smooth_field(grid, p, seed=seed + 10_000)
        fd = (phi(Field(grid, w.values + s * v.values), p)
              - phi(Field(grid, w.values - s * v.values), p)) / (2.0 * s)
        exact = inner(grad_phi(w, p), v)
        worst = max(worst, abs(fd - exact) / max(abs(exact), 1e-300))
    return CriterionResult(8, "gradient correctness", worst <= 1e-6, 1e-6 - worst,
                           time.perf_counter() - t0, detail=f"max rel dev {worst:.2e}")


def _diagnostics_bytes(traj) -> bytes:
    buf = io.StringIO()
    buf.write(DIAGNOSTICS_HEADER + "\n")
    for rec in traj.records:
        buf.write(rec.csv_row() + "\n")
    return buf.getvalue().encode()


def criterion_9_determinism() -> CriterionResult:
    """Repeated runs produce byte-identical diagnostics.csv."""
    t0 = time.perf_counter()
    a = _diagnostics_bytes(_smooth_run()[0])
    b = _diagnostics_bytes(_smooth_run()[0])
    same = a == b
    return CriterionResult(9, "determinism", same, 0.0 if same else -1.0,
                           time.perf_counter() - t0,
                           detail=f"{len(a)} bytes" if same else "byte mismatch")


RUNTIME_LIMITS = {1: 60.0, 2: 120.0, 3: 60.0, 4: 60.0, 5: 120.0, 6: 300.0}


def run_acceptance(out_dir: str | Path | None = None, quiet: bool = False) -> list[CriterionResult]:
    """Run criteria 1..9; write artifacts (diagnostics, snapshots, compare) if out_dir."""
    out = Path(out_dir) if out_dir is not None else None
    results = []

    def emit(res: CriterionResult):
        results.append(res)
        if not quiet:
            print(res.line(), flush=True)

    emit(criterion_1_nonexpansive())
    emit(criterion_2_oracle())
    smooth_traj, smooth_p = _smooth_run()
    emit(criterion_3_dissipation(smooth_traj, smooth_p))
    emit(criterion_4_decay())
    emit(criterion_5_stationary())
    res6, compare_rows = criterion_6_cross_model()
    emit(res6)
    emit(criterion_7_vi(smooth_traj, smooth_p))
    emit(criterion_8_gradient())
    emit(criterion_9_determinism())

    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_diagnostics_csv(out / "diagnostics.csv", smooth_traj)
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        for k in range(0, len(smooth_traj.fields), 10):
            write_snapshot(snap_dir / f"step_{k:06d}.csv", smooth_traj.fields[k])
        with open(out / "compare.csv", "w") as fh:
            fh.write("t,mismatch_l2\n")
            for t, m in compare_rows:
                fh.write(f"{format_float(t)},{format_float(m)}\n")
    return results
