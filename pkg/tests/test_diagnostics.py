import math
from dataclasses import replace

import numpy as np
import pytest

from proxfilm.diagnostics import (DIAGNOSTICS_HEADER, DiagnosticsRecord, Trajectory,
                                  detect_atoms, dissipation_report, record_step,
                                  strong_residual, vi_residual, vi_samples,
                                  write_diagnostics_csv)
from proxfilm.energy import EnergyParams, grad_phi
from proxfilm.errors import DomainViolation, GridMismatch
from proxfilm.grid import Field, Grid, cosine_field, l2_norm, zero_field
from proxfilm.oracles import random_smooth_field, stationary_parabola, StationaryParams
from proxfilm.prox import ProxConfig, evolve

P1 = EnergyParams(c0=1.0)


def test_vi_residual_zero_state():
    z = zero_field(Grid(32))
    assert vi_residual(z, z, P1) >= 0.0


def test_vi_residual_gradient_flow_direction():
    grid = Grid(64)
    for seed in range(5):
        w = random_smooth_field(grid, P1, seed=seed)
        wdot = Field(grid, -grad_phi(w, P1).values)
        assert vi_residual(w, wdot, P1) >= -1e-8


def test_vi_residual_infeasible_raises():
    w = cosine_field(Grid(64), 1, 0.2)
    with pytest.raises(DomainViolation):
        vi_residual(w, zero_field(Grid(64)), P1)


def test_vi_samples_family_layout():
    w = cosine_field(Grid(32), 1, 1e-3)
    fam = vi_samples(w, P1)
    assert len(fam) == 11  # zero, four scalings, six smooth bumps
    assert np.all(fam[0].values == 0.0)
    scalings = {round(l2_norm(v.values) / l2_norm(w.values), 6) for v in fam[1:5]}
    assert scalings == {0.5, 0.9, 1.1, 1.5}


def test_vi_residual_prox_steps():
    traj = evolve(cosine_field(Grid(64), 1, 1e-3), 1e-6, ProxConfig(tau=1e-7), P1)
    assert all(r.vi_min >= -1e-8 for r in traj.records)


def test_strong_residual_zero():
    z = zero_field(Grid(32))
    assert strong_residual(z, z, P1) == 0.0


def test_strong_residual_wrong_sign_doubles():
    grid = Grid(64)
    w = random_smooth_field(grid, P1, seed=3)
    g = grad_phi(w, P1)
    wrong = strong_residual(w, g, P1)  # wdot = +grad instead of -grad
    assert wrong == pytest.approx(2.0 * l2_norm(g.values), rel=1e-12)


def test_record_step_fields():
    grid = Grid(64)
    w = cosine_field(grid, 1, 1e-3)
    wdot = Field(grid, -grad_phi(w, P1).values)
    rec = record_step(1e-6, w, wdot, P1)
    assert rec.t == 1e-6
    assert rec.mass == pytest.approx(1.0, abs=1e-13)
    assert rec.min_g > 0
    assert math.isfinite(rec.E)
    assert rec.step_norm == pytest.approx(l2_norm(wdot.values))


def test_dissipation_report_zero_trajectory():
    traj = evolve(zero_field(Grid(32)), 1e-5, ProxConfig(tau=1e-6), P1)
    checks = {c.name: c for c in dissipation_report(traj, P1)}
    assert all(c.passed for c in checks.values())
    assert checks["phi_nonincreasing"].margin == pytest.approx(1e-12, abs=1e-15)


def test_dissipation_report_flags_injected_violation():
    traj = evolve(cosine_field(Grid(64), 1, 1e-3), 1e-6, ProxConfig(tau=1e-7), P1)
    bad_index = 4
    doctored = replace(traj.records[bad_index], phi=traj.records[bad_index].phi + 1e-3)
    records = list(traj.records)
    records[bad_index] = doctored
    broken = Trajectory(fields=traj.fields, times=traj.times, records=records,
                        taus=traj.taus)
    checks = {c.name: c for c in dissipation_report(broken, P1)}
    flagged = checks["phi_nonincreasing"]
    assert not flagged.passed
    # worst_index points at the record whose arrival broke monotonicity
    assert flagged.worst_index == bad_index


def test_dissipation_report_needs_records():
    traj = Trajectory(fields=[zero_field(Grid(32))], times=[0.0])
    with pytest.raises(ValueError):
        dissipation_report(traj, P1)


def _spike_pair(t_final=3e-8, tau=1e-8):
    p = EnergyParams(c0=2.0)
    sp = StationaryParams(a=1.0, c0=2.0)
    return [evolve(stationary_parabola(sp, Grid(n)), t_final, ProxConfig(tau=tau), p)
            for n in (128, 256)], p


def test_detect_atoms_grid_mismatch():
    (coarse, fine), _ = _spike_pair()
    with pytest.raises(GridMismatch):
        detect_atoms(coarse, coarse, threshold=0.1)


def test_detect_atoms_stationary_spike():
    (coarse, fine), p = _spike_pair()
    report = detect_atoms(coarse, fine, threshold=0.05 * p.c0)
    assert len(report) == 1
    assert report.cell_positions[0] == 0.0
    assert report.coarse_mass[0] == pytest.approx(1.0, rel=0.1)
    assert report.ratio[0] >= 0.9


def test_detect_atoms_infinite_threshold_empty():
    (coarse, fine), _ = _spike_pair()
    assert len(detect_atoms(coarse, fine, threshold=math.inf)) == 0


def test_detect_atoms_smooth_run_empty():
    trajs = [evolve(cosine_field(Grid(n), 1, 0.01), 1e-6, ProxConfig(tau=1e-7), P1)
             for n in (128, 256)]
    for thr in (0.05, 0.2, 1.0):
        assert len(detect_atoms(trajs[0], trajs[1], threshold=thr * P1.c0)) == 0


def test_diagnostics_csv_schema(tmp_path):
    traj = evolve(cosine_field(Grid(32), 1, 1e-3), 3e-7, ProxConfig(tau=1e-7), P1)
    path = tmp_path / "diagnostics.csv"
    write_diagnostics_csv(path, traj)
    lines = path.read_text().splitlines()
    assert lines[0] == DIAGNOSTICS_HEADER
    ncols = len(DIAGNOSTICS_HEADER.split(","))
    for line in lines[1:]:
        cells = line.split(",")
        assert len(cells) == ncols
        values = [float(c) for c in cells]
        # everything finite except possibly the E column
        for name, value in zip(DIAGNOSTICS_HEADER.split(","), values):
            if name != "E":
                assert math.isfinite(value)


def test_diagnostics_csv_inf_sentinel(tmp_path):
    rec = DiagnosticsRecord(t=1.0, phi=0.5, E=math.inf, mass=1.0, min_g=0.1,
                            tilde_v=0.2, step_norm=0.0, vi_min=0.0, strong_residual=0.0)
    row = rec.csv_row()
    assert row.split(",")[2] == "inf"
