import json
import math

import pytest

from proxfilm.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, RunConfig, main
from proxfilm.errors import ConfigError


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def base_prox(tmp_path, **overrides):
    cfg = {
        "mode": "prox",
        "grid": {"n": 64, "d2_kind": "fd3"},
        "physics": {"c0": 1.0},
        "initial": {"kind": "cosine", "k": 1, "eps": 0.01},
        "time": {"tau": 1e-7, "t_final": 1e-6},
        "output": {"dir": str(tmp_path / "out"), "snapshot_every": 5},
    }
    cfg.update(overrides)
    return cfg


def test_malformed_json_exits_4(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["run", "--config", str(path)]) == EXIT_CONFIG


def test_unknown_mode_exits_4(tmp_path):
    cfg = base_prox(tmp_path)
    cfg["mode"] = "warp"
    assert main(["run", "--config", write_config(tmp_path, cfg)]) == EXIT_CONFIG


def test_missing_tau_exits_4(tmp_path):
    cfg = base_prox(tmp_path)
    del cfg["time"]["tau"]
    assert main(["run", "--config", write_config(tmp_path, cfg)]) == EXIT_CONFIG


def test_infeasible_initial_exits_4(tmp_path):
    cfg = base_prox(tmp_path)
    cfg["initial"]["eps"] = 0.2  # min(d2 w + c0) <= 0
    assert main(["run", "--config", write_config(tmp_path, cfg)]) == EXIT_CONFIG


def test_stationary_a_bounds_checked(tmp_path):
    cfg = base_prox(tmp_path)
    cfg["initial"] = {"kind": "stationary", "a": 1.5}
    assert main(["run", "--config", write_config(tmp_path, cfg)]) == EXIT_CONFIG


def test_prox_zero_run_all_conserved(tmp_path):
    cfg = base_prox(tmp_path)
    cfg["initial"] = {"kind": "zero"}
    assert main(["run", "--config", write_config(tmp_path, cfg), "--quiet"]) == EXIT_OK
    out = tmp_path / "out"
    report = json.loads((out / "report.json").read_text())
    assert report["passed"]
    rows = (out / "diagnostics.csv").read_text().splitlines()
    header = rows[0].split(",")
    phi_col = header.index("phi")
    mass_col = header.index("mass")
    for row in rows[1:]:
        cells = row.split(",")
        assert float(cells[phi_col]) == 0.5
        assert float(cells[mass_col]) == 1.0
    assert (out / "snapshots" / "step_000000.csv").exists()


def test_prox_cosine_run(tmp_path):
    cfg = base_prox(tmp_path)
    assert main(["run", "--config", write_config(tmp_path, cfg), "--quiet"]) == EXIT_OK
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    names = {c["name"] for c in report["checks"]}
    assert {"phi_nonincreasing", "mass_conservation", "positivity",
            "invariant_ball", "vi_residual"} <= names


def test_resolvent_test_mode(tmp_path):
    cfg = {
        "mode": "resolvent-test",
        "grid": {"n": 16},
        "physics": {"c0": 1.0},
        "time": {"tau": 1e-4, "t_final": 1e-4},
        "output": {"dir": str(tmp_path / "rt"), "seed": 7},
    }
    assert main(["run", "--config", write_config(tmp_path, cfg), "--quiet"]) == EXIT_OK
    report = json.loads((tmp_path / "rt" / "report.json").read_text())
    assert report["max_deviation"] <= 1e-6


def test_compare_mode(tmp_path):
    cfg = {
        "mode": "compare",
        "grid": {"n": 64},
        "initial": {"kind": "cosine", "k": 1, "eps": 0.1},
        "time": {"tau": 1e-7, "t_final": 1e-6, "safety": 0.9},
        "output": {"dir": str(tmp_path / "cmp")},
    }
    assert main(["compare", "--config", write_config(tmp_path, cfg), "--quiet"]) == EXIT_OK
    rows = (tmp_path / "cmp" / "compare.csv").read_text().splitlines()
    assert rows[0] == "t,mismatch_l2"
    final = float(rows[-1].split(",")[1])
    assert final <= 1e-3


def test_compare_subcommand_rejects_other_modes(tmp_path):
    cfg = base_prox(tmp_path)
    assert main(["compare", "--config", write_config(tmp_path, cfg)]) == EXIT_CONFIG


def test_slope_stationary_fine_grid_degenerates(tmp_path):
    # u at the atom cell ~ dh/a falls below u_floor on fine grids: exit 3
    cfg = {
        "mode": "slope",
        "grid": {"n": 2048},
        "physics": {"c0": 2.0},
        "initial": {"kind": "stationary", "a": 1.0},
        "time": {"dt": 1e-12, "t_final": 1e-9},
        "output": {"dir": str(tmp_path / "slope")},
    }
    assert main(["run", "--config", write_config(tmp_path, cfg), "--quiet"]) == EXIT_SOLVER


def test_slope_smooth_run(tmp_path):
    cfg = {
        "mode": "slope",
        "grid": {"n": 64},
        "initial": {"kind": "cosine", "k": 1, "eps": 0.1},
        "time": {"dt": 1.0, "t_final": 2e-7, "safety": 0.9},
        "output": {"dir": str(tmp_path / "slope"), "snapshot_every": 0,
                   "record_every": 10},
    }
    assert main(["run", "--config", write_config(tmp_path, cfg), "--quiet"]) == EXIT_OK
    report = json.loads((tmp_path / "slope" / "report.json").read_text())
    assert report["passed"]


def test_determinism_byte_identical(tmp_path):
    cfg = base_prox(tmp_path)
    path = write_config(tmp_path, cfg)
    assert main(["run", "--config", path, "--out", str(tmp_path / "a"), "--quiet"]) == EXIT_OK
    assert main(["run", "--config", path, "--out", str(tmp_path / "b"), "--quiet"]) == EXIT_OK
    a = (tmp_path / "a" / "diagnostics.csv").read_bytes()
    b = (tmp_path / "b" / "diagnostics.csv").read_bytes()
    assert a == b


def test_initial_from_file_roundtrip(tmp_path):
    cfg = base_prox(tmp_path)
    cfg["output"]["dir"] = str(tmp_path / "first")
    path = write_config(tmp_path, cfg)
    assert main(["run", "--config", path, "--quiet"]) == EXIT_OK
    snap = tmp_path / "first" / "snapshots" / "step_000000.csv"
    cfg2 = base_prox(tmp_path)
    cfg2["initial"] = {"kind": "file", "path": str(snap)}
    cfg2["output"]["dir"] = str(tmp_path / "second")
    assert main(["run", "--config", write_config(tmp_path, cfg2, "cfg2.json"),
                 "--quiet"]) == EXIT_OK


def test_sweep_expands_and_runs(tmp_path):
    cfg = {
        "mode": "prox",
        "grid": {"n": 32},
        "physics": {"c0": 1.0},
        "initial": {"kind": "cosine", "k": 1, "eps": 0.001},
        "time": {"tau": 1e-7, "t_final": 3e-7},
        "output": {"dir": str(tmp_path / "sweep")},
        "sweep": {"grid.n": [32, 64], "time.tau": [1e-7]},
    }
    assert main(["sweep", "--config", write_config(tmp_path, cfg), "--jobs", "2",
                 "--quiet"]) == EXIT_OK
    subdirs = sorted(d.name for d in (tmp_path / "sweep").iterdir())
    assert len(subdirs) == 2
    for d in subdirs:
        assert (tmp_path / "sweep" / d / "report.json").exists()


def test_emitted_rows_revalidate(tmp_path):
    cfg = base_prox(tmp_path)
    assert main(["run", "--config", write_config(tmp_path, cfg), "--quiet"]) == EXIT_OK
    rows = (tmp_path / "out" / "diagnostics.csv").read_text().splitlines()
    width = len(rows[0].split(","))
    e_col = rows[0].split(",").index("E")
    for row in rows[1:]:
        cells = row.split(",")
        assert len(cells) == width
        for i, cell in enumerate(cells):
            val = float(cell)
            if i != e_col:
                assert math.isfinite(val)
    snap_rows = (tmp_path / "out" / "snapshots" / "step_000000.csv").read_text().splitlines()
    assert snap_rows[0] == "h,w,w_h,w_hh"
    assert len(snap_rows) == 1 + cfg["grid"]["n"]


def test_runconfig_from_dict_validation():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"mode": "prox", "time": {"t_final": -1.0, "tau": 1e-7}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"mode": "prox", "time": {"tau": 1e-7},
                             "initial": {"kind": "wavelet"}})
    cfg = RunConfig.from_dict({"mode": "prox", "time": {"tau": 1e-7}})
    assert cfg.grid().n == 128
