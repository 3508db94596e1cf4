"""Batch entry point: parse a JSON run config, dispatch engines, write artifacts.

Exit codes: 0 all checks pass, 2 check failure, 3 solver failure, 4 config
error.  All randomness is seeded from the config; no wall-clock entropy
anywhere, so identical configs produce byte-identical CSV output.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import itertools
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import acceptance
from .diagnostics import (Trajectory, detect_atoms, record_step,
                          write_diagnostics_csv)
from .energy import EnergyParams, phi
from .errors import (ConfigError, DomainViolation, NewtonDiverged, NoConvergence,
                     NonPositiveCurvature, NonPositiveSlope, SlopeDegenerate)
from .grid import (Field, Grid, cosine_field, d2_values, format_float, l2_norm,
                   read_snapshot, write_snapshot, zero_field)
from .oracles import (StationaryParams, brute_force_prox, random_smooth_field,
                      stationary_defect, stationary_parabola)
from .prox import ProxConfig, evolve, resolvent
from .slope import (SlopeConfig, integrate_slope, slope_step_dt, stable_dt,
                    u_from_w, w_from_u)

EXIT_OK, EXIT_CHECK, EXIT_SOLVER, EXIT_CONFIG = 0, 2, 3, 4

MODES = ("prox", "slope", "compare", "stationary-check", "resolvent-test")


@dataclass
class RunConfig:
    mode: str
    n: int = 128
    d2_kind: str = "fd3"
    c0: float = 1.0
    initial: dict = field(default_factory=lambda: {"kind": "zero"})
    tau: float | None = None
    dt: float | None = None
    t_final: float = 1e-5
    out_dir: str = "out"
    snapshot_every: int = 10
    record_every: int = 1
    seed: int = 0
    safety: float = 0.25
    u_floor: float = 1e-3

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        mode = raw.get("mode")
        if mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
        grid = raw.get("grid", {})
        physics = raw.get("physics", {})
        tme = raw.get("time", {})
        output = raw.get("output", {})
        initial = raw.get("initial", {"kind": "zero"})
        if not isinstance(initial, dict) or "kind" not in initial:
            raise ConfigError("initial must be an object with a 'kind'")
        cfg = cls(
            mode=mode,
            n=int(grid.get("n", 128)),
            d2_kind=str(grid.get("d2_kind", "fd3")),
            c0=float(physics.get("c0", 1.0)),
            initial=initial,
            tau=None if tme.get("tau") is None else float(tme["tau"]),
            dt=None if tme.get("dt") is None else float(tme["dt"]),
            t_final=float(tme.get("t_final", 1e-5)),
            out_dir=str(output.get("dir", "out")),
            snapshot_every=int(output.get("snapshot_every", 10)),
            record_every=int(output.get("record_every", 1)),
            seed=int(output.get("seed", 0)),
            safety=float(tme.get("safety", 0.25)),
            u_floor=float(tme.get("u_floor", 1e-3)),
        )
        cfg.validate()
        return cfg

    def validate(self):
        if self.t_final <= 0.0:
            raise ConfigError(f"t_final must be positive, got {self.t_final}")
        if self.n < 8:
            raise ConfigError(f"grid n must be >= 8, got {self.n}")
        if self.d2_kind not in ("fd3", "spectral"):
            raise ConfigError(f"unknown d2_kind {self.d2_kind!r}")
        if self.c0 <= 0.0:
            raise ConfigError(f"c0 must be positive, got {self.c0}")
        needs_tau = self.mode in ("prox", "compare")
        needs_dt = self.mode in ("slope", "compare")
        if needs_tau and (self.tau is None or self.tau <= 0.0):
            raise ConfigError(f"mode {self.mode} needs time.tau > 0")
        if self.mode == "slope" and self.dt is None:
            raise ConfigError("mode slope needs time.dt > 0")
        if needs_dt and self.dt is not None and self.dt <= 0.0:
            raise ConfigError("time.dt must be positive")
        kind = self.initial.get("kind")
        if kind not in ("zero", "cosine", "stationary", "file"):
            raise ConfigError(f"unknown initial kind {kind!r}")
        if kind == "cosine":
            if "k" not in self.initial or "eps" not in self.initial:
                raise ConfigError("cosine initial needs k and eps")
        if kind == "stationary":
            a = self.initial.get("a")
            if a is None or not 0.0 < float(a) < self.c0:
                raise ConfigError("stationary initial needs 0 < a < c0")
        if kind == "file" and not self.initial.get("path"):
            raise ConfigError("file initial needs a path")

    def grid(self) -> Grid:
        return Grid(self.n, self.d2_kind)

    def params(self) -> EnergyParams:
        return EnergyParams(c0=self.c0)

    def initial_field(self) -> Field:
        kind = self.initial["kind"]
        grid = self.grid()
        if kind == "zero":
            return zero_field(grid)
        if kind == "cosine":
            return cosine_field(grid, int(self.initial["k"]), float(self.initial["eps"]))
        if kind == "stationary":
            return stationary_parabola(StationaryParams(a=float(self.initial["a"]), c0=self.c0), grid)
        return read_snapshot(self.initial["path"], grid)


def _write_report(out: Path, mode: str, checks: list[dict], extra: dict | None = None) -> bool:
    passed = all(c["passed"] for c in checks)
    payload = {"mode": mode, "passed": passed, "checks": checks}
    if extra:
        payload.update(extra)
    with open(out / "report.json", "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return passed


def _check(name: str, margin: float) -> dict:
    return {"name": name, "passed": bool(margin >= 0.0), "margin": float(margin)}


def _run_prox(cfg: RunConfig, out: Path, quiet: bool) -> int:
    p = cfg.params()
    w0 = cfg.initial_field()
    if float(np.min(d2_values(w0.grid, w0.values) + p.c0)) <= 0.0:
        raise ConfigError("initial datum has min(d2 w + c0) <= 0")
    traj = evolve(w0, cfg.t_final, ProxConfig(tau=cfg.tau), p)
    write_diagnostics_csv(out / "diagnostics.csv", traj)
    snap = out / "snapshots"
    snap.mkdir(exist_ok=True)
    for k in range(0, len(traj.fields), max(1, cfg.snapshot_every)):
        write_snapshot(snap / f"step_{k:06d}.csv", traj.fields[k])
    recs = traj.records
    checks = [
        _check("phi_nonincreasing", min(
            ([phi(traj.fields[0], p)] + [r.phi for r in recs])[i]
            - ([phi(traj.fields[0], p)] + [r.phi for r in recs])[i + 1] + 1e-12
            for i in range(len(recs)))),
        _check("mass_conservation", min(1e-12 - abs(r.mass - p.c0) for r in recs)),
        _check("positivity", min(r.min_g for r in recs)),
        _check("invariant_ball", min(p.cap_C - r.tilde_v for r in recs)),
        _check("vi_residual", min(r.vi_min + 1e-8 for r in recs)),
    ]
    if not quiet:
        for c in checks:
            print(f"  {'ok' if c['passed'] else 'FAIL'} {c['name']} margin={c['margin']:.3e}")
    return EXIT_OK if _write_report(out, "prox", checks) else EXIT_CHECK


def _initial_slope(cfg: RunConfig) -> Field:
    kind = cfg.initial["kind"]
    grid = cfg.grid()
    if kind == "zero":
        return Field(grid, np.full(grid.n, 1.0 / cfg.c0))
    if kind == "cosine":
        eps = float(cfg.initial["eps"])
        if abs(eps) >= 1.0:
            raise ConfigError("cosine slope initial needs |eps| < 1 for positivity")
        vals = 1.0 + eps * np.cos(2 * math.pi * int(cfg.initial["k"]) * grid.centers())
        return Field(grid, vals)
    if kind == "stationary":
        w = cfg.initial_field()
        return u_from_w(w, cfg.params())
    data = np.genfromtxt(cfg.initial["path"], delimiter=",", names=True)
    if "u" not in data.dtype.names:
        raise ConfigError("file initial for slope mode needs a u column")
    return Field(grid, np.atleast_1d(data["u"]))


def _run_slope(cfg: RunConfig, out: Path, quiet: bool) -> int:
    u0 = _initial_slope(cfg)
    if float(np.min(u0.values)) <= cfg.u_floor:
        raise SlopeDegenerate(
            f"initial slope min(u) = {np.min(u0.values):.3e} <= u_floor", t=0.0)
    grid = u0.grid
    w0, c0 = w_from_u(u0)
    p = EnergyParams(c0=c0)
    mass0 = float(np.mean(1.0 / u0.values))
    traj = Trajectory(fields=[w0], times=[0.0])
    u, t, k = u0, 0.0, 0
    snap = out / "snapshots"
    snap.mkdir(exist_ok=True)
    write_snapshot(snap / "step_000000.csv", w0, u=u0.values)
    worst_drift = 0.0
    while t < cfg.t_final and (cfg.t_final - t) > 1e-9 * cfg.dt:
        step_cfg = SlopeConfig(dt=min(cfg.dt, cfg.t_final - t), safety=cfg.safety,
                               u_floor=cfg.u_floor)
        try:
            u_new, dt_used = slope_step_dt(u, step_cfg)
        except SlopeDegenerate as err:
            raise SlopeDegenerate(str(err), t=t) from err
        t += dt_used
        k += 1
        worst_drift = max(worst_drift, abs(float(np.mean(1.0 / u_new.values)) - mass0) / mass0)
        if k % max(1, cfg.record_every) == 0:
            w_new, _ = w_from_u(u_new)
            wdot = Field(grid, (w_new.values - traj.fields[-1].values)
                         / (t - traj.times[-1]))
            traj.records.append(record_step(t, w_new, wdot, p))
            traj.fields.append(w_new)
            traj.times.append(t)
            traj.taus.append(dt_used)
        if cfg.snapshot_every > 0 and k % cfg.snapshot_every == 0:
            write_snapshot(snap / f"step_{k:06d}.csv", w_from_u(u_new)[0], u=u_new.values)
        u = u_new
    write_diagnostics_csv(out / "diagnostics.csv", traj)
    checks = [
        _check("slope_mass_drift", 1e-6 - worst_drift),
        _check("positivity", float(np.min(u.values)) - cfg.u_floor),
    ]
    if not quiet:
        for c in checks:
            print(f"  {'ok' if c['passed'] else 'FAIL'} {c['name']} margin={c['margin']:.3e}")
    return EXIT_OK if _write_report(out, "slope", checks, {"steps": k}) else EXIT_CHECK


def _run_compare(cfg: RunConfig, out: Path, quiet: bool) -> int:
    u0 = _initial_slope(cfg)
    if float(np.min(u0.values)) <= 0.0:
        raise ConfigError("initial slope profile must be strictly positive (min_g <= 0)")
    w0, c0 = w_from_u(u0)
    p = EnergyParams(c0=c0)
    traj = evolve(w0, cfg.t_final, ProxConfig(tau=cfg.tau), p)
    dt = cfg.dt if cfg.dt is not None else stable_dt(
        float(np.max(u0.values)), u0.grid, cfg.safety)
    u0n = l2_norm(u0.values)
    rows, u, t_slope = [], u0, 0.0
    idx = list(range(0, len(traj.times), 4))
    if idx[-1] != len(traj.times) - 1:
        idx.append(len(traj.times) - 1)
    scfg = SlopeConfig(dt=dt, safety=cfg.safety, u_floor=cfg.u_floor)
    for i in idx:
        t_target = traj.times[i]
        if t_target > t_slope:
            u, seg, _ = integrate_slope(u, t_target - t_slope, scfg)
            t_slope += seg
        rows.append((t_target, l2_norm(u_from_w(traj.fields[i], p).values - u.values) / u0n))
    with open(out / "compare.csv", "w") as fh:
        fh.write("t,mismatch_l2\n")
        for t, m in rows:
            fh.write(f"{format_float(t)},{format_float(m)}\n")
    final = rows[-1][1]
    checks = [_check("cross_model_mismatch", 1e-3 - final)]
    if not quiet:
        print(f"  final relative mismatch {final:.3e}")
    return EXIT_OK if _write_report(out, "compare", checks, {"mismatch": final}) else EXIT_CHECK


def _run_stationary_check(cfg: RunConfig, out: Path, quiet: bool) -> int:
    a = float(cfg.initial.get("a", 1.0)) if cfg.initial.get("kind") == "stationary" else 1.0
    c0 = cfg.c0 if cfg.c0 > a else 2.0 * a
    p = EnergyParams(c0=c0)
    sp = StationaryParams(a=a, c0=c0)
    ns = (64, 128, 256, 512)
    defects = [stationary_defect(stationary_parabola(sp, Grid(n, cfg.d2_kind)), p) for n in ns]
    orders = [math.log2(defects[i] / defects[i + 1]) for i in range(len(defects) - 1)]
    with open(out / "stationary_defects.csv", "w") as fh:
        fh.write("n,defect\n")
        for n, d in zip(ns, defects):
            fh.write(f"{n},{format_float(d)}\n")
    trajs = [evolve(stationary_parabola(sp, Grid(n, cfg.d2_kind)), 5e-8,
                    ProxConfig(tau=1e-8), p) for n in (128, 256)]
    rep = detect_atoms(trajs[0], trajs[1], threshold=0.05 * c0)
    checks = [
        _check("defect_order", min(orders) - 0.8),
        _check("single_atom", 0.0 if len(rep) == 1 else -float(abs(len(rep) - 1))),
        _check("atom_mass", (0.1 * a - abs(rep.coarse_mass[0] - a)) if len(rep) == 1 else -1.0),
    ]
    atoms = {"positions": list(rep.cell_positions), "coarse_mass": list(rep.coarse_mass),
             "fine_mass": list(rep.fine_mass), "ratio": list(rep.ratio)}
    if not quiet:
        print(f"  defect orders {['%.2f' % o for o in orders]}, atoms={len(rep)}")
    return EXIT_OK if _write_report(out, "stationary-check", checks,
                                    {"atoms": atoms}) else EXIT_CHECK


def _run_resolvent_test(cfg: RunConfig, out: Path, quiet: bool) -> int:
    if cfg.n > 32:
        raise ConfigError("resolvent-test needs n <= 32 (brute-force oracle bound)")
    p = cfg.params()
    grid = cfg.grid()
    tau = cfg.tau if cfg.tau is not None else 1e-4
    worst = 0.0
    for i in range(20):
        w = random_smooth_field(grid, p, seed=cfg.seed + i)
        newton = resolvent(w, ProxConfig(tau=tau), p).w_next
        brute = brute_force_prox(w, tau, p)
        worst = max(worst, l2_norm(newton.values - brute.values))
    checks = [_check("oracle_deviation", 1e-6 - worst)]
    if not quiet:
        print(f"  max oracle deviation {worst:.3e}")
    return EXIT_OK if _write_report(out, "resolvent-test", checks,
                                    {"max_deviation": worst}) else EXIT_CHECK


_DISPATCH = {
    "prox": _run_prox,
    "slope": _run_slope,
    "compare": _run_compare,
    "stationary-check": _run_stationary_check,
    "resolvent-test": _run_resolvent_test,
}


def run(config_path: str, out_override: str | None = None, quiet: bool = False) -> int:
    try:
        cfg = RunConfig.load(config_path)
        out = Path(out_override or cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        return _DISPATCH[cfg.mode](cfg, out, quiet)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (NewtonDiverged, SlopeDegenerate, NoConvergence, DomainViolation,
            NonPositiveCurvature, NonPositiveSlope) as err:
        extra = f" at t={err.t:.6e}" if isinstance(err, SlopeDegenerate) and err.t is not None else ""
        print(f"solver failure: {err}{extra}", file=sys.stderr)
        return EXIT_SOLVER


def check(out_dir: str | None = None, quiet: bool = False) -> int:
    out = Path(out_dir) if out_dir else Path("check_out")
    results = acceptance.run_acceptance(out_dir=out, quiet=quiet)
    payload = {"passed": all(r.passed for r in results),
               "criteria": [r.as_dict() for r in results]}
    with open(out / "report.json", "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return EXIT_OK if payload["passed"] else EXIT_CHECK


def _expand_sweep(raw: dict) -> list[dict]:
    sweep = raw.get("sweep", {})
    if not sweep:
        raise ConfigError("sweep config needs a 'sweep' object of parameter lists")
    keys = sorted(sweep)
    combos = list(itertools.product(*(sweep[k] for k in keys)))
    configs = []
    for combo in combos:
        entry = json.loads(json.dumps({k: v for k, v in raw.items() if k != "sweep"}))
        label = []
        for key, val in zip(keys, combo):
            node = entry
            parts = key.split(".")
            for part in parts[:-1]:
                node = node.setdefault(part, {})
            node[parts[-1]] = val
            label.append(f"{parts[-1]}={val}")
        configs.append(("_".join(label).replace("/", "-"), entry))
    return configs


def _sweep_entry(args):
    label, entry, base_out, quiet = args
    sub = Path(base_out) / label
    sub.mkdir(parents=True, exist_ok=True)
    try:
        cfg = RunConfig.from_dict(entry)
    except ConfigError as err:
        print(f"[{label}] config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _DISPATCH[cfg.mode](cfg, sub, quiet)
    except (NewtonDiverged, SlopeDegenerate, NoConvergence, DomainViolation,
            NonPositiveCurvature, NonPositiveSlope) as err:
        print(f"[{label}] solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER


def sweep(config_path: str, out_override: str | None = None, jobs: int = 1,
          quiet: bool = False) -> int:
    try:
        with open(config_path) as fh:
            raw = json.load(fh)
        entries = _expand_sweep(raw)
    except (OSError, json.JSONDecodeError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    base_out = out_override or raw.get("output", {}).get("dir", "sweep_out")
    work = [(label, entry, base_out, quiet) for label, entry in entries]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            codes = list(pool.map(_sweep_entry, work))
    else:
        codes = [_sweep_entry(item) for item in work]
    return max(codes, default=EXIT_OK)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="proxfilm",
        description="Solvers and diagnostics for the fourth-order thin-film gradient flow")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", parents=[common], help="execute one configured run")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)

    p_cmp = sub.add_parser("compare", parents=[common], help="prox vs slope cross-check")
    p_cmp.add_argument("--config", required=True)
    p_cmp.add_argument("--out", default=None)

    p_chk = sub.add_parser("check", parents=[common], help="full acceptance suite")
    p_chk.add_argument("--out", default="check_out")

    p_swp = sub.add_parser("sweep", parents=[common],
                           help="expand a config template over a parameter grid")
    p_swp.add_argument("--config", required=True)
    p_swp.add_argument("--out", default=None)
    p_swp.add_argument("--jobs", type=int, default=1)

    args = parser.parse_args(argv)
    if args.command == "run":
        return run(args.config, args.out, args.quiet)
    if args.command == "compare":
        try:
            cfg = RunConfig.load(args.config)
            if cfg.mode != "compare":
                raise ConfigError("compare subcommand needs a config with mode=compare")
        except ConfigError as err:
            print(f"config error: {err}", file=sys.stderr)
            return EXIT_CONFIG
        return run(args.config, args.out, args.quiet)
    if args.command == "check":
        return check(args.out, args.quiet)
    return sweep(args.config, args.out, args.jobs, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
