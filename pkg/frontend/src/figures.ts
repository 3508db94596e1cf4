/**
 * The four figure kinds, each a pure function from parsed CSV data to an
 * SVG string.
 *
 * energy    — phi(t) over its Jensen floor 0.5/c0^2, and E(t) under the
 *             initial-energy line (the dissipation statements, drawn).
 * snapshots — filmstrip of w profiles, early steps light, late steps dark,
 *             with optional atom markers.
 * spectrum  — mode-amplitude spectra of selected snapshots.
 * compare   — relative l2 mismatch between the two engines over time.
 */

import {
  ComparePoint,
  DiagnosticsRow,
  Snapshot,
  massConstant,
} from "./csv.js";
import { OverlayLine, Panel, Series, figure } from "./svg.js";

export interface EnergyStyle {
  logTime?: boolean;
  logPhi?: boolean;
  logE?: boolean;
}

function ramp(i: number, n: number): string {
  // light steel blue -> dark navy
  const t = n <= 1 ? 1 : i / (n - 1);
  const mix = (a: number, b: number) => Math.round(a + (b - a) * t);
  return `rgb(${mix(176, 21)},${mix(196, 44)},${mix(222, 99)})`;
}

export function energyFigure(rows: DiagnosticsRow[], style: EnergyStyle = {}): string {
  const t = rows.map((r) => r.t);
  const c0 = massConstant(rows);
  const floor = 0.5 / (c0 * c0);
  const e0 = rows[0].E;

  const phiPanel: Panel = {
    title: "curvature energy phi(t)",
    xLabel: "t",
    yLabel: "phi",
    logX: style.logTime,
    logY: style.logPhi,
    series: [{ label: "phi", x: t, y: rows.map((r) => r.phi), color: "#1f77b4" }],
    overlays: [
      {
        role: "jensen-floor",
        value: floor,
        label: `floor 0.5/c0^2 = ${floor.toPrecision(6)}`,
        color: "#d62728",
      },
    ],
  };
  const ePanel: Panel = {
    title: "squared-velocity energy E(t)",
    xLabel: "t",
    yLabel: "E",
    logX: style.logTime,
    logY: style.logE,
    series: [{ label: "E", x: t, y: rows.map((r) => r.E), color: "#2ca02c" }],
    overlays: Number.isFinite(e0)
      ? [{ role: "initial-energy", value: e0, label: `E(t0) = ${e0.toPrecision(6)}`, color: "#d62728" }]
      : [],
  };
  return figure([phiPanel, ePanel]);
}

export interface SnapshotStyle {
  stride?: number;
  atoms?: number[]; // torus positions to mark
}

export function snapshotsFigure(snaps: Snapshot[], style: SnapshotStyle = {}): string {
  const stride = Math.max(1, style.stride ?? 1);
  const chosen = snaps.filter((_, i) => i % stride === 0 || i === snaps.length - 1);
  const series: Series[] = chosen.map((s, i) => ({
    label: `step ${s.step}`,
    x: s.h,
    y: s.w,
    color: ramp(i, chosen.length),
    width: 1.3,
  }));
  const overlays: OverlayLine[] = (style.atoms ?? []).map((pos) => ({
    role: "atom-marker",
    value: pos,
    label: `atom @ ${pos}`,
    color: "#d62728",
    vertical: true,
  }));
  return figure([
    {
      title: "field snapshots w(h)",
      xLabel: "h",
      yLabel: "w",
      series: series.length > 8 ? series.map((s) => ({ ...s, label: "" })) : series,
      overlays,
    },
  ]);
}

/** |k|-th cosine/sine amplitude of a real sample vector (direct DFT). */
export function modeAmplitudes(values: number[], kMax: number): number[] {
  const n = values.length;
  const out: number[] = [];
  for (let k = 1; k <= kMax; k++) {
    let re = 0;
    let im = 0;
    for (let j = 0; j < n; j++) {
      const ang = (2 * Math.PI * k * j) / n;
      re += values[j] * Math.cos(ang);
      im -= values[j] * Math.sin(ang);
    }
    out.push((2 * Math.hypot(re, im)) / n);
  }
  return out;
}

export function spectrumFigure(snaps: Snapshot[], style: SnapshotStyle = {}): string {
  const stride = Math.max(1, style.stride ?? Math.ceil(snaps.length / 4));
  const chosen = snaps.filter((_, i) => i % stride === 0 || i === snaps.length - 1);
  const kMax = Math.max(2, Math.floor(chosen[0].w.length / 8));
  const ks = Array.from({ length: kMax }, (_, i) => i + 1);
  const series: Series[] = chosen.map((s, i) => ({
    label: `step ${s.step}`,
    x: ks,
    y: modeAmplitudes(s.w, kMax),
    color: ramp(i, chosen.length),
    width: 1.3,
  }));
  return figure([
    {
      title: "mode amplitudes of w",
      xLabel: "mode k",
      yLabel: "amplitude",
      logY: true,
      series,
    },
  ]);
}

export function compareFigure(points: ComparePoint[]): string {
  return figure([
    {
      title: "prox vs slope engine mismatch",
      xLabel: "t",
      yLabel: "relative l2 mismatch",
      logY: true,
      series: [
        {
          label: "mismatch",
          x: points.map((p) => p.t),
          y: points.map((p) => p.mismatch),
          color: "#9467bd",
        },
      ],
    },
  ]);
}
