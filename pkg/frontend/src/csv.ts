/**
 * Readers for the solver's CSV artifacts.
 *
 * Strictly versioned against the producer's header strings: any schema
 * drift on the primary side must fail loudly here, never render garbage.
 * Values are read verbatim; no smoothing, no rescaling.
 */

import { readFileSync, readdirSync } from "fs";
import path from "path";

export const DIAGNOSTICS_HEADER =
  "t,phi,E,mass,min_g,tilde_v,step_norm,vi_min,strong_residual";
export const COMPARE_HEADER = "t,mismatch_l2";
export const SNAPSHOT_HEADERS = ["h,w,w_h,w_hh", "h,w,w_h,w_hh,u"];

export interface DiagnosticsRow {
  t: number;
  phi: number;
  E: number; // may be Infinity (spiky states)
  mass: number;
  min_g: number;
  tilde_v: number;
  step_norm: number;
  vi_min: number;
  strong_residual: number;
}

export interface Snapshot {
  step: number;
  h: number[];
  w: number[];
  w_hh: number[];
  u?: number[];
}

export interface ComparePoint {
  t: number;
  mismatch: number;
}

export class SchemaError extends Error {}

function parseNumber(cell: string, file: string, line: number): number {
  if (cell === "inf") return Infinity;
  if (cell === "-inf") return -Infinity;
  const value = Number(cell);
  if (cell.trim() === "" || Number.isNaN(value)) {
    throw new SchemaError(`${file}:${line + 2}: unparseable number ${JSON.stringify(cell)}`);
  }
  return value;
}

function readTable(file: string, expectedHeaders: string[]): { header: string[]; rows: number[][] } {
  const text = readFileSync(file, "utf8");
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) throw new SchemaError(`${file}: empty file`);
  if (!expectedHeaders.includes(lines[0])) {
    throw new SchemaError(
      `${file}: header ${JSON.stringify(lines[0])} does not match expected ` +
        expectedHeaders.map((h) => JSON.stringify(h)).join(" or "),
    );
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(`${file}:${i + 2}: ${cells.length} columns, expected ${header.length}`);
    }
    return cells.map((c) => parseNumber(c, file, i));
  });
  if (rows.length === 0) throw new SchemaError(`${file}: no data rows`);
  return { header, rows };
}

export function readDiagnostics(file: string): DiagnosticsRow[] {
  const { rows } = readTable(file, [DIAGNOSTICS_HEADER]);
  return rows.map(([t, phi, E, mass, min_g, tilde_v, step_norm, vi_min, strong_residual]) => ({
    t, phi, E, mass, min_g, tilde_v, step_norm, vi_min, strong_residual,
  }));
}

export function readCompare(file: string): ComparePoint[] {
  const { rows } = readTable(file, [COMPARE_HEADER]);
  return rows.map(([t, mismatch]) => ({ t, mismatch }));
}

export function readSnapshot(file: string): Snapshot {
  const { header, rows } = readTable(file, SNAPSHOT_HEADERS);
  const match = /step_(\d+)\.csv$/.exec(path.basename(file));
  const col = (name: string) => rows.map((r) => r[header.indexOf(name)]);
  const snap: Snapshot = {
    step: match ? Number(match[1]) : 0,
    h: col("h"),
    w: col("w"),
    w_hh: col("w_hh"),
  };
  if (header.includes("u")) snap.u = col("u");
  return snap;
}

export function listSnapshots(dir: string): string[] {
  const files = readdirSync(dir)
    .filter((f) => /^step_\d+\.csv$/.test(f))
    .sort();
  if (files.length === 0) throw new SchemaError(`${dir}: no step_*.csv snapshots`);
  return files.map((f) => path.join(dir, f));
}

/** Conserved curvature mass c0, read off the diagnostics mass column. */
export function massConstant(rows: DiagnosticsRow[]): number {
  return rows[0].mass;
}
