/**
 * FigureSpec: one JSON object per figure, naming the kind, the input CSVs,
 * the output stem, and style knobs.
 */

import { readFileSync } from "fs";

export type FigureKind = "energy" | "snapshots" | "spectrum" | "compare";

export interface FigureSpec {
  kind: FigureKind;
  inputs: {
    diagnostics?: string; // energy
    snapshots?: string;   // snapshots, spectrum: directory of step_*.csv
    compare?: string;     // compare
    atoms?: string;       // optional report.json with atom positions
  };
  out: string; // output stem; .svg and .png are appended
  style?: {
    logTime?: boolean;
    logPhi?: boolean;
    logE?: boolean;
    stride?: number;
  };
}

export class SpecError extends Error {}

const KINDS: FigureKind[] = ["energy", "snapshots", "spectrum", "compare"];
const REQUIRED_INPUT: Record<FigureKind, keyof FigureSpec["inputs"]> = {
  energy: "diagnostics",
  snapshots: "snapshots",
  spectrum: "snapshots",
  compare: "compare",
};

export function validateSpec(raw: unknown): FigureSpec {
  if (typeof raw !== "object" || raw === null) throw new SpecError("spec must be an object");
  const spec = raw as Record<string, unknown>;
  const kind = spec.kind as FigureKind;
  if (!KINDS.includes(kind)) {
    throw new SpecError(`kind must be one of ${KINDS.join(", ")}, got ${JSON.stringify(spec.kind)}`);
  }
  if (typeof spec.out !== "string" || spec.out.length === 0) {
    throw new SpecError("out must be a non-empty path stem");
  }
  const inputs = (spec.inputs ?? {}) as FigureSpec["inputs"];
  const needed = REQUIRED_INPUT[kind];
  if (typeof inputs[needed] !== "string") {
    throw new SpecError(`kind ${kind} needs inputs.${needed}`);
  }
  const style = (spec.style ?? {}) as NonNullable<FigureSpec["style"]>;
  if (style.stride !== undefined && (!Number.isInteger(style.stride) || style.stride < 1)) {
    throw new SpecError("style.stride must be a positive integer");
  }
  return { kind, inputs, out: spec.out, style };
}

export function loadSpec(path: string): FigureSpec {
  let parsed: unknown;
  try {
    parsed = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new SpecError(`cannot read spec ${path}: ${(err as Error).message}`);
  }
  return validateSpec(parsed);
}

/** Atom positions from a stationary-check report.json, when present. */
export function loadAtomPositions(path: string): number[] {
  const parsed = JSON.parse(readFileSync(path, "utf8")) as {
    atoms?: { positions?: number[] };
  };
  return parsed.atoms?.positions ?? [];
}
