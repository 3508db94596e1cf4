/** Dispatch a FigureSpec to its renderer; write both SVG and PNG. */

import { writeFileSync, mkdirSync } from "fs";
import path from "path";
import { Resvg } from "@resvg/resvg-js";

import { listSnapshots, readCompare, readDiagnostics, readSnapshot } from "./csv.js";
import { compareFigure, energyFigure, snapshotsFigure, spectrumFigure } from "./figures.js";
import { FigureSpec, loadAtomPositions } from "./figspec.js";

export interface RenderedFigure {
  svgPath: string;
  pngPath: string;
}

export function buildSvg(spec: FigureSpec): string {
  switch (spec.kind) {
    case "energy":
      return energyFigure(readDiagnostics(spec.inputs.diagnostics!), spec.style ?? {});
    case "snapshots": {
      const snaps = listSnapshots(spec.inputs.snapshots!).map(readSnapshot);
      const atoms = spec.inputs.atoms ? loadAtomPositions(spec.inputs.atoms) : [];
      return snapshotsFigure(snaps, { stride: spec.style?.stride, atoms });
    }
    case "spectrum": {
      const snaps = listSnapshots(spec.inputs.snapshots!).map(readSnapshot);
      return spectrumFigure(snaps, { stride: spec.style?.stride });
    }
    case "compare":
      return compareFigure(readCompare(spec.inputs.compare!));
  }
}

export function render(spec: FigureSpec): RenderedFigure {
  const svg = buildSvg(spec);
  mkdirSync(path.dirname(path.resolve(spec.out)), { recursive: true });
  const svgPath = `${spec.out}.svg`;
  const pngPath = `${spec.out}.png`;
  writeFileSync(svgPath, svg);
  const png = new Resvg(svg, { fitTo: { mode: "width", value: 1140 } }).render().asPng();
  writeFileSync(pngPath, png);
  return { svgPath, pngPath };
}
