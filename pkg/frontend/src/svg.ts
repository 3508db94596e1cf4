/**
 * Minimal SVG chart assembly: linear/log scales, axes with ticks, series
 * polylines, and labeled overlay lines.  No DOM, no plotting dependency;
 * figures are plain SVG strings.
 *
 * Overlay lines and ticks carry data-role / data-value attributes so tests
 * can verify placement without rasterizing.
 */

export interface Scale {
  (x: number): number;
  invert(px: number): number;
  domain: [number, number];
  range: [number, number];
  log: boolean;
}

export function makeScale(domain: [number, number], range: [number, number], log = false): Scale {
  let [d0, d1] = domain;
  if (log && (d0 <= 0 || d1 <= 0)) {
    throw new Error(`log scale needs a positive domain, got [${d0}, ${d1}]`);
  }
  if (d0 === d1) {
    // degenerate data (constant series): widen symmetrically
    const pad = d0 === 0 ? 1 : Math.abs(d0) * 0.5;
    d0 -= pad;
    d1 += pad;
    if (log) [d0, d1] = [domain[0] / 2, domain[0] * 2];
  }
  const f = (x: number) => (log ? Math.log(x) : x);
  const [r0, r1] = range;
  const k = (r1 - r0) / (f(d1) - f(d0));
  const scale = ((x: number) => r0 + (f(x) - f(d0)) * k) as Scale;
  scale.invert = (px: number) => {
    const y = f(d0) + (px - r0) / k;
    return log ? Math.exp(y) : y;
  };
  scale.domain = [d0, d1];
  scale.range = range;
  scale.log = log;
  return scale;
}

export function ticks(scale: Scale, count = 5): number[] {
  const [d0, d1] = scale.domain;
  if (scale.log) {
    const e0 = Math.ceil(Math.log10(d0));
    const e1 = Math.floor(Math.log10(d1));
    const out: number[] = [];
    const stride = Math.max(1, Math.ceil((e1 - e0 + 1) / count));
    for (let e = e0; e <= e1; e += stride) out.push(10 ** e);
    return out.length >= 2 ? out : [d0, d1];
  }
  const span = d1 - d0;
  const step = 10 ** Math.floor(Math.log10(span / count));
  const err = span / count / step;
  const mult = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = step * mult;
  const out: number[] = [];
  for (let v = Math.ceil(d0 / s) * s; v <= d1 + s * 1e-9; v += s) out.push(v);
  return out;
}

export function fmt(x: number): string {
  if (x === 0) return "0";
  const ax = Math.abs(x);
  if (ax >= 1e4 || ax < 1e-3) return x.toExponential(1).replace("e+", "e");
  return String(Number(x.toPrecision(4)));
}

const esc = (s: string) => s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  width?: number;
  dash?: string;
}

export interface OverlayLine {
  role: string; // machine-checkable marker, e.g. "jensen-floor"
  value: number;
  label: string;
  color: string;
  vertical?: boolean;
}

export interface Panel {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  overlays?: OverlayLine[];
  logX?: boolean;
  logY?: boolean;
}

const MARGIN = { top: 34, right: 18, bottom: 42, left: 76 };

function extent(values: number[], log: boolean): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (log && v <= 0) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === Infinity) throw new Error("no finite data to plot");
  return [lo, hi];
}

function panelSvg(panel: Panel, width: number, height: number, yOffset: number): string {
  const x0 = MARGIN.left;
  const x1 = width - MARGIN.right;
  const y0 = yOffset + MARGIN.top;
  const y1 = yOffset + height - MARGIN.bottom;

  const xs = panel.series.flatMap((s) => s.x);
  const ys = panel.series.flatMap((s) => s.y);
  for (const ov of panel.overlays ?? []) {
    (ov.vertical ? xs : ys).push(ov.value);
  }
  const sx = makeScale(extent(xs, !!panel.logX), [x0, x1], !!panel.logX);
  const sy = makeScale(extent(ys, !!panel.logY), [y1, y0], !!panel.logY);

  const parts: string[] = [];
  parts.push(`<text x="${(x0 + x1) / 2}" y="${y0 - 14}" text-anchor="middle" font-size="14" font-weight="bold">${esc(panel.title)}</text>`);
  parts.push(`<rect x="${x0}" y="${y0}" width="${x1 - x0}" height="${y1 - y0}" fill="none" stroke="#444"/>`);

  for (const t of ticks(sx)) {
    const px = sx(t);
    if (px < x0 - 1e-6 || px > x1 + 1e-6) continue;
    parts.push(`<line x1="${px.toFixed(2)}" y1="${y0}" x2="${px.toFixed(2)}" y2="${y1}" stroke="#ddd"/>`);
    parts.push(`<text x="${px.toFixed(2)}" y="${y1 + 16}" text-anchor="middle" font-size="11">${fmt(t)}</text>`);
  }
  for (const t of ticks(sy)) {
    const py = sy(t);
    if (py < y0 - 1e-6 || py > y1 + 1e-6) continue;
    parts.push(`<line x1="${x0}" y1="${py.toFixed(2)}" x2="${x1}" y2="${py.toFixed(2)}" stroke="#ddd"/>`);
    parts.push(`<text x="${x0 - 6}" y="${(py + 4).toFixed(2)}" text-anchor="end" font-size="11" data-role="ytick" data-value="${t}">${fmt(t)}</text>`);
  }
  parts.push(`<text x="${(x0 + x1) / 2}" y="${y1 + 34}" text-anchor="middle" font-size="12">${esc(panel.xLabel)}</text>`);
  parts.push(`<text x="${x0 - 58}" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 ${x0 - 58} ${(y0 + y1) / 2})">${esc(panel.yLabel)}</text>`);

  for (const ov of panel.overlays ?? []) {
    const color = ov.color;
    if (ov.vertical) {
      const px = sx(ov.value);
      parts.push(`<line x1="${px.toFixed(3)}" y1="${y0}" x2="${px.toFixed(3)}" y2="${y1}" stroke="${color}" stroke-dasharray="6 4" stroke-width="1.5" data-role="${ov.role}" data-value="${ov.value}"/>`);
      parts.push(`<text x="${(px + 4).toFixed(2)}" y="${y0 + 14}" font-size="11" fill="${color}">${esc(ov.label)}</text>`);
    } else {
      const py = sy(ov.value);
      parts.push(`<line x1="${x0}" y1="${py.toFixed(3)}" x2="${x1}" y2="${py.toFixed(3)}" stroke="${color}" stroke-dasharray="6 4" stroke-width="1.5" data-role="${ov.role}" data-value="${ov.value}"/>`);
      parts.push(`<text x="${x1 - 4}" y="${(py - 5).toFixed(2)}" text-anchor="end" font-size="11" fill="${color}">${esc(ov.label)}</text>`);
    }
  }

  for (const s of panel.series) {
    const pts: string[] = [];
    for (let i = 0; i < s.x.length; i++) {
      const vx = s.x[i];
      const vy = s.y[i];
      if (!Number.isFinite(vx) || !Number.isFinite(vy)) continue;
      if (panel.logY && vy <= 0) continue;
      if (panel.logX && vx <= 0) continue;
      pts.push(`${sx(vx).toFixed(2)},${sy(vy).toFixed(2)}`);
    }
    parts.push(`<polyline points="${pts.join(" ")}" fill="none" stroke="${s.color}" stroke-width="${s.width ?? 1.6}"${s.dash ? ` stroke-dasharray="${s.dash}"` : ""} data-role="series" data-label="${esc(s.label)}"/>`);
  }

  // legend (top-right corner, only when informative)
  if (panel.series.length > 1 && panel.series.length <= 8) {
    panel.series.forEach((s, i) => {
      const ly = y0 + 14 + 14 * i;
      parts.push(`<line x1="${x1 - 110}" y1="${ly - 4}" x2="${x1 - 92}" y2="${ly - 4}" stroke="${s.color}" stroke-width="2"/>`);
      parts.push(`<text x="${x1 - 88}" y="${ly}" font-size="11">${esc(s.label)}</text>`);
    });
  }
  return parts.join("\n");
}

export function figure(panels: Panel[], width = 760, panelHeight = 300): string {
  const height = panelHeight * panels.length;
  const body = panels.map((p, i) => panelSvg(p, width, panelHeight, i * panelHeight)).join("\n");
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    body,
    "</svg>",
  ].join("\n");
}
