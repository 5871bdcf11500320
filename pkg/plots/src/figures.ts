import { existsSync, mkdirSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import { divergingColor, rgbCss, seriesColor } from "./colormap.js";
import { readTimeseries, readWigner, Timeseries, WignerGrid } from "./csv.js";
import { encodePng } from "./png.js";
import { axes, Extent, finiteExtent, Panel, Scale, seriesPath, svgDocument, escapeXml, fmtTick } from "./svg.js";

export interface FigureSpec {
  kind: "wigner_heatmap" | "timeseries_line";
  inputs: string[];
  output: string;
  title?: string;
  /** timeseries columns to draw (default: all in the file) */
  columns?: string[];
  /** add a short-time inset covering the densely sampled prefix */
  inset?: boolean;
  /** log-scaled time axis in the inset */
  logInset?: boolean;
  /** expected config hash (e.g. from the run manifest) */
  configHash?: string;
}

function checkInputs(spec: FigureSpec): void {
  if (spec.inputs.length === 0) throw new Error("figure spec has no inputs");
  for (const path of spec.inputs) {
    if (!existsSync(path)) throw new Error(`input file missing: ${path}`);
  }
}

function checkHashes(spec: FigureSpec, found: (string | null)[]): void {
  const hashes = new Set(found.filter((h): h is string => h !== null));
  if (spec.configHash) hashes.add(spec.configHash);
  if (hashes.size > 1) {
    throw new Error(`config hash mismatch across inputs: ${[...hashes].join(", ")}`);
  }
}

// --- timeseries figures -------------------------------------------------------

function denseBoundary(times: number[]): number {
  // index where the sampling step first widens (dense formation window)
  if (times.length < 4) return times.length;
  const dt0 = times[1] - times[0];
  for (let i = 2; i < times.length; i++) {
    if (times[i] - times[i - 1] > 1.5 * dt0) return i;
  }
  return times.length;
}

function drawSeriesPanel(
  panel: Panel,
  ts: Timeseries,
  columns: string[],
  opts: { logX?: boolean; maxIndex?: number; fontSize?: number; xLabel?: string } = {},
): string {
  const upto = opts.maxIndex ?? ts.times.length;
  const times = ts.times.slice(0, upto);
  const xlo = opts.logX ? Math.max(times.find((t) => t > 0) ?? 1e-12, 1e-12) : times[0];
  const xs = new Scale({ lo: xlo, hi: times[times.length - 1] }, [panel.x, panel.x + panel.width], opts.logX);
  const allValues = columns.flatMap((c) => ts.values.get(c)!.slice(0, upto));
  const ext: Extent = finiteExtent(allValues);
  const ys = new Scale(ext, [panel.y + panel.height, panel.y]);
  const parts = [axes(panel, xs, ys, { xLabel: opts.xLabel, fontSize: opts.fontSize })];
  columns.forEach((c, i) => {
    parts.push(seriesPath(times, ts.values.get(c)!.slice(0, upto), xs, ys, seriesColor(i), panel, opts.logX));
  });
  return parts.join("\n");
}

function renderTimeseries(spec: FigureSpec): string {
  const ts = readTimeseries(spec.inputs[0]);
  checkHashes(spec, [ts.configHash]);
  const columns = spec.columns ?? ts.columns;
  for (const c of columns) {
    if (!ts.values.has(c)) throw new Error(`column ${c} not in timeseries`);
  }
  const width = 720;
  const height = 480;
  const panel: Panel = { x: 70, y: 46, width: width - 95, height: height - 116 };
  const parts: string[] = [];
  if (spec.title) {
    parts.push(`<text x="${width / 2}" y="26" font-size="16" text-anchor="middle">${escapeXml(spec.title)}</text>`);
  }
  parts.push(drawSeriesPanel(panel, ts, columns, { xLabel: "t (s)" }));
  columns.forEach((c, i) => {
    const y = panel.y + 16 + 16 * i;
    const x = panel.x + panel.width - 150;
    parts.push(
      `<line x1="${x}" y1="${y - 4}" x2="${x + 24}" y2="${y - 4}" stroke="${seriesColor(i)}" stroke-width="2"/>`,
      `<text x="${x + 30}" y="${y}" font-size="12">${escapeXml(c)}</text>`,
    );
  });
  if (spec.inset) {
    const upto = denseBoundary(ts.times);
    if (upto >= 8) {
      const inset: Panel = {
        x: panel.x + panel.width * 0.52,
        y: panel.y + panel.height * 0.45,
        width: panel.width * 0.42,
        height: panel.height * 0.42,
      };
      parts.push(
        `<rect x="${inset.x - 6}" y="${inset.y - 6}" width="${inset.width + 12}" height="${inset.height + 12}" fill="white" stroke="#999"/>`,
      );
      parts.push(
        drawSeriesPanel(inset, ts, columns, {
          logX: spec.logInset ?? false,
          maxIndex: upto,
          fontSize: 9,
        }),
      );
    }
  }
  return svgDocument(width, height, parts.join("\n"));
}

// --- Wigner heatmap -------------------------------------------------------------

function heatmapPng(grid: WignerGrid, scale: number): Buffer {
  const nx = grid.x.length;
  const np = grid.p.length;
  const rgba = new Uint8Array(nx * np * 4);
  for (let row = 0; row < np; row++) {
    // image row 0 at the top = largest p
    const ip = np - 1 - row;
    for (let col = 0; col < nx; col++) {
      const [r, g, b] = divergingColor(grid.values[col][ip], scale);
      const o = (row * nx + col) * 4;
      rgba[o] = r;
      rgba[o + 1] = g;
      rgba[o + 2] = b;
      rgba[o + 3] = 255;
    }
  }
  return encodePng(nx, np, rgba);
}

function renderWigner(spec: FigureSpec): string {
  const grid = readWigner(spec.inputs[0]);
  checkHashes(spec, [grid.configHash]);
  const flat = grid.values.flat();
  const scale = Math.max(...flat.map(Math.abs));
  const wmin = Math.min(...flat);
  const png = heatmapPng(grid, scale);

  const width = 660;
  const height = 560;
  const panel: Panel = { x: 70, y: 50, width: 440, height: 440 };
  const xs = new Scale({ lo: grid.x[0], hi: grid.x[grid.x.length - 1] }, [panel.x, panel.x + panel.width]);
  const ys = new Scale({ lo: grid.p[0], hi: grid.p[grid.p.length - 1] }, [panel.y + panel.height, panel.y]);
  const parts: string[] = [];
  const title =
    spec.title ?? (grid.t !== null ? `Wigner function at t = ${fmtTick(grid.t)} s` : "Wigner function");
  parts.push(`<text x="${width / 2}" y="28" font-size="16" text-anchor="middle">${escapeXml(title)}</text>`);
  parts.push(
    `<image x="${panel.x}" y="${panel.y}" width="${panel.width}" height="${panel.height}" ` +
      `preserveAspectRatio="none" style="image-rendering:pixelated" ` +
      `href="data:image/png;base64,${png.toString("base64")}"/>`,
  );
  parts.push(axes(panel, xs, ys, { xLabel: "Re alpha", yLabel: "Im alpha" }));

  // vertical colorbar, symmetric about zero
  const bar: Panel = { x: panel.x + panel.width + 40, y: panel.y, width: 18, height: panel.height };
  const steps = 64;
  for (let k = 0; k < steps; k++) {
    const v = scale * (1 - (2 * k) / (steps - 1));
    const y = bar.y + (k * bar.height) / steps;
    parts.push(
      `<rect x="${bar.x}" y="${y.toFixed(2)}" width="${bar.width}" height="${(bar.height / steps + 0.5).toFixed(2)}" fill="${rgbCss(divergingColor(v, scale))}"/>`,
    );
  }
  parts.push(
    `<rect x="${bar.x}" y="${bar.y}" width="${bar.width}" height="${bar.height}" fill="none" stroke="#333"/>`,
  );
  for (const [frac, value] of [
    [0, scale],
    [0.5, 0],
    [1, -scale],
  ] as const) {
    const y = bar.y + frac * bar.height;
    parts.push(
      `<line x1="${bar.x + bar.width}" y1="${y}" x2="${bar.x + bar.width + 4}" y2="${y}" stroke="#333"/>`,
      `<text x="${bar.x + bar.width + 7}" y="${y + 4}" font-size="11">${fmtTick(value)}</text>`,
    );
  }
  parts.push(
    `<text x="${panel.x}" y="${panel.y + panel.height + 42}" font-size="11" fill="#555">min W = ${wmin.toExponential(2)}</text>`,
  );
  return svgDocument(width, height, parts.join("\n"));
}

export function render(spec: FigureSpec): string {
  checkInputs(spec);
  const body = spec.kind === "wigner_heatmap" ? renderWigner(spec) : renderTimeseries(spec);
  mkdirSync(dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, body);
  return spec.output;
}
