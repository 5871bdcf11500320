export interface Extent {
  lo: number;
  hi: number;
}

export function finiteExtent(values: number[], pad = 0.05): Extent {
  const finite = values.filter(Number.isFinite);
  if (finite.length === 0) throw new Error("no finite values to plot");
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const span = hi - lo;
  return { lo: lo - pad * span, hi: hi + pad * span };
}

/** 1-2-5 tick positions covering [lo, hi]. */
export function niceTicks(lo: number, hi: number, target = 5): number[] {
  const span = hi - lo;
  if (!(span > 0)) return [lo];
  const raw = span / target;
  const mag = 10 ** Math.floor(Math.log10(raw));
  const candidates = [1, 2, 5, 10].map((m) => m * mag);
  const step = candidates.find((c) => span / c <= target + 1) ?? candidates[3];
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += step) ticks.push(v);
  return ticks.map((v) => (Math.abs(v) < 1e-12 * span ? 0 : v));
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1).replace("e-", "e-").replace("e+", "e");
  return Number(v.toPrecision(4)).toString();
}

export function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export class Scale {
  constructor(
    private readonly domain: Extent,
    private readonly range: [number, number],
    private readonly log = false,
  ) {}

  map(v: number): number {
    const { lo, hi } = this.domain;
    const t = this.log
      ? (Math.log10(v) - Math.log10(lo)) / (Math.log10(hi) - Math.log10(lo))
      : (v - lo) / (hi - lo);
    return this.range[0] + t * (this.range[1] - this.range[0]);
  }

  ticks(): number[] {
    if (!this.log) return niceTicks(this.domain.lo, this.domain.hi);
    const lo = Math.ceil(Math.log10(this.domain.lo));
    const hi = Math.floor(Math.log10(this.domain.hi));
    const out: number[] = [];
    for (let e = lo; e <= hi; e++) out.push(10 ** e);
    return out.length >= 2 ? out : niceTicks(this.domain.lo, this.domain.hi, 3);
  }
}

export interface Panel {
  x: number;
  y: number;
  width: number;
  height: number;
}

/** Frame, tick marks and tick labels for a panel. */
export function axes(
  panel: Panel,
  xs: Scale,
  ys: Scale,
  opts: { xLabel?: string; yLabel?: string; fontSize?: number } = {},
): string {
  const fs = opts.fontSize ?? 12;
  const parts: string[] = [];
  parts.push(
    `<rect x="${panel.x}" y="${panel.y}" width="${panel.width}" height="${panel.height}" fill="none" stroke="#333" stroke-width="1"/>`,
  );
  for (const t of xs.ticks()) {
    const px = xs.map(t);
    if (px < panel.x - 0.5 || px > panel.x + panel.width + 0.5) continue;
    parts.push(
      `<line x1="${px.toFixed(2)}" y1="${panel.y + panel.height}" x2="${px.toFixed(2)}" y2="${panel.y + panel.height + 4}" stroke="#333"/>`,
      `<text x="${px.toFixed(2)}" y="${panel.y + panel.height + 5 + fs}" font-size="${fs}" text-anchor="middle">${fmtTick(t)}</text>`,
    );
  }
  for (const t of ys.ticks()) {
    const py = ys.map(t);
    if (py < panel.y - 0.5 || py > panel.y + panel.height + 0.5) continue;
    parts.push(
      `<line x1="${panel.x - 4}" y1="${py.toFixed(2)}" x2="${panel.x}" y2="${py.toFixed(2)}" stroke="#333"/>`,
      `<text x="${panel.x - 7}" y="${(py + fs * 0.35).toFixed(2)}" font-size="${fs}" text-anchor="end">${fmtTick(t)}</text>`,
    );
  }
  if (opts.xLabel) {
    parts.push(
      `<text x="${panel.x + panel.width / 2}" y="${panel.y + panel.height + 24 + fs}" font-size="${fs + 1}" text-anchor="middle">${escapeXml(opts.xLabel)}</text>`,
    );
  }
  if (opts.yLabel) {
    const cx = panel.x - 48;
    const cy = panel.y + panel.height / 2;
    parts.push(
      `<text x="${cx}" y="${cy}" font-size="${fs + 1}" text-anchor="middle" transform="rotate(-90 ${cx} ${cy})">${escapeXml(opts.yLabel)}</text>`,
    );
  }
  return parts.join("\n");
}

/** Polyline segments for one series; breaks at non-finite samples. */
export function seriesPath(
  ts: number[],
  vs: number[],
  xs: Scale,
  ys: Scale,
  color: string,
  panel: Panel,
  logX = false,
): string {
  const segs: string[][] = [[]];
  for (let i = 0; i < ts.length; i++) {
    if (!Number.isFinite(vs[i]) || (logX && ts[i] <= 0)) {
      if (segs[segs.length - 1].length > 0) segs.push([]);
      continue;
    }
    const px = xs.map(ts[i]);
    if (px < panel.x - 0.01 || px > panel.x + panel.width + 0.01) continue;
    const py = Math.min(panel.y + panel.height, Math.max(panel.y, ys.map(vs[i])));
    segs[segs.length - 1].push(`${px.toFixed(2)},${py.toFixed(2)}`);
  }
  return segs
    .filter((s) => s.length > 1)
    .map(
      (s) =>
        `<polyline points="${s.join(" ")}" fill="none" stroke="${color}" stroke-width="1.6"/>`,
    )
    .join("\n");
}

export function svgDocument(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n${body}\n</svg>\n`
  );
}
