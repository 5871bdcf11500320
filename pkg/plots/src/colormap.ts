export type Rgb = [number, number, number];

// diverging blue-white-red anchors (negative -> blue side)
const NEGATIVE_END: Rgb = [5, 48, 97];
const POSITIVE_END: Rgb = [103, 0, 31];
const NEGATIVE_MID: Rgb = [33, 102, 172];
const POSITIVE_MID: Rgb = [178, 24, 43];
const WHITE: Rgb = [247, 247, 247];

function lerp(a: Rgb, b: Rgb, t: number): Rgb {
  return [0, 1, 2].map((i) => Math.round(a[i] + (b[i] - a[i]) * t)) as Rgb;
}

/**
 * Diverging colormap symmetric about zero: v in [-scale, scale] maps
 * blue (negative) through near-white (zero) to red (positive), so
 * Wigner negativity is visually unambiguous.
 */
export function divergingColor(v: number, scale: number): Rgb {
  if (!(scale > 0)) return WHITE;
  const t = Math.max(-1, Math.min(1, v / scale));
  const a = Math.abs(t);
  if (t < 0) return a < 0.5 ? lerp(WHITE, NEGATIVE_MID, a * 2) : lerp(NEGATIVE_MID, NEGATIVE_END, a * 2 - 1);
  return a < 0.5 ? lerp(WHITE, POSITIVE_MID, a * 2) : lerp(POSITIVE_MID, POSITIVE_END, a * 2 - 1);
}

const SERIES_PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#17becf",
];

export function seriesColor(index: number): string {
  return SERIES_PALETTE[index % SERIES_PALETTE.length];
}

export function rgbCss([r, g, b]: Rgb): string {
  return `rgb(${r},${g},${b})`;
}
