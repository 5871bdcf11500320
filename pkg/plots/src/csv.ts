import { readFileSync } from "node:fs";

export interface Timeseries {
  columns: string[];
  times: number[];
  values: Map<string, number[]>;
  configHash: string | null;
}

export interface WignerGrid {
  x: number[];
  p: number[];
  /** values[ix][ip] */
  values: number[][];
  t: number | null;
  configHash: string | null;
}

function hashFromComment(line: string): string | null {
  const m = line.match(/#\s*config=([0-9a-f]+)/);
  return m ? m[1] : null;
}

export function parseTimeseries(text: string): Timeseries {
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  let configHash: string | null = null;
  let i = 0;
  while (i < lines.length && lines[i].startsWith("#")) {
    configHash = configHash ?? hashFromComment(lines[i]);
    i += 1;
  }
  if (i >= lines.length) throw new Error("timeseries has no header row");
  const columns = lines[i].split(",").map((c) => c.trim());
  if (columns[0] !== "t_seconds") throw new Error(`unexpected first column ${columns[0]}`);
  const rows = lines.slice(i + 1);
  if (rows.length === 0) throw new Error("timeseries has no data rows");
  const times: number[] = [];
  const values = new Map<string, number[]>(columns.slice(1).map((c) => [c, []]));
  for (const row of rows) {
    const parts = row.split(",");
    if (parts.length !== columns.length) throw new Error(`ragged row: ${row}`);
    times.push(Number(parts[0]));
    columns.slice(1).forEach((c, k) => values.get(c)!.push(Number(parts[k + 1])));
  }
  return { columns: columns.slice(1), times, values, configHash };
}

export function parseWignerCsv(text: string): WignerGrid {
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  let configHash: string | null = null;
  let t: number | null = null;
  let i = 0;
  while (i < lines.length && lines[i].startsWith("#")) {
    configHash = configHash ?? hashFromComment(lines[i]);
    const mt = lines[i].match(/#\s*t_seconds=([-+0-9.eE]+)/);
    if (mt) t = Number(mt[1]);
    i += 1;
  }
  const xs: number[] = [];
  const ps: number[] = [];
  const flat: number[] = [];
  for (const row of lines.slice(i)) {
    const [x, p, w] = row.split(",").map(Number);
    if (!Number.isFinite(w)) throw new Error(`bad wigner row: ${row}`);
    if (xs.length === 0 || x !== xs[xs.length - 1]) xs.push(x);
    if (xs.length === 1) ps.push(p);
    flat.push(w);
  }
  const nx = xs.length;
  const np = ps.length;
  if (nx * np !== flat.length) {
    throw new Error(`wigner grid is not rectangular: ${nx} x ${np} != ${flat.length}`);
  }
  const values: number[][] = [];
  for (let ix = 0; ix < nx; ix++) values.push(flat.slice(ix * np, (ix + 1) * np));
  return { x: xs, p: ps, values, t, configHash };
}

export function readTimeseries(path: string): Timeseries {
  return parseTimeseries(readFileSync(path, "utf8"));
}

export function readWigner(path: string): WignerGrid {
  return parseWignerCsv(readFileSync(path, "utf8"));
}
