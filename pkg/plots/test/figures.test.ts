import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { inflateSync } from "node:zlib";
import { beforeAll, describe, expect, it } from "vitest";

import { discover } from "../src/autodiscover.js";
import { main } from "../src/cli.js";
import { render } from "../src/figures.js";

const HASH = "feedfacefeedface";

function makeRunDir(): string {
  const dir = mkdtempSync(join(tmpdir(), "mechcat-run-"));
  writeFileSync(
    join(dir, "manifest.json"),
    JSON.stringify({
      name: "fixture",
      config_hash: HASH,
      run: {
        observables: [
          "fidelity_target", "purity", "mean_phonon", "parity",
          "distance_rho_app", "ng_fixed",
        ],
      },
    }),
  );
  // dense sampling to t=10 then coarse to t=100 (drives the inset split)
  const rows: string[] = [];
  for (let i = 0; i <= 50; i++) {
    const t = i * 0.2;
    rows.push(line(t));
  }
  for (let i = 1; i <= 45; i++) {
    const t = 10 + i * 2;
    rows.push(line(t));
  }
  function line(t: number): string {
    const fid = 0.999 * (1 - Math.exp(-t)) * Math.exp(-t / 80) + 0.001;
    const dist = t < 1 ? NaN : 0.05 * Math.exp(-t / 40);
    const ng = -0.4 * Math.exp(-t / 15);
    return [t, fid, 1 - t / 300, t / 50, 1 - t / 100, dist, ng]
      .map((v) => (Number.isNaN(v) ? "nan" : v.toString()))
      .join(",");
  }
  writeFileSync(
    join(dir, "timeseries.csv"),
    `# config=${HASH}\n` +
      "t_seconds,fidelity_target,purity,mean_phonon,parity,distance_rho_app,ng_fixed\n" +
      rows.join("\n") + "\n",
  );
  const wig: string[] = [
    "# grid x_range=(-2,2) p_range=(-2,2) nx=21 np=21",
    "# t_seconds=3.4e-4",
    `# config=${HASH}`,
  ];
  for (let ix = 0; ix < 21; ix++) {
    for (let ip = 0; ip < 21; ip++) {
      const x = -2 + (4 * ix) / 20;
      const p = -2 + (4 * ip) / 20;
      // positive blobs at x = +-1.4 with a negative fringe near the origin
      const w =
        0.3 * Math.exp(-((x - 1.4) ** 2 + p ** 2)) +
        0.3 * Math.exp(-((x + 1.4) ** 2 + p ** 2)) -
        0.5 * Math.exp(-(x ** 2 + p ** 2)) * Math.cos(4 * p);
      wig.push(`${x},${p},${w}`);
    }
  }
  writeFileSync(join(dir, "wigner_t0.csv"), wig.join("\n") + "\n");
  return dir;
}

function pngPixels(svgText: string): { data: Buffer; width: number } {
  const m = svgText.match(/base64,([A-Za-z0-9+/=]+)/);
  expect(m).not.toBeNull();
  const png = Buffer.from(m![1], "base64");
  const width = png.readUInt32BE(16);
  let offset = 8;
  const idat: Buffer[] = [];
  while (offset < png.length) {
    const len = png.readUInt32BE(offset);
    const type = png.subarray(offset + 4, offset + 8).toString("ascii");
    if (type === "IDAT") idat.push(png.subarray(offset + 8, offset + 8 + len));
    offset += 12 + len;
  }
  return { data: inflateSync(Buffer.concat(idat)), width };
}

let runDir: string;

beforeAll(() => {
  runDir = makeRunDir();
});

describe("auto-discovery", () => {
  it("produces one spec per expected figure", () => {
    const specs = discover(runDir);
    const outputs = specs.map((s) => s.output.split("/").pop());
    expect(outputs).toEqual([
      "fidelity.svg", "distance.svg", "ng.svg", "observables.svg", "wigner_t0.svg",
    ]);
  });

  it("requires the manifest", () => {
    expect(() => discover(tmpdir())).toThrow(/manifest/);
  });
});

describe("render", () => {
  it("writes every discovered figure", () => {
    for (const spec of discover(runDir)) {
      const path = render(spec);
      expect(existsSync(path)).toBe(true);
      expect(readFileSync(path, "utf8")).toContain("<svg");
    }
  });

  it("encodes negative Wigner cells on the blue side of the colormap", () => {
    const [spec] = discover(runDir).filter((s) => s.kind === "wigner_heatmap");
    const svg = readFileSync(render(spec), "utf8");
    const { data, width } = pngPixels(svg);
    let negative = 0;
    let positive = 0;
    for (let y = 0; y < width; y++) {
      for (let x = 0; x < width; x++) {
        const o = y * (1 + width * 4) + 1 + x * 4;
        const [r, , b] = [data[o], data[o + 1], data[o + 2]];
        if (b > r + 30) negative += 1;
        if (r > b + 30) positive += 1;
      }
    }
    expect(negative).toBeGreaterThan(5); // fringe pixels on the blue side
    expect(positive).toBeGreaterThan(5); // coherent blobs on the red side
  });

  it("draws the short-time inset for the fidelity figure", () => {
    const [spec] = discover(runDir);
    const svg = readFileSync(render(spec), "utf8");
    // inset backdrop plus at least two polylines (main + inset)
    expect((svg.match(/<polyline/g) ?? []).length).toBeGreaterThanOrEqual(2);
  });

  it("is deterministic", () => {
    const [spec] = discover(runDir);
    const a = readFileSync(render(spec), "utf8");
    const b = readFileSync(render(spec), "utf8");
    expect(a).toBe(b);
  });

  it("rejects config-hash mismatches", () => {
    const specs = discover(runDir);
    const bad = { ...specs[0], configHash: "0000000000000000" };
    expect(() => render(bad)).toThrow(/hash mismatch/);
  });

  it("rejects empty timeseries without writing a file", () => {
    const dir = mkdtempSync(join(tmpdir(), "mechcat-empty-"));
    const input = join(dir, "timeseries.csv");
    writeFileSync(input, "# config=aa\nt_seconds,fidelity_target\n");
    const output = join(dir, "out.svg");
    expect(() =>
      render({ kind: "timeseries_line", inputs: [input], output }),
    ).toThrow(/no data/);
    expect(existsSync(output)).toBe(false);
  });

  it("rejects missing input files", () => {
    expect(() =>
      render({ kind: "timeseries_line", inputs: ["/nope.csv"], output: "/tmp/x.svg" }),
    ).toThrow(/missing/);
  });
});

describe("cli", () => {
  it("renders a run directory with --auto", () => {
    expect(main(["render", "--auto", runDir])).toBe(0);
    expect(existsSync(join(runDir, "figures", "fidelity.svg"))).toBe(true);
  });

  it("renders a single figure from --spec", () => {
    const dir = mkdtempSync(join(tmpdir(), "mechcat-spec-"));
    const spec = {
      kind: "timeseries_line",
      inputs: [join(runDir, "timeseries.csv")],
      output: join(dir, "one.svg"),
      columns: ["purity"],
    };
    const path = join(dir, "spec.json");
    writeFileSync(path, JSON.stringify(spec));
    expect(main(["--spec", path])).toBe(0);
    expect(existsSync(spec.output)).toBe(true);
  });

  it("returns 2 on bad usage and 1 on render failure", () => {
    expect(main([])).toBe(2);
    expect(main(["--spec", "a.json", "--auto", "b"])).toBe(2);
    expect(main(["--auto", "/does/not/exist"])).toBe(1);
  });
});
