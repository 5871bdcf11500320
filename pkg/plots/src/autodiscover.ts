import { existsSync, readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";

import { FigureSpec } from "./figures.js";

interface Manifest {
  name?: string;
  config_hash?: string;
  run?: { observables?: string[] };
}

/**
 * Build the figure specs for one run directory: one heatmap per Wigner
 * snapshot plus one line figure per timeseries quantity family that
 * the run recorded.
 */
export function discover(runDir: string, outDir?: string): FigureSpec[] {
  const out = outDir ?? join(runDir, "figures");
  const manifestPath = join(runDir, "manifest.json");
  if (!existsSync(manifestPath)) throw new Error(`no manifest.json in ${runDir}`);
  const manifest = JSON.parse(readFileSync(manifestPath, "utf8")) as Manifest;
  const hash = manifest.config_hash;
  const name = manifest.name ?? "run";
  const observables = manifest.run?.observables ?? [];
  const timeseries = join(runDir, "timeseries.csv");
  if (!existsSync(timeseries)) throw new Error(`no timeseries.csv in ${runDir}`);

  const specs: FigureSpec[] = [];
  specs.push({
    kind: "timeseries_line",
    inputs: [timeseries],
    output: join(out, "fidelity.svg"),
    title: `${name}: fidelity to the target cat`,
    columns: ["fidelity_target"],
    inset: true,
    logInset: true,
    configHash: hash,
  });
  if (observables.includes("distance_rho_app")) {
    specs.push({
      kind: "timeseries_line",
      inputs: [timeseries],
      output: join(out, "distance.svg"),
      title: `${name}: distance to the decohering-cat reference`,
      columns: ["distance_rho_app"],
      configHash: hash,
    });
  }
  if (observables.includes("ng_fixed")) {
    specs.push({
      kind: "timeseries_line",
      inputs: [timeseries],
      output: join(out, "ng.svg"),
      title: `${name}: non-Gaussianity witness decay`,
      columns: ["ng_fixed"],
      configHash: hash,
    });
  }
  specs.push({
    kind: "timeseries_line",
    inputs: [timeseries],
    output: join(out, "observables.svg"),
    title: `${name}: purity, occupation, parity`,
    columns: ["purity", "mean_phonon", "parity"].filter((c) => observables.includes(c)),
    configHash: hash,
  });

  const wigners = readdirSync(runDir)
    .filter((f) => /^wigner_t\d+\.csv$/.test(f))
    .sort((a, b) => Number(a.match(/\d+/)![0]) - Number(b.match(/\d+/)![0]));
  for (const file of wigners) {
    specs.push({
      kind: "wigner_heatmap",
      inputs: [join(runDir, file)],
      output: join(out, file.replace(".csv", ".svg")),
      configHash: hash,
    });
  }
  return specs;
}
