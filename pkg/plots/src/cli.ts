#!/usr/bin/env node
/**
 * Render mechcat run outputs to SVG figures.
 *
 *   mechcat-render render --spec figure.json
 *   mechcat-render render --auto <run-dir> [--out <dir>]
 *
 * (the leading "render" token is optional when invoked via the bin)
 */

import { readFileSync } from "node:fs";

import { discover } from "./autodiscover.js";
import { FigureSpec, render } from "./figures.js";

const USAGE = "usage: render --spec <figure.json> | render --auto <run-dir> [--out <dir>]";

export function main(argv: string[]): number {
  const args = argv[0] === "render" ? argv.slice(1) : [...argv];
  const values = new Map<string, string>();
  for (let i = 0; i < args.length; i += 2) {
    if (!args[i].startsWith("--") || i + 1 >= args.length) {
      console.error(USAGE);
      return 2;
    }
    values.set(args[i].slice(2), args[i + 1]);
  }
  const spec = values.get("spec");
  const auto = values.get("auto");
  if ((spec === undefined) === (auto === undefined)) {
    console.error(USAGE);
    return 2;
  }
  try {
    const specs: FigureSpec[] = spec
      ? [JSON.parse(readFileSync(spec, "utf8")) as FigureSpec]
      : discover(auto!, values.get("out"));
    for (const s of specs) {
      console.log(render(s));
    }
    return 0;
  } catch (err) {
    console.error(`render failed: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (process.argv[1] !== undefined && /cli\.[cm]?js$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
