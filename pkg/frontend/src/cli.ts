/** Command line: render one or more figure specs.
 *
 *   node dist/cli.js --spec fig2.json [--base-dir DIR]
 *
 * The spec file holds a FigureSpec object or an array of them; input and
 * output paths resolve against --base-dir (default: the spec's directory).
 */

import { readFileSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";

import { MissingSeries, SchemaMismatch } from "./csv.js";
import { FigureSpec, renderFigure, validateSpec } from "./figures.js";

function parseArgs(argv: string[]): { spec: string; baseDir?: string } {
  let spec: string | undefined;
  let baseDir: string | undefined;
  for (let i = 0; i < argv.length; i += 1) {
    if (argv[i] === "--spec") spec = argv[++i];
    else if (argv[i] === "--base-dir") baseDir = argv[++i];
    else throw new Error(`unknown argument '${argv[i]}'`);
  }
  if (!spec) throw new Error("usage: cli --spec <file.json> [--base-dir DIR]");
  return { spec, baseDir };
}

export function main(argv: string[]): number {
  let args: { spec: string; baseDir?: string };
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  try {
    const raw = JSON.parse(readFileSync(args.spec, "utf8"));
    const specs: FigureSpec[] = (Array.isArray(raw) ? raw : [raw]).map(
      validateSpec,
    );
    const base = args.baseDir ?? dirname(resolve(args.spec));
    for (const spec of specs) {
      const csvText = readFileSync(resolve(base, spec.input), "utf8");
      const rendered = renderFigure(spec, csvText);
      writeFileSync(resolve(base, spec.output), rendered);
      console.log(`wrote ${resolve(base, spec.output)}`);
    }
    return 0;
  } catch (err) {
    if (err instanceof SchemaMismatch || err instanceof MissingSeries) {
      console.error(`figure error: ${err.message}`);
    } else {
      console.error(String(err instanceof Error ? err.message : err));
    }
    return 1;
  }
}

process.exitCode = main(process.argv.slice(2));
