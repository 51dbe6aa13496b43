#!/usr/bin/env node
/**
 * plots <kind> --in <csv> --out <svg>
 *
 * Renders one documented CSV report into a deterministic SVG figure.  Any
 * schema mismatch or empty input exits nonzero without writing the output.
 */
import fs from "node:fs";

import { FIGURES } from "./index.js";
import { SchemaError } from "./csv.js";

function usage(): string {
  const kinds = Object.entries(FIGURES)
    .map(([name, f]) => `  ${name.padEnd(14)} from ${f.input}`)
    .join("\n");
  return `usage: plots <kind> --in <csv> --out <svg>\n\nfigure kinds:\n${kinds}\n`;
}

export function main(argv: string[]): number {
  const args = [...argv];
  const kind = args.shift();
  if (!kind || kind === "--help" || kind === "-h") {
    process.stderr.write(usage());
    return kind ? 0 : 1;
  }
  const fig = FIGURES[kind];
  if (!fig) {
    process.stderr.write(`error: unknown figure kind '${kind}'\n${usage()}`);
    return 1;
  }
  let input = "";
  let output = "";
  for (let i = 0; i < args.length; i += 2) {
    const flag = args[i];
    const val = args[i + 1];
    if (flag === "--in") input = val;
    else if (flag === "--out") output = val;
    else {
      process.stderr.write(`error: unknown option '${flag}'\n${usage()}`);
      return 1;
    }
  }
  if (!input || !output) {
    process.stderr.write(`error: both --in and --out are required\n${usage()}`);
    return 1;
  }
  let csvText: string;
  try {
    csvText = fs.readFileSync(input, "utf8");
  } catch (exc) {
    process.stderr.write(`error: cannot read ${input}: ${(exc as Error).message}\n`);
    return 1;
  }
  let svg: string;
  try {
    svg = fig.render(csvText);
  } catch (exc) {
    if (exc instanceof SchemaError) {
      process.stderr.write(`error: ${exc.message}\n`);
      return 1;
    }
    throw exc;
  }
  fs.writeFileSync(output, svg);
  process.stderr.write(`wrote ${output}\n`);
  return 0;
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("plots")) {
  process.exit(main(process.argv.slice(2)));
}
