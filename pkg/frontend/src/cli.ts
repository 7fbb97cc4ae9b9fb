/**
 * Figure rendering CLI.
 *
 * Usage:
 *   node dist/cli.js histogram --input hist.csv --metadata hist.meta.json --output fig.svg
 *   node dist/cli.js mse_loglog --input sweep.csv --slopes sweep.slopes.csv --output fig.svg
 *   node dist/cli.js sensitivity_band --input sens.csv --metadata sens.meta.json --output fig.svg
 */

import { writeFileSync } from "node:fs";
import { FigureRequest, renderFigure } from "./figures.js";

function parseArgs(argv: string[]): FigureRequest {
  if (argv.length === 0) {
    throw new Error("usage: <kind> --input <csv> [--metadata <json>] [--slopes <csv>] --output <svg>");
  }
  const [kind, ...rest] = argv;
  const request: Record<string, string> = {};
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new Error(`malformed flag pair near '${flag}'`);
    }
    request[flag.slice(2)] = value;
  }
  if (!request.input) {
    throw new Error("--input is required");
  }
  return {
    kind: kind as FigureRequest["kind"],
    input: request.input,
    metadata: request.metadata,
    slopes: request.slopes,
    output: request.output,
    title: request.title,
  };
}

export function main(argv: string[]): number {
  const request = parseArgs(argv);
  const svg = renderFigure(request);
  const target = request.output ?? "figure.svg";
  writeFileSync(target, svg);
  console.log(`wrote ${target}`);
  return 0;
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js") ?? false;
if (invokedDirectly) {
  try {
    process.exit(main(process.argv.slice(2)));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    process.exit(1);
  }
}
