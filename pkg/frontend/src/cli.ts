#!/usr/bin/env node
/**
 * Figure renderer for bench CSV outputs.
 *
 * Usage:
 *   gnopt-plot traces --in a.csv,b.csv [--labels A,B] --out fig.svg [--linear-y]
 *   gnopt-plot sweep  --in sweep.csv --out fig.svg
 *
 * Exit codes: 0 success, 2 usage/schema/input error.
 */

import { InputError, SchemaError } from "./csv.js";
import { renderSweep, renderTraces } from "./plot.js";

interface Args {
  command: string;
  inputs: string[];
  labels?: string[];
  out?: string;
  linearY: boolean;
}

function parseArgs(argv: string[]): Args {
  const [command, ...rest] = argv;
  const args: Args = { command: command ?? "", inputs: [], linearY: false };
  for (let i = 0; i < rest.length; i++) {
    const flag = rest[i];
    switch (flag) {
      case "--in":
        args.inputs.push(...(rest[++i] ?? "").split(",").filter(Boolean));
        break;
      case "--labels":
        args.labels = (rest[++i] ?? "").split(",").filter(Boolean);
        break;
      case "--out":
        args.out = rest[++i];
        break;
      case "--linear-y":
        args.linearY = true;
        break;
      default:
        throw new InputError(`unknown flag '${flag}'`);
    }
  }
  return args;
}

export function main(argv: string[]): number {
  try {
    const args = parseArgs(argv);
    if (!args.out) {
      throw new InputError("--out is required");
    }
    if (args.command === "traces") {
      renderTraces({
        inputs: args.inputs,
        labels: args.labels,
        output: args.out,
        logY: !args.linearY,
      });
    } else if (args.command === "sweep") {
      if (args.inputs.length !== 1) {
        throw new InputError("sweep takes exactly one --in file");
      }
      renderSweep(args.inputs[0], args.out);
    } else {
      throw new InputError(`unknown command '${args.command}' (use traces|sweep)`);
    }
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof InputError) {
      console.error(String(err.message));
      return 2;
    }
    if (err instanceof Error && "code" in err && err.code === "ENOENT") {
      console.error(String(err.message));
      return 2;
    }
    throw err;
  }
}

const isMain = process.argv[1] && import.meta.url.endsWith(process.argv[1].replace(/^.*\//, "/"));
if (isMain) {
  process.exit(main(process.argv.slice(2)));
}
