#!/usr/bin/env node
/**
 * Figure renderer for proxfilm CSV artifacts.
 *
 * Usage:
 *   render --spec spec.json
 *   energy    --diagnostics diagnostics.csv --out figs/energy [--log-e]
 *   snapshots --dir snapshots/ --out figs/snapshots [--stride 2] [--atoms report.json]
 *   spectrum  --dir snapshots/ --out figs/spectrum [--stride 2]
 *   compare   --csv compare.csv --out figs/compare
 *
 * Writes <out>.svg and <out>.png; exits nonzero with a message on schema
 * mismatch or missing inputs.
 */

import { SchemaError } from "./csv.js";
import { FigureSpec, SpecError, loadSpec, validateSpec } from "./figspec.js";
import { render } from "./render.js";

function parseFlags(argv: string[]): Map<string, string | boolean> {
  const flags = new Map<string, string | boolean>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new SpecError(`unexpected argument ${arg}`);
    const key = arg.slice(2);
    if (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
      flags.set(key, argv[++i]);
    } else {
      flags.set(key, true);
    }
  }
  return flags;
}

function need(flags: Map<string, string | boolean>, key: string): string {
  const value = flags.get(key);
  if (typeof value !== "string") throw new SpecError(`missing --${key}`);
  return value;
}

function specFromShortcut(command: string, flags: Map<string, string | boolean>): FigureSpec {
  const out = need(flags, "out");
  const stride = flags.has("stride") ? Number(flags.get("stride")) : undefined;
  switch (command) {
    case "energy":
      return validateSpec({
        kind: "energy",
        inputs: { diagnostics: need(flags, "diagnostics") },
        out,
        style: {
          logTime: flags.get("log-time") === true,
          logPhi: flags.get("log-phi") === true,
          logE: flags.get("log-e") === true,
        },
      });
    case "snapshots":
      return validateSpec({
        kind: "snapshots",
        inputs: {
          snapshots: need(flags, "dir"),
          atoms: flags.has("atoms") ? String(flags.get("atoms")) : undefined,
        },
        out,
        style: { stride },
      });
    case "spectrum":
      return validateSpec({
        kind: "spectrum",
        inputs: { snapshots: need(flags, "dir") },
        out,
        style: { stride },
      });
    case "compare":
      return validateSpec({ kind: "compare", inputs: { compare: need(flags, "csv") }, out });
    default:
      throw new SpecError(`unknown command ${command}; expected render|energy|snapshots|spectrum|compare`);
  }
}

export function main(argv: string[]): number {
  try {
    const [command, ...rest] = argv;
    if (!command) throw new SpecError("no command given");
    const flags = parseFlags(rest);
    const spec =
      command === "render" ? loadSpec(need(flags, "spec")) : specFromShortcut(command, flags);
    const { svgPath, pngPath } = render(spec);
    console.log(`wrote ${svgPath} and ${pngPath}`);
    return 0;
  } catch (err) {
    if (err instanceof SpecError || err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(`error: ${(err as Error).message}`);
      return 2;
    }
    throw err;
  }
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
