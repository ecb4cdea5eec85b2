#!/usr/bin/env node
/**
 * Command line renderer: `render --kind K --in a.csv [b.csv ...] --out F.svg`.
 *
 * Reading is strictly read-only and rendering is deterministic, so
 * re-running a spec overwrites the output with identical bytes.
 */
import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import {
  EmptySeriesError,
  SchemaError,
  parseState,
  parseTable,
} from "./csv.js";
import {
  KINDS,
  Kind,
  PlotOptions,
  renderDecay,
  renderFgrScan,
  renderFunctionals,
  renderProfiles,
} from "./plots.js";

export function renderSpec(
  kind: Kind,
  inputs: string[],
  opts: PlotOptions = {},
): string {
  const texts = inputs.map(
    (p) => [basename(p), readFileSync(p, "utf8")] as const,
  );
  if (kind === "profiles") {
    return renderProfiles(
      texts.map(([label, text]) => parseState(text, label)),
      opts,
    );
  }
  const tables = texts.map(([label, text]) => parseTable(text, label));
  switch (kind) {
    case "fgr_scan":
      return renderFgrScan(tables, opts);
    case "decay":
      return renderDecay(tables, opts);
    case "functionals":
      return renderFunctionals(tables, opts);
  }
}

export async function run(argv: string[]): Promise<number> {
  const parser = yargs(argv)
    .command("render", "render CSV/checkpoint inputs to an SVG figure", (y) =>
      y
        .option("kind", {
          choices: KINDS,
          demandOption: true,
          describe: "figure kind",
        })
        .option("in", {
          type: "string",
          array: true,
          demandOption: true,
          describe: "input file(s); several overlay into one figure",
        })
        .option("out", {
          type: "string",
          demandOption: true,
          describe: "output SVG path",
        })
        .option("log-x", { type: "boolean", default: false })
        .option("log-y", { type: "boolean", default: undefined }),
    )
    .demandCommand(1)
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new Error(msg);
    });

  let args;
  try {
    args = await parser.parse();
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 2;
  }

  try {
    const svg = renderSpec(args.kind as Kind, args.in as string[], {
      logX: args["log-x"] as boolean,
      logY: args["log-y"] as boolean | undefined,
    });
    writeFileSync(args.out as string, svg);
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError || err instanceof EmptySeriesError) {
      console.error(`input error: ${err.message}`);
      return 2;
    }
    if (err instanceof Error && "code" in err) {
      console.error(`io error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

const isMain =
  typeof process.argv[1] === "string" &&
  import.meta.url.endsWith(basename(process.argv[1]));
if (isMain) {
  run(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
