// CLI: `plot --kind rate|owd --in DIR --out PATH` renders SVG figures
// (single run -> one file; sweep root -> one file per run into PATH),
// `tables --in DIR --out DIR` writes the utilization tables as CSV + text.

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { findRuns, isRunDir, loadRun, runName } from "./csv.js";
import { PlotKind, plot } from "./plots.js";
import { Table, lossTable, renderCsv, renderText, responsivenessTable } from "./tables.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new Error(`malformed arguments near "${key}"`);
    }
    flags.set(key.slice(2), value);
  }
  return flags;
}

function required(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) {
    throw new Error(`missing required flag --${name}`);
  }
  return value;
}

export function cmdPlot(argv: string[]): string[] {
  const flags = parseFlags(argv);
  const kind = required(flags, "kind") as PlotKind;
  if (kind !== "rate" && kind !== "owd") {
    throw new Error(`--kind must be "rate" or "owd", got "${kind}"`);
  }
  const input = required(flags, "in");
  const out = required(flags, "out");
  const written: string[] = [];
  if (isRunDir(input)) {
    const svg = plot(loadRun(input), kind); // render before touching the output
    writeFileSync(out, svg);
    written.push(out);
  } else {
    const runs = findRuns(input);
    const rendered = runs.map((run) => [run, plot(run, kind)] as const);
    mkdirSync(out, { recursive: true });
    for (const [run, svg] of rendered) {
      const path = join(out, `${runName(run)}_${kind}.svg`);
      writeFileSync(path, svg);
      written.push(path);
    }
  }
  return written;
}

export function cmdTables(argv: string[]): string[] {
  const flags = parseFlags(argv);
  const runs = findRuns(required(flags, "in"));
  const out = required(flags, "out");
  mkdirSync(out, { recursive: true });

  const tables: [string, Table | null][] = [
    ["utilization_responsiveness", responsivenessTable(runs)],
    ["utilization_loss", lossTable(runs)],
  ];
  const written: string[] = [];
  const textParts: string[] = [];
  for (const [stem, table] of tables) {
    if (table === null) {
      continue;
    }
    const csvPath = join(out, `${stem}.csv`);
    writeFileSync(csvPath, renderCsv(table));
    written.push(csvPath);
    textParts.push(renderText(table));
  }
  if (textParts.length === 0) {
    throw new Error("no responsiveness or loss runs found to tabulate");
  }
  const textPath = join(out, "tables.txt");
  writeFileSync(textPath, textParts.join("\n"));
  written.push(textPath);
  return written;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    let written: string[];
    if (command === "plot") {
      written = cmdPlot(rest);
    } else if (command === "tables") {
      written = cmdTables(rest);
    } else {
      console.error("usage: cli.js <plot|tables> --in DIR --out PATH [--kind rate|owd]");
      return 2;
    }
    for (const path of written) {
      console.log(`wrote ${path}`);
    }
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
