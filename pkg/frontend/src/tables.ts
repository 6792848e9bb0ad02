// Utilization tables assembled from run summaries: one row per controller,
// columns per report interval (responsiveness) or loss rate (loss grid).
// Cell values are summary.csv utilizations, as percentages to 2 decimals.

import { RunDir } from "./schema.js";
import { SchemaError } from "./csv.js";

export interface Table {
  title: string;
  header: string[];
  rows: string[][];
}

function pct(utilization: number): string {
  return (utilization * 100).toFixed(2);
}

export function responsivenessTable(runs: RunDir[]): Table | null {
  const relevant = runs
    .filter((r) => r.meta.scenario === "responsiveness")
    .sort((a, b) => a.meta.controller.localeCompare(b.meta.controller));
  if (relevant.length === 0) {
    return null;
  }
  const intervals = relevant[0].summary.map(
    (row) => `${row.intervalStartS.toFixed(0)}-${row.intervalEndS.toFixed(0)}s`,
  );
  const rows = relevant.map((run) => {
    const got = run.summary.map((row) => `${row.intervalStartS.toFixed(0)}-${row.intervalEndS.toFixed(0)}s`);
    if (got.join("|") !== intervals.join("|")) {
      throw new SchemaError(
        `${run.dir}/summary.csv: interval grid [${got.join(", ")}] does not match [${intervals.join(", ")}]`,
      );
    }
    return [run.meta.controller, ...run.summary.map((row) => pct(row.utilization))];
  });
  return {
    title: "Average link utilization (%) per interval",
    header: ["controller", ...intervals],
    rows,
  };
}

export function lossTable(runs: RunDir[]): Table | null {
  const relevant = runs.filter((r) => r.meta.scenario === "loss");
  if (relevant.length === 0) {
    return null;
  }
  const rates = [...new Set(relevant.map((r) => r.meta.loss_rate))].sort((a, b) => a - b);
  const controllers = [...new Set(relevant.map((r) => r.meta.controller))].sort();
  const rows = controllers.map((controller) => {
    const cells = rates.map((rate) => {
      const match = relevant.find(
        (r) => r.meta.controller === controller && r.meta.loss_rate === rate,
      );
      if (match === undefined) {
        throw new SchemaError(`no loss run for controller=${controller} loss_rate=${rate}`);
      }
      if (match.summary.length !== 1) {
        throw new SchemaError(
          `${match.dir}/summary.csv: expected a single whole-run interval, got ${match.summary.length}`,
        );
      }
      return pct(match.summary[0].utilization);
    });
    return [controller, ...cells];
  });
  return {
    title: "Capacity utilization (%) under random loss",
    header: ["controller", ...rates.map((rate) => `${(rate * 100).toFixed(0)}%`)],
    rows,
  };
}

export function renderCsv(table: Table): string {
  const lines = [table.header.join(",")];
  for (const row of table.rows) {
    lines.push(row.join(","));
  }
  return lines.join("\n") + "\n";
}

export function renderText(table: Table): string {
  const widths = table.header.map((cell, i) =>
    Math.max(cell.length, ...table.rows.map((row) => row[i].length)),
  );
  const line = (cells: string[]) => cells.map((c, i) => c.padEnd(widths[i])).join("  ").trimEnd();
  return [table.title, line(table.header), ...table.rows.map(line)].join("\n") + "\n";
}
