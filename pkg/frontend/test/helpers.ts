// Synthetic run directories matching the simulator's output schema.

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { RunMeta, SUMMARY_COLUMNS, TRACE_COLUMNS } from "../src/schema.js";

export interface SyntheticFlow {
  id: number;
  kind: string;
  rows: Array<{
    tMs: number;
    target?: number | null;
    send: number;
    recv?: number;
    owd: number;
    cwnd?: number | null;
    backlog?: number;
    drops?: number;
  }>;
}

export function writeRunDir(
  dir: string,
  meta: RunMeta,
  flows: SyntheticFlow[],
  summary: Array<[number, number, number, number]>, // start_s, end_s, delivered, capacity
): void {
  mkdirSync(dir, { recursive: true });
  writeFileSync(join(dir, "meta.json"), JSON.stringify(meta, null, 2) + "\n");

  const summaryLines = [SUMMARY_COLUMNS.join(",")];
  for (const [start, end, delivered, capacity] of summary) {
    summaryLines.push(
      `${start.toFixed(1)},${end.toFixed(1)},${delivered},${capacity},${(delivered / capacity).toFixed(6)}`,
    );
  }
  writeFileSync(join(dir, "summary.csv"), summaryLines.join("\n") + "\n");

  for (const flow of flows) {
    const lines = [TRACE_COLUMNS.join(",")];
    for (const row of flow.rows) {
      lines.push(
        [
          row.tMs,
          flow.id,
          row.target === null ? "" : (row.target ?? row.send).toFixed(3),
          row.send.toFixed(3),
          (row.recv ?? row.send).toFixed(3),
          row.owd.toFixed(3),
          row.cwnd === null || row.cwnd === undefined ? "" : row.cwnd,
          row.backlog ?? 0,
          row.drops ?? 0,
        ].join(","),
      );
    }
    writeFileSync(join(dir, `flow${flow.id}_${flow.kind}.csv`), lines.join("\n") + "\n");
  }
}

export function mediaMeta(overrides: Partial<RunMeta> = {}): RunMeta {
  return {
    scenario: "loss",
    controller: "gcc",
    seed: 1,
    loss_rate: 0.0,
    duration_s: 10,
    prop_delay_ms: 100,
    schedule: [[0, 2_000_000]],
    flows: [{ id: 0, kind: "gcc", start_s: 0, stop_s: 10 }],
    ...overrides,
  };
}

export function rampFlow(id = 0, kind = "gcc", ticks = 100): SyntheticFlow {
  const rows = [];
  for (let i = 1; i <= ticks; i++) {
    rows.push({
      tMs: i * 100,
      send: 300 + i * 10,
      owd: 104 + (i % 7),
    });
  }
  return { id, kind, rows };
}
