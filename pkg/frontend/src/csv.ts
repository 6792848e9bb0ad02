// CSV loading for the documented trace/summary schema. The files are
// machine-written (no quoting, comma-separated, header row), so parsing is
// a straight split; all validation effort goes into diagnostics that name
// the offending file and column.

import { readFileSync, readdirSync, existsSync, statSync } from "node:fs";
import { basename, join } from "node:path";

import {
  FlowTrace,
  RunDir,
  RunMeta,
  SummaryRow,
  TraceRow,
} from "./schema.js";

export class SchemaError extends Error {}

interface Table {
  header: string[];
  rows: string[][];
}

export function readCsv(path: string): Table {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty file, expected a header row`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  return { header, rows };
}

function columnIndex(path: string, table: Table, column: string): number {
  const idx = table.header.indexOf(column);
  if (idx < 0) {
    throw new SchemaError(`${path}: missing column "${column}" (header: ${table.header.join(",")})`);
  }
  return idx;
}

function numberAt(path: string, row: string[], idx: number, column: string, line: number): number {
  const value = Number(row[idx]);
  if (!Number.isFinite(value)) {
    throw new SchemaError(`${path}:${line}: column "${column}" is not a number: "${row[idx]}"`);
  }
  return value;
}

function optionalAt(path: string, row: string[], idx: number, column: string, line: number): number | null {
  if (row[idx] === "" || row[idx] === undefined) {
    return null;
  }
  return numberAt(path, row, idx, column, line);
}

export function parseTrace(path: string): TraceRow[] {
  const table = readCsv(path);
  const col = (name: string) => columnIndex(path, table, name);
  const idx = {
    tMs: col("t_ms"),
    flowId: col("flow_id"),
    target: col("target_rate_kbps"),
    send: col("send_rate_kbps"),
    recv: col("recv_rate_kbps"),
    owd: col("owd_ms"),
    cwnd: col("cwnd_bytes"),
    backlog: col("queue_backlog_bytes"),
    drops: col("drops_cum"),
  };
  return table.rows.map((row, i) => ({
    tMs: numberAt(path, row, idx.tMs, "t_ms", i + 2),
    flowId: numberAt(path, row, idx.flowId, "flow_id", i + 2),
    targetRateKbps: optionalAt(path, row, idx.target, "target_rate_kbps", i + 2),
    sendRateKbps: numberAt(path, row, idx.send, "send_rate_kbps", i + 2),
    recvRateKbps: numberAt(path, row, idx.recv, "recv_rate_kbps", i + 2),
    owdMs: numberAt(path, row, idx.owd, "owd_ms", i + 2),
    cwndBytes: optionalAt(path, row, idx.cwnd, "cwnd_bytes", i + 2),
    queueBacklogBytes: numberAt(path, row, idx.backlog, "queue_backlog_bytes", i + 2),
    dropsCum: numberAt(path, row, idx.drops, "drops_cum", i + 2),
  }));
}

export function parseSummary(path: string): SummaryRow[] {
  const table = readCsv(path);
  const col = (name: string) => columnIndex(path, table, name);
  const idx = {
    start: col("interval_start_s"),
    end: col("interval_end_s"),
    delivered: col("delivered_bits"),
    capacity: col("capacity_bits"),
    utilization: col("utilization"),
  };
  return table.rows.map((row, i) => ({
    intervalStartS: numberAt(path, row, idx.start, "interval_start_s", i + 2),
    intervalEndS: numberAt(path, row, idx.end, "interval_end_s", i + 2),
    deliveredBits: numberAt(path, row, idx.delivered, "delivered_bits", i + 2),
    capacityBits: numberAt(path, row, idx.capacity, "capacity_bits", i + 2),
    utilization: numberAt(path, row, idx.utilization, "utilization", i + 2),
  }));
}

const FLOW_FILE = /^flow(\d+)_([a-z]+)\.csv$/;

export function loadRun(dir: string): RunDir {
  const metaPath = join(dir, "meta.json");
  if (!existsSync(metaPath)) {
    throw new SchemaError(`${dir}: not a run directory (no meta.json)`);
  }
  const meta = JSON.parse(readFileSync(metaPath, "utf8")) as RunMeta;
  const summary = parseSummary(join(dir, "summary.csv"));
  const flows: FlowTrace[] = [];
  for (const name of readdirSync(dir).sort()) {
    const match = FLOW_FILE.exec(name);
    if (!match) {
      continue;
    }
    const path = join(dir, name);
    flows.push({
      path,
      flowId: Number(match[1]),
      kind: match[2],
      rows: parseTrace(path),
    });
  }
  if (flows.length === 0) {
    throw new SchemaError(`${dir}: no flow trace CSVs found`);
  }
  return { dir, meta, summary, flows };
}

export function isRunDir(dir: string): boolean {
  return existsSync(join(dir, "meta.json"));
}

export function findRuns(root: string): RunDir[] {
  if (isRunDir(root)) {
    return [loadRun(root)];
  }
  const runs: RunDir[] = [];
  for (const name of readdirSync(root).sort()) {
    const child = join(root, name);
    if (statSync(child).isDirectory() && isRunDir(child)) {
      runs.push(loadRun(child));
    }
  }
  if (runs.length === 0) {
    throw new SchemaError(`${root}: no run directories found`);
  }
  return runs;
}

export function runName(run: RunDir): string {
  return basename(run.dir);
}
