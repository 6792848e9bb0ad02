// Figure builders: per-flow rate curves with the capacity staircase
// overlaid, and one-way-delay curves with the base-delay reference line.

import { RunDir } from "./schema.js";
import { SchemaError, runName } from "./csv.js";
import { PALETTE, Series, lineChart } from "./svg.js";

export type PlotKind = "rate" | "owd";

function flowSeries(run: RunDir, value: (row: { sendRateKbps: number; owdMs: number }) => number): Series[] {
  return run.flows.map((flow, i) => {
    if (flow.rows.length === 0) {
      throw new SchemaError(`${flow.path}: no trace rows to plot`);
    }
    return {
      label: `flow ${flow.flowId} (${flow.kind})`,
      color: PALETTE[i % PALETTE.length],
      points: flow.rows.map((row) => [row.tMs / 1000, value(row)] as [number, number]),
    };
  });
}

export function plotRate(run: RunDir): string {
  const series = flowSeries(run, (row) => row.sendRateKbps);
  if (run.meta.schedule && run.meta.schedule.length > 0) {
    const end = run.meta.duration_s;
    const points = run.meta.schedule.map(
      ([atS, bps]) => [atS, bps / 1000] as [number, number],
    );
    points.push([end, points[points.length - 1][1]]);
    series.push({
      label: "link capacity",
      color: "#555555",
      dashed: true,
      step: true,
      points,
    });
  }
  return lineChart({
    title: `${runName(run)}: sending rate`,
    xLabel: "time (s)",
    yLabel: "rate (kbps)",
    series,
  });
}

export function plotOwd(run: RunDir): string {
  const series = flowSeries(run, (row) => row.owdMs);
  const base = run.meta.prop_delay_ms ?? 100;
  series.push({
    label: `base delay ${base} ms`,
    color: "#555555",
    dashed: true,
    points: [
      [0, base],
      [run.meta.duration_s, base],
    ],
  });
  return lineChart({
    title: `${runName(run)}: packet one-way delay`,
    xLabel: "time (s)",
    yLabel: "one-way delay (ms)",
    series,
  });
}

export function plot(run: RunDir, kind: PlotKind): string {
  return kind === "rate" ? plotRate(run) : plotOwd(run);
}
