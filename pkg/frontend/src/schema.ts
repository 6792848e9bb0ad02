// Shared shapes for rmcatsim run directories: one trace CSV per flow,
// a per-run summary.csv and a meta.json describing the run.

export const TRACE_COLUMNS = [
  "t_ms",
  "flow_id",
  "target_rate_kbps",
  "send_rate_kbps",
  "recv_rate_kbps",
  "owd_ms",
  "cwnd_bytes",
  "queue_backlog_bytes",
  "drops_cum",
] as const;

export const SUMMARY_COLUMNS = [
  "interval_start_s",
  "interval_end_s",
  "delivered_bits",
  "capacity_bits",
  "utilization",
] as const;

export interface TraceRow {
  tMs: number;
  flowId: number;
  targetRateKbps: number | null;
  sendRateKbps: number;
  recvRateKbps: number;
  owdMs: number;
  cwndBytes: number | null;
  queueBacklogBytes: number;
  dropsCum: number;
}

export interface SummaryRow {
  intervalStartS: number;
  intervalEndS: number;
  deliveredBits: number;
  capacityBits: number;
  utilization: number;
}

export interface FlowMeta {
  id: number;
  kind: string;
  start_s: number;
  stop_s: number;
}

export interface RunMeta {
  scenario: string;
  controller: string;
  seed: number;
  loss_rate: number;
  duration_s: number;
  prop_delay_ms?: number;
  schedule: [number, number][]; // [at_s, capacity_bps]
  flows: FlowMeta[];
}

export interface FlowTrace {
  path: string;
  flowId: number;
  kind: string;
  rows: TraceRow[];
}

export interface RunDir {
  dir: string;
  meta: RunMeta;
  summary: SummaryRow[];
  flows: FlowTrace[];
}
