"""Scenario execution: endpoint wiring, tracing and persistence.

One simulation instance owns one link, one lossless reverse channel per
flow and the per-flow endpoint stacks.  A 100 ms sampler writes one trace
row per active flow and re-checks the conservation invariants; results are
persisted as one CSV per flow plus a per-run summary.csv and meta.json,
byte-identical for a given scenario and seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from . import gcc as gcc_mod
from . import reno as reno_mod
from . import scream as scream_mod
from .metrics import DeliveryLog, IntervalUtilization, compute_utilization
from .netmodel import ACCEPTED, Link, ReverseChannel
from .scenarios import GCC, RENO, SCREAM, FlowSpec, ScenarioSpec
from .simcore import RngStream, SimTime, Simulator, US_PER_MS, US_PER_SEC
from .transport import (
    GccFeedbackBuilder,
    MediaPacket,
    MediaSource,
    Pacer,
    ScreamFeedbackBuilder,
)

TRACE_FIELDS = (
    "t_ms",
    "flow_id",
    "target_rate_kbps",
    "send_rate_kbps",
    "recv_rate_kbps",
    "owd_ms",
    "cwnd_bytes",
    "queue_backlog_bytes",
    "drops_cum",
)

SUMMARY_FIELDS = (
    "interval_start_s",
    "interval_end_s",
    "delivered_bits",
    "capacity_bits",
    "utilization",
)


@dataclass
class TraceRecord:
    t_us: SimTime
    flow_id: int
    target_rate_bps: int | None
    send_rate_bps: float
    recv_rate_bps: float
    owd_ms: float
    cwnd_bytes: int | None
    queue_backlog_bytes: int
    drops_cum: int

    def to_csv_row(self) -> list[str]:
        return [
            str(self.t_us // US_PER_MS),
            str(self.flow_id),
            "" if self.target_rate_bps is None else f"{self.target_rate_bps / 1000:.3f}",
            f"{self.send_rate_bps / 1000:.3f}",
            f"{self.recv_rate_bps / 1000:.3f}",
            f"{self.owd_ms:.3f}",
            "" if self.cwnd_bytes is None else str(self.cwnd_bytes),
            str(self.queue_backlog_bytes),
            str(self.drops_cum),
        ]


class FlowHarness:
    """Shared endpoint bookkeeping for one flow."""

    def __init__(self, runner: "Runner", flow_id: int, spec: FlowSpec) -> None:
        self.runner = runner
        self.flow_id = flow_id
        self.spec = spec
        self.sent = DeliveryLog()
        self.delivered = DeliveryLog()
        self.owd = DeliveryLog()  # value = one-way delay in us
        self.drops = 0
        self.send_info: dict[int, tuple[SimTime, int]] = {}

    kind = "?"

    def start(self) -> None:
        raise NotImplementedError

    def on_delivery(self, pkt: MediaPacket) -> None:
        raise NotImplementedError

    def wire_send(self, pkt: MediaPacket) -> str:
        sim = self.runner.sim
        pkt.send_ts = sim.now
        self.send_info[pkt.twcc_seq] = (sim.now, pkt.size_bytes)
        self.sent.add(sim.now, pkt.size_bytes)
        outcome = self.runner.link.enqueue(pkt)
        if outcome != ACCEPTED:
            self.drops += 1
        return outcome

    # trace sampling hooks
    def target_rate_bps(self) -> int | None:
        return None

    def cwnd_bytes(self) -> int | None:
        return None


class GccFlow(FlowHarness):
    kind = GCC

    def __init__(self, runner: "Runner", flow_id: int, spec: FlowSpec) -> None:
        super().__init__(runner, flow_id, spec)
        scen = runner.scenario
        self.controller = gcc_mod.GccController(scen.gcc)
        self.source = MediaSource(
            flow_id,
            scen.gcc.initial_rate_bps,
            scen.transport.frame_interval_us,
            scen.transport.mtu_bytes,
        )
        self.pacer = Pacer(
            runner.sim,
            int(scen.gcc.initial_rate_bps * scen.transport.pacing_factor),
            self.wire_send,
        )
        self.feedback = GccFeedbackBuilder(flow_id, scen.transport.feedback)
        self.reverse = ReverseChannel(
            runner.sim, scen.link.prop_delay_us, self._on_feedback
        )
        self.reports = []  # kept for post-hoc trace audits

    def start(self) -> None:
        self.runner.sim.schedule(self.spec.start_us, self._frame_tick)
        self.runner.sim.schedule(
            self.spec.start_us + self.feedback.timing.max_interval_us, self._report_tick
        )

    def _frame_tick(self) -> None:
        now = self.runner.sim.now
        if now >= self.spec.stop_us:
            return
        self.pacer.push(self.source.emit_frame(now))
        self.runner.sim.schedule_in(self.runner.scenario.transport.frame_interval_us, self._frame_tick)

    def _report_tick(self) -> None:
        now = self.runner.sim.now
        report = self.feedback.poll(now)
        if report is not None:
            self.reverse.send(report)
        if now < self.runner.scenario.duration_us:
            self.runner.sim.schedule_in(self.feedback.next_interval(now), self._report_tick)

    def on_delivery(self, pkt: MediaPacket) -> None:
        self.feedback.on_packet(pkt)

    def _on_feedback(self, report) -> None:
        self.reports.append(report)
        entries = []
        for seq, arrival_ts in report.entries:
            send_ts, size = self.send_info[seq]
            entries.append((seq, send_ts, arrival_ts, size))
        rate = self.controller.on_report(entries, self.runner.sim.now)
        self.source.set_rate(rate)
        self.pacer.set_rate(int(rate * self.runner.scenario.transport.pacing_factor))

    def target_rate_bps(self) -> int | None:
        return self.controller.rate_bps


class ScreamFlow(FlowHarness):
    kind = SCREAM

    def __init__(self, runner: "Runner", flow_id: int, spec: FlowSpec) -> None:
        super().__init__(runner, flow_id, spec)
        scen = runner.scenario
        cfg = scen.scream
        self.cfg = cfg
        self.cwnd = scream_mod.CwndController(cfg)
        self.media_rate = scream_mod.MediaRateController(cfg)
        self.rtp_queue = scream_mod.RtpQueue()
        self.ack_rate = scream_mod.RateWindow(cfg.rate_window_us)
        self.transmit_rate = scream_mod.RateWindow(cfg.rate_window_us)
        self.source = MediaSource(
            flow_id, cfg.initial_rate_bps, scen.transport.frame_interval_us, scen.transport.mtu_bytes
        )
        self.feedback = ScreamFeedbackBuilder(flow_id)
        self.reverse = ReverseChannel(runner.sim, scen.link.prop_delay_us, self._on_feedback)
        self._next_allowed: SimTime = 0
        self._timer_armed = False
        self._cwnd_limited = False

    def start(self) -> None:
        self.runner.sim.schedule(self.spec.start_us, self._frame_tick)
        self.runner.sim.schedule(self.spec.start_us + self.cfg.rate_interval_us, self._rate_tick)

    def _frame_tick(self) -> None:
        now = self.runner.sim.now
        if now >= self.spec.stop_us:
            return
        for pkt in self.source.emit_frame(now):
            self.rtp_queue.push(now, pkt)
        self._try_transmit()
        self.runner.sim.schedule_in(self.runner.scenario.transport.frame_interval_us, self._frame_tick)

    def _pacing_gap(self, size_bytes: int) -> SimTime:
        rate = max(
            self.cfg.min_rate_bps,
            int(self.media_rate.rate_bps * self.runner.scenario.transport.pacing_factor),
        )
        return -(-size_bytes * 8 * US_PER_SEC // rate)

    def _try_transmit(self) -> None:
        sim = self.runner.sim
        while len(self.rtp_queue) > 0:
            if sim.now < self._next_allowed:
                self._arm_timer()
                return
            head = self.rtp_queue.head()
            if not self.cwnd.can_transmit(head.size_bytes):
                self._cwnd_limited = True
                return
            pkt = self.rtp_queue.pop()
            self._next_allowed = sim.now + self._pacing_gap(pkt.size_bytes)
            self.wire_send(pkt)
            self.cwnd.on_sent(pkt.twcc_seq, sim.now, pkt.size_bytes)
            self.transmit_rate.add(sim.now, pkt.size_bytes)

    def _arm_timer(self) -> None:
        if self._timer_armed:
            return
        self._timer_armed = True
        self.runner.sim.schedule(self._next_allowed, self._timer_fire)

    def _timer_fire(self) -> None:
        self._timer_armed = False
        self._try_transmit()

    def on_delivery(self, pkt: MediaPacket) -> None:
        self.reverse.send(self.feedback.on_packet(pkt))

    def _on_feedback(self, fb) -> None:
        newly = self.cwnd.on_feedback(fb, self.runner.sim.now)
        if newly > 0:
            self.ack_rate.add(fb.receive_ts, newly)
        self._try_transmit()

    def _rate_tick(self) -> None:
        now = self.runner.sim.now
        rate = self.media_rate.update(
            self.rtp_queue.delay_us(now),
            self.transmit_rate.rate_bps(),
            self.ack_rate.rate_bps(),
            self._cwnd_limited,
        )
        self._cwnd_limited = False
        self.source.set_rate(rate)
        if now < self.runner.scenario.duration_us:
            self.runner.sim.schedule_in(self.cfg.rate_interval_us, self._rate_tick)

    def target_rate_bps(self) -> int | None:
        return self.media_rate.rate_bps

    def cwnd_bytes(self) -> int | None:
        return int(self.cwnd.cwnd_bytes)


class RenoFlow(FlowHarness):
    kind = RENO

    def __init__(self, runner: "Runner", flow_id: int, spec: FlowSpec) -> None:
        super().__init__(runner, flow_id, spec)
        self.sender = reno_mod.RenoSender(runner.scenario.reno)
        self.reverse = ReverseChannel(runner.sim, runner.scenario.link.prop_delay_us, self._on_ack)
        self._next_seq = 0

    def start(self) -> None:
        self.runner.sim.schedule(self.spec.start_us, self._begin)

    def _begin(self) -> None:
        self._fill()
        self.runner.sim.schedule_in(100 * US_PER_MS, self._watchdog)

    def _fill(self) -> None:
        sim = self.runner.sim
        if sim.now >= self.spec.stop_us:
            return
        segment = self.runner.scenario.reno.segment_bytes
        for _ in range(self.sender.window_room()):
            pkt = MediaPacket(self.flow_id, self._next_seq, segment)
            self._next_seq += 1
            self.wire_send(pkt)
            self.sender.on_sent(pkt.twcc_seq, sim.now)

    def on_delivery(self, pkt: MediaPacket) -> None:
        self.reverse.send(pkt.twcc_seq)

    def _on_ack(self, seq: int) -> None:
        self.sender.on_ack(seq, self.runner.sim.now)
        self._fill()

    def _watchdog(self) -> None:
        now = self.runner.sim.now
        if self.sender.check_timeout(now):
            self._fill()
        if now < self.spec.stop_us:
            self.runner.sim.schedule_in(100 * US_PER_MS, self._watchdog)

    def cwnd_bytes(self) -> int | None:
        return self.sender.cwnd_bytes


FLOW_CLASSES = {GCC: GccFlow, SCREAM: ScreamFlow, RENO: RenoFlow}


@dataclass
class RunResult:
    scenario: ScenarioSpec
    flows: list[FlowHarness]
    traces: dict[int, list[TraceRecord]]
    summary: list[IntervalUtilization]

    def flow_by_kind(self, kind: str) -> FlowHarness:
        return next(f for f in self.flows if f.kind == kind)

    def mean_owd_ms(self, flow_id: int) -> float:
        flow = self.flows[flow_id]
        if not flow.owd.times:
            return 0.0
        return flow.owd.total_bytes / len(flow.owd.times) / US_PER_MS


class Runner:
    def __init__(self, scenario: ScenarioSpec) -> None:
        self.scenario = scenario
        self.sim = Simulator()
        self.link = Link(
            self.sim,
            scenario.link,
            loss_stream=RngStream(scenario.seed, 0),
            deliver=self._on_delivery,
        )
        self.link.install_schedule(scenario.schedule)
        self.flows: list[FlowHarness] = []
        for flow_id, spec in enumerate(scenario.flows):
            cls = FLOW_CLASSES[spec.kind]
            self.flows.append(cls(self, flow_id, spec))
        self.traces: dict[int, list[TraceRecord]] = {f.flow_id: [] for f in self.flows}

    def _on_delivery(self, pkt: MediaPacket) -> None:
        owd = pkt.arrival_ts - pkt.send_ts
        assert owd >= self.scenario.link.prop_delay_us, "delay floor violated"
        flow = self.flows[pkt.flow_id]
        flow.delivered.add(pkt.arrival_ts, pkt.size_bytes)
        flow.owd.add(pkt.arrival_ts, owd)
        flow.on_delivery(pkt)

    def _sample(self) -> None:
        now = self.sim.now
        self.link.check_conservation()
        window = US_PER_SEC
        for flow in self.flows:
            if now < flow.spec.start_us:
                continue
            w_start = max(now - window, flow.spec.start_us)
            span = now - w_start
            send_rate = flow.sent.bytes_between(w_start, now + 1) * 8 * US_PER_SEC / span if span else 0.0
            recv_rate = flow.delivered.bytes_between(w_start, now + 1) * 8 * US_PER_SEC / span if span else 0.0
            owd_sum = flow.owd.bytes_between(w_start, now + 1)
            owd_n = flow.owd.count_between(w_start, now + 1)
            owd_ms = owd_sum / owd_n / US_PER_MS if owd_n else 0.0
            self.traces[flow.flow_id].append(
                TraceRecord(
                    t_us=now,
                    flow_id=flow.flow_id,
                    target_rate_bps=flow.target_rate_bps(),
                    send_rate_bps=send_rate,
                    recv_rate_bps=recv_rate,
                    owd_ms=owd_ms,
                    cwnd_bytes=flow.cwnd_bytes(),
                    queue_backlog_bytes=self.link.backlog_bytes,
                    drops_cum=flow.drops,
                )
            )
        if now < self.scenario.duration_us:
            self.sim.schedule_in(self.scenario.trace_interval_us, self._sample)

    def run(self) -> RunResult:
        for flow in self.flows:
            flow.start()
        self.sim.schedule(self.scenario.trace_interval_us, self._sample)
        self.sim.run_until(self.scenario.duration_us)
        self.link.check_conservation()
        summary = compute_utilization(
            [f.delivered for f in self.flows],
            self.scenario.schedule,
            self.scenario.utilization_intervals,
        )
        return RunResult(self.scenario, self.flows, self.traces, summary)


def run_scenario(scenario: ScenarioSpec) -> RunResult:
    return Runner(scenario).run()


def primary_controller(scenario: ScenarioSpec) -> str:
    return next(f.kind for f in scenario.flows if f.kind != RENO)


def write_run(result: RunResult, outdir: Path) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for flow in result.flows:
        path = outdir / f"flow{flow.flow_id}_{flow.kind}.csv"
        lines = [",".join(TRACE_FIELDS)]
        for rec in result.traces[flow.flow_id]:
            lines.append(",".join(rec.to_csv_row()))
        path.write_text("\n".join(lines) + "\n")

    lines = [",".join(SUMMARY_FIELDS)]
    for row in result.summary:
        lines.append(
            f"{row.start_us / US_PER_SEC:.1f},{row.end_us / US_PER_SEC:.1f},"
            f"{row.delivered_bits},{row.capacity_bits},{row.utilization:.6f}"
        )
    (outdir / "summary.csv").write_text("\n".join(lines) + "\n")

    meta = {
        "scenario": result.scenario.name,
        "controller": primary_controller(result.scenario),
        "seed": result.scenario.seed,
        "loss_rate": result.scenario.link.loss_rate,
        "duration_s": result.scenario.duration_us / US_PER_SEC,
        "prop_delay_ms": result.scenario.link.prop_delay_us / US_PER_MS,
        "schedule": [[at / US_PER_SEC, cap] for at, cap in result.scenario.schedule.steps],
        "flows": [
            {
                "id": f.flow_id,
                "kind": f.kind,
                "start_s": f.spec.start_us / US_PER_SEC,
                "stop_s": f.spec.stop_us / US_PER_SEC,
            }
            for f in result.flows
        ],
    }
    (outdir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
