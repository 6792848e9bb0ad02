"""Sender/receiver endpoints: media source, pacer and feedback formats.

The media source models a perfect encoder: every frame interval it emits
exactly the bytes the current target rate calls for (a bit-credit carry makes
the long-run average exact), split into MTU-sized packets.  A pacer smooths
frame bursts onto the wire at a configurable multiple of the target rate.

Two feedback formats exist: a transport-wide report listing per-packet
arrival times (gaps marked lost) and a compact highest-seq + ack-vector
format.  Both are in-simulation message types; no byte layout is defined.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Mapping

from .simcore import SimTime, Simulator, US_PER_SEC

# Arrival slot value marking a sequence number that never arrived.
LOST = None


@dataclass
class MediaPacket:
    flow_id: int
    twcc_seq: int
    size_bytes: int
    send_ts: SimTime | None = None
    arrival_ts: SimTime | None = None
    accept_index: int = -1

    def __post_init__(self) -> None:
        if self.size_bytes <= 0:
            raise ValueError("size_bytes must be positive")


@dataclass
class FeedbackReport:
    """Transport-wide feedback: contiguous (seq, arrival-or-LOST) entries."""

    flow_id: int
    entries: list[tuple[int, SimTime | None]]
    sent_at: SimTime


@dataclass
class ScreamFeedback:
    """Highest received seq, its receive time, and a 64-bit history bitmap.

    Bit k of ack_vector set means packet (highest_seq - 1 - k) was received.
    """

    flow_id: int
    highest_seq: int
    ack_vector: int
    receive_ts: SimTime


class MediaSource:
    """Perfect encoder: rate changes take effect at the next frame boundary."""

    def __init__(
        self,
        flow_id: int,
        rate_bps: int,
        frame_interval_us: SimTime,
        mtu_bytes: int,
    ) -> None:
        self.flow_id = flow_id
        self.target_rate_bps = rate_bps
        self.frame_interval_us = frame_interval_us
        self.mtu_bytes = mtu_bytes
        self._next_seq = 0
        self._credit_bit_us = 0  # fractional-frame carry, exact integer units

    def set_rate(self, rate_bps: int) -> None:
        self.target_rate_bps = rate_bps

    def emit_frame(self, now: SimTime) -> list[MediaPacket]:
        self._credit_bit_us += self.target_rate_bps * self.frame_interval_us
        frame_bytes = self._credit_bit_us // (8 * US_PER_SEC)
        self._credit_bit_us -= frame_bytes * 8 * US_PER_SEC
        packets = []
        remaining = frame_bytes
        while remaining > 0:
            size = min(remaining, self.mtu_bytes)
            packets.append(MediaPacket(self.flow_id, self._next_seq, size))
            self._next_seq += 1
            remaining -= size
        return packets


class Pacer:
    """Releases queued packets at a byte pacing rate, preserving order.

    The release gap after a packet is size*8/pacing_rate; the gap survives
    idle periods so the long-run output rate never exceeds the pacing rate.
    """

    def __init__(self, sim: Simulator, pacing_rate_bps: int, send: Callable) -> None:
        self.sim = sim
        self.pacing_rate_bps = pacing_rate_bps
        self.send = send
        self._queue: deque[MediaPacket] = deque()
        self._next_allowed: SimTime = 0
        self._pending = False

    @property
    def backlog_bytes(self) -> int:
        return sum(p.size_bytes for p in self._queue)

    def set_rate(self, pacing_rate_bps: int) -> None:
        if pacing_rate_bps <= 0:
            raise ValueError("pacing rate must be positive")
        self.pacing_rate_bps = pacing_rate_bps

    def push(self, packets: list[MediaPacket]) -> None:
        self._queue.extend(packets)
        self._arm()

    def _arm(self) -> None:
        if self._pending or not self._queue:
            return
        self._pending = True
        self.sim.schedule(max(self.sim.now, self._next_allowed), self._release)

    def _release(self) -> None:
        self._pending = False
        pkt = self._queue.popleft()
        gap = -(-pkt.size_bytes * 8 * US_PER_SEC // self.pacing_rate_bps)
        self._next_allowed = self.sim.now + gap
        self.send(pkt)
        self._arm()


def build_feedback(
    flow_id: int,
    arrivals: Mapping[int, SimTime],
    first_seq: int,
    last_seq: int,
    now: SimTime,
) -> FeedbackReport:
    """Report covering the contiguous seq range [first_seq, last_seq].

    Sequence numbers with no recorded arrival are marked LOST; on a FIFO
    path any gap below the highest received seq is a definitive loss.
    """
    entries = [(seq, arrivals.get(seq, LOST)) for seq in range(first_seq, last_seq + 1)]
    return FeedbackReport(flow_id=flow_id, entries=entries, sent_at=now)


def build_scream_feedback(
    flow_id: int,
    received,
    highest_seq: int,
    receive_ts: SimTime,
) -> ScreamFeedback:
    """Ack vector over the 64 sequence numbers preceding highest_seq."""
    vector = 0
    for k in range(64):
        seq = highest_seq - 1 - k
        if seq < 0:
            break
        if seq in received:
            vector |= 1 << k
    return ScreamFeedback(flow_id, highest_seq, vector, receive_ts)


@dataclass
class FeedbackTimingConfig:
    """Adaptive report cadence: aim for target_entries per report, clamped."""

    min_interval_us: SimTime = 50_000
    max_interval_us: SimTime = 250_000
    target_entries: int = 20


class GccFeedbackBuilder:
    """Receive-side state producing periodic transport-wide reports."""

    def __init__(self, flow_id: int, timing: FeedbackTimingConfig) -> None:
        self.flow_id = flow_id
        self.timing = timing
        self.arrivals: dict[int, SimTime] = {}
        self.highest_seq = -1
        self.last_reported = -1
        self._recent: deque[SimTime] = deque()  # arrival times, for cadence

    def on_packet(self, pkt: MediaPacket) -> None:
        self.arrivals[pkt.twcc_seq] = pkt.arrival_ts
        if pkt.twcc_seq > self.highest_seq:
            self.highest_seq = pkt.twcc_seq
        self._recent.append(pkt.arrival_ts)

    def poll(self, now: SimTime) -> FeedbackReport | None:
        """Report everything new since the last poll, or nothing."""
        if self.highest_seq <= self.last_reported:
            return None
        report = build_feedback(
            self.flow_id, self.arrivals, self.last_reported + 1, self.highest_seq, now
        )
        self.last_reported = self.highest_seq
        return report

    def next_interval(self, now: SimTime) -> SimTime:
        """Interval sized so one report carries ~target_entries packets."""
        window_us = US_PER_SEC
        while self._recent and self._recent[0] < now - window_us:
            self._recent.popleft()
        pps = len(self._recent)  # packets in the last second
        if pps == 0:
            return self.timing.max_interval_us
        interval = self.timing.target_entries * US_PER_SEC // pps
        return max(self.timing.min_interval_us, min(self.timing.max_interval_us, interval))


class ScreamFeedbackBuilder:
    """Receive-side state producing per-packet highest-seq + ack-vector."""

    HISTORY = 1024  # seqs to remember; far beyond the 64-bit vector reach

    def __init__(self, flow_id: int) -> None:
        self.flow_id = flow_id
        self.received: set[int] = set()
        self.highest_seq = -1

    def on_packet(self, pkt: MediaPacket) -> ScreamFeedback:
        seq = pkt.twcc_seq
        self.received.add(seq)
        if seq > self.highest_seq:
            self.highest_seq = seq
        if len(self.received) > self.HISTORY:
            floor = self.highest_seq - self.HISTORY
            self.received = {s for s in self.received if s >= floor}
        return build_scream_feedback(
            self.flow_id, self.received, self.highest_seq, pkt.arrival_ts
        )
