"""Minimal loss-based TCP Reno sender used as competing bulk traffic.

Greedy source with an infinite backlog: slow start doubles the window per
RTT, congestion avoidance adds one segment per RTT, and a detected loss
halves the window (ssthresh = cwnd/2, cwnd = ssthresh) at most once per
RTT.  Loss is inferred from a gap in the ack stream beyond a reorder
margin, with an idle-timeout surrogate so a fully dropped window cannot
stall the flow forever.
"""

from __future__ import annotations

from dataclasses import dataclass

from .simcore import SimTime


@dataclass
class RenoConfig:
    segment_bytes: int = 1_200
    init_cwnd_segments: float = 2.0
    init_ssthresh_segments: float = 64.0
    min_cwnd_segments: float = 2.0
    min_ssthresh_segments: float = 2.0
    reorder_margin: int = 3
    min_rto_us: SimTime = 1_000_000


class RenoSender:
    """Window arithmetic and loss detection; transmission wiring lives outside."""

    def __init__(self, cfg: RenoConfig | None = None) -> None:
        self.cfg = cfg or RenoConfig()
        self.cwnd_segments = self.cfg.init_cwnd_segments
        self.ssthresh_segments = self.cfg.init_ssthresh_segments
        self.rtt_us: SimTime = 250_000
        self._last_halve_us: SimTime | None = None
        self.outstanding: dict[int, SimTime] = {}  # seq -> send time
        self.next_seq = 0
        self.highest_acked = -1
        self.last_ack_us: SimTime | None = None
        self.loss_events = 0

    @property
    def cwnd_bytes(self) -> int:
        return int(self.cwnd_segments * self.cfg.segment_bytes)

    def window_room(self) -> int:
        """Segments that may be sent right now."""
        return max(0, int(self.cwnd_segments) - len(self.outstanding))

    def on_sent(self, seq: int, now: SimTime) -> None:
        self.outstanding[seq] = now

    def on_ack(self, seq: int, now: SimTime) -> None:
        send_ts = self.outstanding.pop(seq, None)
        if send_ts is None:
            return
        self.rtt_us = round(0.875 * self.rtt_us + 0.125 * (now - send_ts))
        self.last_ack_us = now
        if seq > self.highest_acked:
            self.highest_acked = seq
        if self.cwnd_segments < self.ssthresh_segments:
            self.cwnd_segments += 1.0
        else:
            self.cwnd_segments += 1.0 / self.cwnd_segments
        self._detect_gap_losses(now)

    def _detect_gap_losses(self, now: SimTime) -> None:
        # FIFO path: an ack above seq+margin means seq is gone (dup-ack surrogate).
        threshold = self.highest_acked - self.cfg.reorder_margin
        lost = [s for s in self.outstanding if s < threshold]
        for s in lost:
            del self.outstanding[s]
        if lost:
            self.on_loss(now)

    def on_loss(self, now: SimTime) -> None:
        if self._last_halve_us is not None and now - self._last_halve_us < self.rtt_us:
            return
        self._last_halve_us = now
        self.loss_events += 1
        half = self.cwnd_segments / 2.0
        self.ssthresh_segments = max(self.cfg.min_ssthresh_segments, half)
        self.cwnd_segments = max(self.cfg.min_cwnd_segments, self.ssthresh_segments)

    def rto_us(self) -> SimTime:
        return max(self.cfg.min_rto_us, 2 * self.rtt_us)

    def check_timeout(self, now: SimTime) -> bool:
        """Idle-window surrogate: all outstanding presumed lost after an RTO."""
        if not self.outstanding:
            return False
        reference = self.last_ack_us if self.last_ack_us is not None else min(self.outstanding.values())
        if now - reference < self.rto_us():
            return False
        self.outstanding.clear()
        self.on_loss(now)
        return True
