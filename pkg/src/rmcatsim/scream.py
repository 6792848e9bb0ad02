"""Self-clocked congestion-window sender with an RTP-queue rate controller.

The window control reacts to one-way queueing delay measured against a
running minimum: off_target = (target - queue_delay) / target scales window
growth (gain_up, acked bytes limited) and shrinkage (gain_down, full acked
bytes).  Transmission is gated so bytes in flight never exceed the window.
Loss (an ack-vector gap beyond the reorder margin) halves the window at most
once per RTT.

The media rate controller ramps the encoder target multiplicatively while
the RTP queue stays short and the window is not the binding constraint, and
scales it down in proportion to RTP-queue delay excess.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .simcore import SimTime, US_PER_MS, US_PER_SEC
from .transport import ScreamFeedback


@dataclass
class ScreamConfig:
    queue_delay_target_ms: float = 100.0
    gain_up: float = 1.0
    gain_down: float = 2.0
    mss_bytes: int = 1_200
    min_cwnd_mss: int = 2
    init_cwnd_mss: int = 10
    acked_limit_mss: int = 2
    reorder_margin: int = 3
    loss_beta: float = 0.5
    base_owd_epoch_us: SimTime = 60_000_000
    base_owd_history: int = 10
    initial_rate_bps: int = 300_000
    min_rate_bps: int = 100_000
    max_rate_bps: int = 4_000_000
    rtp_delay_cap_ms: float = 200.0
    ramp_up: float = 1.05
    down_scale_floor: float = 0.5
    ack_headroom: float = 1.1
    rate_interval_us: SimTime = 200_000
    rate_window_us: SimTime = 500_000


@dataclass
class SentRecord:
    send_ts: SimTime
    size_bytes: int
    acked: bool = False
    lost: bool = False


class CwndController:
    """Window control over one-way-delay feedback."""

    def __init__(self, cfg: ScreamConfig) -> None:
        self.cfg = cfg
        self.cwnd_bytes = float(cfg.init_cwnd_mss * cfg.mss_bytes)
        self.min_cwnd = cfg.min_cwnd_mss * cfg.mss_bytes
        self.bytes_in_flight = 0
        self.base_owd_us: SimTime | None = None
        self._epoch_start: SimTime | None = None
        self._epoch_min: SimTime | None = None
        self._epoch_history: deque[SimTime] = deque(maxlen=cfg.base_owd_history)
        self.queue_delay_us: SimTime = 0
        self.rtt_us: SimTime = 200_000
        self._last_halve_us: SimTime | None = None
        self.send_log: dict[int, SentRecord] = {}
        self._highest_acked = -1
        self._scan_floor = 0  # every seq below is acked or lost
        self.loss_events = 0

    def can_transmit(self, size_bytes: int) -> bool:
        return self.bytes_in_flight + size_bytes <= int(self.cwnd_bytes)

    def on_sent(self, seq: int, send_ts: SimTime, size_bytes: int) -> None:
        self.send_log[seq] = SentRecord(send_ts, size_bytes)
        self.bytes_in_flight += size_bytes

    def _update_base_owd(self, acked_owd: SimTime, now: SimTime) -> None:
        # Epoch bookkeeping: the effective base is the min over the epoch
        # history plus the current epoch, so within any one run it behaves
        # as a plain running minimum.
        if self._epoch_start is None:
            self._epoch_start = now
        if now - self._epoch_start >= self.cfg.base_owd_epoch_us:
            if self._epoch_min is not None:
                self._epoch_history.append(self._epoch_min)
            self._epoch_start = now
            self._epoch_min = None
        if self._epoch_min is None or acked_owd < self._epoch_min:
            self._epoch_min = acked_owd
        candidates = list(self._epoch_history) + [self._epoch_min]
        self.base_owd_us = min(candidates)

    def on_feedback(self, fb: ScreamFeedback, now: SimTime) -> int:
        """Window update per incoming feedback; returns bytes newly acked."""
        cfg = self.cfg
        rec = self.send_log.get(fb.highest_seq)
        if rec is None:
            raise ValueError(f"feedback references unknown seq {fb.highest_seq}")

        acked_owd = fb.receive_ts - rec.send_ts
        self._update_base_owd(acked_owd, now)
        self.queue_delay_us = acked_owd - self.base_owd_us

        rtt_sample = now - rec.send_ts
        self.rtt_us = round(0.875 * self.rtt_us + 0.125 * rtt_sample)

        bytes_newly_acked = self._absorb_acks(fb)
        self._detect_losses(fb, now)

        target_us = cfg.queue_delay_target_ms * US_PER_MS
        off_target = (target_us - self.queue_delay_us) / target_us
        if bytes_newly_acked > 0:
            if off_target > 0:
                limited = min(bytes_newly_acked, cfg.acked_limit_mss * cfg.mss_bytes)
                self.cwnd_bytes += cfg.gain_up * off_target * limited * cfg.mss_bytes / self.cwnd_bytes
            else:
                self.cwnd_bytes += (
                    cfg.gain_down * off_target * bytes_newly_acked * cfg.mss_bytes / self.cwnd_bytes
                )
        self.cwnd_bytes = max(self.cwnd_bytes, float(self.min_cwnd))
        return bytes_newly_acked

    def _absorb_acks(self, fb: ScreamFeedback) -> int:
        newly = 0
        seqs = [fb.highest_seq]
        for k in range(64):
            if fb.ack_vector >> k & 1:
                seqs.append(fb.highest_seq - 1 - k)
        for seq in seqs:
            rec = self.send_log.get(seq)
            if rec is None or rec.acked or rec.lost:
                continue
            rec.acked = True
            newly += rec.size_bytes
            self.bytes_in_flight -= rec.size_bytes
        if fb.highest_seq > self._highest_acked:
            self._highest_acked = fb.highest_seq
        return newly

    def _detect_losses(self, fb: ScreamFeedback, now: SimTime) -> None:
        threshold = self._highest_acked - self.cfg.reorder_margin
        lost_any = False
        seq = self._scan_floor
        while seq < threshold:
            rec = self.send_log.get(seq)
            if rec is None:
                break
            if not rec.acked and not rec.lost:
                rec.lost = True
                self.bytes_in_flight -= rec.size_bytes
                lost_any = True
            seq += 1
        self._scan_floor = max(self._scan_floor, seq)
        if lost_any:
            self.on_loss(now)

    def on_loss(self, now: SimTime) -> None:
        """Halve the window, at most once per RTT."""
        if self._last_halve_us is not None and now - self._last_halve_us < self.rtt_us:
            return
        self._last_halve_us = now
        self.loss_events += 1
        self.cwnd_bytes = max(float(self.min_cwnd), 0.5 * self.cwnd_bytes)


class RtpQueue:
    """FIFO of paced-out media packets waiting for window room."""

    def __init__(self) -> None:
        self._items: deque[tuple[SimTime, object]] = deque()
        self.bytes = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, enqueue_ts: SimTime, pkt) -> None:
        self._items.append((enqueue_ts, pkt))
        self.bytes += pkt.size_bytes

    def head(self):
        return self._items[0][1]

    def pop(self):
        ts, pkt = self._items.popleft()
        self.bytes -= pkt.size_bytes
        return pkt

    def delay_us(self, now: SimTime) -> SimTime:
        if not self._items:
            return 0
        return now - self._items[0][0]


class MediaRateController:
    """Encoder target from RTP-queue delay, transmit rate and ack rate."""

    def __init__(self, cfg: ScreamConfig) -> None:
        self.cfg = cfg
        self.rate_bps = cfg.initial_rate_bps

    def update(
        self,
        rtp_delay_us: SimTime,
        transmit_rate_bps: int,
        ack_rate_bps: int,
        cwnd_limited: bool,
    ) -> int:
        cfg = self.cfg
        cap_us = cfg.rtp_delay_cap_ms * US_PER_MS
        if rtp_delay_us > cap_us:
            # Scale down in proportion to the delay excess, anchored on the
            # ack rate (what the network actually absorbed); the floor keeps
            # one adjustment from collapsing the rate outright.
            basis = min(self.rate_bps, ack_rate_bps) if ack_rate_bps > 0 else self.rate_bps
            scale = max(cfg.down_scale_floor, cap_us / rtp_delay_us)
            self.rate_bps = int(basis * scale)
        elif cwnd_limited:
            pass  # window is the binding constraint; do not outrun it
        elif ack_rate_bps > 0 and transmit_rate_bps > ack_rate_bps * cfg.ack_headroom:
            # Acks lag transmissions: the path is not absorbing the current
            # rate, so track down to it instead of ramping into the queue.
            self.rate_bps = ack_rate_bps
        else:
            self.rate_bps = int(self.rate_bps * cfg.ramp_up)
        self.rate_bps = int(min(cfg.max_rate_bps, max(cfg.min_rate_bps, self.rate_bps)))
        return self.rate_bps


class RateWindow:
    """Byte throughput over a sliding window anchored at the newest sample."""

    def __init__(self, window_us: SimTime) -> None:
        self.window_us = window_us
        self._samples: deque[tuple[SimTime, int]] = deque()

    def add(self, ts: SimTime, size_bytes: int) -> None:
        self._samples.append((ts, size_bytes))

    def rate_bps(self) -> int:
        if not self._samples:
            return 0
        newest = self._samples[-1][0]
        while self._samples and self._samples[0][0] < newest - self.window_us:
            self._samples.popleft()
        return sum(size for _, size in self._samples) * 8 * US_PER_SEC // self.window_us
