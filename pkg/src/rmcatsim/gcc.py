"""Sender-side delay-gradient congestion control (trendline + AIMD).

Pipeline, run per feedback report:

1. received packets are partitioned into 5 ms send-time groups;
2. consecutive completed groups yield a one-way delay variation
   (arrival spacing minus send spacing);
3. the accumulated variation is exponentially smoothed and a least-squares
   slope is fit over a sliding window of (arrival offset, smoothed delay)
   points -- the trendline, a proxy for queue growth;
4. an overuse detector compares the gain-scaled slope against an adaptive
   threshold, with a sustain requirement before signalling overuse;
5. an AIMD controller maps the detector state to the target rate:
   multiplicative decrease to beta x receive rate, additive increase near
   the last known max, multiplicative increase while the max is unknown.

A loss-based cap (active only above a loss-fraction threshold) bounds the
rate under heavy random loss; below the threshold loss has no effect on the
delay-driven controller.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .simcore import SimTime, US_PER_MS, US_PER_SEC

OVERUSE = "overuse"
NORMAL = "normal"
UNDERUSE = "underuse"


@dataclass
class GccConfig:
    initial_rate_bps: int = 300_000
    min_rate_bps: int = 150_000
    max_rate_bps: int = 4_000_000
    group_window_ms: float = 5.0
    smoothing_coef: float = 0.9
    window_points: int = 20
    min_points: int = 2
    slope_gain: float = 4.0
    deltas_cap: int = 60
    gamma_init_ms: float = 12.5
    gamma_min_ms: float = 6.0
    gamma_max_ms: float = 600.0
    k_up: float = 0.01
    k_down: float = 0.00018
    overuse_time_ms: float = 10.0
    threshold_dt_cap_ms: float = 100.0
    beta: float = 0.85
    eta_per_sec: float = 1.08
    multiplicative_cap_factor: float = 2.0
    additive_bits: int = 9_600  # one MTU of bits per estimated round trip
    recv_window_us: SimTime = 500_000
    loss_window_us: SimTime = 1_000_000
    loss_cap_enabled: bool = True
    loss_cap_threshold: float = 0.10


@dataclass
class PacketGroup:
    """Packets whose send times share one 5 ms window."""

    timestamp: SimTime  # send time of the first packet in the group
    complete_time: SimTime  # arrival time of the last packet in the group
    size_bytes: int


class PacketGrouper:
    """Stateful 5 ms send-window partitioner.

    A packet joins the current group while send_ts - first_send < window;
    otherwise the current group completes and a new one starts.  Only
    received packets participate.
    """

    def __init__(self, window_us: SimTime) -> None:
        self.window_us = window_us
        self._first_send: SimTime | None = None
        self._last_arrival: SimTime = 0
        self._size = 0

    def add(self, send_ts: SimTime, arrival_ts: SimTime, size_bytes: int) -> PacketGroup | None:
        """Feed one received packet; returns the group it completed, if any."""
        if self._first_send is None:
            self._first_send = send_ts
            self._last_arrival = arrival_ts
            self._size = size_bytes
            return None
        if send_ts - self._first_send < self.window_us:
            self._last_arrival = max(self._last_arrival, arrival_ts)
            self._size += size_bytes
            return None
        done = PacketGroup(self._first_send, self._last_arrival, self._size)
        self._first_send = send_ts
        self._last_arrival = arrival_ts
        self._size = size_bytes
        return done


def delay_variation_ms(prev: PacketGroup, cur: PacketGroup) -> float:
    """Inter-group arrival spacing minus send spacing, in milliseconds."""
    arrival_delta = cur.complete_time - prev.complete_time
    send_delta = cur.timestamp - prev.timestamp
    return (arrival_delta - send_delta) / US_PER_MS


def least_squares_slope(xs, ys) -> float | None:
    """Closed-form simple linear regression slope; None for degenerate x."""
    n = len(xs)
    x_avg = sum(xs) / n
    y_avg = sum(ys) / n
    num = 0.0
    den = 0.0
    for x, y in zip(xs, ys):
        dx = x - x_avg
        num += dx * (y - y_avg)
        den += dx * dx
    if den == 0.0:
        return None
    return num / den


class TrendlineFilter:
    """Smoothed accumulated delay regressed against arrival time."""

    def __init__(self, cfg: GccConfig) -> None:
        self.cfg = cfg
        self.acc_delay_ms = 0.0
        self.smoothed_delay_ms = 0.0
        self.first_complete_time: SimTime | None = None
        self._xs: deque[float] = deque(maxlen=cfg.window_points)
        self._ys: deque[float] = deque(maxlen=cfg.window_points)
        self.num_deltas = 0

    def prime(self, first_group: PacketGroup) -> None:
        """Anchor the x axis at the first completed group's arrival."""
        if self.first_complete_time is None:
            self.first_complete_time = first_group.complete_time

    def update(self, d_ms: float, group: PacketGroup) -> float | None:
        """Absorb one delay variation; returns the slope or None if too few points."""
        self.num_deltas += 1
        self.acc_delay_ms += d_ms
        alpha = self.cfg.smoothing_coef
        self.smoothed_delay_ms = (
            alpha * self.smoothed_delay_ms + (1.0 - alpha) * self.acc_delay_ms
        )
        x_ms = (group.complete_time - self.first_complete_time) / US_PER_MS
        self._xs.append(x_ms)
        self._ys.append(self.smoothed_delay_ms)
        if len(self._xs) < self.cfg.min_points:
            return None
        return least_squares_slope(self._xs, self._ys)


class OveruseDetector:
    """Adaptive-threshold state machine over the gain-scaled trendline slope.

    Overuse needs the excursion to persist past overuse_time_ms over more
    than one sample with a non-decreasing slope; a single short spike never
    trips it.  The threshold chases |modified slope| fast on the way up
    (k_up) and decays slowly (k_down), clamped to [gamma_min, gamma_max].
    """

    def __init__(self, cfg: GccConfig) -> None:
        self.cfg = cfg
        self.gamma_ms = cfg.gamma_init_ms
        self.state = NORMAL
        self._overuse_accum_ms = -1.0
        self._overuse_count = 0
        self._prev_slope: float | None = None

    def update(self, slope: float, num_deltas: int, dt_us: SimTime) -> str:
        cfg = self.cfg
        dt_ms = dt_us / US_PER_MS
        gain = cfg.slope_gain * min(num_deltas, cfg.deltas_cap)
        modified = slope * gain

        if modified > self.gamma_ms:
            if self._overuse_accum_ms < 0:
                self._overuse_accum_ms = dt_ms / 2.0
            else:
                self._overuse_accum_ms += dt_ms
            self._overuse_count += 1
            if (
                self._overuse_accum_ms > cfg.overuse_time_ms
                and self._overuse_count > 1
                and (self._prev_slope is None or slope >= self._prev_slope)
            ):
                self._overuse_accum_ms = 0.0
                self._overuse_count = 0
                self.state = OVERUSE
        elif modified < -self.gamma_ms:
            self._overuse_accum_ms = -1.0
            self._overuse_count = 0
            self.state = UNDERUSE
        else:
            self._overuse_accum_ms = -1.0
            self._overuse_count = 0
            self.state = NORMAL

        self._adapt_threshold(abs(modified), dt_ms)
        self._prev_slope = slope
        return self.state

    def _adapt_threshold(self, abs_modified: float, dt_ms: float) -> None:
        cfg = self.cfg
        k = cfg.k_up if abs_modified > self.gamma_ms else cfg.k_down
        dt_ms = min(dt_ms, cfg.threshold_dt_cap_ms)
        self.gamma_ms += dt_ms * k * (abs_modified - self.gamma_ms)
        self.gamma_ms = min(cfg.gamma_max_ms, max(cfg.gamma_min_ms, self.gamma_ms))


NEAR_MAX = "near_max"
MAX_UNKNOWN = "max_unknown"


class AimdController:
    """Target-rate state machine: Increase / Hold / Decrease.

    Decrease always lands on beta x receive rate (clamped), and flips the
    control region to near-max so later growth is additive.  While the max
    is unknown, growth is multiplicative at eta per second, capped at a
    multiple of the receive rate.
    """

    def __init__(self, cfg: GccConfig) -> None:
        self.cfg = cfg
        self.rate_bps = self._clamp(cfg.initial_rate_bps)
        self.region = MAX_UNKNOWN
        self._increasing = False
        self._last_update_us: SimTime | None = None
        self.decrease_events: list[tuple[SimTime, int, int]] = []

    def _clamp(self, rate: float) -> int:
        return int(min(self.cfg.max_rate_bps, max(self.cfg.min_rate_bps, rate)))

    def update(self, signal: str, recv_rate_bps: int, now: SimTime, rtt_us: SimTime) -> int:
        dt_us = 0 if self._last_update_us is None else now - self._last_update_us
        self._last_update_us = now

        if signal == OVERUSE:
            self.rate_bps = self._clamp(self.cfg.beta * recv_rate_bps)
            self.region = NEAR_MAX
            self._increasing = False
            self.decrease_events.append((now, recv_rate_bps, self.rate_bps))
        elif signal == UNDERUSE:
            self._increasing = False
        else:
            self._increasing = True
            if self.region == NEAR_MAX:
                step = self.cfg.additive_bits * dt_us / max(rtt_us, 10_000)
                self.rate_bps = self._clamp(self.rate_bps + step)
            else:
                grown = self.rate_bps * self.cfg.eta_per_sec ** (dt_us / US_PER_SEC)
                if recv_rate_bps > 0:
                    cap = self.cfg.multiplicative_cap_factor * recv_rate_bps
                    grown = min(grown, max(cap, self.rate_bps))
                self.rate_bps = self._clamp(grown)
        return self.rate_bps


class ReceiveRateEstimator:
    """Delivered bits over a sliding window anchored at the newest arrival."""

    def __init__(self, window_us: SimTime) -> None:
        self.window_us = window_us
        self._samples: deque[tuple[SimTime, int]] = deque()

    def add(self, arrival_ts: SimTime, size_bytes: int) -> None:
        self._samples.append((arrival_ts, size_bytes))

    def rate_bps(self) -> int:
        if not self._samples:
            return 0
        newest = self._samples[-1][0]
        while self._samples and self._samples[0][0] < newest - self.window_us:
            self._samples.popleft()
        total_bytes = sum(size for _, size in self._samples)
        return total_bytes * 8 * US_PER_SEC // self.window_us


class GccController:
    """Whole sender-side pipeline; one instance per flow.

    Consumes joined feedback entries (seq, send_ts, arrival_ts-or-None,
    size) and produces the target rate.  The AIMD stage sees only the
    detector state and the receive-rate estimate, so loss marks below the
    cap threshold cannot force a decrease by themselves.
    """

    def __init__(self, cfg: GccConfig | None = None) -> None:
        self.cfg = cfg or GccConfig()
        self.grouper = PacketGrouper(round(self.cfg.group_window_ms * US_PER_MS))
        self.trendline = TrendlineFilter(self.cfg)
        self.detector = OveruseDetector(self.cfg)
        self.aimd = AimdController(self.cfg)
        self.recv_rate = ReceiveRateEstimator(self.cfg.recv_window_us)
        self._prev_group: PacketGroup | None = None
        self._last_detect_time: SimTime | None = None
        self._loss_marks: deque[tuple[SimTime, bool]] = deque()
        self.rtt_us: SimTime = 200_000
        self.last_loss_fraction = 0.0

    @property
    def rate_bps(self) -> int:
        return self.aimd.rate_bps

    def on_report(self, entries: list[tuple[int, SimTime, SimTime | None, int]], now: SimTime) -> int:
        """Process one feedback report; returns the updated target rate."""
        newest_send: SimTime | None = None
        for seq, send_ts, arrival_ts, size in entries:
            self._loss_marks.append((send_ts, arrival_ts is None))
            if arrival_ts is None:
                continue
            newest_send = send_ts
            self.recv_rate.add(arrival_ts, size)
            completed = self.grouper.add(send_ts, arrival_ts, size)
            if completed is None:
                continue
            self._process_group(completed)

        if newest_send is not None:
            sample = now - newest_send
            self.rtt_us = round(0.875 * self.rtt_us + 0.125 * sample)

        rate = self.aimd.update(self.detector.state, self.recv_rate.rate_bps(), now, self.rtt_us)
        rate = self._apply_loss_cap(rate, now)
        self.aimd.rate_bps = rate
        return rate

    def _process_group(self, group: PacketGroup) -> None:
        if self._prev_group is None:
            self.trendline.prime(group)
            self._prev_group = group
            self._last_detect_time = group.complete_time
            return
        d_ms = delay_variation_ms(self._prev_group, group)
        slope = self.trendline.update(d_ms, group)
        if slope is not None:
            dt = group.complete_time - self._last_detect_time
            self.detector.update(slope, self.trendline.num_deltas, dt)
            self._last_detect_time = group.complete_time
        self._prev_group = group

    def _apply_loss_cap(self, rate: int, now: SimTime) -> int:
        cfg = self.cfg
        if not cfg.loss_cap_enabled:
            self.last_loss_fraction = 0.0
            return rate
        while self._loss_marks and self._loss_marks[0][0] < now - cfg.loss_window_us:
            self._loss_marks.popleft()
        total = len(self._loss_marks)
        if total == 0:
            self.last_loss_fraction = 0.0
            return rate
        lost = sum(1 for _, is_lost in self._loss_marks if is_lost)
        fraction = lost / total
        self.last_loss_fraction = fraction
        if fraction > cfg.loss_cap_threshold:
            capped = int(rate * (1.0 - 0.5 * fraction))
            rate = max(cfg.min_rate_bps, min(rate, capped))
        return rate
