"""Measurement helpers: per-interval utilization, throughput, fairness."""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

from .netmodel import BandwidthSchedule
from .simcore import SimTime, US_PER_SEC


@dataclass
class IntervalUtilization:
    start_us: SimTime
    end_us: SimTime
    delivered_bits: int
    capacity_bits: int

    @property
    def utilization(self) -> float:
        return self.delivered_bits / self.capacity_bits


class DeliveryLog:
    """Time-ordered (ts, amount) records with prefix sums.

    Used for delivered bytes, sent bytes and per-packet delay samples alike.
    """

    def __init__(self) -> None:
        self.times: list[SimTime] = []
        self.sizes: list[int] = []
        self._cum: list[int] = []
        self.total_bytes = 0

    def add(self, ts: SimTime, size_bytes: int) -> None:
        self.times.append(ts)
        self.sizes.append(size_bytes)
        self.total_bytes += size_bytes
        self._cum.append(self.total_bytes)

    def bytes_between(self, start_us: SimTime, end_us: SimTime) -> int:
        """Amount recorded in [start_us, end_us)."""
        lo = bisect_left(self.times, start_us)
        hi = bisect_left(self.times, end_us)
        if hi == lo:
            return 0
        base = self._cum[lo - 1] if lo > 0 else 0
        return self._cum[hi - 1] - base

    def count_between(self, start_us: SimTime, end_us: SimTime) -> int:
        return bisect_left(self.times, end_us) - bisect_left(self.times, start_us)

    def rate_bps(self, start_us: SimTime, end_us: SimTime) -> float:
        if end_us <= start_us:
            return 0.0
        return self.bytes_between(start_us, end_us) * 8 * US_PER_SEC / (end_us - start_us)


def compute_utilization(
    logs: list[DeliveryLog],
    schedule: BandwidthSchedule,
    intervals: list[tuple[SimTime, SimTime]],
) -> list[IntervalUtilization]:
    """Delivered bits over schedule-integrated capacity, per interval."""
    out = []
    for start, end in intervals:
        delivered = sum(log.bytes_between(start, end) for log in logs) * 8
        capacity = schedule.integral_bits(start, end)
        out.append(IntervalUtilization(start, end, delivered, capacity))
    return out


def jain_index(rates: list[float]) -> float:
    """(sum x)^2 / (n * sum x^2); 1.0 means perfectly equal shares."""
    if not rates or any(r < 0 for r in rates):
        raise ValueError("rates must be non-negative and non-empty")
    total = sum(rates)
    square_sum = sum(r * r for r in rates)
    if square_sum == 0:
        raise ValueError("all-zero rates have no fairness index")
    return total * total / (len(rates) * square_sum)
