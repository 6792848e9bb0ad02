"""Point-to-point bottleneck link model.

One direction carries media: serialization at the configured capacity, a
fixed one-way propagation delay, a byte-bounded drop-tail queue and optional
i.i.d. Bernoulli packet loss applied on enqueue.  The reverse direction
(feedback/acks) is lossless and adds propagation delay only, so the forward
path is the only place queueing dynamics can arise.

Capacity may follow a piecewise-constant schedule.  A packet whose
serialization already started finishes at the old rate; the queue byte cap
never changes (a fixed hardware buffer, sized once from a time budget at the
link's nominal rate).
"""

from __future__ import annotations

import bisect
from collections import deque
from dataclasses import dataclass
from functools import partial
from typing import TYPE_CHECKING, Callable

from .simcore import SimTime, Simulator, RngStream, US_PER_SEC

if TYPE_CHECKING:
    from .transport import MediaPacket

ACCEPTED = "accepted"
DROPPED_OVERFLOW = "dropped_overflow"
DROPPED_RANDOM = "dropped_random"


@dataclass
class LinkConfig:
    capacity_bps: int
    prop_delay_us: SimTime
    queue_capacity_bytes: int
    loss_rate: float = 0.0

    def __post_init__(self) -> None:
        if self.capacity_bps <= 0:
            raise ValueError("capacity_bps must be positive")
        if self.queue_capacity_bytes <= 0:
            raise ValueError("queue_capacity_bytes must be positive")
        if not 0.0 <= self.loss_rate <= 1.0:
            raise ValueError("loss_rate must be in [0, 1]")


def queue_bytes_for_budget(buffer_ms: float, capacity_bps: int) -> int:
    """Queue byte cap for a time budget at a given rate (buffer_ms x capacity)."""
    return int(buffer_ms * capacity_bps / 8000)


@dataclass(frozen=True)
class BandwidthSchedule:
    """Piecewise-constant capacity: ordered (at_us, capacity_bps) steps."""

    steps: tuple[tuple[SimTime, int], ...]

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("schedule needs at least one step")
        if self.steps[0][0] != 0:
            raise ValueError("first schedule step must be at t=0")
        for (t0, _), (t1, cap) in zip(self.steps, self.steps[1:]):
            if t1 <= t0:
                raise ValueError("schedule times must be strictly increasing")
        if any(cap <= 0 for _, cap in self.steps):
            raise ValueError("capacities must be positive")

    @classmethod
    def constant(cls, capacity_bps: int) -> "BandwidthSchedule":
        return cls(((0, capacity_bps),))

    def capacity_at(self, t: SimTime) -> int:
        idx = bisect.bisect_right([at for at, _ in self.steps], t) - 1
        return self.steps[idx][1]

    def integral_bits(self, start_us: SimTime, end_us: SimTime) -> int:
        """Exact capacity integral over [start_us, end_us], in bits."""
        if end_us <= start_us:
            return 0
        total_bit_us = 0
        times = [at for at, _ in self.steps] + [end_us]
        for i, (at, cap) in enumerate(self.steps):
            seg_start = max(at, start_us)
            seg_end = min(times[i + 1], end_us)
            if seg_end > seg_start:
                total_bit_us += cap * (seg_end - seg_start)
        return total_bit_us // US_PER_SEC


def serialization_us(size_bytes: int, capacity_bps: int) -> SimTime:
    """Wire time of a packet, rounded up to the microsecond."""
    bits = size_bytes * 8
    return -(-bits * US_PER_SEC // capacity_bps)


class Link:
    """Drop-tail bottleneck with Bernoulli loss and schedulable capacity.

    Delivery order equals accepted-enqueue order (single FIFO path).  The
    byte backlog counts every accepted packet not yet fully serialized, and
    is asserted against the cap on every enqueue.
    """

    def __init__(
        self,
        sim: Simulator,
        config: LinkConfig,
        loss_stream: RngStream | None = None,
        deliver: Callable[["MediaPacket"], None] | None = None,
    ) -> None:
        self.sim = sim
        self.config = config
        self.capacity_bps = config.capacity_bps
        self.loss_stream = loss_stream
        self.deliver = deliver or (lambda pkt: None)

        self._queue: deque["MediaPacket"] = deque()
        self._busy = False
        self.backlog_bytes = 0

        self.packets_in = 0
        self.accepted = 0
        self.delivered = 0
        self.dropped_overflow = 0
        self.dropped_random = 0
        self._accept_seq = 0
        self._deliver_seq = 0

    @property
    def in_flight(self) -> int:
        """Accepted but not yet delivered (queued, serializing or propagating)."""
        return self.accepted - self.delivered

    def install_schedule(self, schedule: BandwidthSchedule) -> None:
        self.capacity_bps = schedule.steps[0][1]
        for at, cap in schedule.steps[1:]:
            self.sim.schedule(at, partial(self.set_capacity, cap))

    def set_capacity(self, capacity_bps: int) -> None:
        # The head packet's completion is already on the event queue, so an
        # in-flight serialization finishes at the old rate automatically.
        self.capacity_bps = capacity_bps

    def enqueue(self, pkt: "MediaPacket") -> str:
        self.packets_in += 1
        if self.loss_stream is not None:
            if self.loss_stream.next_uniform() < self.config.loss_rate:
                self.dropped_random += 1
                return DROPPED_RANDOM
        elif self.config.loss_rate > 0.0:
            raise ValueError("loss_rate > 0 requires a loss_stream")
        if self.backlog_bytes + pkt.size_bytes > self.config.queue_capacity_bytes:
            self.dropped_overflow += 1
            return DROPPED_OVERFLOW
        pkt.accept_index = self._accept_seq
        self._accept_seq += 1
        self.accepted += 1
        self.backlog_bytes += pkt.size_bytes
        assert self.backlog_bytes <= self.config.queue_capacity_bytes
        self._queue.append(pkt)
        if not self._busy:
            self._start_service()
        return ACCEPTED

    def _start_service(self) -> None:
        pkt = self._queue[0]
        self._busy = True
        tx = serialization_us(pkt.size_bytes, self.capacity_bps)
        self.sim.schedule_in(tx, self._complete_service)

    def _complete_service(self) -> None:
        pkt = self._queue.popleft()
        self.backlog_bytes -= pkt.size_bytes
        self.sim.schedule_in(self.config.prop_delay_us, partial(self._arrive, pkt))
        if self._queue:
            self._start_service()
        else:
            self._busy = False

    def _arrive(self, pkt: "MediaPacket") -> None:
        pkt.arrival_ts = self.sim.now
        assert pkt.accept_index == self._deliver_seq, "FIFO order violated"
        self._deliver_seq += 1
        self.delivered += 1
        self.deliver(pkt)

    def check_conservation(self) -> None:
        total = (
            self.delivered
            + self.dropped_overflow
            + self.dropped_random
            + self.in_flight
        )
        assert self.packets_in == total, (
            f"packet conservation violated: in={self.packets_in} "
            f"delivered={self.delivered} overflow={self.dropped_overflow} "
            f"random={self.dropped_random} in_flight={self.in_flight}"
        )


def one_way_delay(pkt: "MediaPacket") -> SimTime:
    """Arrival minus send time of a delivered packet."""
    if pkt.arrival_ts is None or pkt.send_ts is None:
        raise ValueError(f"packet {pkt.twcc_seq} was not delivered")
    return pkt.arrival_ts - pkt.send_ts


class ReverseChannel:
    """Lossless receiver-to-sender path: propagation delay only, no queue."""

    def __init__(self, sim: Simulator, delay_us: SimTime, deliver: Callable) -> None:
        self.sim = sim
        self.delay_us = delay_us
        self.deliver = deliver

    def send(self, message) -> None:
        self.sim.schedule_in(self.delay_us, partial(self.deliver, message))
