"""Deterministic discrete-event engine.

Simulation time is integer microseconds (``SimTime``), so event ordering is
exact and a run replays bit-identically on any platform.  Events dispatch in
``(fire_at, insertion_seq)`` order; ties go to the earlier insertion.
"""

from __future__ import annotations

import heapq
import random
from typing import Callable

SimTime = int  # microseconds since simulation start

US_PER_MS = 1_000
US_PER_SEC = 1_000_000


def ms(value: float) -> SimTime:
    """Milliseconds to integer microseconds."""
    return round(value * US_PER_MS)


def sec(value: float) -> SimTime:
    """Seconds to integer microseconds."""
    return round(value * US_PER_SEC)


class SchedulingError(Exception):
    """An event was scheduled before the current clock."""


class Simulator:
    """Monotone clock plus a (fire_at, seq)-ordered event queue."""

    def __init__(self) -> None:
        self.now: SimTime = 0
        self._queue: list[tuple[SimTime, int, Callable[[], None]]] = []
        self._seq = 0
        self.dispatched = 0

    def schedule(self, fire_at: SimTime, action: Callable[[], None]) -> None:
        if fire_at < self.now:
            raise SchedulingError(
                f"cannot schedule at {fire_at}us: clock is already {self.now}us"
            )
        heapq.heappush(self._queue, (fire_at, self._seq, action))
        self._seq += 1

    def schedule_in(self, delay: SimTime, action: Callable[[], None]) -> None:
        self.schedule(self.now + delay, action)

    def run_until(self, end: SimTime) -> None:
        """Dispatch every event with fire_at <= end, then advance clock to end."""
        queue = self._queue
        while queue and queue[0][0] <= end:
            fire_at, _, action = heapq.heappop(queue)
            self.now = fire_at
            self.dispatched += 1
            action()
        if end > self.now:
            self.now = end


class RngStream:
    """Named pseudo-random stream: same (seed, stream_id) -> same draw sequence.

    One stream per stochastic process keeps processes independent, so adding
    a flow never perturbs another flow's draws.  String seeding goes through
    SHA-512 inside ``random.Random`` and is stable across platforms.
    """

    def __init__(self, seed: int, stream_id: int) -> None:
        self.seed = seed
        self.stream_id = stream_id
        self._rng = random.Random(f"{seed}/{stream_id}")

    def next_uniform(self) -> float:
        """Next draw in [0, 1)."""
        return self._rng.random()
