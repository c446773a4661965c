"""Discrete-event engine: a time-ordered queue plus the seeded random stream."""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Optional


@dataclass(order=True)
class Event:
    """A scheduled event.

    Ordered by ``(fire_at, seq)``; ``seq`` is unique per queue so no two
    events ever compare equal.
    """

    fire_at: float
    seq: int
    kind: str = field(compare=False)
    action: Optional[Callable[[], Any]] = field(default=None, compare=False, repr=False)
    payload: Any = field(default=None, compare=False)
    cancelled: bool = field(default=False, compare=False)

    def cancel(self) -> None:
        self.cancelled = True


class EventQueue:
    """Min-heap of events with FIFO tie-breaking at equal timestamps."""

    def __init__(self, start: float = 0.0) -> None:
        self._heap: list[Event] = []
        self._seq = 0
        self.now = float(start)
        self.dispatched = 0

    def __len__(self) -> int:
        return len(self._heap)

    def peek(self) -> Optional[Event]:
        return self._heap[0] if self._heap else None

    def schedule(self, at: float, kind: str, action: Optional[Callable[[], Any]] = None,
                 payload: Any = None) -> Event:
        if not isinstance(at, (int, float)) or math.isnan(at):
            raise ValueError(f"event time must be a real number, got {at!r}")
        if at < self.now:
            raise ValueError(f"cannot schedule {kind} in the past: {at} < {self.now}")
        ev = Event(float(at), self._seq, kind, action, payload)
        self._seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def schedule_in(self, delay: float, kind: str, action=None, payload=None) -> Event:
        return self.schedule(self.now + delay, kind, action, payload)

    def pop(self) -> Event:
        ev = heapq.heappop(self._heap)
        self.now = ev.fire_at
        return ev

    def run_until(self, horizon: float) -> int:
        """Dispatch every event with ``fire_at <= horizon``.

        Events scheduled by handlers are honoured if they fall within the
        horizon. Returns the number of events dispatched (cancelled events
        are discarded without counting). Time ends at ``horizon``.
        """
        if horizon < self.now:
            raise ValueError(f"horizon {horizon} is before current time {self.now}")
        count = 0
        while self._heap and self._heap[0].fire_at <= horizon:
            ev = self.pop()
            if ev.cancelled:
                continue
            if ev.action is not None:
                ev.action()
            count += 1
        self.now = float(horizon)
        self.dispatched += count
        return count


class RngStream:
    """Seeded uniform stream (Mersenne Twister, identical across platforms)."""

    def __init__(self, seed: int) -> None:
        self.seed = int(seed)
        self._rng = random.Random(self.seed)

    def random(self) -> float:
        return self._rng.random()

    def uniform_jitter(self, lo: float, hi: float) -> float:
        return uniform_jitter(self, lo, hi)


def uniform_jitter(rng: RngStream, lo: float, hi: float) -> float:
    """Draw from ``[lo, hi)`` on the seeded stream."""
    if not 0 <= lo < hi:
        raise ValueError(f"need 0 <= lo < hi, got lo={lo}, hi={hi}")
    r = lo + (hi - lo) * rng.random()
    # float rounding can land exactly on hi for some spans
    return r if r < hi else math.nextafter(hi, lo)
