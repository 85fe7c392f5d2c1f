"""Discrete-event kernel on an integer symbol clock, with per-node RNG streams."""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass, field
from typing import Any, Callable

SYMBOL_RATE = 62_500  # symbols/s, 2.4 GHz O-QPSK PHY
BITS_PER_SYMBOL = 4


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current clock."""


def symbols_to_seconds(symbols: int) -> float:
    return symbols / SYMBOL_RATE


def seconds_to_symbols(seconds: float) -> int:
    """Round a duration in seconds to the nearest whole symbol."""
    return int(round(seconds * SYMBOL_RATE))


@dataclass(order=True)
class Event:
    fire_at: int
    seq: int
    target: Any = field(compare=False, default=None)
    callback: Callable[..., Any] | None = field(compare=False, default=None)
    args: tuple = field(compare=False, default=())
    cancelled: bool = field(compare=False, default=False)


class Simulator:
    """Single-threaded event loop.

    Events with equal ``fire_at`` dispatch in insertion order. Every node draws
    from its own RNG stream derived from ``(seed, stream)`` so adding a node
    never perturbs another node's draws.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.now = 0
        self._queue: list[Event] = []
        self._seq = itertools.count()
        self._streams: dict[Any, random.Random] = {}
        self.scheduled = 0
        self.cancelled = 0
        self.dispatched = 0

    def schedule(self, fire_at: int, callback: Callable[..., Any], *args, target=None) -> Event:
        if fire_at < self.now:
            raise SchedulingError(
                f"event for {target!r} scheduled at {fire_at} < now {self.now} ({callback!r})")
        event = Event(int(fire_at), next(self._seq), target, callback, args)
        heapq.heappush(self._queue, event)
        self.scheduled += 1
        return event

    def schedule_in(self, delay: int, callback: Callable[..., Any], *args, target=None) -> Event:
        return self.schedule(self.now + delay, callback, *args, target=target)

    def cancel(self, event: Event | None) -> None:
        if event is None or event.cancelled:
            return
        event.cancelled = True
        self.cancelled += 1

    def pending(self) -> int:
        return sum(1 for e in self._queue if not e.cancelled)

    def run_until(self, end: int) -> int:
        """Dispatch every event with ``fire_at <= end``; leave the clock at ``end``."""
        count = 0
        queue = self._queue
        while queue and queue[0].fire_at <= end:
            event = heapq.heappop(queue)
            if event.cancelled:
                continue
            self.now = event.fire_at
            event.callback(*event.args)
            count += 1
        self.dispatched += count
        if end > self.now:
            self.now = end
        return count

    def rng(self, stream) -> random.Random:
        rng = self._streams.get(stream)
        if rng is None:
            # str seeding hashes with sha512, stable across processes
            rng = random.Random(f"{self.seed}:{stream}")
            self._streams[stream] = rng
        return rng

    def uniform_int(self, lo: int, hi: int, stream) -> int:
        if lo > hi:
            raise ValueError(f"uniform_int: empty range [{lo}, {hi}]")
        return self.rng(stream).randint(lo, hi)
