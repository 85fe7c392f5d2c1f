"""Slotted CSMA/CA channel access for the contention access period."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Callable

from ..engine import Event, Simulator
from .constants import (A_MAX_BE, A_UNIT_BACKOFF_PERIOD, CCA_DURATION,
                        MAC_MAX_CSMA_BACKOFFS, MAC_MIN_BE)
from .superframe import Timeline


class MacStatus(enum.Enum):
    SUCCESS = "SUCCESS"
    CHANNEL_ACCESS_FAILURE = "CHANNEL_ACCESS_FAILURE"
    NO_ACK = "NO_ACK"
    GTS_EXPIRED = "GTS_EXPIRED"
    FRAME_TOO_LONG = "FRAME_TOO_LONG"
    ABORTED = "ABORTED"


@dataclass
class CsmaState:
    nb: int = 0
    cw: int = 2
    be: int = MAC_MIN_BE


def initial_state(battery_life_extension: bool = False) -> CsmaState:
    return CsmaState(0, 2, min(2, MAC_MIN_BE) if battery_life_extension else MAC_MIN_BE)


class SlottedCsmaCa:
    """One channel-access attempt for one frame.

    ``cap_window(t)`` returns the timeline of the superframe whose CAP is
    usable at ``t`` or ``None`` when the device has no CAP until the next
    beacon; in that case the procedure parks until :meth:`resume` is called.
    ``clear_channel()`` performs the CCA and returns True when idle.
    ``transmit()`` fires on the backoff boundary chosen for transmission.

    ``log`` receives the decision trace: ``("delay", t, nb, be, periods)``,
    ``("defer", t)``, ``("cca", t, idle, nb, cw, be)``, ``("tx", t)`` and
    ``("fail", t)``.
    """

    def __init__(self, sim: Simulator, rng: random.Random, *,
                 cap_window: Callable[[int], Timeline | None],
                 clear_channel: Callable[[], bool],
                 transmit: Callable[[], None],
                 failed: Callable[[MacStatus], None],
                 battery_life_extension: bool = False,
                 log: list | None = None,
                 on_cca: Callable[[int], None] | None = None):
        self.sim = sim
        self.rng = rng
        self.cap_window = cap_window
        self.clear_channel = clear_channel
        self.transmit = transmit
        self.failed = failed
        self.battery_life_extension = battery_life_extension
        self.log = log
        self.on_cca = on_cca
        self.state = initial_state(battery_life_extension)
        self.needed = 0
        self.waiting = False
        self.active = False
        self._pending: Event | None = None
        self._cca_at = 0

    def _note(self, *entry) -> None:
        if self.log is not None:
            self.log.append(entry)

    def start(self, needed: int) -> None:
        """``needed``: symbols from transmission start to end of the ACK exchange."""
        self.state = initial_state(self.battery_life_extension)
        self.needed = needed
        self.active = True
        self._backoff()

    def cancel(self) -> None:
        self.sim.cancel(self._pending)
        self._pending = None
        self.waiting = False
        self.active = False

    def resume(self) -> None:
        if self.active and self.waiting:
            self.waiting = False
            self._backoff()

    def _backoff(self) -> None:
        now = self.sim.now
        timeline = self.cap_window(now)
        if timeline is None:
            self.waiting = True
            return
        boundary = timeline.next_backoff_boundary(now)
        cap_end = timeline.cap[1]
        st = self.state
        periods = self.rng.randint(0, (1 << st.be) - 1)
        self._note("delay", now, st.nb, st.be, periods)
        cca_at = boundary + periods * A_UNIT_BACKOFF_PERIOD
        if cca_at + 2 * A_UNIT_BACKOFF_PERIOD + self.needed > cap_end:
            first = timeline.next_backoff_boundary(timeline.cap[0])
            if first + 2 * A_UNIT_BACKOFF_PERIOD + self.needed > cap_end:
                # no CAP of this superframe can ever hold the exchange
                self._finish_failure()
                return
            self._note("defer", now)
            self.waiting = True
            return
        self._pending = self.sim.schedule(cca_at, self._cca_begin)

    def _cca_begin(self) -> None:
        self._cca_at = self.sim.now
        if self.on_cca is not None:
            self.on_cca(self._cca_at)
        self._pending = self.sim.schedule(self._cca_at + CCA_DURATION, self._cca_end)

    def _cca_end(self) -> None:
        st = self.state
        idle = self.clear_channel()
        if not idle:
            st.cw = 2
            st.nb += 1
            st.be = min(st.be + 1, A_MAX_BE)
            self._note("cca", self._cca_at, False, st.nb, st.cw, st.be)
            if st.nb > MAC_MAX_CSMA_BACKOFFS:
                self._finish_failure()
            else:
                self._backoff()
            return
        st.cw -= 1
        self._note("cca", self._cca_at, True, st.nb, st.cw, st.be)
        next_boundary = self._cca_at + A_UNIT_BACKOFF_PERIOD
        if st.cw > 0:
            self._pending = self.sim.schedule(next_boundary, self._cca_begin)
        else:
            self._pending = self.sim.schedule(next_boundary, self._fire)

    def _fire(self) -> None:
        self._pending = None
        self.active = False
        self._note("tx", self.sim.now)
        self.transmit()

    def _finish_failure(self) -> None:
        self._pending = None
        self.active = False
        self._note("fail", self.sim.now)
        self.failed(MacStatus.CHANNEL_ACCESS_FAILURE)
