"""Unit-disk radio channel: PD-DATA, PLME-CCA and PLME-SET-TRX-STATE.

Propagation is instantaneous. A node hears every transmitter within
``range_m``; any two transmissions that overlap in time at a listening node
corrupt each other there (no capture).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

from .engine import Simulator
from .mac.constants import CCA_DURATION
from .mac.frames import Frame
from .trace import Tracer

DEFAULT_RANGE_M = 18.0
BITRATE = 250_000


class TrxState(enum.Enum):
    TX_ON = "TX_ON"
    RX_ON = "RX_ON"
    TRX_OFF = "TRX_OFF"


class PhyStatus(enum.Enum):
    SUCCESS = "SUCCESS"
    IDLE = "IDLE"
    BUSY = "BUSY"
    ERROR_TRX_STATE = "ERROR_TRX_STATE"


class PhyError(RuntimeError):
    """A MAC asked the PHY for something physically impossible."""


@dataclass(eq=False)
class Transmission:
    sender: int
    frame: Frame
    start: int
    end: int
    corrupted_at: set[int] = field(default_factory=set)

    @property
    def corrupted(self) -> bool:
        return bool(self.corrupted_at)

    def overlaps(self, other: Transmission) -> bool:
        return self.start < other.end and other.start < self.end


@dataclass
class DeliveryStats:
    """Per (transmission, other node listening at its start) outcomes."""
    delivered: int = 0
    corrupted: int = 0
    out_of_range: int = 0
    aborted: int = 0
    potential: int = 0


class Radio:
    def __init__(self, channel: Channel, node_id: int, position: tuple[float, float]):
        self.channel = channel
        self.node_id = node_id
        self.position = position
        self.state = TrxState.TRX_OFF
        self.transmitting: Transmission | None = None
        self.incoming: list[Transmission] = []
        # receptions locked at frame start; value False once aborted
        self.receiving: dict[Transmission, bool] = {}
        self.on_indication: Callable[[Frame, Transmission], None] | None = None
        self.on_confirm: Callable[[Transmission], None] | None = None

    def set_trx_state(self, mode: TrxState) -> TrxState:
        prior = self.state
        if mode is prior:
            return prior
        if prior is TrxState.RX_ON:
            for tx in self.receiving:
                self.receiving[tx] = False
        self.state = mode
        return prior

    def pd_data_request(self, frame: Frame) -> PhyStatus:
        if self.state is not TrxState.TX_ON:
            return PhyStatus.ERROR_TRX_STATE
        if self.transmitting is not None:
            raise PhyError(f"node {self.node_id} started a transmission while already on air")
        self.channel.start_transmission(self, frame)
        return PhyStatus.SUCCESS

    def plme_cca_request(self) -> PhyStatus:
        if self.state is not TrxState.RX_ON:
            return PhyStatus.ERROR_TRX_STATE
        return PhyStatus.BUSY if self.channel.energy_in_window(self) else PhyStatus.IDLE


class Channel:
    def __init__(self, sim: Simulator, range_m: float = DEFAULT_RANGE_M, tracer: Tracer | None = None):
        if range_m <= 0:
            raise ValueError("range_m must be positive")
        self.sim = sim
        self.range_m = range_m
        self.tracer = tracer
        self.radios: dict[int, Radio] = {}
        self._neighbors: dict[int, list[Radio]] = {}
        self._neighbor_ids: dict[int, frozenset[int]] = {}
        self.recent: list[Transmission] = []
        self.stats = DeliveryStats()
        self.transmissions = 0
        self.on_tx_start: list[Callable[[Transmission], None]] = []
        self.on_tx_end: list[Callable[[Transmission], None]] = []
        # scripted corruption for tests: (tx, receiver id) -> True to corrupt
        self.corrupt_filter: Callable[[Transmission, int], bool] | None = None

    def attach(self, node_id: int, position: tuple[float, float]) -> Radio:
        radio = Radio(self, node_id, position)
        self.radios[node_id] = radio
        self._neighbors.clear()
        self._neighbor_ids.clear()
        return radio

    def distance(self, a: int, b: int) -> float:
        (xa, ya), (xb, yb) = self.radios[a].position, self.radios[b].position
        return math.hypot(xa - xb, ya - yb)

    def in_range(self, a: int, b: int) -> bool:
        return self.distance(a, b) <= self.range_m

    def neighbors(self, node_id: int) -> list[Radio]:
        found = self._neighbors.get(node_id)
        if found is None:
            found = [r for r in self.radios.values()
                     if r.node_id != node_id and self.in_range(node_id, r.node_id)]
            self._neighbors[node_id] = found
            self._neighbor_ids[node_id] = frozenset(r.node_id for r in found)
        return found

    def neighbor_ids(self, node_id: int) -> frozenset[int]:
        if node_id not in self._neighbor_ids:
            self.neighbors(node_id)
        return self._neighbor_ids[node_id]

    def start_transmission(self, sender: Radio, frame: Frame) -> Transmission:
        now = self.sim.now
        tx = Transmission(sender.node_id, frame, now, now + frame.duration)
        sender.transmitting = tx
        self.transmissions += 1
        in_range = self.neighbors(sender.node_id)
        near = self.neighbor_ids(sender.node_id)
        for radio in self.radios.values():
            if radio is not sender and radio.state is TrxState.RX_ON:
                self.stats.potential += 1
                if radio.node_id not in near:
                    self.stats.out_of_range += 1
        for radio in in_range:
            for other in radio.incoming:
                if other.end > now:
                    tx.corrupted_at.add(radio.node_id)
                    other.corrupted_at.add(radio.node_id)
            radio.incoming.append(tx)
            if radio.state is TrxState.RX_ON and radio.transmitting is None:
                radio.receiving[tx] = True
        self.recent.append(tx)
        for hook in self.on_tx_start:
            hook(tx)
        self.sim.schedule(tx.end, self._end_transmission, sender, tx, target=sender.node_id)
        return tx

    def _end_transmission(self, sender: Radio, tx: Transmission) -> None:
        deliveries = []
        for radio in self.neighbors(sender.node_id):
            radio.incoming.remove(tx)
            if self.corrupt_filter is not None and self.corrupt_filter(tx, radio.node_id):
                tx.corrupted_at.add(radio.node_id)
            listening = radio.receiving.pop(tx, None)
            if listening is None:
                continue
            if not listening:
                self.stats.aborted += 1
            elif radio.node_id in tx.corrupted_at:
                self.stats.corrupted += 1
            else:
                self.stats.delivered += 1
                deliveries.append(radio)
        sender.transmitting = None
        cutoff = self.sim.now - CCA_DURATION
        self.recent = [t for t in self.recent if t.end > cutoff]
        for hook in self.on_tx_end:
            hook(tx)
        if sender.on_confirm is not None:
            sender.on_confirm(tx)
        for radio in deliveries:
            if radio.on_indication is not None:
                radio.on_indication(tx.frame, tx)

    def energy_in_window(self, observer: Radio) -> bool:
        """True if an audible transmission overlaps the CCA window ending now."""
        now = self.sim.now
        lo = now - CCA_DURATION
        near = self.neighbor_ids(observer.node_id)
        for tx in self.recent:
            if tx.start < now and tx.end > lo and tx.sender in near:
                return True
        return False
