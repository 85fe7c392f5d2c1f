"""Node roles above the MAC: coordinator start-up and CBR-driven devices."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .engine import Event, Simulator
from .mac.constants import A_RESPONSE_WAIT_TIME
from .mac.csma import MacStatus
from .mac.frames import GtsDescriptor, GtsDirection
from .mac.layer import CoordinatorMac, DeviceMac
from .mac.superframe import SuperframeConfig
from .metrics import DropCause
from .phy import Radio
from .trace import Tracer

REASSOCIATE_DELAY = A_RESPONSE_WAIT_TIME


@dataclass
class CbrSource:
    payload_bytes: int = 70
    interval: int = 12_500  # symbols (0.2 s)
    start_offset: int = 0
    use_gts: bool = False
    gts_length: int = 1

    def __post_init__(self):
        if self.interval <= 0:
            raise ValueError("CBR interval must be positive")
        if self.payload_bytes < 0:
            raise ValueError("payload_bytes must be non-negative")


@dataclass
class Packet:
    packet_id: int
    node: int
    payload_bytes: int
    created: int


class TxQueue:
    """Bounded FIFO; a push onto a full queue drops the new packet."""

    def __init__(self, capacity: int = 50):
        if capacity < 1:
            raise ValueError("queue capacity must be at least 1")
        self.capacity = capacity
        self._items: deque[Packet] = deque()
        self.drops = 0

    def __len__(self):
        return len(self._items)

    def push(self, packet: Packet) -> bool:
        if len(self._items) >= self.capacity:
            self.drops += 1
            return False
        self._items.append(packet)
        return True

    def push_front(self, packet: Packet) -> None:
        # a packet handed back by the MAC keeps its place even if that overfills the queue
        self._items.appendleft(packet)

    def pop(self) -> Packet:
        return self._items.popleft()


def start_coordinator(sim: Simulator, radio: Radio, cfg: SuperframeConfig,
                      tracer: Tracer | None = None, recorder=None,
                      gts_permit: bool = True, association_permit: bool = True) -> CoordinatorMac:
    mac = CoordinatorMac(sim, radio, cfg, tracer, recorder, gts_permit, association_permit)
    mac.start()
    return mac


class Device:
    """A sensor node with an open-loop CBR source and an optional GTS."""

    def __init__(self, sim: Simulator, radio: Radio, tracer: Tracer | None = None, recorder=None,
                 source: CbrSource | None = None, queue_capacity: int = 50,
                 battery_life_extension: bool = False):
        self.sim = sim
        self.addr = radio.node_id
        self.tracer = tracer
        self.recorder = recorder
        self.mac = DeviceMac(sim, radio, tracer, recorder, battery_life_extension)
        self.mac.on_orphan = self._on_orphan
        self.source = source
        self.queue = TxQueue(queue_capacity)
        self.gts_request: tuple[int, GtsDirection] | None = None
        self.gts: GtsDescriptor | None = None
        self.gts_result: str | None = None
        self.use_gts = False
        self.ready = False
        self.inflight: Packet | None = None
        self.generated = 0
        self.associations = 0
        self._ids = itertools.count(self.addr * 1_000_000)
        self._cbr_event: Event | None = None
        self._stopped = False

    def trace(self, text: str) -> None:
        if self.tracer is not None:
            self.tracer.emit(self.sim.now, self.addr, text)

    # -- workflows -----------------------------------------------------------

    def start_cap_device(self, at: int = 0) -> None:
        self.gts_request = None
        self._launch(at)

    def start_gts_device(self, at: int = 0, length: int = 1,
                         direction: GtsDirection = GtsDirection.TRANSMIT) -> None:
        """Scan, associate, then request a GTS of ``length`` slots."""
        self.gts_request = (length, GtsDirection(direction))
        self._launch(at)

    def _launch(self, at: int) -> None:
        self.sim.schedule(max(at, self.sim.now), self._begin)
        if self.source is not None and self._cbr_event is None:
            first = max(self.source.start_offset, self.sim.now)
            self._cbr_event = self.sim.schedule(first, self.cbr_tick)

    def _begin(self) -> None:
        if self._stopped:
            return
        if self.gts_request is not None:
            self.trace("----- startGTSDevice -----")
        self.mac.associate(self._on_associated)

    def _on_associated(self, ok: bool, reason: str) -> None:
        if not ok:
            self.ready = False
            self.sim.schedule(self.sim.now + REASSOCIATE_DELAY, self._begin)
            return
        self.associations += 1
        if self.gts_request is not None:
            length, direction = self.gts_request
            self.mac.gts_request(length, direction, self._on_gts)
        else:
            self._set_ready()

    def _on_gts(self, result: str, desc: GtsDescriptor | None) -> None:
        self.gts_result = result
        if result == "CONFIRMED":
            self.gts = desc
            self.use_gts = desc.direction == GtsDirection.TRANSMIT
            self.trace("gts succeeds")
        else:
            self.gts = None
            self.use_gts = False
            self.trace(f"gts fails reason={result}")
        self._set_ready()

    def _set_ready(self) -> None:
        if not self.mac.associated:
            return
        self.ready = True
        self._drain()

    def _on_orphan(self) -> None:
        self.ready = False
        self.gts = None
        self.use_gts = False
        self.sim.schedule(self.sim.now + REASSOCIATE_DELAY, self._begin)

    def stop(self) -> None:
        self._stopped = True
        self.sim.cancel(self._cbr_event)

    # -- traffic -------------------------------------------------------------

    def cbr_tick(self) -> Packet | None:
        src = self.source
        self._cbr_event = self.sim.schedule(self.sim.now + src.interval, self.cbr_tick)
        pkt = Packet(next(self._ids), self.addr, src.payload_bytes, self.sim.now)
        self.generated += 1
        if self.recorder is not None:
            self.recorder.packet_generated(self.addr, pkt.packet_id)
        if not self.queue.push(pkt):
            if self.recorder is not None:
                self.recorder.packet_dropped(self.addr, pkt.packet_id, DropCause.QUEUE_DROP)
            return None
        self._drain()
        return pkt

    def _drain(self) -> None:
        if not self.ready or self.inflight is not None or not self.queue or not self.mac.associated:
            return
        pkt = self.queue.pop()
        self.inflight = pkt
        self.mac.mcps_data_request(pkt.payload_bytes, self._on_confirm, via_gts=self.use_gts,
                                   packet_id=pkt.packet_id)

    def _on_confirm(self, status: MacStatus) -> None:
        pkt, self.inflight = self.inflight, None
        rec = self.recorder
        if status is MacStatus.SUCCESS:
            if self.use_gts:
                self.trace(f"gts transmit success :{pkt.payload_bytes}")
            if rec is not None:
                rec.packet_acked(self.addr, pkt.packet_id)
        elif status is MacStatus.CHANNEL_ACCESS_FAILURE:
            if rec is not None:
                rec.packet_dropped(self.addr, pkt.packet_id, DropCause.CHANNEL_ACCESS_FAILURE)
        elif status is MacStatus.NO_ACK:
            if rec is not None:
                rec.packet_dropped(self.addr, pkt.packet_id, DropCause.NO_ACK_EXHAUSTED)
        elif status in (MacStatus.GTS_EXPIRED, MacStatus.FRAME_TOO_LONG):
            self.trace(f"gts unusable ({status.value}), falling back to CAP")
            self.use_gts = False
            self.queue.push_front(pkt)
        else:  # ABORTED: the packet waits for the next association
            self.queue.push_front(pkt)
        self._drain()

    def backlog(self) -> int:
        return len(self.queue) + (self.inflight is not None)
