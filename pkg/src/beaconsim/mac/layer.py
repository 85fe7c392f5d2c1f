"""Beacon-enabled MAC state machines for the PAN coordinator and its devices."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Callable

from ..engine import Event, Simulator
from ..phy import PhyStatus, Radio, Transmission, TrxState
from ..trace import Tracer
from .constants import (A_GTS_DESC_PERSISTENCE_TIME, A_MAX_LOST_BEACONS, A_MAX_SIFS_FRAME_SIZE,
                        A_RESPONSE_WAIT_TIME, A_BASE_SUPERFRAME_DURATION, ACK_TURNAROUND,
                        ACK_WAIT_DURATION, CHANNEL, MAC_LIFS_PERIOD, MAC_MAX_FRAME_RETRIES,
                        MAC_SIFS_PERIOD, PAN_ID)
from .csma import MacStatus, SlottedCsmaCa
from .frames import (ACK_BYTES, BROADCAST, MAX_BEACON_BYTES, BeaconPayload, Frame, FrameKind,
                     GtsDescriptor, GtsDirection, SuperframeSpec, airtime,
                     decode_gts_characteristics, encode_gts_characteristics, make_ack)
from .gts import GtsDenied, GtsManager
from .superframe import SuperframeConfig, Timeline, superframe_timeline

COORDINATOR_ADDR = 0
ACK_DURATION = airtime(ACK_BYTES)
ACK_EXCHANGE = ACK_TURNAROUND + ACK_DURATION
MAX_BEACON_DURATION = airtime(MAX_BEACON_BYTES)
WAKE_GUARD = ACK_TURNAROUND  # receiver switched on this early before an expected beacon
DEFAULT_SCAN_DURATION = 6  # passive scan listens aBaseSuperframeDuration * (2^n + 1)


def scan_symbols(scan_duration: int) -> int:
    return A_BASE_SUPERFRAME_DURATION * ((1 << scan_duration) + 1)


def ifs_after(frame: Frame) -> int:
    return MAC_SIFS_PERIOD if frame.size_bytes <= A_MAX_SIFS_FRAME_SIZE else MAC_LIFS_PERIOD


def exchange_duration(frame: Frame) -> int:
    """Air time of ``frame`` plus its acknowledgment, when one is requested."""
    return frame.duration + (ACK_EXCHANGE if frame.ack_request else 0)


@dataclass(eq=False)
class Transaction:
    frame: Frame
    callback: Callable[[MacStatus], None] | None = None
    via_gts: bool = False
    retries: int = 0
    awaiting_ack: bool = False
    parked: bool = False
    scheduled: Event | None = None
    ack_timer: Event | None = None


class MacBase:
    """Acknowledged transmissions over CSMA/CA or a GTS, plus ACK replies."""

    role = "node"

    def __init__(self, sim: Simulator, radio: Radio, tracer: Tracer | None = None,
                 recorder=None, battery_life_extension: bool = False):
        self.sim = sim
        self.radio = radio
        self.addr = radio.node_id
        self.tracer = tracer
        self.recorder = recorder
        self.battery_life_extension = battery_life_extension
        self.rng = sim.rng(self.addr)
        self.dsn = 0
        self.awake = False
        self.timeline: Timeline | None = None
        self.advertised: tuple[GtsDescriptor, ...] = ()
        self.queue: deque[Transaction] = deque()
        self.txn: Transaction | None = None
        self.csma: SlottedCsmaCa | None = None
        self.csma_log: list | None = None
        self._ready_at = 0
        self._kick_event: Event | None = None
        self._last_rx_seq: dict[int, int] = {}
        radio.on_indication = self._on_indication
        radio.on_confirm = self._on_confirm

    # -- helpers ---------------------------------------------------------

    def trace(self, text: str) -> None:
        if self.tracer is not None:
            self.tracer.emit(self.sim.now, self.addr, text)

    def next_dsn(self) -> int:
        self.dsn = (self.dsn + 1) & 0xFF
        return self.dsn

    def _restore_radio(self) -> None:
        self.radio.set_trx_state(TrxState.RX_ON if self.awake else TrxState.TRX_OFF)

    def wake(self) -> None:
        self.awake = True
        if self.radio.transmitting is None:
            self.radio.set_trx_state(TrxState.RX_ON)

    def sleep(self) -> None:
        self.awake = False
        if self.radio.transmitting is None:
            self.radio.set_trx_state(TrxState.TRX_OFF)

    def cap_window(self, t: int) -> Timeline | None:
        tl = self.timeline
        if tl is None or not tl.beacon_end <= t < tl.cap[1]:
            return None
        return tl

    def transmit_now(self, frame: Frame) -> None:
        self.radio.set_trx_state(TrxState.TX_ON)
        status = self.radio.pd_data_request(frame)
        if status is not PhyStatus.SUCCESS:
            raise RuntimeError(f"node {self.addr}: PD-DATA refused ({status})")

    # -- acknowledged transactions ---------------------------------------

    def submit(self, frame: Frame, callback: Callable[[MacStatus], None] | None = None,
               via_gts: bool = False) -> Transaction:
        txn = Transaction(frame, callback, via_gts)
        self.queue.append(txn)
        self._kick()
        return txn

    def _kick(self) -> None:
        if self.txn is not None or not self.queue:
            return
        if self.sim.now < self._ready_at:
            if self._kick_event is None or self._kick_event.cancelled:
                self._kick_event = self.sim.schedule(self._ready_at, self._kick_now)
            return
        self.txn = self.queue.popleft()
        self._attempt(self.txn)

    def _kick_now(self) -> None:
        self._kick_event = None
        self._kick()

    def _attempt(self, txn: Transaction) -> None:
        if txn.via_gts:
            self._gts_attempt(txn)
        else:
            self._csma_attempt(txn)

    def _csma_attempt(self, txn: Transaction) -> None:
        txn.frame.access = "csma"
        self.csma = SlottedCsmaCa(
            self.sim, self.rng,
            cap_window=self.cap_window,
            clear_channel=self._clear_channel,
            transmit=lambda: self._send(txn),
            failed=lambda status: self._finish(txn, status),
            battery_life_extension=self.battery_life_extension,
            log=self.csma_log,
            on_cca=self._on_cca,
        )
        self.csma.start(exchange_duration(txn.frame))

    def _clear_channel(self) -> bool:
        status = self.radio.plme_cca_request()
        idle = status is PhyStatus.IDLE
        if self.tracer is not None:
            st = self.csma.state
            self.trace(f"cca {'idle' if idle else 'busy'} nb={st.nb} cw={st.cw} be={st.be}")
        return idle

    def _on_cca(self, t: int) -> None:
        self.trace("performing cca")

    def _gts_window(self, txn: Transaction) -> tuple[int, int] | str | None:
        """Absolute (start, end) of the GTS serving ``txn`` in the current superframe,
        ``"expired"`` when no such GTS is advertised, None when none is usable yet."""
        return "expired"

    def _gts_attempt(self, txn: Transaction) -> None:
        txn.frame.access = "gts"
        window = self._gts_window(txn)
        if window == "expired":
            self._finish(txn, MacStatus.GTS_EXPIRED)
            return
        needed = exchange_duration(txn.frame)
        if window is not None:
            start, end = window
            if end - start < needed:
                self._finish(txn, MacStatus.FRAME_TOO_LONG)
                return
            at = max(self.sim.now, start)
            if at + needed <= end:
                txn.parked = False
                txn.scheduled = self.sim.schedule(at, self._send, txn)
                return
        txn.parked = True

    def _resume_parked(self) -> None:
        """Called once per superframe after its beacon."""
        txn = self.txn
        if txn is None:
            return
        if txn.via_gts:
            if txn.parked:
                self._gts_attempt(txn)
        elif self.csma is not None:
            self.csma.resume()

    def _send(self, txn: Transaction) -> None:
        txn.scheduled = None
        frame = txn.frame
        if frame.kind is FrameKind.GTS_REQUEST:
            self.trace(f"sending gts request command ... chars={frame.gts_characteristics:#04x}")
        elif frame.kind.is_command:
            self.trace(f"sending {frame.kind.value} command ...")
        self.transmit_now(frame)

    def _on_confirm(self, tx: Transmission) -> None:
        self._restore_radio()
        frame = tx.frame
        txn = self.txn
        if txn is not None and frame is txn.frame:
            if frame.ack_request:
                txn.awaiting_ack = True
                txn.ack_timer = self.sim.schedule(tx.end + ACK_WAIT_DURATION, self._ack_timeout, txn)
            else:
                self._finish(txn, MacStatus.SUCCESS)
        else:
            self._sent_other(frame)

    def _sent_other(self, frame: Frame) -> None:
        pass

    def _ack_timeout(self, txn: Transaction) -> None:
        txn.ack_timer = None
        txn.awaiting_ack = False
        txn.retries += 1
        if txn.retries > MAC_MAX_FRAME_RETRIES:
            self._finish(txn, MacStatus.NO_ACK)
            return
        self.trace(f"no ack for {txn.frame.kind.value} seq={txn.frame.seq}, retry {txn.retries}")
        self._attempt(txn)

    def _finish(self, txn: Transaction, status: MacStatus) -> None:
        if self.txn is txn:
            self.txn = None
            self.csma = None
        self.sim.cancel(txn.ack_timer)
        self.sim.cancel(txn.scheduled)
        txn.ack_timer = txn.scheduled = None
        txn.awaiting_ack = txn.parked = False
        self._ready_at = self.sim.now + ifs_after(txn.frame)
        if txn.callback is not None:
            txn.callback(status)
        self._kick()

    def abort_all(self) -> None:
        """Drop the current and queued transactions, reporting ABORTED."""
        pending = ([self.txn] if self.txn is not None else []) + list(self.queue)
        self.queue.clear()
        if self.csma is not None:
            self.csma.cancel()
        for txn in pending:
            self._finish(txn, MacStatus.ABORTED)

    # -- reception -------------------------------------------------------

    def _on_indication(self, frame: Frame, tx: Transmission) -> None:
        if frame.kind is FrameKind.ACK:
            txn = self.txn
            if frame.dst == self.addr and txn is not None and txn.awaiting_ack \
                    and frame.seq == txn.frame.seq:
                self.trace(f"ack for {txn.frame.kind.value}"
                           f"{' command' if txn.frame.kind.is_command else ''} received"
                           f" seq={frame.seq}")
                self._finish(txn, MacStatus.SUCCESS)
            return
        if frame.dst not in (self.addr, BROADCAST):
            return
        if frame.ack_request and frame.dst == self.addr:
            self.sim.schedule(tx.end + ACK_TURNAROUND, self.send_ack, frame)
            # new transactions wait until the acknowledgment is out
            self._ready_at = max(self._ready_at, tx.end + ACK_EXCHANGE + MAC_SIFS_PERIOD)
        if frame.kind is FrameKind.DATA:
            if self._last_rx_seq.get(frame.src) == frame.seq:
                return  # duplicate after a lost ACK
            self._last_rx_seq[frame.src] = frame.seq
            if self.recorder is not None:
                self.recorder.data_delivered(self.addr, frame)
        self.handle_frame(frame, tx)

    def send_ack(self, for_frame: Frame) -> Frame | None:
        """Reply without CSMA/CA; skipped when the radio is busy or asleep."""
        if self.radio.transmitting is not None or not self.awake:
            return None
        ack = make_ack(for_frame)
        ack.access = "ack"
        self.transmit_now(ack)
        return ack

    def handle_frame(self, frame: Frame, tx: Transmission) -> None:
        pass


class CoordinatorMac(MacBase):
    """PAN coordinator: beacons every BI; serves association and GTS requests."""

    role = "coordinator"

    def __init__(self, sim: Simulator, radio: Radio, cfg: SuperframeConfig,
                 tracer: Tracer | None = None, recorder=None,
                 gts_permit: bool = True, association_permit: bool = True):
        super().__init__(sim, radio, tracer, recorder, cfg.battery_life_extension)
        self.cfg = cfg
        self.association_permit = association_permit
        self.gts = GtsManager(cfg.slot_duration, gts_permit)
        self.bsn = 0
        self.beacon_starts: list[int] = []
        self.devices: dict[int, int] = {}  # short address -> extended address
        self._pending_assoc: dict[int, int] = {}
        self._deferred: list[Frame] = []
        self._beacon_event: Event | None = None

    def start(self) -> None:
        self.trace(f"begin to transmit beacons bo={self.cfg.bo} so={self.cfg.so}")
        self._beacon_event = self.sim.schedule(self.sim.now, self._beacon_tick)

    def stop(self) -> None:
        self.sim.cancel(self._beacon_event)

    def emit_beacon(self) -> Frame:
        spec = SuperframeSpec(self.cfg.bo, self.cfg.so, self.gts.final_cap_slot,
                              self.cfg.battery_life_extension, True, self.association_permit)
        payload = BeaconPayload(spec, self.gts.permit, tuple(self.gts.descriptors))
        frame = Frame(FrameKind.BEACON, self.addr, BROADCAST, self.bsn, beacon=payload)
        frame.access = "beacon"
        self.bsn = (self.bsn + 1) & 0xFF
        return frame

    def _beacon_tick(self) -> None:
        now = self.sim.now
        bi = self.cfg.beacon_interval
        self._beacon_event = self.sim.schedule(now + bi, self._beacon_tick)
        frame = self.emit_beacon()
        spec = frame.beacon.superframe_spec
        self.timeline = superframe_timeline(self.cfg, now, spec.final_cap_slot, frame.duration)
        self.advertised = frame.beacon.gts_list
        self.beacon_starts.append(now)
        if self.tracer is not None:
            gts = ",".join(f"{d.dev_addr}:{d.start_slot}:{d.length}:{int(d.direction)}"
                           for d in self.advertised) or "-"
            self.trace(f"sending beacon bsn={frame.seq} fin_cap={spec.final_cap_slot}"
                       f" permit={int(self.gts.permit)} gts={gts}")
        self.awake = True
        if self.radio.transmitting is not None:
            raise RuntimeError("coordinator still on air at beacon time")
        self.transmit_now(frame)
        if self.cfg.so < self.cfg.bo:
            self.sim.schedule(now + self.cfg.superframe_duration, self.sleep)

    def _sent_other(self, frame: Frame) -> None:
        if frame.kind is FrameKind.BEACON:
            self.trace(f"beacon transmission successful [channel:{CHANNEL}] [PAN_ID:{PAN_ID}]"
                       f" [CoordAddr:{self.addr}]")
            deferred, self._deferred = self._deferred, []
            for f in deferred:
                self._schedule_direct(f)
            self._resume_parked()

    def handle_frame(self, frame: Frame, tx: Transmission) -> None:
        kind = frame.kind
        if kind is FrameKind.ASSOC_REQUEST:
            self.trace(f"association request received from node {frame.src}")
            self.gts.deallocate(frame.src)
            if self.association_permit:
                self._pending_assoc[frame.src] = frame.src
        elif kind is FrameKind.DATA_REQUEST:
            if frame.src in self._pending_assoc:
                short = self._pending_assoc.pop(frame.src)
                self.devices[short] = frame.src
                resp = Frame(FrameKind.ASSOC_RESPONSE, self.addr, frame.src, self.next_dsn(),
                             ack_request=True, short_addr=short, assoc_granted=True)
                resp.access = "direct"
                self._schedule_direct(resp, after=tx.end + ACK_EXCHANGE)
        elif kind is FrameKind.GTS_REQUEST:
            self.coordinator_allocate_gts(frame.src, frame.gts_characteristics)

    def coordinator_allocate_gts(self, dev_addr: int, characteristics: int) -> GtsDescriptor | None:
        length, direction, allocate = decode_gts_characteristics(characteristics)
        if not allocate:
            removed = self.gts.deallocate(dev_addr, direction)
            self.trace(f"gts deallocation dev={dev_addr} direction={int(direction)}"
                       f" removed={int(removed)} fin_cap={self.gts.final_cap_slot}")
            return None
        try:
            desc = self.gts.allocate(dev_addr, length, direction)
        except GtsDenied as exc:
            self.trace(f"gts request denied dev={dev_addr} length={length} reason={exc.reason!r}")
            return None
        self.trace(f"list[0].devAddr:{dev_addr} gtsSpec.count:{len(self.gts.descriptors)}"
                   f" sfSpec2.FinCAP:{self.gts.final_cap_slot}")
        self.trace(f"gts allocated dev={dev_addr} length={desc.length}"
                   f" slotStart={desc.start_slot} direction={int(desc.direction)}")
        return desc

    def _schedule_direct(self, frame: Frame, after: int | None = None) -> None:
        """Send a frame without CSMA/CA on a backoff boundary of the current CAP."""
        t = self.sim.now if after is None else max(after, self.sim.now)
        tl = self.timeline
        if tl is not None and t < tl.cap[1]:
            at = tl.next_backoff_boundary(t)
            if at + exchange_duration(frame) <= tl.cap[1]:
                self.sim.schedule(at, self._send_direct, frame)
                return
        self._deferred.append(frame)

    def _send_direct(self, frame: Frame) -> None:
        if self.radio.transmitting is not None:
            self._schedule_direct(frame, self.sim.now + 1)
            return
        self.trace(f"sending {frame.kind.value} command to node {frame.dst}")
        self.transmit_now(frame)

    # downlink data in a device-receive GTS
    def send_downlink(self, dev_addr: int, payload_len: int,
                      callback: Callable[[MacStatus], None] | None = None,
                      packet_id: int | None = None) -> Transaction:
        frame = Frame(FrameKind.DATA, self.addr, dev_addr, self.next_dsn(), payload_len,
                      ack_request=True, packet_id=packet_id)
        return self.submit(frame, callback, via_gts=True)

    def _gts_window(self, txn: Transaction):
        tl = self.timeline
        for d in self.advertised:
            if d.dev_addr == txn.frame.dst and d.direction == GtsDirection.RECEIVE:
                start, end = tl.slot_start(d.start_slot), tl.slot_start(d.end_slot)
                return (start, end) if self.sim.now < end else None
        return "expired"


class DeviceState(enum.Enum):
    IDLE = "idle"
    SCANNING = "scanning"
    ASSOCIATING = "associating"
    ASSOCIATED = "associated"


class DeviceMac(MacBase):
    """Device side: joins through scan and association, then tracks beacons."""

    role = "device"

    def __init__(self, sim: Simulator, radio: Radio, tracer: Tracer | None = None,
                 recorder=None, battery_life_extension: bool = False,
                 scan_duration: int = DEFAULT_SCAN_DURATION):
        super().__init__(sim, radio, tracer, recorder, battery_life_extension)
        self.scan_duration = scan_duration
        self.state = DeviceState.IDLE
        self.coordinator: int | None = None
        self.short_addr: int | None = None
        self.spec: SuperframeSpec | None = None
        self.cfg: SuperframeConfig | None = None
        self.last_beacon_start: int | None = None
        self.expected_beacon: int | None = None
        self.missed_beacons = 0
        self.gts_tx: GtsDescriptor | None = None
        self.gts_rx: GtsDescriptor | None = None
        self.on_orphan: Callable[[], None] | None = None
        self._sync_events: list[Event] = []
        self._scan_timer: Event | None = None
        self._scan_done: Callable[[bool, str], None] | None = None
        self._assoc_done: Callable[[bool, str], None] | None = None
        self._assoc_timer: Event | None = None
        self._gts_wait: dict | None = None

    @property
    def associated(self) -> bool:
        return self.state is DeviceState.ASSOCIATED

    # -- scan and association ---------------------------------------------

    def scan(self, done: Callable[[bool, str], None]) -> None:
        """Passive scan: listen for a beacon for the scan duration."""
        self.state = DeviceState.SCANNING
        self._scan_done = done
        self.trace(f"scanning channel {CHANNEL}")
        self.wake()
        self._scan_timer = self.sim.schedule(self.sim.now + scan_symbols(self.scan_duration),
                                             self._scan_timeout)

    def _scan_timeout(self) -> None:
        self._scan_timer = None
        self.state = DeviceState.IDLE
        self.sleep()
        self.trace("no coordinator found, association fails")
        done, self._scan_done = self._scan_done, None
        done(False, "no-coordinator")

    def associate(self, done: Callable[[bool, str], None]) -> None:
        """Scan, then run the request / data-request / response exchange."""
        self._assoc_done = done
        self.scan(self._after_scan)

    def _after_scan(self, found: bool, reason: str) -> None:
        if not found:
            self._assoc_fail(reason)
            return
        if not self.spec.association_permit:
            self._assoc_fail("association-not-permitted")
            return
        self.state = DeviceState.ASSOCIATING
        self.trace(f"sending association request to [channel:{CHANNEL}] [PAN_ID:{PAN_ID}]"
                   f" [CoordAddr:{self.coordinator}] ...")
        frame = Frame(FrameKind.ASSOC_REQUEST, self.addr, self.coordinator, self.next_dsn(),
                      ack_request=True)
        self.submit(frame, self._after_assoc_request)

    def _after_assoc_request(self, status: MacStatus) -> None:
        if status is not MacStatus.SUCCESS:
            self._assoc_fail(_reason(status))
            return
        self._assoc_timer = self.sim.schedule(self.sim.now + A_RESPONSE_WAIT_TIME,
                                              self._send_data_request)

    def _send_data_request(self) -> None:
        self._assoc_timer = None
        frame = Frame(FrameKind.DATA_REQUEST, self.addr, self.coordinator, self.next_dsn(),
                      ack_request=True)
        self.submit(frame, self._after_data_request)

    def _after_data_request(self, status: MacStatus) -> None:
        if status is not MacStatus.SUCCESS:
            self._assoc_fail(_reason(status))
            return
        self._assoc_timer = self.sim.schedule(self.sim.now + A_RESPONSE_WAIT_TIME,
                                              self._assoc_fail, "no-response")

    def _assoc_fail(self, reason: str) -> None:
        self._assoc_timer = None
        self.trace(f"association fails reason={reason}")
        self.state = DeviceState.IDLE
        self._clear_sync()
        self.sleep()
        done, self._assoc_done = self._assoc_done, None
        if done is not None:
            done(False, reason)

    def _on_assoc_response(self, frame: Frame) -> None:
        if self.state is not DeviceState.ASSOCIATING:
            return
        self.sim.cancel(self._assoc_timer)
        self._assoc_timer = None
        self.trace("association response command received")
        if not frame.assoc_granted:
            self._assoc_fail("association-denied")
            return
        self.short_addr = frame.short_addr
        self.state = DeviceState.ASSOCIATED
        self.trace(f"association successful (beacon enabled) [channel:{CHANNEL}]"
                   f" [PAN_ID:{PAN_ID}] [CoordAddr:{self.coordinator}]")
        self.trace("begin to synchronize with the coordinator")
        done, self._assoc_done = self._assoc_done, None
        if done is not None:
            done(True, "success")

    # -- beacon tracking ---------------------------------------------------

    def handle_frame(self, frame: Frame, tx: Transmission) -> None:
        if frame.kind is FrameKind.BEACON:
            self.track_beacon(frame, tx)
        elif frame.kind is FrameKind.ASSOC_RESPONSE:
            self._on_assoc_response(frame)

    def track_beacon(self, frame: Frame, tx: Transmission) -> str:
        if self.coordinator is not None and frame.src != self.coordinator:
            return "ignored"
        if self.state is DeviceState.IDLE:
            return "ignored"
        payload = frame.beacon
        spec = payload.superframe_spec
        self.spec = spec
        self.cfg = SuperframeConfig(spec.bo, spec.so, spec.battery_life_extension)
        self.coordinator = frame.src
        self.last_beacon_start = tx.start
        self.missed_beacons = 0
        self.timeline = superframe_timeline(self.cfg, tx.start, spec.final_cap_slot, frame.duration)
        self.advertised = payload.gts_list
        if self.state is DeviceState.SCANNING:
            self.sim.cancel(self._scan_timer)
            self._scan_timer = None
            self.trace(f"beacon found coordinator={frame.src} bo={spec.bo} so={spec.so}")
        self._schedule_sync(tx.start)
        if self.state is DeviceState.ASSOCIATED:
            self._update_gts(payload)
        if self._scan_done is not None and self.state is DeviceState.SCANNING:
            done, self._scan_done = self._scan_done, None
            done(True, "found")
        self._resume_parked()
        return "synchronized"

    def _update_gts(self, payload: BeaconPayload) -> None:
        own_tx = own_rx = None
        for d in payload.gts_list:
            if d.dev_addr == self.short_addr:
                if d.direction == GtsDirection.TRANSMIT:
                    own_tx = d
                else:
                    own_rx = d
        self.gts_tx, self.gts_rx = own_tx, own_rx
        wait = self._gts_wait
        if wait is not None and wait["acked"]:
            mine = own_tx if wait["direction"] == GtsDirection.TRANSMIT else own_rx
            if mine is not None:
                self._gts_wait = None
                self.trace(f"panDes2.list[0].devAddr:{mine.dev_addr}"
                           f" panDes2.list[0].slotSpec:{mine.start_slot}"
                           f" panDes2.dir:{int(mine.direction)}"
                           f" panDes2.SuperframeSpec:{payload.superframe_spec.encode()}"
                           f" panDes2.list[0].length:{mine.length}")
                self.trace(f"gts confirm (node {self.addr}) success received"
                           f" fin_cap={payload.superframe_spec.final_cap_slot}")
                wait["done"]("CONFIRMED", mine)
            else:
                wait["beacons"] += 1
                if wait["beacons"] >= A_GTS_DESC_PERSISTENCE_TIME:
                    self._gts_wait = None
                    wait["done"]("DENIED", None)

    def _schedule_sync(self, beacon_start: int) -> None:
        for e in self._sync_events:
            self.sim.cancel(e)
        cfg = self.cfg
        bi = cfg.beacon_interval
        expected = beacon_start + bi
        self.expected_beacon = expected
        events = []
        if cfg.so < cfg.bo:
            events.append(self.sim.schedule(beacon_start + cfg.superframe_duration, self.sleep))
            events.append(self.sim.schedule(expected - WAKE_GUARD, self.wake))
        events.append(self.sim.schedule(expected + MAX_BEACON_DURATION + 1, self._beacon_check))
        self._sync_events = events

    def _beacon_check(self) -> None:
        expected = self.expected_beacon
        if self.last_beacon_start is not None and self.last_beacon_start >= expected:
            return
        self.missed_beacons += 1
        self.trace(f"beacon missed count={self.missed_beacons}")
        if self.missed_beacons >= A_MAX_LOST_BEACONS and self.state is not DeviceState.SCANNING:
            self.orphan()
            return
        # stay awake through the unknown superframe and wait for the next one
        self.wake()
        self.timeline = None
        nxt = expected + self.cfg.beacon_interval
        self.expected_beacon = nxt
        self._sync_events = [self.sim.schedule(nxt + MAX_BEACON_DURATION + 1, self._beacon_check)]

    def _clear_sync(self) -> None:
        for e in self._sync_events:
            self.sim.cancel(e)
        self._sync_events = []
        self.timeline = None
        self.coordinator = None
        self.last_beacon_start = None
        self.missed_beacons = 0

    def orphan(self) -> None:
        """Give up on the coordinator after too many lost beacons."""
        self.trace(f"orphaned after {self.missed_beacons} lost beacons")
        self.sim.cancel(self._assoc_timer)
        self._assoc_timer = None
        self._gts_wait = None
        self.state = DeviceState.IDLE
        self.short_addr = None
        self.gts_tx = self.gts_rx = None
        self._clear_sync()
        self.abort_all()
        self.sleep()
        done, self._assoc_done = self._assoc_done, None
        if done is not None:
            done(False, "orphaned")
        elif self.on_orphan is not None:
            self.on_orphan()

    # -- GTS ------------------------------------------------------------------

    def gts_request(self, length: int, direction: GtsDirection,
                    done: Callable[[str, GtsDescriptor | None], None]) -> None:
        """Request a GTS; ``done(result, descriptor)`` with CONFIRMED, DENIED or NO_ACK."""
        chars = encode_gts_characteristics(length, direction, True)
        frame = Frame(FrameKind.GTS_REQUEST, self.short_addr, self.coordinator, self.next_dsn(),
                      ack_request=True, gts_characteristics=chars)
        wait = {"direction": GtsDirection(direction), "acked": False, "beacons": 0, "done": done}
        self._gts_wait = wait

        def after(status: MacStatus) -> None:
            if status is MacStatus.SUCCESS:
                wait["acked"] = True
            elif self._gts_wait is wait:
                self._gts_wait = None
                done("NO_ACK" if status is MacStatus.NO_ACK else _reason(status).upper(), None)

        self.submit(frame, after)

    def gts_deallocate(self, direction: GtsDirection,
                       done: Callable[[MacStatus], None] | None = None) -> None:
        desc = self.gts_tx if direction == GtsDirection.TRANSMIT else self.gts_rx
        length = desc.length if desc is not None else 0
        chars = encode_gts_characteristics(length, direction, False)
        frame = Frame(FrameKind.GTS_REQUEST, self.short_addr, self.coordinator, self.next_dsn(),
                      ack_request=True, gts_characteristics=chars)
        self.submit(frame, done)

    def _gts_window(self, txn: Transaction):
        if self.gts_tx is None:
            return "expired"
        tl = self.timeline
        if tl is None:
            return None
        d = self.gts_tx
        start, end = tl.slot_start(d.start_slot), tl.slot_start(d.end_slot)
        return (start, end) if self.sim.now < end else None

    # -- data --------------------------------------------------------------

    def mcps_data_request(self, payload_len: int, callback: Callable[[MacStatus], None],
                          via_gts: bool = False, packet_id: int | None = None) -> Transaction:
        if not self.associated:
            raise RuntimeError(f"node {self.addr}: data request before association")
        frame = Frame(FrameKind.DATA, self.short_addr, self.coordinator, self.next_dsn(),
                      payload_len, ack_request=True, packet_id=packet_id)
        return self.submit(frame, callback, via_gts=via_gts)


def _reason(status: MacStatus) -> str:
    return {
        MacStatus.NO_ACK: "no-ack",
        MacStatus.CHANNEL_ACCESS_FAILURE: "channel-access-failure",
        MacStatus.ABORTED: "aborted",
    }.get(status, status.value.lower())
