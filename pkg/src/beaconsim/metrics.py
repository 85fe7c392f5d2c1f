"""Run counters, the metric formulas and a trace-scanning oracle.

Only data frames enter throughput and delivery ratio. Every frame corrupted
by an overlap counts once as a collision drop, attributed to data or to
"other" (beacons, ACKs, MAC commands).
"""

from __future__ import annotations

import enum
from collections import Counter as _Tally
from dataclasses import dataclass, field
from typing import Iterable

from .trace import Tracer, fields, parse_lines


class DropCause(str, enum.Enum):
    COLLISION_DATA = "COLLISION_DATA"
    COLLISION_OTHER = "COLLISION_OTHER"
    CHANNEL_ACCESS_FAILURE = "CHANNEL_ACCESS_FAILURE"
    NO_ACK_EXHAUSTED = "NO_ACK_EXHAUSTED"
    QUEUE_DROP = "QUEUE_DROP"


PACKET_DROP_CAUSES = (DropCause.CHANNEL_ACCESS_FAILURE, DropCause.NO_ACK_EXHAUSTED,
                      DropCause.QUEUE_DROP)


class InvalidInput(ValueError):
    pass


@dataclass
class Counters:
    sent_data_frames: int = 0
    received_data_frames: int = 0
    received_data_bytes: int = 0
    dropped: dict[DropCause, int] = field(default_factory=lambda: {c: 0 for c in DropCause})
    generated: int = 0
    acked: int = 0

    def drops(self, cause: DropCause) -> int:
        return self.dropped[cause]


# -- formulas ---------------------------------------------------------------

def throughput(counters: Counters, sim_time_s: float, n_nodes: int) -> float:
    """Per-node throughput in kbit/s."""
    if sim_time_s <= 0 or n_nodes <= 0:
        raise InvalidInput("throughput needs positive simulation time and node count")
    return counters.received_data_bytes * 8 / (sim_time_s * n_nodes * 1000)


def packet_delivery_ratio(counters: Counters) -> float | None:
    """Percent of data transmissions (retransmissions included) delivered; None if nothing sent."""
    if counters.sent_data_frames == 0:
        return None
    return counters.received_data_frames / counters.sent_data_frames * 100


def collision_rate(counters: Counters) -> float | None:
    data = counters.dropped[DropCause.COLLISION_DATA]
    total = data + counters.dropped[DropCause.COLLISION_OTHER]
    if total == 0:
        return None
    return data / total * 100


def duty_cycle(cfg) -> float:
    return 100 * 2.0 ** (cfg.so - cfg.bo)


@dataclass
class MetricsReport:
    bo: int
    so: int
    n_nodes: int
    seed: int
    sim_time_s: float
    S: float
    Pd: float | None
    C: float | None
    duty_cycle: float
    drops: dict[DropCause, int]

    @classmethod
    def build(cls, counters: Counters, cfg, n_nodes: int, seed: int, sim_time_s: float):
        return cls(cfg.bo, cfg.so, n_nodes, seed, sim_time_s,
                   throughput(counters, sim_time_s, n_nodes),
                   packet_delivery_ratio(counters), collision_rate(counters),
                   duty_cycle(cfg), dict(counters.dropped))


# -- live recording -----------------------------------------------------------

class Recorder:
    """Receives channel and node events, keeps counters and writes metric trace records."""

    def __init__(self, sim, tracer: Tracer | None = None):
        self.sim = sim
        self.tracer = tracer if tracer is not None and tracer.enabled else None
        self.counters = Counters()
        self.generated_by_node: _Tally = _Tally()
        self.acked_by_node: _Tally = _Tally()
        self.dropped_by_node: dict[int, _Tally] = {}

    def _emit(self, node: int, text: str) -> None:
        if self.tracer is not None:
            self.tracer.emit(self.sim.now, node, text)

    def attach(self, channel) -> None:
        channel.on_tx_start.append(self.tx_started)
        channel.on_tx_end.append(self.tx_ended)

    def tx_started(self, tx) -> None:
        f = tx.frame
        if f.kind.value == "data":
            self.counters.sent_data_frames += 1
        if self.tracer is not None:
            self._emit(tx.sender, f"phy tx kind={f.kind.name.lower()} dst={f.dst} seq={f.seq}"
                                  f" bytes={f.size_bytes} dur={tx.end - tx.start}"
                                  f" access={f.access or '-'}")

    def tx_ended(self, tx) -> None:
        if not tx.corrupted:
            return
        f = tx.frame
        cause = DropCause.COLLISION_DATA if f.kind.value == "data" else DropCause.COLLISION_OTHER
        self.counters.dropped[cause] += 1
        if self.tracer is not None:
            self._emit(tx.sender, f"phy collision kind={f.kind.name.lower()} seq={f.seq}"
                                  f" start={tx.start} dur={tx.end - tx.start}")

    def data_delivered(self, receiver: int, frame) -> None:
        c = self.counters
        c.received_data_frames += 1
        c.received_data_bytes += frame.payload_len
        self._emit(receiver, f"data received src={frame.src} seq={frame.seq}"
                             f" bytes={frame.payload_len}")

    def packet_generated(self, node: int, packet_id: int) -> None:
        self.counters.generated += 1
        self.generated_by_node[node] += 1
        self._emit(node, f"packet generated id={packet_id}")

    def packet_acked(self, node: int, packet_id: int) -> None:
        self.counters.acked += 1
        self.acked_by_node[node] += 1
        self._emit(node, f"packet delivered id={packet_id}")

    def packet_dropped(self, node: int, packet_id: int, cause: DropCause) -> None:
        self.counters.dropped[cause] += 1
        self.dropped_by_node.setdefault(node, _Tally())[cause] += 1
        self._emit(node, f"packet dropped id={packet_id} cause={cause.value}")


# -- post-hoc oracle ----------------------------------------------------------

def scan_trace(lines: Iterable[str]) -> Counters:
    """Rebuild the counters by reading trace records only."""
    c = Counters()
    for rec in parse_lines(lines):
        ev = rec.event
        if ev.startswith("phy tx "):
            if fields(ev)["kind"] == "data":
                c.sent_data_frames += 1
        elif ev.startswith("phy collision "):
            kind = fields(ev)["kind"]
            c.dropped[DropCause.COLLISION_DATA if kind == "data" else DropCause.COLLISION_OTHER] += 1
        elif ev.startswith("data received "):
            c.received_data_frames += 1
            c.received_data_bytes += int(fields(ev)["bytes"])
        elif ev.startswith("packet generated "):
            c.generated += 1
        elif ev.startswith("packet delivered "):
            c.acked += 1
        elif ev.startswith("packet dropped "):
            c.dropped[DropCause(fields(ev)["cause"])] += 1
    return c

