"""MAC frame model with byte-accurate lengths.

Frames are not serialized on the simulated air interface; only their length
matters for air time. The bit-field codecs below are provided for the two
fields the beacon and GTS exchange carry (superframe specification and GTS
characteristics).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from ..engine import BITS_PER_SYMBOL
from .constants import A_NUM_SUPERFRAME_SLOTS

MAC_HEADER_BYTES = 11
FCS_BYTES = 2
ACK_BYTES = 5
BROADCAST = 0xFFFF


class FrameKind(enum.Enum):
    BEACON = "beacon"
    DATA = "data"
    ACK = "ack"
    ASSOC_REQUEST = "association request"
    ASSOC_RESPONSE = "association response"
    DATA_REQUEST = "data request"
    GTS_REQUEST = "gts request"

    @property
    def is_command(self) -> bool:
        return self in _COMMANDS


_COMMANDS = {FrameKind.ASSOC_REQUEST, FrameKind.ASSOC_RESPONSE,
             FrameKind.DATA_REQUEST, FrameKind.GTS_REQUEST}

# command frame identifier + command payload
COMMAND_PAYLOAD_BYTES = {
    FrameKind.ASSOC_REQUEST: 2,   # id, capability information
    FrameKind.ASSOC_RESPONSE: 4,  # id, short address, status
    FrameKind.DATA_REQUEST: 1,
    FrameKind.GTS_REQUEST: 2,     # id, GTS characteristics
}


class GtsDirection(enum.IntEnum):
    TRANSMIT = 0  # device -> coordinator
    RECEIVE = 1   # coordinator -> device


@dataclass(frozen=True)
class GtsDescriptor:
    dev_addr: int
    start_slot: int
    length: int
    direction: GtsDirection = GtsDirection.TRANSMIT

    def __post_init__(self):
        if not 1 <= self.start_slot <= A_NUM_SUPERFRAME_SLOTS - 1:
            raise ValueError(f"start_slot {self.start_slot} outside [1, 15]")
        if not 1 <= self.length <= A_NUM_SUPERFRAME_SLOTS - 1:
            raise ValueError(f"length {self.length} outside [1, 15]")
        if self.start_slot + self.length > A_NUM_SUPERFRAME_SLOTS:
            raise ValueError("GTS runs past the end of the superframe")

    @property
    def end_slot(self) -> int:
        """First slot after the GTS."""
        return self.start_slot + self.length

    def overlaps(self, other: GtsDescriptor) -> bool:
        return self.start_slot < other.end_slot and other.start_slot < self.end_slot


def encode_gts_characteristics(length: int, direction: int, allocate: bool = True) -> int:
    """Bits 0-3 length, bit 4 direction, bit 5 characteristics type (1 = allocation)."""
    if not 0 <= length <= 15:
        raise ValueError(f"GTS length {length} does not fit 4 bits")
    return (length & 0x0F) | ((int(direction) & 1) << 4) | (int(allocate) << 5)


def decode_gts_characteristics(value: int) -> tuple[int, GtsDirection, bool]:
    return value & 0x0F, GtsDirection((value >> 4) & 1), bool((value >> 5) & 1)


@dataclass(frozen=True)
class SuperframeSpec:
    bo: int
    so: int
    final_cap_slot: int = 15
    battery_life_extension: bool = False
    pan_coordinator: bool = True
    association_permit: bool = True

    def encode(self) -> int:
        return (self.bo & 0xF) | (self.so & 0xF) << 4 | (self.final_cap_slot & 0xF) << 8 \
            | int(self.battery_life_extension) << 12 | int(self.pan_coordinator) << 14 \
            | int(self.association_permit) << 15

    @classmethod
    def decode(cls, value: int) -> SuperframeSpec:
        return cls(bo=value & 0xF, so=(value >> 4) & 0xF, final_cap_slot=(value >> 8) & 0xF,
                   battery_life_extension=bool(value >> 12 & 1),
                   pan_coordinator=bool(value >> 14 & 1),
                   association_permit=bool(value >> 15 & 1))


@dataclass(frozen=True)
class BeaconPayload:
    superframe_spec: SuperframeSpec
    gts_permit: bool = True
    gts_list: tuple[GtsDescriptor, ...] = ()
    pending_addresses: tuple[int, ...] = ()

    @property
    def length(self) -> int:
        n = len(self.gts_list)
        gts_fields = 1 + (1 + 3 * n if n else 0)  # GTS spec, directions, descriptors
        return 2 + gts_fields + 1 + 2 * len(self.pending_addresses)


@dataclass
class Frame:
    kind: FrameKind
    src: int
    dst: int
    seq: int = 0
    payload_len: int = 0
    ack_request: bool = False
    beacon: BeaconPayload | None = None
    gts_characteristics: int | None = None
    short_addr: int | None = None
    assoc_granted: bool = True
    # not on the wire: packet identity for drop accounting, access method used
    packet_id: int | None = field(default=None, compare=False)
    access: str = field(default="", compare=False)

    def __post_init__(self):
        self.seq &= 0xFF
        if self.kind is FrameKind.BEACON:
            if self.beacon is None:
                raise ValueError("beacon frame needs a beacon payload")
            self.payload_len = self.beacon.length
        elif self.kind.is_command:
            self.payload_len = COMMAND_PAYLOAD_BYTES[self.kind]

    @property
    def size_bytes(self) -> int:
        if self.kind is FrameKind.ACK:
            return ACK_BYTES
        return MAC_HEADER_BYTES + self.payload_len + FCS_BYTES

    @property
    def duration(self) -> int:
        return airtime(self.size_bytes)


def airtime(size_bytes: int) -> int:
    """Symbols needed to send ``size_bytes`` at 4 bits per symbol."""
    return -(-size_bytes * 8 // BITS_PER_SYMBOL)


def make_ack(for_frame: Frame) -> Frame:
    return Frame(FrameKind.ACK, src=for_frame.dst, dst=for_frame.src, seq=for_frame.seq)


MAX_BEACON_BYTES = MAC_HEADER_BYTES + FCS_BYTES + BeaconPayload(
    SuperframeSpec(0, 0), gts_list=tuple(GtsDescriptor(1, 15, 1) for _ in range(7))).length
