"""Coordinator-side GTS bookkeeping.

Slots are handed out from the end of the active portion downward, first come
first served. Deallocation re-packs the remaining GTSs against the end of the
superframe, keeping their allocation order.
"""

from __future__ import annotations

from .constants import A_MAX_GTS, A_MIN_CAP_LENGTH, A_NUM_SUPERFRAME_SLOTS
from .frames import GtsDescriptor, GtsDirection


class GtsDenied(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class GtsManager:
    def __init__(self, slot_duration: int, permit: bool = True):
        self.slot_duration = slot_duration
        self.permit = permit
        self.descriptors: list[GtsDescriptor] = []

    @property
    def final_cap_slot(self) -> int:
        return A_NUM_SUPERFRAME_SLOTS - 1 - sum(d.length for d in self.descriptors)

    def lookup(self, dev_addr: int, direction: GtsDirection) -> GtsDescriptor | None:
        for d in self.descriptors:
            if d.dev_addr == dev_addr and d.direction == direction:
                return d
        return None

    def allocate(self, dev_addr: int, length: int, direction: GtsDirection) -> GtsDescriptor:
        if not self.permit:
            raise GtsDenied("gts not permitted")
        if not 1 <= length <= A_NUM_SUPERFRAME_SLOTS - 1:
            raise GtsDenied(f"invalid length {length}")
        if len(self.descriptors) >= A_MAX_GTS:
            raise GtsDenied("all GTS descriptors in use")
        if self.lookup(dev_addr, direction) is not None:
            raise GtsDenied("device already holds a GTS in this direction")
        final_cap = self.final_cap_slot - length
        if final_cap < 0 or (final_cap + 1) * self.slot_duration < A_MIN_CAP_LENGTH:
            raise GtsDenied("CAP would shrink below aMinCapLength")
        desc = GtsDescriptor(dev_addr, final_cap + 1, length, GtsDirection(direction))
        self.descriptors.append(desc)
        return desc

    def deallocate(self, dev_addr: int, direction: GtsDirection | None = None) -> bool:
        keep = [d for d in self.descriptors
                if not (d.dev_addr == dev_addr and (direction is None or d.direction == direction))]
        if len(keep) == len(self.descriptors):
            return False
        self.descriptors = []
        end = A_NUM_SUPERFRAME_SLOTS
        for d in keep:
            end -= d.length
            self.descriptors.append(GtsDescriptor(d.dev_addr, end, d.length, d.direction))
        return True
