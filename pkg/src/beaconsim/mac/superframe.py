"""Superframe geometry in symbols, including the CAP/CFP split."""

from __future__ import annotations

from dataclasses import dataclass

from .constants import (A_BASE_SLOT_DURATION, A_BASE_SUPERFRAME_DURATION,
                        A_NUM_SUPERFRAME_SLOTS, A_UNIT_BACKOFF_PERIOD, MAX_ORDER)


class InvalidConfig(ValueError):
    pass


@dataclass(frozen=True)
class SuperframeConfig:
    bo: int
    so: int
    battery_life_extension: bool = False

    def __post_init__(self):
        if not 0 <= self.so <= self.bo <= MAX_ORDER:
            raise InvalidConfig(f"need 0 <= so <= bo <= {MAX_ORDER}, got bo={self.bo} so={self.so}")

    @property
    def superframe_duration(self) -> int:
        return A_BASE_SUPERFRAME_DURATION << self.so

    @property
    def beacon_interval(self) -> int:
        return A_BASE_SUPERFRAME_DURATION << self.bo

    @property
    def slot_duration(self) -> int:
        return A_BASE_SLOT_DURATION << self.so

    @property
    def duty_cycle(self) -> float:
        return 2.0 ** (self.so - self.bo)


@dataclass(frozen=True)
class Timeline:
    """Absolute layout of one superframe, in symbols."""
    start: int
    beacon_end: int
    cap: tuple[int, int]
    cfp: tuple[int, int]
    inactive: tuple[int, int]
    slot_boundaries: tuple[int, ...]
    slot_duration: int

    @property
    def active_end(self) -> int:
        return self.cfp[1]

    @property
    def end(self) -> int:
        return self.inactive[1]

    def slot_start(self, slot: int) -> int:
        return self.start + slot * self.slot_duration

    def next_backoff_boundary(self, t: int) -> int:
        """First backoff boundary at or after ``t`` (boundaries align with the beacon start)."""
        offset = max(t, self.cap[0]) - self.start
        periods = -(-offset // A_UNIT_BACKOFF_PERIOD)
        return self.start + periods * A_UNIT_BACKOFF_PERIOD


def superframe_timeline(cfg: SuperframeConfig, beacon_start: int, final_cap_slot: int = 15,
                        beacon_duration: int = 0) -> Timeline:
    if not 0 <= final_cap_slot < A_NUM_SUPERFRAME_SLOTS:
        raise InvalidConfig(f"final_cap_slot {final_cap_slot} out of range")
    sd = cfg.superframe_duration
    slot = cfg.slot_duration
    cap_end = beacon_start + (final_cap_slot + 1) * slot
    active_end = beacon_start + sd
    beacon_end = beacon_start + beacon_duration
    return Timeline(
        start=beacon_start,
        beacon_end=beacon_end,
        cap=(beacon_end, cap_end),
        cfp=(cap_end, active_end),
        inactive=(active_end, beacon_start + cfg.beacon_interval),
        slot_boundaries=tuple(beacon_start + i * slot for i in range(A_NUM_SUPERFRAME_SLOTS)),
        slot_duration=slot,
    )
