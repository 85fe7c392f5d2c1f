"""Beacon-enabled IEEE 802.15.4 MAC sublayer."""

from .csma import CsmaState, MacStatus, SlottedCsmaCa
from .frames import Frame, FrameKind, GtsDescriptor, GtsDirection
from .gts import GtsDenied, GtsManager
from .layer import CoordinatorMac, DeviceMac
from .superframe import InvalidConfig, SuperframeConfig, Timeline, superframe_timeline

__all__ = [
    "CoordinatorMac", "CsmaState", "DeviceMac", "Frame", "FrameKind", "GtsDenied",
    "GtsDescriptor", "GtsDirection", "GtsManager", "InvalidConfig", "MacStatus",
    "SlottedCsmaCa", "SuperframeConfig", "Timeline", "superframe_timeline",
]
