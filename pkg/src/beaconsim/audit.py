"""Structural checks on a finished run, computed from its trace alone.

Each check returns a list of human-readable violations; an empty list means
the property holds.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .mac.constants import A_MAX_GTS, A_NUM_SUPERFRAME_SLOTS, A_UNIT_BACKOFF_PERIOD
from .mac.superframe import SuperframeConfig
from .metrics import PACKET_DROP_CAUSES
from .trace import fields, parse_lines


@dataclass
class TraceFacts:
    beacons: list[tuple[int, int, list[tuple[int, int, int, int]]]] = field(default_factory=list)
    ccas: list[tuple[int, int]] = field(default_factory=list)
    txs: list[tuple[int, int, str, int, str]] = field(default_factory=list)  # time, node, kind, dur, access
    collisions: list[tuple[int, int, int, str]] = field(default_factory=list)  # start, dur, node, kind
    generated: Counter = field(default_factory=Counter)
    delivered: Counter = field(default_factory=Counter)
    dropped: Counter = field(default_factory=Counter)
    backlog: dict[int, int] = field(default_factory=dict)


def collect(lines: Iterable[str]) -> TraceFacts:
    facts = TraceFacts()
    for rec in parse_lines(lines):
        ev = rec.event
        if ev.startswith("sending beacon "):
            f = fields(ev)
            gts = [] if f["gts"] == "-" else [tuple(int(x) for x in d.split(":"))
                                              for d in f["gts"].split(",")]
            facts.beacons.append((rec.time, int(f["fin_cap"]), gts))
        elif ev == "performing cca":
            facts.ccas.append((rec.time, rec.node))
        elif ev.startswith("phy tx "):
            f = fields(ev)
            facts.txs.append((rec.time, rec.node, f["kind"], int(f["dur"]), f["access"]))
        elif ev.startswith("phy collision "):
            f = fields(ev)
            facts.collisions.append((int(f["start"]), int(f["dur"]), rec.node, f["kind"]))
        elif ev.startswith("packet generated "):
            facts.generated[rec.node] += 1
        elif ev.startswith("packet delivered "):
            facts.delivered[rec.node] += 1
        elif ev.startswith("packet dropped "):
            if fields(ev)["cause"] in {c.value for c in PACKET_DROP_CAUSES}:
                facts.dropped[rec.node] += 1
        elif ev.startswith("final backlog="):
            facts.backlog[rec.node] = int(fields(ev)["backlog"])
    return facts


def check_beacon_periodicity(facts: TraceFacts, cfg: SuperframeConfig) -> list[str]:
    out = []
    for k, (t, _, _) in enumerate(facts.beacons):
        if t != k * cfg.beacon_interval:
            out.append(f"beacon {k} at symbol {t}, expected {k * cfg.beacon_interval}")
    return out


def check_backoff_alignment(facts: TraceFacts) -> list[str]:
    """CCAs and CSMA/CA or direct transmissions start on backoff-period boundaries.

    Beacons start at multiples of the beacon interval, itself a multiple of the
    backoff period, so superframe-relative alignment equals absolute alignment.
    """
    out = [f"node {n}: cca at symbol {t} off the backoff grid"
           for t, n in facts.ccas if t % A_UNIT_BACKOFF_PERIOD]
    out += [f"node {n}: {kind} ({access}) tx at symbol {t} off the backoff grid"
            for t, n, kind, _, access in facts.txs
            if access in ("csma", "direct") and t % A_UNIT_BACKOFF_PERIOD]
    return out


def check_gts_descriptors(facts: TraceFacts) -> list[str]:
    out = []
    for t, fin_cap, gts in facts.beacons:
        if len(gts) > A_MAX_GTS:
            out.append(f"beacon at {t}: {len(gts)} GTS descriptors")
        spans = sorted((start, start + length) for _, start, length, _ in gts)
        for (a0, a1), (b0, _) in zip(spans, spans[1:]):
            if b0 < a1:
                out.append(f"beacon at {t}: overlapping GTS slots {spans}")
        if spans and spans[-1][1] > A_NUM_SUPERFRAME_SLOTS:
            out.append(f"beacon at {t}: GTS beyond the last slot {spans}")
        expected = spans[0][0] - 1 if spans else A_NUM_SUPERFRAME_SLOTS - 1
        if fin_cap != expected:
            out.append(f"beacon at {t}: final CAP slot {fin_cap}, expected {expected}")
    return out


def check_inactive_silence(facts: TraceFacts, cfg: SuperframeConfig) -> list[str]:
    bi, sd = cfg.beacon_interval, cfg.superframe_duration
    return [f"node {n}: {kind} on air [{t}, {t + dur}) outside the active period"
            for t, n, kind, dur, _ in facts.txs if t % bi + dur > sd]


def gts_intervals(facts: TraceFacts, cfg: SuperframeConfig) -> list[tuple[int, int]]:
    slot = cfg.slot_duration
    return [(t + start * slot, t + (start + length) * slot)
            for t, _, gts in facts.beacons for _, start, length, _ in gts]


def check_gts_collision_free(facts: TraceFacts, cfg: SuperframeConfig) -> list[str]:
    intervals = gts_intervals(facts, cfg)
    out = []
    for start, dur, node, kind in facts.collisions:
        for g0, g1 in intervals:
            if start < g1 and start + dur > g0:
                out.append(f"node {node}: {kind} collided at [{start}, {start + dur})"
                           f" inside GTS [{g0}, {g1})")
    return out


def check_conservation(facts: TraceFacts) -> list[str]:
    out = []
    for node in sorted(set(facts.generated) | set(facts.backlog)):
        accounted = facts.delivered[node] + facts.dropped[node] + facts.backlog.get(node, 0)
        if facts.generated[node] != accounted:
            out.append(f"node {node}: generated {facts.generated[node]}"
                       f" != delivered+dropped+backlog {accounted}")
    return out


def audit(lines: Iterable[str], cfg: SuperframeConfig) -> dict[str, list[str]]:
    """Run every structural check; maps check name to its violations."""
    facts = collect(lines)
    return {
        "beacon periodicity": check_beacon_periodicity(facts, cfg),
        "backoff alignment": check_backoff_alignment(facts),
        "gts descriptors": check_gts_descriptors(facts),
        "inactive silence": check_inactive_silence(facts, cfg),
        "gts collision free": check_gts_collision_free(facts, cfg),
        "drop conservation": check_conservation(facts),
    }
