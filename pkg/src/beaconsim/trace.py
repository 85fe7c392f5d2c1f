"""Human-readable event trace in the ``[<seconds>](node <id>) <event>`` style."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

# one symbol is exactly 16 us, so 7 fractional digits are always exact
_UNITS_PER_SYMBOL = 160  # 1e-7 s units

LINE_RE = re.compile(r"^\[(\d+)\.(\d{7})\]\(node (\d+)\) (.*)$")


def format_time(symbols: int) -> str:
    units = symbols * _UNITS_PER_SYMBOL
    return f"{units // 10**7}.{units % 10**7:07d}"


def parse_time(text: str) -> int:
    """Inverse of :func:`format_time`; returns symbols."""
    whole, frac = text.split(".")
    units = int(whole) * 10**7 + int(frac.ljust(7, "0"))
    if units % _UNITS_PER_SYMBOL:
        raise ValueError(f"time {text} is not a whole number of symbols")
    return units // _UNITS_PER_SYMBOL


@dataclass(frozen=True)
class TraceRecord:
    time: int  # symbols
    node: int
    event: str

    def format(self) -> str:
        return f"[{format_time(self.time)}](node {self.node}) {self.event}"


class Tracer:
    """Collects trace lines in memory; optionally streams them to a file."""

    def __init__(self, enabled: bool = True, stream: TextIO | None = None):
        self.enabled = enabled
        self.stream = stream
        self.lines: list[str] = []

    def emit(self, time: int, node: int, event: str) -> None:
        if not self.enabled:
            return
        line = f"[{format_time(time)}](node {node}) {event}"
        self.lines.append(line)
        if self.stream is not None:
            self.stream.write(line + "\n")

    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines)


def parse_line(line: str) -> TraceRecord:
    m = LINE_RE.match(line.rstrip("\n"))
    if m is None:
        raise ValueError(f"malformed trace line: {line!r}")
    whole, frac, node, event = m.groups()
    return TraceRecord(parse_time(f"{whole}.{frac}"), int(node), event)


def parse_lines(lines: Iterable[str]) -> Iterator[TraceRecord]:
    for line in lines:
        if line.strip():
            yield parse_line(line)


def fields(event: str) -> dict[str, str]:
    """Extract ``key=value`` tokens from an event string."""
    out = {}
    for token in event.split():
        key, sep, value = token.partition("=")
        if sep:
            out[key] = value
    return out
