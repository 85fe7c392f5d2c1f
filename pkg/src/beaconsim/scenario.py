"""Scenario files, network construction and parameter sweeps."""

from __future__ import annotations

import csv
import io
import itertools
import math
import os
import re
import statistics
from dataclasses import dataclass, field, replace
from pathlib import Path

from .engine import Simulator, seconds_to_symbols
from .mac.constants import MAX_ORDER
from .mac.frames import GtsDirection
from .mac.superframe import SuperframeConfig
from .metrics import DropCause, MetricsReport, PACKET_DROP_CAUSES, Recorder
from .node import CbrSource, Device, start_coordinator
from .phy import Channel
from .trace import Tracer


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    n_devices: list[int]
    bo: list[int] = field(default_factory=lambda: [3])
    so: list[int] | str | None = "bo"
    duty_cycle: list[float] | None = None
    radius_m: float = 10.0
    range_m: float = 18.0
    n_gts_devices: int = 1
    gts_length: int = 1
    gts_direction: int = int(GtsDirection.TRANSMIT)
    payload_bytes: int = 70
    interval_s: float = 0.2
    sim_time_s: float = 60.0
    seeds: list[int] = field(default_factory=lambda: [1])
    trace: bool = False
    queue_capacity: int = 50
    stagger_s: float = 2.0
    traffic_start_s: float | None = None
    battery_life_extension: bool = False

    def points(self) -> list[RunPoint]:
        """Parameter points of the sweep, in canonical order."""
        pairs: list[tuple[int, int]] = []
        for bo in self.bo:
            if self.duty_cycle is not None:
                for dc in self.duty_cycle:
                    pairs.append((bo, so_for_duty_cycle(bo, dc)))
            elif self.so == "bo" or self.so is None:
                pairs.append((bo, bo))
            else:
                pairs.extend((bo, so) for so in self.so)
        pts = {RunPoint(bo, so, n) for (bo, so), n in itertools.product(pairs, self.n_devices)}
        return sorted(pts, key=lambda p: (p.bo, -p.so, p.n_devices))

    def runs(self) -> list[tuple[RunPoint, int]]:
        return [(p, s) for p in self.points() for s in self.seeds]


@dataclass(frozen=True)
class RunPoint:
    bo: int
    so: int
    n_devices: int

    @property
    def superframe(self) -> SuperframeConfig:
        return SuperframeConfig(self.bo, self.so)


def so_for_duty_cycle(bo: int, duty_pct: float) -> int:
    if duty_pct <= 0:
        raise ConfigError(f"duty cycle {duty_pct}% must be positive")
    exp = math.log2(duty_pct / 100.0)
    so = bo + round(exp)
    if abs(exp - round(exp)) > 1e-9 or not 0 <= so <= bo:
        raise ConfigError(f"duty cycle {duty_pct}% is not 100 * 2^-k for 0 <= k <= bo={bo}")
    return so


# -- config file ----------------------------------------------------------------

_RANGE = re.compile(r"^\[\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*\]$")
_LIST_KEYS = {"n_devices", "bo", "so", "duty_cycle", "seeds"}
_INT_KEYS = {"n_gts_devices", "gts_length", "gts_direction", "payload_bytes", "queue_capacity"}
_FLOAT_KEYS = {"radius_m", "range_m", "interval_s", "sim_time_s", "stagger_s", "traffic_start_s"}
_BOOL_KEYS = {"trace", "battery_life_extension"}


def _scalar(text: str):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_value(text: str):
    text = text.strip()
    m = _RANGE.match(text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        return list(range(lo, hi + 1))
    if text.startswith("[") and text.endswith("]"):
        inner = text[1:-1].strip()
        return [_scalar(t.strip()) for t in inner.split(",")] if inner else []
    if "," in text:
        return [_scalar(t.strip()) for t in text.split(",")]
    return _scalar(text)


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    known = {f for f in ScenarioConfig.__dataclass_fields__}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if key not in known:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = parse_value(value)
        lines[key] = lineno

    def fail(key: str, msg: str):
        where = f"{source}:{lines[key]}" if key in lines else source
        raise ConfigError(f"{where}: {key}: {msg}")

    if "n_devices" not in values:
        raise ConfigError(f"{source}: n_devices: required key missing")
    kwargs = {}
    for key, value in values.items():
        if key in _LIST_KEYS:
            if key == "so" and isinstance(value, str):
                if value != "bo":
                    fail(key, f"expected integers or 'bo', got {value!r}")
                kwargs[key] = "bo"
                continue
            items = value if isinstance(value, list) else [value]
            kind = float if key == "duty_cycle" else int
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in items) \
                    or (kind is int and not all(isinstance(v, int) for v in items)):
                fail(key, f"expected a list of {kind.__name__} values, got {value!r}")
            kwargs[key] = [kind(v) for v in items]
        elif key in _INT_KEYS:
            if not isinstance(value, int) or isinstance(value, bool):
                fail(key, f"expected an integer, got {value!r}")
            kwargs[key] = value
        elif key in _FLOAT_KEYS:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                fail(key, f"expected a number, got {value!r}")
            kwargs[key] = float(value)
        elif key in _BOOL_KEYS:
            if not isinstance(value, bool):
                fail(key, f"expected true/false, got {value!r}")
            kwargs[key] = value
    cfg = ScenarioConfig(**kwargs)
    try:
        validate(cfg)
    except ConfigError as exc:
        key = getattr(exc, "key", None)
        if key is not None:
            fail(key, str(exc))
        raise
    return cfg


def _invalid(key: str, msg: str) -> ConfigError:
    exc = ConfigError(msg)
    exc.key = key
    return exc


def validate(cfg: ScenarioConfig) -> None:
    if not cfg.n_devices or any(n < 1 for n in cfg.n_devices):
        raise _invalid("n_devices", "every n_devices value must be >= 1")
    if not cfg.bo or any(not 0 <= b <= MAX_ORDER for b in cfg.bo):
        raise _invalid("bo", f"beacon order must lie in [0, {MAX_ORDER}]")
    if cfg.duty_cycle is not None and isinstance(cfg.so, list):
        raise _invalid("duty_cycle", "give either so or duty_cycle, not both")
    if isinstance(cfg.so, list):
        for bo in cfg.bo:
            for so in cfg.so:
                if not 0 <= so <= bo:
                    raise _invalid("so", f"superframe order {so} must lie in [0, bo={bo}]")
    if cfg.duty_cycle is not None:
        for bo in cfg.bo:
            for dc in cfg.duty_cycle:
                try:
                    so_for_duty_cycle(bo, dc)
                except ConfigError as exc:
                    raise _invalid("duty_cycle", str(exc)) from None
    if cfg.interval_s <= 0:
        raise _invalid("interval_s", "CBR interval must be > 0")
    if cfg.sim_time_s <= 0:
        raise _invalid("sim_time_s", "simulation time must be > 0")
    if cfg.range_m <= 0 or cfg.radius_m < 0:
        raise _invalid("range_m", "range must be > 0 and radius >= 0")
    if not cfg.seeds:
        raise _invalid("seeds", "at least one seed is required")
    if cfg.n_gts_devices < 0 or not 1 <= cfg.gts_length <= 15:
        raise _invalid("gts_length", "need n_gts_devices >= 0 and 1 <= gts_length <= 15")
    if cfg.gts_direction not in (0, 1):
        raise _invalid("gts_direction", "direction is 0 (transmit) or 1 (receive)")
    if cfg.queue_capacity < 1:
        raise _invalid("queue_capacity", "queue capacity must be >= 1")


def load_config(path: str | os.PathLike) -> ScenarioConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


# -- a single run ---------------------------------------------------------------

@dataclass
class RunResult:
    point: RunPoint
    seed: int
    report: MetricsReport
    recorder: Recorder
    trace: list[str]
    sim: Simulator
    channel: Channel
    coordinator: object
    devices: list[Device]

    def backlog_by_node(self) -> dict[int, int]:
        return {d.addr: d.backlog() for d in self.devices}

    def conservation_errors(self) -> list[str]:
        """Check generated == acked + packet drops + backlog for every node and in total."""
        rec = self.recorder
        errors = []
        totals = [0, 0]
        for dev in self.devices:
            drops = rec.dropped_by_node.get(dev.addr, {})
            accounted = rec.acked_by_node[dev.addr] + sum(drops.get(c, 0) for c in PACKET_DROP_CAUSES) \
                + dev.backlog()
            generated = rec.generated_by_node[dev.addr]
            totals[0] += generated
            totals[1] += accounted
            if generated != accounted:
                errors.append(f"node {dev.addr}: generated {generated} != accounted {accounted}")
        c = rec.counters
        glob = c.acked + sum(c.dropped[k] for k in PACKET_DROP_CAUSES) + sum(self.backlog_by_node().values())
        if c.generated != glob or totals[0] != totals[1]:
            errors.append(f"global: generated {c.generated} != accounted {glob}")
        return errors


def traffic_start_s(cfg: ScenarioConfig, n_devices: int) -> float:
    if cfg.traffic_start_s is not None:
        return cfg.traffic_start_s
    return (n_devices + 1) * cfg.stagger_s


def build_network(cfg: ScenarioConfig, point: RunPoint, seed: int, trace: bool | None = None):
    sf = SuperframeConfig(point.bo, point.so, cfg.battery_life_extension)
    sim = Simulator(seed)
    tracer = Tracer(enabled=cfg.trace if trace is None else trace)
    channel = Channel(sim, cfg.range_m, tracer)
    recorder = Recorder(sim, tracer)
    recorder.attach(channel)
    coord_radio = channel.attach(0, (0.0, 0.0))
    n = point.n_devices
    radios = []
    for k in range(1, n + 1):
        angle = 2 * math.pi * k / n
        radios.append(channel.attach(k, (cfg.radius_m * math.cos(angle),
                                         cfg.radius_m * math.sin(angle))))
    coordinator = start_coordinator(sim, coord_radio, sf, tracer, recorder)
    interval = seconds_to_symbols(cfg.interval_s)
    base = seconds_to_symbols(traffic_start_s(cfg, n))
    devices = []
    for radio in radios:
        k = radio.node_id
        phase = sim.rng(f"cbr-{k}").randrange(interval)
        is_gts = k <= cfg.n_gts_devices
        src = CbrSource(cfg.payload_bytes, interval, base + phase, use_gts=is_gts,
                        gts_length=cfg.gts_length)
        dev = Device(sim, radio, tracer, recorder, src, cfg.queue_capacity,
                     cfg.battery_life_extension)
        start = seconds_to_symbols(k * cfg.stagger_s)
        if is_gts:
            dev.start_gts_device(start, cfg.gts_length, GtsDirection(cfg.gts_direction))
        else:
            dev.start_cap_device(start)
        devices.append(dev)
    return sim, channel, recorder, tracer, coordinator, devices


def run_point(cfg: ScenarioConfig, point: RunPoint, seed: int, trace: bool | None = None) -> RunResult:
    sim, channel, recorder, tracer, coordinator, devices = build_network(cfg, point, seed, trace)
    end = seconds_to_symbols(cfg.sim_time_s)
    sim.run_until(end)
    for dev in devices:
        tracer.emit(end, dev.addr, f"final backlog={dev.backlog()}")
    report = MetricsReport.build(recorder.counters, point.superframe, point.n_devices, seed,
                                 cfg.sim_time_s)
    return RunResult(point, seed, report, recorder, tracer.lines, sim, channel, coordinator, devices)


# -- sweeps and CSV ---------------------------------------------------------------

CSV_COLUMNS = ["bo", "so", "n_nodes", "seed", "sim_time_s", "S_kbps", "Pd_pct", "C_pct",
               "duty_cycle_pct"] + [c.value for c in DropCause]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_row(r: MetricsReport) -> list[str]:
    return [_fmt(v) for v in (r.bo, r.so, r.n_nodes, r.seed, r.sim_time_s, r.S, r.Pd, r.C,
                              r.duty_cycle)] + [str(r.drops[c]) for c in DropCause]


def aggregate_rows(reports: list[MetricsReport]) -> list[list[str]]:
    """Mean and sample standard deviation rows for one parameter point."""
    first = reports[0]
    head = [first.bo, first.so, first.n_nodes]

    def stats(values):
        xs = [v for v in values if v is not None]
        mean = statistics.fmean(xs) if xs else None
        std = statistics.stdev(xs) if len(xs) >= 2 else None
        return mean, std

    columns = [[r.S for r in reports], [r.Pd for r in reports], [r.C for r in reports]]
    columns += [[float(r.drops[c]) for r in reports] for c in DropCause]
    pairs = [stats(col) for col in columns]
    rows = []
    for label, idx in (("mean", 0), ("std", 1)):
        vals = [p[idx] for p in pairs]
        rows.append([_fmt(v) for v in head] + [label, _fmt(first.sim_time_s)] + [_fmt(v) for v in vals[:3]]
                    + [_fmt(first.duty_cycle)] + [_fmt(v) for v in vals[3:]])
    return rows


class RunFailed(RuntimeError):
    pass


def run_matrix(cfg: ScenarioConfig, trace_dir: str | os.PathLike | None = None,
               progress=None) -> tuple[list[list[str]], list[RunResult]]:
    """Run every (point, seed); return CSV rows (header first) and the run results."""
    want_trace = cfg.trace or trace_dir is not None
    if trace_dir is not None:
        Path(trace_dir).mkdir(parents=True, exist_ok=True)
    rows = [CSV_COLUMNS]
    results = []
    for point in cfg.points():
        reports = []
        for seed in cfg.seeds:
            try:
                result = run_point(cfg, point, seed, trace=want_trace)
            except Exception as exc:
                raise RunFailed(f"run bo={point.bo} so={point.so} n={point.n_devices} seed={seed}"
                                f" failed: {exc}") from exc
            if trace_dir is not None:
                name = f"run_bo{point.bo}_so{point.so}_n{point.n_devices}_seed{seed}.tr"
                (Path(trace_dir) / name).write_text("".join(l + "\n" for l in result.trace))
            reports.append(result.report)
            results.append(result)
            rows.append(report_row(result.report))
            if progress is not None:
                progress(result)
        rows.extend(aggregate_rows(reports))
    return rows, results


def rows_to_csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def with_seeds(cfg: ScenarioConfig, seeds: list[int]) -> ScenarioConfig:
    return replace(cfg, seeds=list(seeds))
