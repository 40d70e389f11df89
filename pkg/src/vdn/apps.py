"""Management applications built on the event-signalling fabric.

These consume conventional monitoring inputs (flow records) or event
reports delivered over the vibration channel, and produce alerts and
control actions (emitted as records for an external enforcement point,
e.g. a flow-table or firewall rule pusher).
"""

import csv
import zlib
from dataclasses import dataclass

from .errors import FlowParseError, PathBrokenError, RoleViolationError
from .vdnctl.controller import Controller
from .vdnctl.registry import EventKind
from .vdnctl.topology import Role

FLOW_HEADER = ("src", "dst", "bytes", "timestamp_ms")


@dataclass(frozen=True)
class FlowRecord:
    src: str
    dst: str
    bytes: int
    timestamp_ms: float


@dataclass(frozen=True)
class HeavyHitterEvent:
    """A (src, dst) pair exceeded the byte budget within one window."""

    src: str
    dst: str
    window_start_ms: float
    timestamp_ms: float
    payload: bytes


@dataclass(frozen=True)
class DdosAlert:
    """Too many distinct sources hit one destination within the window."""

    dst: str
    sim_time_ms: float
    sources: tuple


@dataclass(frozen=True)
class ControlAction:
    """An enforcement record handed to the southbound rule pusher."""

    kind: str
    target: str
    reason: EventKind
    sim_time_ms: float
    report: object = None


@dataclass(frozen=True)
class Transition:
    """Watchdog liveness edge."""

    state: str           # "down" | "up"
    sim_time_ms: float


def ingest_flows(path):
    """Read a flow CSV (header ``src,dst,bytes,timestamp_ms``).

    Returns the records in file order.  Malformed rows raise
    ``FlowParseError`` carrying the 1-based line number; timestamps must
    be non-decreasing.
    """
    records = []
    last_ts = None
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if line_no == 1:
                if tuple(h.strip() for h in row) != FLOW_HEADER:
                    raise FlowParseError(
                        f"bad header {row!r}, expected {','.join(FLOW_HEADER)}",
                        row=line_no)
                continue
            if len(row) != 4:
                raise FlowParseError(f"expected 4 fields, got {len(row)}",
                                     row=line_no)
            src, dst, size, ts = (f.strip() for f in row)
            if not src or not dst:
                raise FlowParseError("empty src or dst", row=line_no)
            try:
                size = int(size)
            except ValueError:
                raise FlowParseError(f"bytes {size!r} is not an integer",
                                     row=line_no) from None
            if size < 0:
                raise FlowParseError("bytes must be >= 0", row=line_no)
            try:
                ts = float(ts)
            except ValueError:
                raise FlowParseError(f"timestamp {ts!r} is not a number",
                                     row=line_no) from None
            if last_ts is not None and ts < last_ts:
                raise FlowParseError("timestamps must be non-decreasing",
                                     row=line_no)
            last_ts = ts
            records.append(FlowRecord(src, dst, size, ts))
    return records


def flow_payload(src, dst):
    """Frame payload naming a flow: ``src>dst`` UTF-8, hashed if too long."""
    text = f"{src}>{dst}".encode("utf-8")
    if len(text) <= 32:
        return text
    return zlib.crc32(text).to_bytes(4, "big")


def parse_flow_payload(payload):
    """Inverse of :func:`flow_payload` for unhashed payloads, else None."""
    try:
        text = payload.decode("utf-8")
    except (UnicodeDecodeError, AttributeError):
        return None
    if text.count(">") != 1:
        return None
    src, dst = text.split(">")
    if not src or not dst:
        return None
    return src, dst


def heavy_hitter_monitor(flows, threshold_bytes, window_ms):
    """Find flows whose per-window byte total crosses the threshold.

    Tumbling windows aligned at multiples of ``window_ms``; at most one
    event per (src, dst, window), timestamped at the record that crossed.
    """
    if not threshold_bytes > 0:
        raise ValueError("threshold_bytes must be positive")
    if not window_ms > 0:
        raise ValueError("window_ms must be positive")
    totals = {}
    events = []
    for flow in flows:
        window = int(flow.timestamp_ms // window_ms)
        key = (flow.src, flow.dst, window)
        before = totals.get(key, 0)
        after = before + flow.bytes
        totals[key] = after
        if before < threshold_bytes <= after:
            events.append(HeavyHitterEvent(
                src=flow.src, dst=flow.dst,
                window_start_ms=window * window_ms,
                timestamp_ms=flow.timestamp_ms,
                payload=flow_payload(flow.src, flow.dst)))
    return events


def ddos_detect(reports, distinct_sources, window_ms):
    """Scan heavy-hitter reports for many-sources-to-one-destination bursts.

    A destination alerts when ``distinct_sources`` different sources hit
    it within a sliding ``window_ms`` (window is (t - window, t]).  After
    alerting, the destination re-arms once its source count falls below
    the threshold.  Returns (alerts, block-source control actions).
    """
    if not distinct_sources >= 2:
        raise ValueError("distinct_sources must be >= 2")
    if not window_ms > 0:
        raise ValueError("window_ms must be positive")
    history = {}
    armed = {}
    alerts = []
    actions = []
    alert_kind = EventKind("ddos-alert", 4)
    for report in reports:
        if report.event.name != "heavy-hitter" or report.payload is None:
            continue
        parsed = parse_flow_payload(report.payload)
        if parsed is None:
            continue
        src, dst = parsed
        t = report.sim_time_ms
        entries = history.setdefault(dst, [])
        entries.append((t, src))
        history[dst] = entries = [(ts, s) for ts, s in entries
                                  if ts > t - window_ms]
        sources = sorted({s for _, s in entries})
        if len(sources) >= distinct_sources:
            if armed.get(dst, True):
                armed[dst] = False
                alerts.append(DdosAlert(dst=dst, sim_time_ms=t,
                                        sources=tuple(sources)))
                for source in sources:
                    actions.append(ControlAction(
                        kind="block-source", target=source,
                        reason=alert_kind, sim_time_ms=t, report=report))
        else:
            armed[dst] = True
    return alerts, actions


def heartbeat_watchdog(reports, period_ms, grace_factor, horizon_ms=None):
    """Track liveness from heartbeat reports.

    The source is declared down ``grace_factor * period_ms`` after the
    last heartbeat (stream start counts as time 0), and up again at the
    next heartbeat.  With ``horizon_ms`` given, a trailing down edge is
    only emitted if its deadline falls inside the horizon.
    """
    if not period_ms > 0:
        raise ValueError("period_ms must be positive")
    if not grace_factor > 1.0:
        raise ValueError("grace_factor must be > 1")
    deadline = period_ms * grace_factor
    beats = sorted(r.sim_time_ms for r in reports
                   if r.event.name == "heartbeat")
    transitions = []
    up = True
    last = 0.0
    for beat in beats:
        if up and beat - last > deadline:
            transitions.append(Transition("down", last + deadline))
            up = False
        if not up:
            transitions.append(Transition("up", beat))
            up = True
        last = beat
    if up:
        final = last + deadline
        if horizon_ms is None or final <= horizon_ms:
            transitions.append(Transition("down", final))
    return transitions


def vibe_trace(topology, origin, seed=0, controller=None):
    """Trace the relay path from a monitor to the terminal collector.

    Sends a hop-probe whose one-byte hop count each relay increments.
    Returns the node path (origin, relays..., collector).  If the probe
    never arrives, replays the relay decode log to locate the break and
    raises ``PathBrokenError`` naming the last node that heard it.
    """
    node = topology.nodes.get(origin)
    if node is None:
        raise ValueError(f"unknown node {origin!r}")
    if node.role is not Role.MONITOR:
        raise RoleViolationError(
            f"trace origin {origin!r} must be a monitor, is {node.role.value}")

    # Follow the relay chain beam by beam.
    chain = []
    beam = node.beam
    visited = {beam}
    while True:
        links = topology.relays_from(beam)
        if not links:
            break
        if len(links) > 1:
            raise ValueError(f"beam {beam!r} has multiple relays; "
                             "trace path is ambiguous")
        link = links[0]
        chain.append(link.node)
        beam = link.to_beam
        if beam in visited:
            raise ValueError("relay links form a cycle")
        visited.add(beam)
    collector = topology.collector_on(beam)
    if collector is None:
        raise ValueError(f"terminal beam {beam!r} has no collector")

    if controller is None:
        controller = Controller(topology, seed=seed)
    tx = controller.emit(origin, "hop-probe", payload=bytes([1]), at_ms=0.0)
    per_hop_ms = (tx.end_ms - tx.start_ms) + 4 * controller.symbol_ms
    horizon = tx.end_ms + per_hop_ms * (len(chain) + 1) + 1000.0
    reports = controller.run(horizon)

    for report in reports:
        if (report.node == collector.id and report.event.name == "hop-probe"
                and not report.frame_error and report.payload):
            return [origin] + chain + [collector.id]

    heard = {node_id for node_id, unit in controller.last_unit_log
             if unit["event"].name == "hop-probe" and not unit["frame_error"]}
    last_good = origin
    for relay_id in chain:
        if relay_id not in heard:
            break
        last_good = relay_id
    raise PathBrokenError(
        f"hop-probe from {origin!r} was lost after {last_good!r}",
        after=last_good)
