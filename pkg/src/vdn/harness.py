"""Experiment harness and command line interface.

Replicates the characterisation experiments end to end: frequency
response sweeps, spatial decay per mounting condition, the two-beam
relay experiment, an eavesdrop coverage map, scripted monitoring
scenarios and the northbound protocol server.  All outputs are CSV (or
JSON lines for action logs) and byte-identical for a given seed.
"""

import argparse
import json
import math
import os
import sys
import zlib
from dataclasses import dataclass, replace

import numpy as np

from . import calibration as cal
from .errors import RoleViolationError, VdnError
from .medium import (BoundaryCondition, MediumSpec, TapPoint, gain_profile,
                     propagate, spatial_profile)
from .modem import Alphabet, NoSignal, fft_peak, percent_error, relay_hop
from .transducer import AdcSpec, ToneSpec, sample, synthesize
from .vdnctl.controller import Controller
from .vdnctl.northbound import serve
from .vdnctl.topology import Role, Topology, two_beam_topology
from . import apps

MULTIHOP_FREQS = (3250.0, 3500.0, 3750.0, 4000.0, 4250.0, 4500.0)


def schedule_frequencies():
    """The characterisation schedule: 50 Hz to 4.45 kHz in 100 Hz steps,
    then 4.5, 5, 7.5, 10 and 20 kHz."""
    return tuple(50.0 + 100.0 * k for k in range(45)) + (
        4500.0, 5000.0, 7500.0, 10000.0, 20000.0)


@dataclass(frozen=True)
class SweepConfig:
    frequencies_hz: tuple
    tap_positions_mm: tuple = (cal.NEAR_TAP_MM, cal.FAR_TAP_MM)
    boundary: BoundaryCondition = BoundaryCondition.SUPPORTED
    trials: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "frequencies_hz",
                           tuple(float(f) for f in self.frequencies_hz))
        object.__setattr__(self, "tap_positions_mm",
                           tuple(float(t) for t in self.tap_positions_mm))
        if not self.frequencies_hz:
            raise ValueError("need at least one frequency")
        if any(f <= 0 for f in self.frequencies_hz):
            raise ValueError("frequencies must be positive")
        if not self.tap_positions_mm:
            raise ValueError("need at least one tap position")
        if any(t < 0 for t in self.tap_positions_mm):
            raise ValueError("tap positions must be >= 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not isinstance(self.boundary, BoundaryCondition):
            object.__setattr__(self, "boundary",
                               BoundaryCondition.from_name(self.boundary))


def default_sweep_config(seed=0):
    return SweepConfig(schedule_frequencies(), seed=seed)


def _derive_seed(master, label):
    """Independent, platform-stable per-measurement seed stream."""
    return np.random.SeedSequence(
        [int(master) & 0xFFFFFFFF, zlib.crc32(label.encode("utf-8"))])


def _measure(freq_hz, tap_mm, medium, adc, seed):
    """One send/propagate/capture/detect pipeline pass."""
    wave = synthesize(ToneSpec(freq_hz, cal.SWEEP_TONE_MS, 1.0))
    received = propagate(wave, medium, TapPoint(0.0), TapPoint(tap_mm),
                         seed=seed)
    captured = sample(received, adc)
    det = fft_peak(captured)
    detected = det.frequency_hz if det.valid else 0.0
    return detected, det.magnitude


def sweep_frequency(config, medium=None, adc=None):
    """Frequency response sweep.

    Rows (frequency_hz, tap_mm, detected_hz, percent_error, magnitude)
    ordered by frequency, then tap, then trial.  Invalid detections
    report ``detected_hz`` 0 (and 100 % error).
    """
    if medium is None:
        medium = MediumSpec(boundary=config.boundary)
    if adc is None:
        adc = AdcSpec()
    rows = []
    for freq in config.frequencies_hz:
        for tap in config.tap_positions_mm:
            for trial in range(config.trials):
                seed = _derive_seed(config.seed,
                                    f"freq:{freq}:{tap}:{trial}")
                detected, magnitude = _measure(freq, tap, medium, adc, seed)
                rows.append({
                    "frequency_hz": freq, "tap_mm": tap,
                    "detected_hz": detected,
                    "percent_error": percent_error(freq, detected),
                    "magnitude": magnitude,
                })
    return rows


def sweep_distance(config, adc=None):
    """Spatial decay sweep at a single frequency, all three mountings.

    Noiseless by design so the standing-wave structure (peaks and dips)
    is exact.  Rows (tap_mm, boundary, magnitude), mounting-major.
    """
    if len(config.frequencies_hz) != 1:
        raise ValueError("distance sweep uses exactly one frequency")
    if adc is None:
        adc = AdcSpec()
    freq = config.frequencies_hz[0]
    rows = []
    for boundary in BoundaryCondition:
        medium = MediumSpec(boundary=boundary, noise_rms=0.0)
        for tap in config.tap_positions_mm:
            _, magnitude = _measure(freq, tap, medium, adc, seed=None)
            rows.append({"tap_mm": tap, "boundary": boundary.value,
                         "magnitude": magnitude})
    return rows


def default_distance_config(seed=0):
    return SweepConfig((3000.0,),
                       tuple(50.0 * k for k in range(1, 12)), seed=seed)


def multihop_experiment(config=None, adc=None):
    """Two-beam relay experiment.

    Each tone crosses beam one, is regenerated by a relay tap and
    crosses beam two.  Rows (sent_hz, stage, detected_hz, magnitude)
    with stage in {original, hop}.
    """
    if config is None:
        config = SweepConfig(MULTIHOP_FREQS)
    if adc is None:
        adc = AdcSpec()
    alphabet = Alphabet()
    medium = MediumSpec()
    rows = []
    for freq in config.frequencies_hz:
        for trial in range(config.trials):
            seed_a = _derive_seed(config.seed, f"hop:{freq}:{trial}:a")
            seed_b = _derive_seed(config.seed, f"hop:{freq}:{trial}:b")
            wave = synthesize(ToneSpec(freq, cal.SWEEP_TONE_MS, 1.0))
            leg_one = sample(propagate(wave, medium, TapPoint(0.0),
                                       TapPoint(cal.FAR_TAP_MM), seed=seed_a),
                             adc)
            det = fft_peak(leg_one)
            rows.append({"sent_hz": freq, "stage": "original",
                         "detected_hz": det.frequency_hz if det.valid else 0.0,
                         "magnitude": det.magnitude})
            regen = relay_hop(leg_one, alphabet,
                              duration_ms=cal.SWEEP_TONE_MS)
            if isinstance(regen, NoSignal):
                rows.append({"sent_hz": freq, "stage": "hop",
                             "detected_hz": 0.0, "magnitude": 0.0})
                continue
            leg_two = sample(propagate(synthesize(regen), medium,
                                       TapPoint(0.0),
                                       TapPoint(cal.FAR_TAP_MM), seed=seed_b),
                             adc)
            det2 = fft_peak(leg_two)
            rows.append({"sent_hz": freq, "stage": "hop",
                         "detected_hz": det2.frequency_hz if det2.valid else 0.0,
                         "magnitude": det2.magnitude})
    return rows


def eavesdrop_map(topology, source, probe_hz=2500.0,
                  threshold=cal.DETECTION_THRESHOLD, step_mm=10.0):
    """Predicted probe-tone audibility along every reachable beam.

    Analytic (noise-free) map of the peak magnitude a listener would
    measure at each tap position for a probe emitted by ``source``.
    Beams reached through relays are appended in hop order, assuming the
    relay regenerates at full amplitude when it can hear the probe.
    Rows (tap_mm, magnitude, above_threshold).
    """
    node = topology.nodes.get(source)
    if node is None:
        raise ValueError(f"unknown node {source!r}")
    if node.role is not Role.MONITOR:
        raise RoleViolationError("eavesdrop source must be a monitor")
    rows = []
    queue = [(node.beam, node.position_mm)]
    seen = set()
    while queue:
        beam_id, inject_mm = queue.pop(0)
        if beam_id in seen:
            continue
        seen.add(beam_id)
        medium = topology.beams[beam_id].medium
        base = 4.0 / math.pi * gain_profile(probe_hz, medium)
        n_steps = int(medium.length_mm // step_mm)
        for k in range(n_steps + 1):
            tap = k * step_mm
            magnitude = base * spatial_profile(abs(tap - inject_mm), medium)
            rows.append({"tap_mm": tap, "magnitude": magnitude,
                         "above_threshold": magnitude >= threshold})
        for link in topology.relays_from(beam_id):
            relay = topology.nodes[link.node]
            heard = base * spatial_profile(abs(relay.position_mm - inject_mm),
                                           medium)
            if heard >= threshold:
                queue.append((link.to_beam, link.to_position_mm))
    return rows


# --- scripted scenarios ---------------------------------------------------


def run_scenario(config, seed=0):
    """Drive a monitoring scenario end to end.

    Config keys: ``topology`` (inline dict) or ``topology_path``;
    optional ``flows_csv`` + ``heavy_hitter`` {threshold_bytes,
    window_ms}; optional ``ddos`` {distinct_sources, window_ms};
    optional ``heartbeat`` {node, period_ms, count, grace_factor};
    optional ``monitor``/``collector`` node ids; optional ``horizon_ms``
    and ``trace`` (bool).  Returns reports, alerts, actions, watchdog
    transitions and (if traced) the relay path.
    """
    if "topology" in config:
        topology = Topology.from_dict(config["topology"])
    elif "topology_path" in config:
        topology = Topology.load(config["topology_path"])
    else:
        topology = two_beam_topology()

    monitors = sorted(n.id for n in topology.nodes.values()
                      if n.role is Role.MONITOR)
    collectors = sorted(n.id for n in topology.nodes.values()
                        if n.role is Role.COLLECTOR)
    if not monitors or not collectors:
        raise ValueError("scenario topology needs a monitor and a collector")
    monitor = config.get("monitor", monitors[0])
    collector = config.get("collector", collectors[0])

    controller = Controller(topology, seed=seed)
    hitter_events = []

    if config.get("flows_csv"):
        hh = config.get("heavy_hitter")
        if not hh:
            raise ValueError("flows_csv requires a heavy_hitter config")
        flows = apps.ingest_flows(config["flows_csv"])
        hitter_events = apps.heavy_hitter_monitor(
            flows, hh["threshold_bytes"], hh["window_ms"])
        for event in hitter_events:
            controller.emit(monitor, "heavy-hitter", payload=event.payload,
                            at_ms=event.timestamp_ms)

    heartbeat = config.get("heartbeat")
    if heartbeat:
        beat_node = heartbeat.get("node", monitor)
        for k in range(int(heartbeat.get("count", 1))):
            controller.emit(beat_node, "heartbeat",
                            at_ms=k * float(heartbeat["period_ms"]))

    horizon = config.get("horizon_ms")
    if horizon is None:
        depth = max(1, len(topology.beams))
        horizon = (controller.last_scheduled_ms()
                   + depth * 40 * controller.symbol_ms + 1000.0)
    reports = controller.run(float(horizon))

    result = {"reports": reports, "alerts": [], "actions": [],
              "transitions": [], "path": None, "horizon_ms": float(horizon)}

    ddos = config.get("ddos")
    if ddos:
        alerts, actions = apps.ddos_detect(
            [r for r in reports if r.node == collector],
            ddos["distinct_sources"], ddos["window_ms"])
        result["alerts"] = alerts
        result["actions"] = actions

    if heartbeat:
        result["transitions"] = apps.heartbeat_watchdog(
            [r for r in reports if r.node == collector],
            float(heartbeat["period_ms"]),
            float(heartbeat.get("grace_factor", 1.5)),
            horizon_ms=float(horizon))

    if config.get("trace"):
        result["path"] = apps.vibe_trace(topology, monitor, seed=seed)
    return result


# --- output ----------------------------------------------------------------


def _format_cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def write_csv(stream, headers, rows):
    stream.write(",".join(headers) + "\n")
    for row in rows:
        stream.write(",".join(_format_cell(row[h]) for h in headers) + "\n")


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _emit_csv(path, headers, rows):
    stream, owned = _open_out(path)
    try:
        write_csv(stream, headers, rows)
    finally:
        if owned:
            stream.close()


# --- CLI --------------------------------------------------------------------


def _load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _sweep_config_from(args, default):
    config = default
    if args.config:
        doc = _load_json(args.config)
        fields = {}
        if "frequencies_hz" in doc:
            fields["frequencies_hz"] = tuple(doc["frequencies_hz"])
        if "tap_positions_mm" in doc:
            fields["tap_positions_mm"] = tuple(doc["tap_positions_mm"])
        if "boundary" in doc:
            fields["boundary"] = BoundaryCondition.from_name(doc["boundary"])
        if "trials" in doc:
            fields["trials"] = int(doc["trials"])
        if "seed" in doc:
            fields["seed"] = int(doc["seed"])
        config = replace(config, **fields)
    return config


def _resolve_seed(args):
    """Seed and whether it was given explicitly (flag or environment)."""
    if getattr(args, "seed", None) is not None:
        return args.seed, True
    env = os.environ.get("VDN_SEED")
    if env is not None:
        return int(env), True
    return 0, False


def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master seed (default: $VDN_SEED or 0)")
    common.add_argument("--out", default=None,
                        help="output path (default: stdout)")
    common.add_argument("--config", default=None,
                        help="JSON config path (sweep overrides, topology "
                             "or scenario, depending on the command)")
    return common


def cli_main(argv=None):
    parser = argparse.ArgumentParser(
        prog="vdn",
        description="Vibration-channel network management simulator")
    common = _common_options()
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("sweep-freq", parents=[common],
                       help="frequency response sweep")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--boundary", default=None)
    p = sub.add_parser("sweep-dist", parents=[common],
                       help="spatial decay sweep per mounting")
    p.add_argument("--frequency", type=float, default=None)
    p = sub.add_parser("multihop", parents=[common],
                       help="two-beam relay experiment")
    p.add_argument("--trials", type=int, default=None)
    p = sub.add_parser("eavesdrop", parents=[common],
                       help="probe audibility map (config = topology JSON)")
    p.add_argument("--probe-hz", type=float, default=2500.0)
    p.add_argument("--node", default=None,
                   help="probing monitor node id")
    p = sub.add_parser("run", parents=[common],
                       help="scripted scenario (config = scenario JSON)")
    p.add_argument("--action-log", default=None,
                   help="write control actions as JSON lines")
    sub.add_parser("northbound", parents=[common],
                   help="serve the JSON-lines management protocol on stdio")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    seed, seed_explicit = _resolve_seed(args)
    try:
        return _dispatch(args, seed, seed_explicit)
    except (VdnError, OSError, ValueError, KeyError) as exc:
        print(f"vdn: error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args, seed, seed_explicit):
    if args.command == "sweep-freq":
        config = _sweep_config_from(args, default_sweep_config(seed))
        if seed_explicit:
            config = replace(config, seed=seed)
        if args.trials:
            config = replace(config, trials=args.trials)
        if args.boundary:
            config = replace(config,
                             boundary=BoundaryCondition.from_name(args.boundary))
        rows = sweep_frequency(config)
        _emit_csv(args.out, ["frequency_hz", "tap_mm", "detected_hz",
                             "percent_error", "magnitude"], rows)
        return 0

    if args.command == "sweep-dist":
        config = _sweep_config_from(args, default_distance_config(seed))
        if args.frequency:
            config = replace(config, frequencies_hz=(args.frequency,))
        rows = sweep_distance(config)
        _emit_csv(args.out, ["tap_mm", "boundary", "magnitude"], rows)
        return 0

    if args.command == "multihop":
        config = _sweep_config_from(args, SweepConfig(MULTIHOP_FREQS, seed=seed))
        if seed_explicit:
            config = replace(config, seed=seed)
        if args.trials:
            config = replace(config, trials=args.trials)
        rows = multihop_experiment(config)
        _emit_csv(args.out, ["sent_hz", "stage", "detected_hz", "magnitude"],
                  rows)
        return 0

    if args.command == "eavesdrop":
        if args.config:
            topology = Topology.load(args.config)
        else:
            topology = two_beam_topology()
        source = args.node
        if source is None:
            source = sorted(n.id for n in topology.nodes.values()
                            if n.role is Role.MONITOR)[0]
        rows = eavesdrop_map(topology, source, probe_hz=args.probe_hz)
        _emit_csv(args.out, ["tap_mm", "magnitude", "above_threshold"], rows)
        return 0

    if args.command == "run":
        if not args.config:
            print("vdn: error: run requires --config", file=sys.stderr)
            return 2
        scenario = _load_json(args.config)
        result = run_scenario(scenario, seed=seed)
        rows = [{"event": r.event.name, "node": r.node,
                 "sim_time_ms": r.sim_time_ms,
                 "payload_hex": r.payload.hex() if r.payload is not None else "",
                 "frame_error": r.frame_error}
                for r in result["reports"]]
        _emit_csv(args.out, ["event", "node", "sim_time_ms", "payload_hex",
                             "frame_error"], rows)
        if args.action_log:
            with open(args.action_log, "w", encoding="utf-8") as fh:
                for action in result["actions"]:
                    fh.write(json.dumps(
                        {"kind": action.kind, "target": action.target,
                         "reason": action.reason.name,
                         "sim_time_ms": action.sim_time_ms},
                        separators=(",", ":")) + "\n")
        return 0

    if args.command == "northbound":
        serve(sys.stdin, sys.stdout, seed=seed)
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
