"""Event-signalling controller: schedules emissions, simulates delivery.

Time is a grid of symbol slots (default 50 ms).  Monitors queue pattern
(+ optional framed payload) emissions; slots are claimed through the
per-beam TDMA schedule.  ``run`` then plays the grid forward: every
occupied slot is synthesised, propagated down its beam and decoded by
each listening node, whose stream parser assembles patterns and frames
back into event reports.  Relays decode on their input beam and
regenerate recognised units on their output beam one slot later.

Everything is deterministic for a given (topology, emissions, seed):
noise is drawn per (beam, listener, slot) from independent substreams.
"""

import math
from dataclasses import dataclass

import numpy as np

from .. import calibration as cal
from ..errors import (ChecksumError, FramingError, RoleViolationError,
                      UnboundEventError)
from ..link import MacSchedule, TransmitWindow, frame_decode, frame_encode, mac_grant
from ..medium import TapPoint, propagate
from ..modem import Alphabet, Symbol, UnknownFrequency, vibration_receive
from ..transducer import AdcSpec, ToneSpec, sample, synthesize
from ..waveform import silence
from .registry import standard_registry
from .topology import Role

_TERMINAL = object()


@dataclass(frozen=True)
class EventReport:
    """One event delivered to a collector."""

    event: "EventKind"
    node: str
    sim_time_ms: float
    payload: bytes = None
    frame_error: bool = False


@dataclass(frozen=True)
class ScheduledTransmission:
    node: str
    event: "EventKind"
    start_ms: float
    end_ms: float
    slots: tuple


class _StreamParser:
    """Reassembles patterns and attached frames from decode outcomes."""

    def __init__(self, registry, alphabet):
        self.alphabet = alphabet
        self.marker = alphabet.size - 1
        self.bps = 4 if alphabet.size >= 17 else 3
        self.syms_per_byte = -(-8 // self.bps)
        self.root = {}
        for kind, pattern in registry.bindings:
            node = self.root
            for sym in pattern.effective():
                node = node.setdefault(sym, {})
            node[_TERMINAL] = kind
        self.walk = None
        self.walk_len = 0
        self.walk_start = None
        self.pending = None          # completed pattern awaiting frame marker
        self.frame = None            # dict(buffer, start, needed, event)
        self.dropped = 0

    # -- helpers ----------------------------------------------------------

    def _emit_bare(self, units):
        event, start, end = self.pending
        self.pending = None
        units.append({"event": event, "payload": None, "frame_error": False,
                      "start_slot": start, "end_slot": end})

    def _abort_frame(self, units, end_slot):
        event = self.frame["event"]
        start = self.frame["pat_start"]
        self.frame = None
        units.append({"event": event, "payload": None, "frame_error": True,
                      "start_slot": start, "end_slot": end_slot})

    def _finish_frame(self, units, end_slot):
        frame = self.frame
        self.frame = None
        syms = [Symbol(i) for i in frame["buffer"]]
        try:
            decoded = frame_decode(syms, self.alphabet)
        except (FramingError, ChecksumError):
            units.append({"event": frame["event"], "payload": None,
                          "frame_error": True,
                          "start_slot": frame["pat_start"],
                          "end_slot": end_slot})
            return
        units.append({"event": frame["event"], "payload": decoded.payload,
                      "frame_error": False,
                      "start_slot": frame["pat_start"], "end_slot": end_slot})

    def _reset_walk(self):
        self.walk = None
        self.walk_len = 0
        self.walk_start = None

    def _step_pattern(self, idx, slot):
        node = self.walk if self.walk is not None else self.root
        start = self.walk_start if self.walk is not None else slot
        child = node.get(idx)
        if child is None and self.walk is not None:
            # dead walk: drop the consumed prefix, retry this symbol fresh
            self.dropped += self.walk_len
            self._reset_walk()
            start = slot
            child = self.root.get(idx)
        if child is None:
            self.dropped += 1
            return
        if _TERMINAL in child:
            self.pending = (child[_TERMINAL], start, slot)
            self._reset_walk()
        else:
            self.walk = child
            self.walk_len += 1
            self.walk_start = start

    # -- feed -------------------------------------------------------------

    def feed(self, slot, outcome):
        """Consume one slot's decode outcome; return completed units."""
        units = []
        if isinstance(outcome, Symbol):
            idx = outcome.index
            if self.frame is not None:
                self._feed_frame(idx, slot, units)
            elif self.pending is not None:
                if idx == self.marker:
                    self.frame = {"buffer": [idx], "needed": None,
                                  "event": self.pending[0],
                                  "pat_start": self.pending[1]}
                    self.pending = None
                else:
                    self._emit_bare(units)
                    self._step_pattern(idx, slot)
            else:
                self._step_pattern(idx, slot)
        else:
            # silence or an off-grid tone breaks any partial structure
            if self.frame is not None:
                self._abort_frame(units, slot)
            if self.pending is not None:
                self._emit_bare(units)
            if self.walk_len:
                self.dropped += self.walk_len
                self._reset_walk()
            if isinstance(outcome, UnknownFrequency):
                self.dropped += 1
        return units

    def _feed_frame(self, idx, slot, units):
        frame = self.frame
        frame["buffer"].append(idx)
        header = 3 + self.syms_per_byte
        if frame["needed"] is None and len(frame["buffer"]) == header:
            field = 0
            for sym in frame["buffer"][3:header]:
                if sym >= (1 << self.bps):
                    self._abort_frame(units, slot)
                    return
                field = (field << self.bps) | sym
            length = field >> (self.syms_per_byte * self.bps - 8)
            if length > 32:
                self._abort_frame(units, slot)
                return
            frame["needed"] = header + self.syms_per_byte * (length + 1)
        if frame["needed"] is not None and len(frame["buffer"]) == frame["needed"]:
            self._finish_frame(units, slot)

    def flush(self, slot, units=None):
        """End of stream: settle any pending structure."""
        units = [] if units is None else units
        if self.frame is not None:
            self._abort_frame(units, slot)
        if self.pending is not None:
            self._emit_bare(units)
        if self.walk_len:
            self.dropped += self.walk_len
            self._reset_walk()
        return units


class Controller:
    """Schedules monitor emissions and simulates the vibration fabric."""

    def __init__(self, topology, registry=None, alphabet=None, seed=0,
                 symbol_ms=cal.SYMBOL_MS, mac_slot_ms=500.0, adc=None,
                 synth_rate_hz=cal.SYNTH_RATE_HZ):
        self.topology = topology
        self.alphabet = alphabet if alphabet is not None else Alphabet()
        self.registry = (registry if registry is not None
                         else standard_registry(self.alphabet))
        self.seed = int(seed)
        self.symbol_ms = float(symbol_ms)
        self.adc = adc if adc is not None else AdcSpec()
        self.synth_rate_hz = float(synth_rate_hz)
        if mac_slot_ms % symbol_ms:
            raise ValueError("mac_slot_ms must be a multiple of symbol_ms")
        self._mac = {}
        for beam_id in topology.beams:
            monitors = topology.monitors_on(beam_id)
            if monitors:
                self._mac[beam_id] = MacSchedule(
                    tuple(n.id for n in monitors), mac_slot_ms)
        self._beam_index = {b: i for i, b in enumerate(sorted(topology.beams))}
        self._placements = {b: {} for b in topology.beams}   # slot -> (freq, pos)
        self._emissions = []
        self._node_cursor = {}
        self.last_unit_log = []
        self.drop_counts = {}

    # -- scheduling ---------------------------------------------------------

    def bind(self, event, pattern):
        from .registry import bind_event
        self.registry = bind_event(self.registry, event, pattern, self.alphabet)

    def _own_slots(self, node, beam_id, start_slot, count):
        """First ``count`` free symbol slots owned by ``node`` via the MAC."""
        sched = self._mac[beam_id]
        placements = self._placements[beam_id]
        slots = []
        k = start_slot
        guard = 0
        while len(slots) < count:
            t = k * self.symbol_ms
            window_start = (t // sched.slot_ms) * sched.slot_ms
            grant = mac_grant(node, window_start, sched)
            if (isinstance(grant, TransmitWindow)
                    and grant.start_ms <= t
                    and t + self.symbol_ms <= grant.end_ms
                    and k not in placements):
                slots.append(k)
            k += 1
            guard += 1
            if guard > 1_000_000:
                raise RuntimeError("could not place emission (schedule full)")
        return slots

    def emit(self, node_id, event_name, payload=None, at_ms=0.0):
        """Queue an event emission from a monitor node.

        Returns the scheduled transmission; symbols occupy the node's own
        TDMA slots starting at ``at_ms`` (later if the schedule is busy).
        """
        node = self.topology.nodes.get(node_id)
        if node is None:
            raise ValueError(f"unknown node {node_id!r}")
        if node.role is not Role.MONITOR:
            raise RoleViolationError(
                f"node {node_id!r} ({node.role.value}) cannot emit events")
        event, pattern = self.registry.lookup(event_name)

        indices = list(pattern.effective())
        if payload is not None:
            indices += [s.index for s in frame_encode(payload, self.alphabet)]

        if at_ms < 0:
            raise ValueError("at_ms must be >= 0")
        start_slot = max(int(math.ceil(at_ms / self.symbol_ms)),
                         self._node_cursor.get(node_id, 0))
        slots = self._own_slots(node.id, node.beam, start_slot, len(indices))
        for slot, idx in zip(slots, indices):
            self._placements[node.beam][slot] = (
                self.alphabet.frequency(idx), node.position_mm)
        self._node_cursor[node_id] = slots[-1] + 1

        tx = ScheduledTransmission(
            node=node_id, event=event,
            start_ms=slots[0] * self.symbol_ms,
            end_ms=(slots[-1] + 1) * self.symbol_ms,
            slots=tuple(slots))
        self._emissions.append(tx)
        return tx

    # -- simulation -----------------------------------------------------------

    def _noise_rng(self, beam_id, listener_idx, slot):
        seq = np.random.SeedSequence(
            [self.seed, self._beam_index[beam_id], listener_idx, slot])
        return np.random.default_rng(seq)

    def _slot_outcome(self, beam, placement, listener, listener_idx, slot):
        if placement is None:
            wave = silence(self.symbol_ms, self.synth_rate_hz)
            src = TapPoint(0.0)
        else:
            freq, position = placement
            wave = synthesize(ToneSpec(freq, self.symbol_ms, 1.0),
                              self.synth_rate_hz)
            src = TapPoint(position)
        rng = self._noise_rng(beam.id, listener_idx, slot)
        received = propagate(wave, beam.medium, src,
                             TapPoint(listener.position_mm), seed=rng)
        captured = sample(received, self.adc)
        return vibration_receive(captured, self.alphabet)

    def run(self, horizon_ms):
        """Simulate [0, horizon_ms); return collector event reports."""
        if horizon_ms <= 0:
            raise ValueError("horizon_ms must be positive")
        n_slots = int(horizon_ms // self.symbol_ms)
        beam_order = self.topology.beam_order()
        work = {b: dict(self._placements[b]) for b in self.topology.beams}
        listeners = {b: self.topology.listeners_on(b) for b in self.topology.beams}
        parsers = {}
        for beam_id, nodes in listeners.items():
            for node in nodes:
                parsers[node.id] = _StreamParser(self.registry, self.alphabet)
        relay_cursor = {}
        reports = []
        unit_log = []

        for slot in range(n_slots):
            for beam_id in beam_order:
                beam = self.topology.beams[beam_id]
                placement = work[beam_id].get(slot)
                for li, listener in enumerate(listeners[beam_id]):
                    outcome = self._slot_outcome(beam, placement, listener,
                                                 li, slot)
                    units = parsers[listener.id].feed(slot, outcome)
                    if slot == n_slots - 1:
                        parsers[listener.id].flush(slot, units)
                    for unit in units:
                        unit_log.append((listener.id, unit))
                        self._deliver(listener, unit, work, relay_cursor,
                                      reports)

        self.last_unit_log = unit_log
        self.drop_counts = {node_id: parser.dropped
                            for node_id, parser in parsers.items()}
        return reports

    def _deliver(self, listener, unit, work, relay_cursor, reports):
        if listener.role is Role.COLLECTOR:
            reports.append(EventReport(
                event=unit["event"], node=listener.id,
                sim_time_ms=(unit["end_slot"] + 1) * self.symbol_ms,
                payload=unit["payload"], frame_error=unit["frame_error"]))
            return
        # relay: regenerate the unit on the outgoing beam
        link = self.topology.relay_for_node(listener.id)
        if link is None or unit["frame_error"]:
            return
        _, pattern = self.registry.lookup(unit["event"].name)
        indices = list(pattern.effective())
        payload = unit["payload"]
        if payload is not None:
            if unit["event"].name == "hop-probe" and len(payload) >= 1:
                payload = bytes([min(payload[0] + 1, 0xFF)]) + payload[1:]
            indices += [s.index for s in
                        frame_encode(payload, self.alphabet)]
        target = work[link.to_beam]
        slot = max(unit["end_slot"] + 1, relay_cursor.get(listener.id, 0))
        placed = []
        for idx in indices:
            while slot in target:
                slot += 1
            target[slot] = (self.alphabet.frequency(idx), link.to_position_mm)
            placed.append(slot)
            slot += 1
        relay_cursor[listener.id] = slot

    # -- queries -----------------------------------------------------------

    def sense_events(self, node_id, horizon_ms):
        """Run the fabric and return the reports seen by one collector."""
        node = self.topology.nodes.get(node_id)
        if node is None:
            raise ValueError(f"unknown node {node_id!r}")
        if node.role is not Role.COLLECTOR:
            raise RoleViolationError(
                f"node {node_id!r} ({node.role.value}) cannot sense events")
        return [r for r in self.run(horizon_ms) if r.node == node_id]

    def last_scheduled_ms(self):
        if not self._emissions:
            return 0.0
        return max(tx.end_ms for tx in self._emissions)
