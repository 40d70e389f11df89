"""Topology description: beams, node placements and relay links.

Loaded from a JSON document with three keys::

    {"nodes":  [{"id", "role", "beam", "position_mm"}, ...],
     "beams":  [{"id", "length_mm", "boundary", "noise_rms", ...}, ...],
     "relays": [{"from_beam", "to_beam", "node", ("to_position_mm")}, ...]}

Relay links must form a DAG over beams.
"""

import enum
import json
from dataclasses import dataclass, field

from .. import calibration as cal
from ..medium import BoundaryCondition, MediumSpec


class Role(enum.Enum):
    MONITOR = "monitor"
    COLLECTOR = "collector"
    RELAY = "relay"

    @classmethod
    def from_name(cls, name):
        key = str(name).strip().lower()
        for role in cls:
            if role.value == key:
                return role
        raise ValueError(f"unknown role: {name!r}")


@dataclass(frozen=True)
class NodeSpec:
    id: str
    role: Role
    beam: str
    position_mm: float

    def __post_init__(self):
        if not self.id:
            raise ValueError("node id must be non-empty")
        if not isinstance(self.role, Role):
            object.__setattr__(self, "role", Role.from_name(self.role))


@dataclass(frozen=True)
class BeamSpec:
    id: str
    medium: MediumSpec

    def __post_init__(self):
        if not self.id:
            raise ValueError("beam id must be non-empty")


@dataclass(frozen=True)
class RelayLink:
    from_beam: str
    to_beam: str
    node: str
    to_position_mm: float = 0.0


@dataclass(frozen=True)
class Topology:
    beams: dict = field(default_factory=dict)
    nodes: dict = field(default_factory=dict)
    relays: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "relays", tuple(self.relays))
        for node in self.nodes.values():
            beam = self.beams.get(node.beam)
            if beam is None:
                raise ValueError(f"node {node.id!r} references unknown beam "
                                 f"{node.beam!r}")
            if not 0.0 <= node.position_mm <= beam.medium.length_mm:
                raise ValueError(f"node {node.id!r} is off its beam")
        for link in self.relays:
            node = self.nodes.get(link.node)
            if node is None:
                raise ValueError(f"relay link references unknown node "
                                 f"{link.node!r}")
            if node.role is not Role.RELAY:
                raise ValueError(f"relay link node {link.node!r} has role "
                                 f"{node.role.value}")
            if node.beam != link.from_beam:
                raise ValueError(f"relay {link.node!r} must sit on its "
                                 f"from_beam")
            to_beam = self.beams.get(link.to_beam)
            if to_beam is None:
                raise ValueError(f"relay link references unknown beam "
                                 f"{link.to_beam!r}")
            if not 0.0 <= link.to_position_mm <= to_beam.medium.length_mm:
                raise ValueError("relay output position off the target beam")
        self._check_acyclic()

    def _check_acyclic(self):
        edges = {}
        for link in self.relays:
            edges.setdefault(link.from_beam, []).append(link.to_beam)
        seen, active = set(), set()

        def visit(beam):
            if beam in active:
                raise ValueError("relay links form a cycle")
            if beam in seen:
                return
            active.add(beam)
            for nxt in edges.get(beam, ()):
                visit(nxt)
            active.discard(beam)
            seen.add(beam)

        for beam in self.beams:
            visit(beam)

    # --- queries ---------------------------------------------------------

    def nodes_on(self, beam_id):
        return [n for n in self.nodes.values() if n.beam == beam_id]

    def monitors_on(self, beam_id):
        return sorted((n for n in self.nodes_on(beam_id)
                       if n.role is Role.MONITOR), key=lambda n: n.id)

    def listeners_on(self, beam_id):
        """Nodes that decode this beam: collectors and relays, id-sorted."""
        return sorted((n for n in self.nodes_on(beam_id)
                       if n.role in (Role.COLLECTOR, Role.RELAY)),
                      key=lambda n: n.id)

    def collector_on(self, beam_id):
        for n in self.listeners_on(beam_id):
            if n.role is Role.COLLECTOR:
                return n
        return None

    def relays_from(self, beam_id):
        return [link for link in self.relays if link.from_beam == beam_id]

    def relay_for_node(self, node_id):
        for link in self.relays:
            if link.node == node_id:
                return link
        return None

    def beam_order(self):
        """Beams topologically sorted along relay links (sources first)."""
        order = []
        edges = {}
        indegree = {b: 0 for b in self.beams}
        for link in self.relays:
            edges.setdefault(link.from_beam, []).append(link.to_beam)
            indegree[link.to_beam] += 1
        ready = sorted(b for b, deg in indegree.items() if deg == 0)
        while ready:
            beam = ready.pop(0)
            order.append(beam)
            for nxt in sorted(edges.get(beam, ())):
                indegree[nxt] -= 1
                if indegree[nxt] == 0:
                    ready.append(nxt)
            ready.sort()
        return order

    # --- construction ----------------------------------------------------

    @classmethod
    def from_dict(cls, doc):
        beams = {}
        for spec in doc.get("beams", []):
            medium = MediumSpec(
                length_mm=float(spec.get("length_mm", cal.BEAM_LENGTH_MM)),
                boundary=BoundaryCondition.from_name(
                    spec.get("boundary", "supported")),
                noise_rms=float(spec.get("noise_rms", cal.DEFAULT_NOISE_RMS)),
                harmonic_leak=float(spec.get("harmonic_leak",
                                             cal.DEFAULT_HARMONIC_LEAK)),
            )
            if spec["id"] in beams:
                raise ValueError(f"duplicate beam id {spec['id']!r}")
            beams[spec["id"]] = BeamSpec(spec["id"], medium)
        nodes = {}
        for spec in doc.get("nodes", []):
            if spec["id"] in nodes:
                raise ValueError(f"duplicate node id {spec['id']!r}")
            nodes[spec["id"]] = NodeSpec(
                id=spec["id"], role=Role.from_name(spec["role"]),
                beam=spec["beam"], position_mm=float(spec["position_mm"]))
        relays = [RelayLink(r["from_beam"], r["to_beam"], r["node"],
                            float(r.get("to_position_mm", 0.0)))
                  for r in doc.get("relays", [])]
        return cls(beams=beams, nodes=nodes, relays=tuple(relays))

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return {
            "beams": [{"id": b.id, "length_mm": b.medium.length_mm,
                       "boundary": b.medium.boundary.value,
                       "noise_rms": b.medium.noise_rms,
                       "harmonic_leak": b.medium.harmonic_leak}
                      for b in self.beams.values()],
            "nodes": [{"id": n.id, "role": n.role.value, "beam": n.beam,
                       "position_mm": n.position_mm}
                      for n in self.nodes.values()],
            "relays": [{"from_beam": r.from_beam, "to_beam": r.to_beam,
                        "node": r.node, "to_position_mm": r.to_position_mm}
                       for r in self.relays],
        }


def two_beam_topology(noise_rms=cal.DEFAULT_NOISE_RMS):
    """Reference deployment: monitor -> beam-1 -> relay -> beam-2 -> collector."""
    medium = {"length_mm": cal.BEAM_LENGTH_MM, "boundary": "supported",
              "noise_rms": noise_rms}
    return Topology.from_dict({
        "beams": [dict(medium, id="beam-1"), dict(medium, id="beam-2")],
        "nodes": [
            {"id": "mon-1", "role": "monitor", "beam": "beam-1",
             "position_mm": cal.NEAR_TAP_MM},
            {"id": "rel-1", "role": "relay", "beam": "beam-1",
             "position_mm": cal.FAR_TAP_MM},
            {"id": "col-1", "role": "collector", "beam": "beam-2",
             "position_mm": cal.FAR_TAP_MM},
        ],
        "relays": [{"from_beam": "beam-1", "to_beam": "beam-2",
                    "node": "rel-1", "to_position_mm": cal.NEAR_TAP_MM}],
    })
