"""Control plane: event registry, topology, controller and northbound API."""

from .controller import Controller, EventReport, ScheduledTransmission
from .northbound import NorthboundSession, serve
from .registry import (EventKind, Registry, SignalPattern, bind_event,
                       deserialize_pattern, serialize_pattern,
                       standard_registry)
from .topology import (BeamSpec, NodeSpec, RelayLink, Role, Topology,
                       two_beam_topology)

__all__ = [
    "Controller", "EventReport", "ScheduledTransmission",
    "NorthboundSession", "serve",
    "EventKind", "Registry", "SignalPattern", "bind_event",
    "serialize_pattern", "deserialize_pattern", "standard_registry",
    "BeamSpec", "NodeSpec", "RelayLink", "Role", "Topology",
    "two_beam_topology",
]
