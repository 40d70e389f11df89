"""Northbound line protocol: one JSON object per line, request/response.

Requests carry an ``op`` plus op-specific fields; responses are
``{"ok": true, "result": ...}`` or ``{"ok": false, "error": "..."}``.
Error strings start with a stable kebab-case token.
"""

import json

from ..errors import (AmbiguousPatternError, DuplicateEventError,
                      RoleViolationError, UnboundEventError, VdnError)
from .controller import Controller
from .registry import EventKind, SignalPattern
from .topology import Topology

_ERROR_TOKENS = (
    (DuplicateEventError, "duplicate-event"),
    (AmbiguousPatternError, "ambiguous-pattern"),
    (UnboundEventError, "unbound-event"),
    (RoleViolationError, "role-violation"),
)


class NorthboundSession:
    """State for one management connection."""

    def __init__(self, controller=None, seed=0):
        self.controller = controller
        self.seed = int(seed)
        self._pending_reports = []

    # -- op handlers --------------------------------------------------------

    def _require_controller(self):
        if self.controller is None:
            raise VdnError("no topology loaded")
        return self.controller

    def _op_load_topology(self, req):
        path = req.get("path")
        if not isinstance(path, str):
            raise ValueError("load-topology needs a 'path' string")
        topology = Topology.load(path)
        self.controller = Controller(topology, seed=self.seed)
        self._pending_reports = []
        return {"beams": len(topology.beams), "nodes": len(topology.nodes)}

    def _op_bind(self, req):
        ctl = self._require_controller()
        name = req.get("event")
        pattern = req.get("pattern")
        if not isinstance(name, str) or not isinstance(pattern, list):
            raise ValueError("bind needs 'event' string and 'pattern' list")
        event_id = req.get("id", ctl.registry.next_free_id())
        repeat = req.get("repeat", 1)
        ctl.bind(EventKind(name, int(event_id)),
                 SignalPattern(tuple(int(s) for s in pattern), int(repeat)))
        return None

    def _op_emit(self, req):
        ctl = self._require_controller()
        node = req.get("node")
        event = req.get("event")
        if not isinstance(node, str) or not isinstance(event, str):
            raise ValueError("emit needs 'node' and 'event' strings")
        payload = None
        if req.get("payload_hex") is not None:
            payload = bytes.fromhex(req["payload_hex"])
        at_ms = float(req.get("at_ms", 0.0))
        tx = ctl.emit(node, event, payload=payload, at_ms=at_ms)
        return {"start_ms": tx.start_ms, "end_ms": tx.end_ms}

    def _op_run(self, req):
        ctl = self._require_controller()
        horizon = req.get("horizon_ms")
        if horizon is None:
            raise ValueError("run needs 'horizon_ms'")
        reports = ctl.run(float(horizon))
        self._pending_reports = list(reports)
        return {"reports": len(reports)}

    def _op_poll_reports(self, req):
        reports = self._pending_reports
        self._pending_reports = []
        return {"reports": [
            {"event": r.event.name, "node": r.node,
             "sim_time_ms": r.sim_time_ms,
             "payload_hex": r.payload.hex() if r.payload is not None else None,
             "frame_error": r.frame_error}
            for r in reports]}

    def _op_list_bindings(self, req):
        ctl = self._require_controller()
        rows = [{"event": kind.name, "id": kind.id,
                 "pattern": list(pattern.symbols), "repeat": pattern.repeat}
                for kind, pattern in ctl.registry.bindings]
        rows.sort(key=lambda row: row["id"])
        return {"bindings": rows}

    _OPS = {
        "load-topology": _op_load_topology,
        "bind": _op_bind,
        "emit": _op_emit,
        "run": _op_run,
        "poll-reports": _op_poll_reports,
        "list-bindings": _op_list_bindings,
    }

    # -- entry points --------------------------------------------------------

    def handle(self, request):
        """Process one decoded request dict into a response dict."""
        if not isinstance(request, dict) or not isinstance(request.get("op"), str):
            return {"ok": False, "error": "parse: request must be an object with an 'op'"}
        handler = self._OPS.get(request["op"])
        if handler is None:
            return {"ok": False, "error": f"unknown-op: {request['op']}"}
        try:
            result = handler(self, request)
        except (DuplicateEventError, AmbiguousPatternError, UnboundEventError,
                RoleViolationError) as exc:
            token = next(tok for cls, tok in _ERROR_TOKENS
                         if isinstance(exc, cls))
            return {"ok": False, "error": f"{token}: {exc}"}
        except VdnError as exc:
            return {"ok": False, "error": f"domain: {exc}"}
        except (ValueError, TypeError, OSError, KeyError) as exc:
            return {"ok": False, "error": f"bad-request: {exc}"}
        response = {"ok": True}
        if result is not None:
            response["result"] = result
        return response

    def handle_line(self, line):
        line = line.strip()
        if not line:
            return None
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            return {"ok": False, "error": "parse: invalid JSON"}
        return self.handle(request)


def serve(in_stream, out_stream, session=None, seed=0):
    """Serve the line protocol until EOF.  Returns the session."""
    if session is None:
        session = NorthboundSession(seed=seed)
    for line in in_stream:
        response = session.handle_line(line)
        if response is None:
            continue
        out_stream.write(json.dumps(response, separators=(",", ":")) + "\n")
        out_stream.flush()
    return session
