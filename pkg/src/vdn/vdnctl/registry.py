"""Event registry: named event kinds bound to tone signal patterns.

Patterns are short control-symbol sequences.  The registry enforces
prefix-freedom (no pattern may be a prefix of another) so a symbol
stream can be parsed greedily without lookahead beyond one symbol.
"""

from dataclasses import dataclass, field

from ..errors import (AmbiguousPatternError, DecodeError,
                      DuplicateEventError, UnboundEventError)
from ..modem import Alphabet


@dataclass(frozen=True)
class EventKind:
    """A named, numbered class of network events."""

    name: str
    id: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("event name must be non-empty")
        if not 0 <= self.id <= 0xFF:
            raise ValueError("event id must fit in one byte")


@dataclass(frozen=True)
class SignalPattern:
    """Symbol sequence announcing an event, optionally repeated."""

    symbols: tuple
    repeat: int = 1

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if not self.symbols:
            raise ValueError("pattern must have at least one symbol")
        if any(s < 0 for s in self.symbols):
            raise ValueError("pattern symbols must be >= 0")
        if not 1 <= self.repeat <= 0xFF:
            raise ValueError("repeat must be in 1..255")

    def effective(self):
        """The on-wire symbol sequence (pattern repeated)."""
        return self.symbols * self.repeat


@dataclass(frozen=True)
class Registry:
    """Immutable set of (EventKind, SignalPattern) bindings."""

    bindings: tuple = field(default_factory=tuple)

    def events(self):
        return [kind for kind, _ in self.bindings]

    def lookup(self, name):
        for kind, pattern in self.bindings:
            if kind.name == name:
                return kind, pattern
        raise UnboundEventError(f"event {name!r} is not bound")

    def lookup_id(self, event_id):
        for kind, pattern in self.bindings:
            if kind.id == event_id:
                return kind, pattern
        raise UnboundEventError(f"event id {event_id} is not bound")

    def next_free_id(self):
        used = {kind.id for kind, _ in self.bindings}
        candidate = 1
        while candidate in used:
            candidate += 1
        return candidate


def _is_prefix(a, b):
    return len(a) <= len(b) and tuple(b[:len(a)]) == tuple(a)


def bind_event(registry, event, pattern, alphabet=None):
    """Return a new registry with the binding added.

    Rejects duplicate names/ids and patterns that are prefixes of (or
    extensions of, or equal to) existing ones.  Pattern symbols must lie
    inside the alphabet and must not use the reserved framing symbol.
    """
    if alphabet is None:
        alphabet = Alphabet()
    if not isinstance(event, EventKind):
        raise TypeError("event must be an EventKind")
    if not isinstance(pattern, SignalPattern):
        raise TypeError("pattern must be a SignalPattern")

    marker = alphabet.size - 1
    for s in pattern.symbols:
        if s >= alphabet.size:
            raise ValueError(f"pattern symbol {s} outside alphabet")
        if s == marker:
            raise ValueError(
                f"pattern symbol {s} is reserved for frame delimiting")

    for kind, existing in registry.bindings:
        if kind.name == event.name:
            raise DuplicateEventError(f"event name {event.name!r} already bound")
        if kind.id == event.id:
            raise DuplicateEventError(f"event id {event.id} already bound")
        a, b = existing.effective(), pattern.effective()
        if _is_prefix(a, b) or _is_prefix(b, a):
            raise AmbiguousPatternError(
                f"pattern for {event.name!r} conflicts with {kind.name!r}")

    return Registry(registry.bindings + ((event, pattern),))


def standard_registry(alphabet=None):
    """Default bindings: the four control-plane events on symbols 8..11."""
    reg = Registry()
    for name, event_id, symbol in (("hop-probe", 1, 8), ("heartbeat", 2, 9),
                                   ("heavy-hitter", 3, 10), ("ddos-alert", 4, 11)):
        reg = bind_event(reg, EventKind(name, event_id),
                         SignalPattern((symbol,)), alphabet)
    return reg


def serialize_pattern(pattern):
    """Pack a pattern as ``repeat | count | symbols...`` bytes."""
    if any(s > 0xFF for s in pattern.symbols):
        raise ValueError("pattern symbols must fit in one byte")
    return bytes([pattern.repeat, len(pattern.symbols), *pattern.symbols])


def deserialize_pattern(data):
    """Inverse of :func:`serialize_pattern`; DecodeError on malformed input."""
    data = bytes(data)
    if len(data) < 2:
        raise DecodeError("pattern blob too short")
    repeat, count = data[0], data[1]
    if repeat < 1:
        raise DecodeError("pattern repeat must be >= 1")
    if count < 1:
        raise DecodeError("pattern must have at least one symbol")
    if len(data) != 2 + count:
        raise DecodeError(f"expected {2 + count} bytes, got {len(data)}")
    return SignalPattern(tuple(data[2:]), repeat)
