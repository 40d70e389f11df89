"""Exception hierarchy.

``VdnError`` covers domain outcomes (bad frames, protocol misuse, broken
paths).  Plain ``ValueError`` / ``TypeError`` are reserved for contract
violations such as out-of-range arguments.
"""


class VdnError(Exception):
    """Base class for domain errors."""


class FramingError(VdnError):
    """Symbol stream does not parse as a frame (preamble, structure, padding)."""


class ChecksumError(VdnError):
    """Frame parsed structurally but its CRC-8 did not match."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class DecodeError(VdnError):
    """Serialized bytes do not decode to a valid object."""


class DuplicateEventError(VdnError):
    """Event name or id already bound in the registry."""


class AmbiguousPatternError(VdnError):
    """Signal pattern is a prefix of (or equal to) an existing one."""


class UnboundEventError(VdnError):
    """Referenced event kind is not bound in the registry."""


class RoleViolationError(VdnError):
    """Operation attempted by a node whose role does not permit it."""


class PathBrokenError(VdnError):
    """Multi-hop delivery failed past a known-good node."""

    def __init__(self, message, after=None):
        super().__init__(message)
        self.after = after


class FlowParseError(VdnError):
    """A flow CSV row was malformed."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row
