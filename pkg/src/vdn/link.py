"""Link layer: framing over tone symbols, CRC-8 and TDMA medium access.

A frame is ``preamble | length | payload | crc`` where the preamble is
the reserved top symbol, symbol 0, reserved top symbol.  Bytes are
packed big-endian into 3-bit symbols (4-bit when the alphabet is large
enough), zero-padding the low bits of the final symbol of each byte.
Decoding is strict: bad padding, short reads, out-of-range data symbols
or trailing symbols all reject the frame, which is what makes every
single-symbol corruption detectable.
"""

from dataclasses import dataclass

from .errors import ChecksumError, FramingError
from .modem import Alphabet, Symbol

MAX_PAYLOAD = 32

_CRC_POLY = 0x07
_CRC_INIT = 0x00


def crc8(data):
    """CRC-8, polynomial 0x07, init 0x00, no reflection."""
    crc = _CRC_INIT
    for byte in bytes(data):
        crc ^= byte
        for _ in range(8):
            if crc & 0x80:
                crc = ((crc << 1) ^ _CRC_POLY) & 0xFF
            else:
                crc = (crc << 1) & 0xFF
    return crc


@dataclass(frozen=True)
class Frame:
    """Decoded link frame; checksum covers the length byte and payload."""

    payload: bytes
    checksum: int

    def __post_init__(self):
        if len(self.payload) > MAX_PAYLOAD:
            raise ValueError(f"payload exceeds {MAX_PAYLOAD} bytes")
        if not 0 <= self.checksum <= 0xFF:
            raise ValueError("checksum must be one byte")

    @classmethod
    def build(cls, payload):
        payload = bytes(payload)
        return cls(payload, crc8(bytes([len(payload)]) + payload))


def _bits_per_symbol(alphabet):
    if alphabet.size >= 17:
        return 4
    if alphabet.size >= 9:
        return 3
    raise ValueError("alphabet too small for framing (needs >= 9 symbols)")


def _encode_byte(value, bps):
    count = -(-8 // bps)                # symbols per byte
    pad = count * bps - 8
    field = value << pad
    mask = (1 << bps) - 1
    return [(field >> (bps * (count - 1 - i))) & mask for i in range(count)]


def frame_encode(payload, alphabet=None):
    """Encode a payload (up to 32 bytes) as a symbol sequence."""
    if alphabet is None:
        alphabet = Alphabet()
    payload = bytes(payload)
    if len(payload) > MAX_PAYLOAD:
        raise ValueError(f"payload exceeds {MAX_PAYLOAD} bytes")
    bps = _bits_per_symbol(alphabet)
    marker = alphabet.size - 1

    indices = [marker, 0, marker]
    indices += _encode_byte(len(payload), bps)
    for byte in payload:
        indices += _encode_byte(byte, bps)
    indices += _encode_byte(crc8(bytes([len(payload)]) + payload), bps)
    return [Symbol(i) for i in indices]


def _find_preamble(indices, marker):
    for i in range(len(indices) - 2):
        if indices[i] == marker and indices[i + 1] == 0 and indices[i + 2] == marker:
            return i
    return None


def frame_decode(symbols, alphabet=None):
    """Parse a symbol sequence (possibly with erasures) into a Frame.

    Scans for the first preamble, then parses strictly.  Raises
    ``FramingError`` for structural problems and ``ChecksumError``
    (carrying the suspect payload) for a CRC mismatch.
    """
    if alphabet is None:
        alphabet = Alphabet()
    bps = _bits_per_symbol(alphabet)
    marker = alphabet.size - 1
    count = -(-8 // bps)
    pad = count * bps - 8
    mask = (1 << bps) - 1

    indices = [s.index if isinstance(s, Symbol) else s for s in symbols]
    for idx in indices:
        if idx is not None and not 0 <= idx < alphabet.size:
            raise FramingError(f"symbol index {idx} outside alphabet")

    start = _find_preamble(indices, marker)
    if start is None:
        raise FramingError("no preamble found")
    pos = start + 3

    def read_byte():
        nonlocal pos
        if pos + count > len(indices):
            raise FramingError("frame truncated")
        field = 0
        for _ in range(count):
            idx = indices[pos]
            pos += 1
            if idx is None:
                raise FramingError("erasure inside frame")
            if idx > mask:
                raise FramingError(f"data symbol {idx} out of range")
            field = (field << bps) | idx
        if field & ((1 << pad) - 1):
            raise FramingError("non-zero padding bits")
        return field >> pad

    length = read_byte()
    if length > MAX_PAYLOAD:
        raise FramingError(f"length {length} exceeds {MAX_PAYLOAD}")
    payload = bytes(read_byte() for _ in range(length))
    checksum = read_byte()
    if pos != len(indices):
        raise FramingError("trailing symbols after frame")
    if checksum != crc8(bytes([length]) + payload):
        raise ChecksumError("checksum mismatch", payload=payload)
    return Frame(payload, checksum)


@dataclass(frozen=True)
class MacSchedule:
    """Round-robin TDMA: each listed node owns every len(slots)-th slot."""

    slots: tuple
    slot_ms: float = 500.0

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        if not self.slots:
            raise ValueError("schedule needs at least one slot")
        if len(set(self.slots)) != len(self.slots):
            raise ValueError("duplicate node in schedule")
        if not self.slot_ms > 0:
            raise ValueError("slot_ms must be positive")

    @property
    def cycle_ms(self):
        return self.slot_ms * len(self.slots)


@dataclass(frozen=True)
class TransmitWindow:
    start_ms: float
    end_ms: float


@dataclass(frozen=True)
class DeferUntil:
    at_ms: float


def mac_grant(node, now_ms, schedule):
    """Grant the node's next transmit window.

    A window is granted only when ``now_ms`` is exactly the start of one
    of the node's slots; otherwise the node is told to defer until its
    next slot start.
    """
    if node not in schedule.slots:
        raise ValueError(f"node {node!r} is not in the schedule")
    if now_ms < 0:
        raise ValueError("now_ms must be >= 0")
    position = schedule.slots.index(node)
    cycle = schedule.cycle_ms
    base = (now_ms // cycle) * cycle + position * schedule.slot_ms
    start = base if base >= now_ms else base + cycle
    if start == now_ms:
        return TransmitWindow(start, start + schedule.slot_ms)
    return DeferUntil(start)
