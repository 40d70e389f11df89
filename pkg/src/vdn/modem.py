"""Single-tone FSK modem over the vibration channel.

Symbols map one-to-one onto tones from a fixed alphabet inside the
beam's usable band.  Detection is FFT peak picking: the strongest
non-DC bin wins, subject to a magnitude threshold.  Receive decisions
majority-vote several overlapping analysis windows so a noisy edge
window cannot flip a symbol.
"""

import math
from dataclasses import dataclass

from . import calibration as cal
from ._kernels import spectrum_mags
from .transducer import ToneSpec
from .waveform import Waveform


@dataclass(frozen=True)
class Alphabet:
    """Evenly spaced tone set: index i maps to base + i * spacing."""

    base_hz: float = cal.ALPHABET_BASE_HZ
    spacing_hz: float = cal.ALPHABET_SPACING_HZ
    size: int = cal.ALPHABET_SIZE

    def __post_init__(self):
        if self.size < 2:
            raise ValueError("alphabet needs at least 2 symbols")
        if self.base_hz < cal.HARMONIC_CUTOFF_HZ:
            raise ValueError(
                f"alphabet base {self.base_hz} Hz is below the usable band "
                f"(>= {cal.HARMONIC_CUTOFF_HZ} Hz)")
        top = self.base_hz + (self.size - 1) * self.spacing_hz
        if top > cal.ADC_RATE_HZ / 2.0:
            raise ValueError(
                f"alphabet top {top} Hz exceeds the capture Nyquist limit")
        min_spacing = 2.0 * cal.ADC_RATE_HZ / cal.DEFAULT_WINDOW
        if self.spacing_hz < min_spacing:
            raise ValueError(
                f"alphabet spacing {self.spacing_hz} Hz is below the "
                f"detector resolution ({min_spacing:.2f} Hz)")

    def frequency(self, index):
        if not 0 <= index < self.size:
            raise ValueError(f"symbol index {index} out of range 0..{self.size - 1}")
        return self.base_hz + index * self.spacing_hz

    def index_for(self, freq_hz):
        """Nearest symbol index, or None if off-grid by more than half a step."""
        idx = int(round((freq_hz - self.base_hz) / self.spacing_hz))
        if idx < 0 or idx >= self.size:
            return None
        if abs(freq_hz - self.frequency(idx)) > self.spacing_hz / 2.0:
            return None
        return idx


@dataclass(frozen=True)
class Symbol:
    """One alphabet position."""

    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("symbol index must be >= 0")


@dataclass(frozen=True)
class UnknownFrequency:
    """A confident detection that does not snap to any alphabet tone."""

    frequency_hz: float


@dataclass(frozen=True)
class NoSignal:
    """Nothing above the detection threshold."""


NO_SIGNAL = NoSignal()


@dataclass(frozen=True)
class DetectionResult:
    """Strongest non-DC spectral peak of one analysis window."""

    frequency_hz: float
    magnitude: float
    valid: bool


def fft_peak(wave, window_len=cal.DEFAULT_WINDOW,
             threshold=cal.DETECTION_THRESHOLD):
    """Pick the strongest non-DC bin of the first ``window_len`` samples.

    ``window_len`` must be a power of two no longer than the waveform.
    The reported magnitude uses the 2|X[k]|/N normalisation, so a bin-
    aligned sine of amplitude A reads ~A.  ``valid`` means the peak
    cleared ``threshold``.  An all-zero window reports (0.0, 0.0, False).
    """
    if not isinstance(wave, Waveform):
        raise TypeError("wave must be a Waveform")
    window_len = int(window_len)
    if window_len < 2 or window_len & (window_len - 1):
        raise ValueError("window_len must be a power of two >= 2")
    if len(wave) < window_len:
        raise ValueError(
            f"waveform has {len(wave)} samples, needs >= {window_len}")

    mags = spectrum_mags(wave.samples[:window_len])
    k = int(mags[1:].argmax()) + 1
    magnitude = float(mags[k])
    if magnitude == 0.0:
        return DetectionResult(0.0, 0.0, False)
    freq = k * wave.sample_rate_hz / window_len
    return DetectionResult(freq, magnitude, magnitude >= threshold)


def percent_error(sent_hz, detected_hz):
    """Absolute frequency error as a percentage of the sent frequency."""
    if not sent_hz > 0:
        raise ValueError("sent_hz must be positive")
    if detected_hz < 0:
        raise ValueError("detected_hz must be >= 0")
    return 100.0 * abs(detected_hz - sent_hz) / sent_hz


def vibration_send(symbol, alphabet=None, duration_ms=cal.SYMBOL_MS):
    """Map a symbol to its drive tone."""
    if alphabet is None:
        alphabet = Alphabet()
    index = symbol.index if isinstance(symbol, Symbol) else int(symbol)
    return ToneSpec(alphabet.frequency(index), duration_ms, 1.0)


def _analysis_windows(n, window_len):
    """Start offsets for up to five overlapping windows covering n samples."""
    if n <= window_len:
        return [0]
    hop = (n - window_len) // 4
    if hop == 0:
        return [0, n - window_len]
    starts = []
    for i in range(5):
        s = min(i * hop, n - window_len)
        if s not in starts:
            starts.append(s)
    return starts


def vibration_receive(wave, alphabet=None, threshold=cal.DETECTION_THRESHOLD,
                      window_len=None):
    """Decode one symbol interval.

    Runs peak detection in up to five overlapping windows and majority-
    votes the snapped results.  Returns a ``Symbol`` when the winning
    vote lies on the alphabet grid, ``UnknownFrequency`` when a
    confident peak does not snap to any tone, and ``NO_SIGNAL`` when no
    window cleared the threshold.

    ``threshold`` is calibrated for the default window; shorter windows
    see a proportionally higher noise floor, so the per-window bar is
    scaled by sqrt(default_window / window).
    """
    if alphabet is None:
        alphabet = Alphabet()
    n = len(wave)
    if window_len is None:
        if n < 32:
            raise ValueError("waveform too short to analyse (needs >= 32 samples)")
        window_len = 32
        while window_len * 2 <= min(n, cal.DEFAULT_WINDOW):
            window_len *= 2
    window_threshold = threshold * math.sqrt(cal.DEFAULT_WINDOW / window_len)

    votes = []   # (kind, key, freq) per confident window
    for start in _analysis_windows(n, window_len):
        segment = Waveform(wave.samples[start:start + window_len],
                           wave.sample_rate_hz)
        det = fft_peak(segment, window_len, window_threshold)
        if not det.valid:
            continue
        idx = alphabet.index_for(det.frequency_hz)
        if idx is None:
            votes.append(("unknown", "unknown", det.frequency_hz))
        else:
            votes.append(("symbol", idx, det.frequency_hz))

    if not votes:
        return NO_SIGNAL

    tally = {}
    order = []
    for kind, key, freq in votes:
        if key not in tally:
            tally[key] = 0
            order.append((kind, key, freq))
        tally[key] += 1
    winner = max(order, key=lambda item: (tally[item[1]], -order.index(item)))
    kind, key, freq = winner
    if kind == "unknown":
        return UnknownFrequency(freq)
    return Symbol(key)


def relay_hop(wave, alphabet=None, duration_ms=None,
              threshold=cal.DETECTION_THRESHOLD):
    """Detect a symbol tone and regenerate it for the next beam.

    Re-emits at the exact alphabet frequency (full drive amplitude), so
    the tone survives the hop unchanged.  Off-grid detections are not
    amplified; anything other than a clean symbol yields ``NO_SIGNAL``.
    """
    if alphabet is None:
        alphabet = Alphabet()
    outcome = vibration_receive(wave, alphabet, threshold)
    if not isinstance(outcome, Symbol):
        return NO_SIGNAL
    if duration_ms is None:
        duration_ms = wave.duration_ms
    return ToneSpec(alphabet.frequency(outcome.index), duration_ms, 1.0)
