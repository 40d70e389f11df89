"""Beam propagation model.

A thin metal beam driven by a surface transducer behaves as a frequency-
selective, spatially decaying channel: response collapses below ~1.7 kHz
(low tones show up mostly through their second harmonic), a few broad
response lobes span the 1.75-5 kHz band with a resonance bump between
4.1 and 5.1 kHz, and amplitude falls off with tap separation, modulated
by standing-wave peaks and dips that depend on how the beam is mounted.
"""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import calibration as cal
from .waveform import Waveform


class BoundaryCondition(enum.Enum):
    """How the beam is mounted; controls spatial decay and standing waves."""

    SUPPORTED = "supported"
    CLAMPED_AT_ENDS = "clamped_at_ends"
    CONSTRAINED_THROUGHOUT = "constrained_throughout"

    @classmethod
    def from_name(cls, name):
        key = str(name).strip().lower().replace("-", "_").replace(" ", "_")
        for bc in cls:
            if bc.value == key:
                return bc
        raise ValueError(f"unknown boundary condition: {name!r}")


@dataclass(frozen=True)
class MediumSpec:
    """Physical description of one beam segment."""

    length_mm: float = cal.BEAM_LENGTH_MM
    width_mm: float = cal.BEAM_WIDTH_MM
    thickness_mm: float = cal.BEAM_THICKNESS_MM
    boundary: BoundaryCondition = BoundaryCondition.SUPPORTED
    noise_rms: float = cal.DEFAULT_NOISE_RMS
    resonance_low_hz: float = 4100.0
    resonance_high_hz: float = 5100.0
    harmonic_leak: float = cal.DEFAULT_HARMONIC_LEAK

    def __post_init__(self):
        if not self.length_mm > 0:
            raise ValueError("length_mm must be positive")
        if self.width_mm <= 0 or self.thickness_mm <= 0:
            raise ValueError("beam cross-section must be positive")
        if self.noise_rms < 0:
            raise ValueError("noise_rms must be >= 0")
        if not 0.0 <= self.harmonic_leak <= 1.0:
            raise ValueError("harmonic_leak must be in [0, 1]")
        if not self.resonance_low_hz < self.resonance_high_hz:
            raise ValueError("resonance band must have low < high")
        if not isinstance(self.boundary, BoundaryCondition):
            object.__setattr__(self, "boundary",
                               BoundaryCondition.from_name(self.boundary))

    def with_boundary(self, boundary):
        return replace(self, boundary=boundary)


@dataclass(frozen=True)
class TapPoint:
    """A transducer attachment position along the beam, in millimetres."""

    position_mm: float

    def __post_init__(self):
        if self.position_mm < 0:
            raise ValueError("tap position must be >= 0")


def _gauss(f, centre, width):
    return np.exp(-0.5 * ((f - centre) / width) ** 2)


def _logistic(x):
    return 1.0 / (1.0 + np.exp(-x))


def _body_response(f, medium):
    """Response lobes (plus resonance band) with the rational low-cut.

    This is the beam itself, without the drive-coupling edge; the
    second-harmonic leak path sees exactly this.
    """
    lobes = np.zeros_like(f)
    for centre, width, amp in cal.GAIN_LOBES:
        lobes = lobes + amp * _gauss(f, centre, width)
    bc, bw, ba = cal.BODY_LOBE
    lobes = lobes + ba * _gauss(f, bc, bw)
    lobes = lobes + cal.RESONANCE_GAIN * (
        _logistic((f - medium.resonance_low_hz) / cal.RESONANCE_EDGE_HZ)
        * _logistic((medium.resonance_high_hz - f) / cal.RESONANCE_EDGE_HZ))
    lowcut = np.where(f > 0,
                      f * f / (f * f + cal.LOW_CUT_CORNER_HZ ** 2), 0.0)
    return lobes * lowcut


def gain_profile(freq_hz, medium=None):
    """Amplitude transfer of the beam at a given frequency.

    Scalar in, scalar out; arrays are supported for vectorised use.
    The profile is a sum of response lobes plus an extra contribution
    inside the medium's resonance band, gated by a steep low-frequency
    drive-coupling edge.  Exactly zero at 0 Hz, decaying above the
    resonance band.
    """
    if medium is None:
        medium = MediumSpec()
    f = np.asarray(freq_hz, dtype=np.float64)
    if np.any(f < 0):
        raise ValueError("frequency must be >= 0")

    edge = _logistic((f - cal.LOW_EDGE_CENTER_HZ) / cal.LOW_EDGE_WIDTH_HZ)
    out = _body_response(f, medium) * edge
    if np.isscalar(freq_hz) or np.ndim(freq_hz) == 0:
        return float(out)
    return out


def spatial_profile(distance_mm, medium=None):
    """Amplitude ratio after travelling ``distance_mm`` along the beam.

    Exponential decay whose rate depends on the mounting, multiplied by
    a standing-wave modulation (peaks and dips) for mountings that allow
    reflections.  A beam constrained along its whole length damps fastest
    and shows no standing-wave structure.  Returns exactly 1.0 at zero
    distance and is monotone in the constrained case.
    """
    if medium is None:
        medium = MediumSpec()
    d = float(distance_mm)
    if d < 0:
        raise ValueError("distance must be >= 0")
    if d > medium.length_mm:
        raise ValueError("distance exceeds beam length")

    key = medium.boundary.value
    envelope = math.exp(-cal.SPATIAL_DECAY_PER_MM[key] * d)
    wavelength = cal.STANDING_WAVE_MM.get(key)
    if wavelength is None:
        return envelope
    floor = cal.STANDING_DIP_FLOOR
    mod = floor + (1.0 - floor) * abs(math.cos(2.0 * math.pi * d / wavelength))
    return envelope * mod


def propagate(wave, medium, src, dst, seed=None):
    """Send a waveform through the beam from one tap point to another.

    Applies the frequency response and spatial decay, moves a fraction
    of a sub-cutoff tone's energy to its second harmonic, then adds
    Gaussian sensor noise (``medium.noise_rms``, reproducible via
    ``seed``).  Output has the same sample rate and length as the input.
    """
    if not isinstance(wave, Waveform):
        raise TypeError("wave must be a Waveform")
    for tap in (src, dst):
        if not 0.0 <= tap.position_mm <= medium.length_mm:
            raise ValueError(
                f"tap at {tap.position_mm} mm is off the beam "
                f"(length {medium.length_mm} mm)")

    n = len(wave)
    if n == 0:
        return Waveform(np.zeros(0), wave.sample_rate_hz)

    spectrum = np.fft.rfft(wave.samples)
    freqs = np.fft.rfftfreq(n, d=1.0 / wave.sample_rate_hz)

    distance = abs(dst.position_mm - src.position_mm)
    spatial = spatial_profile(distance, medium)
    shaped = spectrum * (gain_profile(freqs, medium) * spatial)

    # Second-harmonic leak: a dominant drive tone below the cutoff cannot
    # couple at its own frequency, but the nonlinear contact excites the
    # beam at twice the frequency, bypassing the drive-coupling edge.
    mags = np.abs(spectrum)
    if n > 1 and mags[1:].max() > 0.0:
        k0 = int(np.argmax(mags[1:])) + 1
        f0 = freqs[k0]
        leak = medium.harmonic_leak
        if 0.0 < f0 < cal.HARMONIC_CUTOFF_HZ and leak > 0.0 and 2 * k0 < len(spectrum):
            shaped[k0] *= math.sqrt(1.0 - leak)
            leak_gain = float(_body_response(np.float64(freqs[2 * k0]), medium))
            shaped[2 * k0] += (spectrum[k0] * math.sqrt(leak)
                               * leak_gain * spatial)

    out = np.fft.irfft(shaped, n=n)

    if medium.noise_rms > 0.0:
        rng = np.random.default_rng(seed)
        out = out + rng.normal(0.0, medium.noise_rms, n)
    return Waveform(out, wave.sample_rate_hz)
