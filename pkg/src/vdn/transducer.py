"""Transducer models: drive-tone synthesis and capture-side ADC.

The drive side mimics a microcontroller tone pin: a fixed-frequency
bipolar square wave.  The capture side mimics a cheap accelerometer
front-end: nearest-neighbour decimation to the ADC rate, clipping to
full scale and uniform quantisation.
"""

from dataclasses import dataclass

from . import _kernels as kern
from . import calibration as cal
from .waveform import Waveform


@dataclass(frozen=True)
class ToneSpec:
    """A constant tone request: frequency, duration and drive amplitude."""

    frequency_hz: float
    duration_ms: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.frequency_hz > 0:
            raise ValueError("frequency_hz must be positive")
        if not self.duration_ms > 0:
            raise ValueError("duration_ms must be positive")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")


@dataclass(frozen=True)
class AdcSpec:
    """Capture-side converter: rate, resolution and full-scale range."""

    sample_rate_hz: float = cal.ADC_RATE_HZ
    bits: int = cal.ADC_BITS
    full_scale: float = cal.ADC_FULL_SCALE

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        if not 1 <= int(self.bits) <= 24:
            raise ValueError("bits must be in 1..24")
        if not self.full_scale > 0:
            raise ValueError("full_scale must be positive")


def synthesize(tone, sample_rate_hz=cal.SYNTH_RATE_HZ):
    """Render a ToneSpec as a square wave.

    Length is ``round(duration_ms / 1000 * sample_rate_hz)`` samples.
    Rates below twice the tone frequency alias by design (the caller is
    modelling an under-sampled drive).
    """
    if not isinstance(tone, ToneSpec):
        raise TypeError("tone must be a ToneSpec")
    n = int(round(tone.duration_ms / 1000.0 * sample_rate_hz))
    samples = kern.square_wave(tone.frequency_hz, tone.amplitude,
                               n, sample_rate_hz)
    return Waveform(samples, sample_rate_hz)


def sample(wave, adc=None):
    """Capture a waveform through the ADC model.

    Nearest-neighbour decimation to ``adc.sample_rate_hz`` (no
    anti-alias filter, so out-of-band energy folds), clip to
    ``±full_scale``, quantise to a symmetric mid-tread grid with
    ``2**bits + 1`` levels.  Sampling an already-captured waveform at
    the same rate is a no-op.
    """
    if adc is None:
        adc = AdcSpec()
    if not isinstance(wave, Waveform):
        raise TypeError("wave must be a Waveform")
    resampled = kern.resample_nearest(wave.samples, wave.sample_rate_hz,
                                      adc.sample_rate_hz)
    quantised = kern.quantize(resampled, adc.full_scale, int(adc.bits))
    return Waveform(quantised, adc.sample_rate_hz)
