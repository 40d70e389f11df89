"""Sampled-signal container shared by every layer of the stack."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Waveform:
    """Real-valued samples at a fixed rate.

    Samples are stored as a float64 numpy array; the container is
    logically immutable (treat ``samples`` as read-only).
    """

    samples: np.ndarray = field(repr=False)
    sample_rate_hz: float

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("waveform samples must be one-dimensional")
        if not float(self.sample_rate_hz) > 0.0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration_ms(self):
        return len(self) / self.sample_rate_hz * 1000.0

    def slice_ms(self, start_ms, end_ms):
        """Sub-waveform covering [start_ms, end_ms)."""
        if end_ms < start_ms:
            raise ValueError("end_ms must be >= start_ms")
        i0 = int(round(start_ms / 1000.0 * self.sample_rate_hz))
        i1 = int(round(end_ms / 1000.0 * self.sample_rate_hz))
        i0 = max(0, i0)
        i1 = min(len(self), i1)
        return Waveform(self.samples[i0:i1], self.sample_rate_hz)


def silence(duration_ms, sample_rate_hz):
    n = int(round(duration_ms / 1000.0 * sample_rate_hz))
    return Waveform(np.zeros(max(n, 0)), sample_rate_hz)


def sine(freq_hz, duration_ms, sample_rate_hz, amplitude=1.0):
    """Plain sine probe, handy for channel tests."""
    n = int(round(duration_ms / 1000.0 * sample_rate_hz))
    t = np.arange(n) / sample_rate_hz
    return Waveform(amplitude * np.sin(2.0 * np.pi * freq_hz * t),
                    sample_rate_hz)
