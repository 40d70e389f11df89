"""Pure-Python (numpy) implementations of the hot numeric kernels.

These are the reference semantics; ``vdn._kernels._core`` is a compiled
drop-in replacement built from the same definitions.  Keep the two in
lock-step: the test suite asserts parity.
"""

import numpy as np


def square_wave(freq_hz, amplitude, n_samples, sample_rate_hz):
    """Ideal bipolar square wave, first half-period positive.

    Sample i is ``+amplitude`` while ``(freq/rate * i) mod 1 < 0.5``
    and ``-amplitude`` otherwise.
    """
    inc = float(freq_hz) / float(sample_rate_hz)
    phase = (inc * np.arange(n_samples, dtype=np.float64)) % 1.0
    out = np.where(phase < 0.5, float(amplitude), -float(amplitude))
    return out.astype(np.float64, copy=False)


def resample_nearest(samples, in_rate_hz, out_rate_hz):
    """Nearest-neighbour resampling (zero-order pick, no filtering).

    Output length is ``round(n * out/in)``; output sample j copies the
    input sample whose time is closest to ``j / out_rate``.
    """
    x = np.asarray(samples, dtype=np.float64)
    n_in = x.shape[0]
    n_out = int(round(n_in * float(out_rate_hz) / float(in_rate_hz)))
    if n_out <= 0 or n_in == 0:
        return np.zeros(0, dtype=np.float64)
    ratio = float(in_rate_hz) / float(out_rate_hz)
    idx = np.rint(np.arange(n_out, dtype=np.float64) * ratio).astype(np.int64)
    np.clip(idx, 0, n_in - 1, out=idx)
    return x[idx]


def quantize(samples, full_scale, bits):
    """Clip to ±full_scale then round to a symmetric mid-tread grid.

    The grid holds ``2**bits + 1`` levels spaced ``2*full_scale / 2**bits``
    apart, so 0.0 is always an exact level and the worst-case rounding
    error of an in-range sample is ``full_scale / 2**bits``.
    """
    x = np.asarray(samples, dtype=np.float64)
    fs = float(full_scale)
    step = 2.0 * fs / float(1 << bits)
    half = float(1 << (bits - 1))
    k = np.clip(np.rint(np.clip(x, -fs, fs) / step), -half, half)
    return k * step


def spectrum_mags(samples):
    """Normalised magnitude spectrum of a real signal.

    Returns ``2/N * |X[k]|`` for bins 0..N//2, so a full-scale sine that
    lands exactly on a bin reads close to its amplitude.
    """
    x = np.asarray(samples, dtype=np.float64)
    n = x.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.float64)
    return np.abs(np.fft.rfft(x)) * (2.0 / n)
