# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels.

Semantics match ``vdn._kernels.fallback`` exactly (same rounding rules);
the test suite checks parity between the two backends.
"""

import numpy as np

from libc.math cimport cos, fmod, hypot, rint, sin

cdef double C_PI = 3.141592653589793115997963468544185161590576171875


def square_wave(freq_hz, amplitude, n_samples, sample_rate_hz):
    """Ideal bipolar square wave, first half-period positive."""
    cdef Py_ssize_t n = n_samples
    cdef double inc = <double>freq_hz / <double>sample_rate_hz
    cdef double amp = <double>amplitude
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double ph
    for i in range(n):
        ph = fmod(inc * <double>i, 1.0)
        if ph < 0.0:
            ph += 1.0
        o[i] = amp if ph < 0.5 else -amp
    return out


def resample_nearest(samples, in_rate_hz, out_rate_hz):
    """Nearest-neighbour resampling (zero-order pick, no filtering)."""
    x = np.ascontiguousarray(samples, dtype=np.float64)
    cdef Py_ssize_t n_in = x.shape[0]
    cdef Py_ssize_t n_out = <Py_ssize_t>round(
        n_in * float(out_rate_hz) / float(in_rate_hz))
    if n_out <= 0 or n_in == 0:
        return np.zeros(0, dtype=np.float64)
    cdef double ratio = <double>in_rate_hz / <double>out_rate_hz
    out = np.empty(n_out, dtype=np.float64)
    cdef double[::1] xv = x
    cdef double[::1] o = out
    cdef Py_ssize_t j, idx
    for j in range(n_out):
        idx = <Py_ssize_t>rint(<double>j * ratio)
        if idx < 0:
            idx = 0
        elif idx >= n_in:
            idx = n_in - 1
        o[j] = xv[idx]
    return out


def quantize(samples, full_scale, bits):
    """Clip to ±full_scale then round to a symmetric mid-tread grid."""
    x = np.ascontiguousarray(samples, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef double fs = <double>full_scale
    cdef double step = 2.0 * fs / <double>(1 << <int>bits)
    cdef double half = <double>(1 << (<int>bits - 1))
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] xv = x
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double v, k
    for i in range(n):
        v = xv[i]
        if v > fs:
            v = fs
        elif v < -fs:
            v = -fs
        k = rint(v / step)
        if k > half:
            k = half
        elif k < -half:
            k = -half
        o[i] = k * step
    return out


def spectrum_mags(samples):
    """Normalised magnitude spectrum ``2/N * |X[k]|``, bins 0..N//2.

    Power-of-two input length required (radix-2 FFT); that is what the
    tone detector always supplies.
    """
    x = np.ascontiguousarray(samples, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.float64)
    if n & (n - 1):
        raise ValueError("spectrum_mags requires a power-of-two length")

    re = np.array(x, dtype=np.float64, copy=True)
    im = np.zeros(n, dtype=np.float64)
    cdef double[::1] a = re
    cdef double[::1] b = im

    # Bit-reversal permutation.
    cdef Py_ssize_t i, j, bit
    cdef double tmp
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            tmp = a[i]; a[i] = a[j]; a[j] = tmp
            tmp = b[i]; b[i] = b[j]; b[j] = tmp

    # Iterative Cooley-Tukey butterflies.
    cdef Py_ssize_t length, half_len, start, k
    cdef double ang, wr, wi, cr, ci, ur, ui, vr, vi
    length = 2
    while length <= n:
        half_len = length >> 1
        ang = -2.0 * C_PI / <double>length
        wr = cos(ang)
        wi = sin(ang)
        start = 0
        while start < n:
            cr = 1.0
            ci = 0.0
            for k in range(half_len):
                ur = a[start + k]
                ui = b[start + k]
                vr = a[start + k + half_len] * cr - b[start + k + half_len] * ci
                vi = a[start + k + half_len] * ci + b[start + k + half_len] * cr
                a[start + k] = ur + vr
                b[start + k] = ui + vi
                a[start + k + half_len] = ur - vr
                b[start + k + half_len] = ui - vi
                tmp = cr
                cr = cr * wr - ci * wi
                ci = tmp * wi + ci * wr
            start += length
        length <<= 1

    cdef Py_ssize_t n_bins = n // 2 + 1
    mags = np.empty(n_bins, dtype=np.float64)
    cdef double[::1] m = mags
    cdef double scale = 2.0 / <double>n
    for i in range(n_bins):
        m[i] = hypot(a[i], b[i]) * scale
    return mags
