"""Independent reference implementations used to check the package.

Everything here is deliberately naive: the spectrum oracle is a
brute-force O(N^2) DFT that shares no code with ``numpy.fft`` or the
compiled kernels, and the CRC oracle shifts bits one at a time.
"""

import numpy as np

_BATCH_CACHE = {}


def _dft_basis(n):
    """Cos/sin matrices for the one-sided DFT of a length-``n`` signal."""
    k = np.arange(n // 2 + 1)[:, None]
    t = np.arange(n)[None, :]
    ang = 2.0 * np.pi * k * t / n
    return np.cos(ang), np.sin(ang)


def dft_mags(x):
    """One-sided magnitude spectrum by direct summation, scaled 2|X[k]|/N.

    Accepts any length (no power-of-two requirement).  Bins are computed
    in chunks so large inputs stay within memory.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    n_bins = n // 2 + 1
    mags = np.empty(n_bins)
    t = np.arange(n)
    chunk = 128
    for start in range(0, n_bins, chunk):
        k = np.arange(start, min(start + chunk, n_bins))[:, None]
        ang = 2.0 * np.pi * k * t[None, :] / n
        re = np.cos(ang) @ x
        im = np.sin(ang) @ x
        mags[start:start + k.size] = np.hypot(re, im)
    return mags * (2.0 / n)


def dft_mags_batch(columns):
    """dft_mags of every column of a (n, m) array, as a (n//2+1, m) array."""
    columns = np.asarray(columns, dtype=np.float64)
    n = columns.shape[0]
    if n not in _BATCH_CACHE:
        _BATCH_CACHE[n] = _dft_basis(n)
    cos_m, sin_m = _BATCH_CACHE[n]
    return np.hypot(cos_m @ columns, sin_m @ columns) * (2.0 / n)


def dft_argmax_bin(x):
    """Index of the strongest non-DC bin of the brute-force spectrum."""
    mags = dft_mags(x)
    return int(np.argmax(mags[1:])) + 1


def crc8_bitwise(data):
    """CRC-8, polynomial 0x07, init 0x00, one bit at a time."""
    crc = 0
    for byte in bytes(data):
        crc ^= byte
        for _ in range(8):
            if crc & 0x80:
                crc = ((crc << 1) ^ 0x07) & 0xFF
            else:
                crc = (crc << 1) & 0xFF
    return crc


def nyquist_fold(freq_hz, rate_hz):
    """Apparent frequency of ``freq_hz`` when sampled at ``rate_hz``."""
    r = freq_hz % rate_hz
    return min(r, rate_hz - r)


def heavy_hitters_by_scan(flows, threshold_bytes, window_ms):
    """Tumbling-window heavy hitters by whole-stream rescan per flow.

    Returns (src, dst, window_start_ms, timestamp_ms) tuples: one per
    (src, dst, window) whose byte total crosses the threshold, stamped
    at the record that first crossed it.
    """
    out = []
    seen = set()
    for i, flow in enumerate(flows):
        window = int(flow.timestamp_ms // window_ms)
        key = (flow.src, flow.dst, window)
        if key in seen:
            continue
        total = sum(f.bytes for f in flows[:i + 1]
                    if (f.src, f.dst, int(f.timestamp_ms // window_ms)) == key)
        if total >= threshold_bytes:
            seen.add(key)
            out.append((flow.src, flow.dst, window * window_ms,
                        flow.timestamp_ms))
    return out


def ddos_alerts_by_scan(hits, distinct_sources, window_ms):
    """Sliding-window distinct-source alerts by full rescan per report.

    ``hits`` is a list of (timestamp_ms, src, dst).  A destination
    alerts when >= ``distinct_sources`` sources hit it inside
    (t - window, t]; it must drop below the threshold before it can
    alert again.  Returns (dst, timestamp_ms, sorted sources) tuples.
    """
    alerts = []
    armed = {}
    for i, (t, _, dst) in enumerate(hits):
        sources = sorted({s for (u, s, d) in hits[:i + 1]
                          if d == dst and t - window_ms < u <= t})
        if len(sources) >= distinct_sources:
            if armed.get(dst, True):
                armed[dst] = False
                alerts.append((dst, t, tuple(sources)))
        else:
            armed[dst] = True
    return alerts
