#!/usr/bin/env python3
"""Benchmark the compiled numeric kernels against the numpy fallback.

Runs each kernel on a representative workload with both backends and
prints per-call timings plus the speedup.  The compiled extension is
optional; when it is missing the script still runs and says so.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat N] [--number N]
"""

import argparse
import statistics
import time

import numpy as np

from vdn._kernels import fallback

try:
    from vdn._kernels import _core
except ImportError:
    _core = None


def _bench(func, args, *, number, repeat):
    """Best mean per-call time (seconds) over ``repeat`` batches."""
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        for _ in range(number):
            func(*args)
        times.append((time.perf_counter() - start) / number)
    return min(times), statistics.median(times)


def _workloads(rng):
    tone = rng.normal(size=48_000)
    window = rng.normal(size=1024)
    return [
        ("square_wave", "3 kHz, 1 s @ 40 kHz",
         "square_wave", (3000.0, 1.0, 40_000, 40_000.0)),
        ("resample_nearest", "48 kHz -> 10 kHz, 1 s",
         "resample_nearest", (tone, 48_000.0, 10_000.0)),
        ("quantize", "10-bit, 48 k samples",
         "quantize", (tone, 1.5, 10)),
        ("spectrum_mags", "1024-point window",
         "spectrum_mags", (window,)),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--number", type=int, default=200,
                        help="calls per timing batch (default 200)")
    parser.add_argument("--repeat", type=int, default=5,
                        help="timing batches per kernel (default 5)")
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    rows = []
    for label, workload, name, call_args in _workloads(rng):
        py_best, _ = _bench(getattr(fallback, name), call_args,
                            number=args.number, repeat=args.repeat)
        if _core is None:
            rows.append((label, workload, py_best, None, None))
            continue
        c_best, _ = _bench(getattr(_core, name), call_args,
                           number=args.number, repeat=args.repeat)
        got = np.asarray(getattr(_core, name)(*call_args))
        want = np.asarray(getattr(fallback, name)(*call_args))
        if not np.allclose(got, want, rtol=1e-12, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree, refusing to report")
        rows.append((label, workload, py_best, c_best, py_best / c_best))

    print(f"{'kernel':<18} {'workload':<24} {'python':>12} "
          f"{'compiled':>12} {'speedup':>9}")
    print("-" * 79)
    for label, workload, py_best, c_best, speed in rows:
        py_s = f"{py_best * 1e6:10.1f} us"
        if c_best is None:
            print(f"{label:<18} {workload:<24} {py_s:>12} {'n/a':>12} "
                  f"{'n/a':>9}")
        else:
            c_s = f"{c_best * 1e6:10.1f} us"
            print(f"{label:<18} {workload:<24} {py_s:>12} {c_s:>12} "
                  f"{speed:>8.2f}x")
    if _core is None:
        print("\ncompiled extension not importable; only the numpy "
              "fallback was timed")


if __name__ == "__main__":
    main()
