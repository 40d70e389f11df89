"""Numeric kernel backend selection.

Imports the compiled extension when it is available, otherwise the numpy
fallback.  Set ``VDN_PURE_PYTHON=1`` to force the fallback (useful for
benchmark comparisons and debugging).
"""

import os

from . import fallback

if os.environ.get("VDN_PURE_PYTHON", "") not in ("", "0"):
    _impl = fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = fallback
        BACKEND = "python"

square_wave = _impl.square_wave
resample_nearest = _impl.resample_nearest
quantize = _impl.quantize
spectrum_mags = _impl.spectrum_mags

__all__ = ["BACKEND", "square_wave", "resample_nearest", "quantize",
           "spectrum_mags", "fallback"]
