"""Vibration-defined networking simulator.

A management network that signals through structural vibrations: tones
driven into a metal beam carry event patterns and small framed payloads
from monitors to collectors, optionally regenerated across beams by
relay taps.  The package models the physical channel, the tone modem,
the link layer and the control plane, plus the experiment harness that
characterises the whole stack.
"""

from . import calibration
from ._kernels import BACKEND as kernel_backend
from .errors import (AmbiguousPatternError, ChecksumError, DecodeError,
                     DuplicateEventError, FlowParseError, FramingError,
                     PathBrokenError, RoleViolationError, UnboundEventError,
                     VdnError)
from .link import (Frame, MacSchedule, DeferUntil, TransmitWindow, crc8,
                   frame_decode, frame_encode, mac_grant)
from .medium import (BoundaryCondition, MediumSpec, TapPoint, gain_profile,
                     propagate, spatial_profile)
from .modem import (NO_SIGNAL, Alphabet, DetectionResult, NoSignal, Symbol,
                    UnknownFrequency, fft_peak, percent_error, relay_hop,
                    vibration_receive, vibration_send)
from .transducer import AdcSpec, ToneSpec, sample, synthesize
from .waveform import Waveform, silence, sine

__version__ = "0.1.0"

__all__ = [
    "calibration", "kernel_backend", "__version__",
    "VdnError", "FramingError", "ChecksumError", "DecodeError",
    "DuplicateEventError", "AmbiguousPatternError", "UnboundEventError",
    "RoleViolationError", "PathBrokenError", "FlowParseError",
    "Waveform", "silence", "sine",
    "MediumSpec", "BoundaryCondition", "TapPoint", "gain_profile",
    "spatial_profile", "propagate",
    "ToneSpec", "AdcSpec", "synthesize", "sample",
    "Alphabet", "Symbol", "UnknownFrequency", "NoSignal", "NO_SIGNAL",
    "DetectionResult", "fft_peak", "percent_error", "vibration_send",
    "vibration_receive", "relay_hop",
    "Frame", "crc8", "frame_encode", "frame_decode", "MacSchedule",
    "TransmitWindow", "DeferUntil", "mac_grant",
]
