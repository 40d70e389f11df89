"""Frozen numeric calibration for the simulated beam channel.

Every empirical constant in the simulator lives here: the frequency
response lobes of the aluminium test beam, spatial decay rates per
mounting condition, noise level, detection threshold and the modem's
default rates.  The values were tuned once against the reference
behaviours (usable band 1750-5000 Hz, resonance bump at 4100-5100 Hz,
harmonic-dominated response below 1750 Hz, ~95 % single-tone accuracy
at the far tap) and are not meant to be edited casually: the acceptance
suite pins them down.
"""

# --- frequency response -------------------------------------------------
# Gaussian response lobes: (centre_hz, width_hz, amplitude).
GAIN_LOBES = (
    (1750.0, 300.0, 0.50),
    (3000.0, 450.0, 0.72),
    (4500.0, 400.0, 0.50),
)
# Broad body lobe covering the whole excitable range.
BODY_LOBE = (4600.0, 2000.0, 0.20)
# Extra response inside the resonance band (edges come from MediumSpec).
RESONANCE_GAIN = 0.35
RESONANCE_EDGE_HZ = 150.0
# Logistic low-frequency edge: response collapses below ~1.7 kHz.
LOW_EDGE_CENTER_HZ = 1680.0
LOW_EDGE_WIDTH_HZ = 30.0
# Rational low-cut so the response is exactly zero at 0 Hz.
LOW_CUT_CORNER_HZ = 400.0

# Tones below this excite the beam mostly through their second harmonic.
HARMONIC_CUTOFF_HZ = 1750.0
DEFAULT_HARMONIC_LEAK = 0.25

# --- spatial decay ------------------------------------------------------
# Exponential decay per millimetre of tap separation, by mounting.
SPATIAL_DECAY_PER_MM = {
    "supported": 0.0015,
    "clamped_at_ends": 0.0022,
    "constrained_throughout": 0.023,
}
# Standing-wave modulation wavelength (mm); set by the flexural wave, so
# shared by both reflective mountings.  Constrained mounting has none.
STANDING_WAVE_MM = {
    "supported": 120.0,
    "clamped_at_ends": 120.0,
}
# Modulation never drops the envelope below this fraction.
STANDING_DIP_FLOOR = 0.05

# --- noise / detection --------------------------------------------------
DEFAULT_NOISE_RMS = 0.06
DETECTION_THRESHOLD = 0.02

# --- rates and framing --------------------------------------------------
SYNTH_RATE_HZ = 40000.0     # tone synthesis rate (4x the ADC rate)
ADC_RATE_HZ = 10000.0
ADC_BITS = 10
ADC_FULL_SCALE = 1.5
DEFAULT_WINDOW = 1024
SYMBOL_MS = 50.0
SWEEP_TONE_MS = 120.0

# --- alphabet -----------------------------------------------------------
ALPHABET_BASE_HZ = 2000.0
ALPHABET_SPACING_HZ = 250.0
ALPHABET_SIZE = 13

# --- physical default beam ----------------------------------------------
BEAM_LENGTH_MM = 620.0
BEAM_WIDTH_MM = 50.0
BEAM_THICKNESS_MM = 1.0
NEAR_TAP_MM = 50.0
FAR_TAP_MM = 550.0
