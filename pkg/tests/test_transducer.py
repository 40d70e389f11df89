"""Tone synthesis and the ADC model (decimation + clip + quantize)."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vdn import calibration as cal
from vdn.transducer import AdcSpec, ToneSpec, sample, synthesize
from vdn.waveform import Waveform, sine

from oracles import dft_mags, nyquist_fold


# --- specs -------------------------------------------------------------------

def test_tone_spec_validation():
    ToneSpec(3000.0, 50.0, 1.0)
    for bad in [(0.0, 50.0, 1.0), (3000.0, 0.0, 1.0), (3000.0, 50.0, 0.0),
                (-1.0, 50.0, 1.0)]:
        with pytest.raises(ValueError):
            ToneSpec(*bad)


def test_adc_spec_defaults_and_validation():
    adc = AdcSpec()
    assert (adc.sample_rate_hz, adc.bits, adc.full_scale) == (10_000.0, 10, 1.5)
    with pytest.raises(ValueError):
        AdcSpec(bits=0)
    with pytest.raises(ValueError):
        AdcSpec(bits=25)
    with pytest.raises(ValueError):
        AdcSpec(sample_rate_hz=0.0)
    with pytest.raises(ValueError):
        AdcSpec(full_scale=-1.0)


# --- synthesis -----------------------------------------------------------------

def test_synthesize_length_and_dominant_bin():
    wave = synthesize(ToneSpec(3000.0, 100.0, 1.0), sample_rate_hz=48_000.0)
    assert len(wave) == 4800 and wave.sample_rate_hz == 48_000.0
    mags = dft_mags(wave.samples)
    k = int(np.argmax(mags[1:])) + 1
    assert k * 48_000.0 / 4800 == pytest.approx(3000.0, abs=10.0)


def test_synthesize_square_takes_only_plus_minus_amplitude():
    wave = synthesize(ToneSpec(1000.0, 1.0, 0.5), sample_rate_hz=10_000.0)
    assert len(wave) == 10
    assert set(np.unique(wave.samples)) == {-0.5, 0.5}


def test_synthesize_default_rate_is_integer_multiple_of_adc_rate():
    wave = synthesize(ToneSpec(3000.0, 50.0, 1.0))
    assert wave.sample_rate_hz == cal.SYNTH_RATE_HZ
    assert cal.SYNTH_RATE_HZ % cal.ADC_RATE_HZ == 0


# --- sampling -------------------------------------------------------------------

def test_sample_zero_waveform_is_all_zero():
    wave = Waveform(np.zeros(4800), 48_000.0)
    out = sample(wave, AdcSpec())
    assert out.sample_rate_hz == 10_000.0
    assert np.array_equal(out.samples, np.zeros(1000))


def test_sample_folds_7500_to_2500():
    wave = sine(7500.0, 204.8, 48_000.0)
    out = sample(wave, AdcSpec())
    mags = dft_mags(out.samples[:2048])
    k = int(np.argmax(mags[1:])) + 1
    assert nyquist_fold(7500.0, 10_000.0) == 2500.0
    assert abs(k * 10_000.0 / 2048 - 2500.0) <= 10_000.0 / 2048


def test_sample_keeps_in_band_tone_and_bounds_quantization_error():
    wave = sine(3000.0, 204.8, 48_000.0)
    adc = AdcSpec()
    out = sample(wave, adc)
    mags = dft_mags(out.samples[:2048])
    k = int(np.argmax(mags[1:])) + 1
    assert abs(k * 10_000.0 / 2048 - 3000.0) <= 10_000.0 / 2048
    # Same decimation without quantization: error is at most half a step.
    raw = sample(wave, AdcSpec(bits=24))
    err = np.max(np.abs(out.samples - raw.samples))
    assert err <= adc.full_scale / 2 ** adc.bits + 1.5 / 2 ** 24


def test_sample_clips_to_full_scale():
    wave = Waveform(np.array([-3.0, -1.0, 0.0, 1.0, 3.0]), 10_000.0)
    out = sample(wave, AdcSpec())
    assert np.max(np.abs(out.samples)) <= 1.5
    assert out.samples[0] == -1.5 and out.samples[-1] == 1.5


def test_sample_output_is_on_quantizer_grid():
    rng = np.random.default_rng(0)
    wave = Waveform(rng.uniform(-2.0, 2.0, size=4000), 40_000.0)
    adc = AdcSpec()
    out = sample(wave, adc)
    step = 2.0 * adc.full_scale / 2 ** adc.bits
    k = out.samples / step
    assert np.allclose(k, np.rint(k), atol=1e-9)


@settings(deadline=None)
@given(st.floats(100.0, 20_000.0), st.floats(1.0, 80.0))
def test_synthesize_sample_count_tracks_duration(freq, duration):
    wave = synthesize(ToneSpec(freq, duration, 1.0))
    assert len(wave) == int(round(duration / 1000.0 * cal.SYNTH_RATE_HZ))
