import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from sscfkit.dsp import bin_frequencies
from sscfkit.errors import ConfigurationError
from sscfkit.spectral import (
    SubbandSpec, build_mel_filterbank, default_subbands, hz_to_mel, lifter_weights,
    log_filterbank_energies, mfcc, sscf, sscf_track, validate_subbands,
)

from oracles import mel_inverse, naive_dct2_ortho, naive_idct2_ortho, weighted_centroid

SR, NFFT = 16000, 512
BIN = SR / NFFT
FREQS = bin_frequencies(NFFT, SR)


class TestMelFilterbank:
    def test_mel_of_700(self):
        assert hz_to_mel(700.0) == pytest.approx(781.1728387480312, abs=1e-9)

    def test_single_filter_spans_range(self):
        fb = build_mel_filterbank(1, 0.0, 8000.0, NFFT, SR)
        support = np.nonzero(fb.weights[0])[0]
        assert fb.edges_hz[0] == 0.0 and fb.edges_hz[-1] == 8000.0
        assert support[0] == 1 and support[-1] == 255
        assert fb.weights[0].max() == 1.0

    @pytest.mark.parametrize("n", [6, 13, 26, 40])
    def test_shape_invariants(self, n):
        fb = build_mel_filterbank(n, 0.0, 8000.0, NFFT, SR)
        assert fb.weights.shape == (n, 257)
        assert np.all(np.diff(fb.edges_hz) > 0)
        for row in fb.weights:
            assert np.all(row >= 0)
            assert row.max() == 1.0
            nz = np.nonzero(row)[0]
            assert np.array_equal(nz, np.arange(nz[0], nz[-1] + 1))

    @pytest.mark.parametrize("n", [6, 13, 26])
    def test_overlap_sum_at_most_one(self, n):
        fb = build_mel_filterbank(n, 0.0, 8000.0, NFFT, SR)
        assert np.all(fb.weights.sum(axis=0) <= 1.0 + 1e-12)

    def test_centres_equally_spaced_in_mel(self):
        fb = build_mel_filterbank(13, 0.0, 8000.0, NFFT, SR)
        np.testing.assert_allclose(np.diff(hz_to_mel(fb.edges_hz)), hz_to_mel(8000.0) / 14, rtol=1e-9)

    def test_too_many_filters(self):
        with pytest.raises(ConfigurationError):
            build_mel_filterbank(200, 0.0, 8000.0, NFFT, SR)

    def test_bad_range(self):
        with pytest.raises(ConfigurationError):
            build_mel_filterbank(6, 100.0, 9000.0, NFFT, SR)


class TestMfcc:
    def test_flat_log_energies_only_c0(self):
        fb = build_mel_filterbank(13, 0.0, 8000.0, NFFT, SR)
        # a spectrum whose filter energies are all equal
        energies = np.full(13, 5.0)
        power = np.linalg.lstsq(fb.weights, energies, rcond=None)[0]
        np.testing.assert_allclose(fb.weights @ power, energies, rtol=1e-9)
        c = mfcc(power, fb, 13, lifter=0)
        assert c[0] == pytest.approx(math.sqrt(13) * math.log(5.0), rel=1e-9)
        np.testing.assert_allclose(c[1:], 0.0, atol=1e-9)

    def test_lifter_weights(self):
        w = lifter_weights(13, 22)
        assert w[0] == 1.0
        k = np.arange(13)
        np.testing.assert_allclose(w, 1 + 11 * np.sin(np.pi * k / 22), rtol=1e-15)

    def test_against_direct_dct(self, rng):
        fb = build_mel_filterbank(13, 0.0, 8000.0, NFFT, SR)
        for _ in range(5):
            power = rng.exponential(1.0, 257)
            fast = mfcc(power, fb, 13, lifter=22)
            logs = [math.log(max(e, 1e-10)) for e in fb.weights @ power]
            lift = [1 + 11 * math.sin(math.pi * k / 22) for k in range(13)]
            slow = naive_dct2_ortho(logs) * np.array(lift)
            np.testing.assert_allclose(fast, slow, atol=1e-8, rtol=0)

    def test_fewer_coefficients_is_prefix(self, rng):
        fb = build_mel_filterbank(6, 0.0, 8000.0, NFFT, SR)
        power = rng.exponential(1.0, (4, 257))
        assert mfcc(power, fb, 6).shape == (4, 6)
        np.testing.assert_allclose(mfcc(power, fb, 4), mfcc(power, fb, 6)[:, :4])

    def test_inverse_dct_recovers_log_energies(self, rng):
        fb = build_mel_filterbank(13, 0.0, 8000.0, NFFT, SR)
        power = rng.exponential(1.0, 257)
        c = mfcc(power, fb, 13, lifter=0)
        np.testing.assert_allclose(naive_idct2_ortho(c), log_filterbank_energies(power, fb), atol=1e-9)

    def test_silence_floored(self):
        fb = build_mel_filterbank(6, 0.0, 8000.0, NFFT, SR)
        c = mfcc(np.zeros(257), fb, 6)
        assert np.all(np.isfinite(c))
        assert c[0] == pytest.approx(math.sqrt(6) * math.log(1e-10))

    def test_too_many_coefs(self):
        fb = build_mel_filterbank(6, 0.0, 8000.0, NFFT, SR)
        with pytest.raises(ConfigurationError):
            mfcc(np.ones(257), fb, 13)


class TestDefaultSubbands:
    def test_contiguous_and_covering(self):
        bands = default_subbands(SR)
        assert len(bands) == 6
        assert bands[0].low_hz == 0.0 and bands[-1].high_hz == SR / 2
        for a, b in zip(bands, bands[1:]):
            assert a.high_hz == b.low_hz
        assert all(b.weight_shape == "rectangular" and b.gamma == 1.0 for b in bands)

    def test_edges_match_mel_inverse(self):
        top = 2595.0 * math.log10(1 + 8000.0 / 700.0)
        expected = [mel_inverse(top * k / 6) for k in range(7)]
        got = [b.low_hz for b in default_subbands(SR)] + [8000.0]
        np.testing.assert_allclose(got, expected, rtol=1e-12, atol=1e-9)
        # frozen for 16 kHz
        np.testing.assert_allclose(
            got, [0.0, 365.372728, 921.455786, 1767.792536, 3055.884096, 5016.309267, 8000.0], atol=1e-5
        )

    @pytest.mark.parametrize("sr", [8000, 22050, 44100])
    def test_other_rates(self, sr):
        bands = default_subbands(sr)
        validate_subbands(bands, sr)
        assert bands[-1].high_hz == sr / 2

    def test_low_rate_rejected(self):
        with pytest.raises(ConfigurationError):
            default_subbands(4000)

    def test_bad_band_spec(self):
        with pytest.raises(ConfigurationError):
            SubbandSpec(0, 500.0, 400.0)
        with pytest.raises(ConfigurationError):
            SubbandSpec(0, 0.0, 400.0, weight_shape="gaussian")
        with pytest.raises(ConfigurationError):
            SubbandSpec(0, 0.0, 400.0, gamma=0.0)
        with pytest.raises(ConfigurationError):
            validate_subbands([SubbandSpec(0, 0.0, 9000.0)], SR)
        with pytest.raises(ConfigurationError):
            validate_subbands([SubbandSpec(0, 100.0, 400.0), SubbandSpec(1, 100.0, 600.0)], SR)


class TestSscf:
    band = [SubbandSpec(0, 500.0, 1500.0)]

    def test_pure_tone(self):
        # 1000 Hz is bin 32 at 16 kHz / 512
        n = np.arange(400)
        x = np.sin(2 * np.pi * 1000.0 * n / SR) * np.hamming(400)
        power = np.abs(np.fft.rfft(x, NFFT)) ** 2
        assert abs(sscf(power, self.band, SR)[0] - 1000.0) <= BIN / 2

    def test_flat_spectrum_is_mean_bin_centre(self):
        got = sscf(np.full(257, 3.0), self.band, SR)[0]
        centres = FREQS[(FREQS >= 500) & (FREQS <= 1500)]
        assert got == pytest.approx(centres.mean(), rel=1e-12)

    def test_two_tones(self):
        power = np.zeros(257)
        power[np.argmin(abs(FREQS - 800))] = 1.0
        power[np.argmin(abs(FREQS - 1200))] = 1.0
        assert abs(sscf(power, self.band, SR)[0] - 1000.0) <= BIN

    def test_matches_loop_oracle(self, rng):
        bands = default_subbands(SR)
        power = rng.exponential(1.0, 257)
        got = sscf(power, bands, SR)
        for b, g in zip(bands, got):
            assert g == pytest.approx(weighted_centroid(FREQS, power, b.low_hz, b.high_hz), rel=1e-12)

    def test_zero_band_falls_back_to_midpoint(self):
        power = np.zeros((2, 257))
        power[1, 40] = 1.0
        track = sscf_track(power, self.band, SR)
        assert track.values[0, 0] == 1000.0 and track.degenerate[0, 0]
        assert not track.degenerate[1, 0]

    def test_triangular_weighting(self):
        band = [SubbandSpec(0, 500.0, 1500.0, weight_shape="triangular")]
        # symmetric spectrum about the midpoint stays at the midpoint
        power = np.exp(-((FREQS - 1000.0) / 200.0) ** 2)
        assert sscf(power, band, SR)[0] == pytest.approx(1000.0, abs=1e-9)

    def test_gamma_large_tracks_unique_peak(self, rng):
        bands = [SubbandSpec(m, b.low_hz, b.high_hz, gamma=8.0) for m, b in enumerate(default_subbands(SR))]
        for _ in range(50):
            power = rng.uniform(0.05, 0.3, 257)
            peaks = []
            for b in bands:
                idx = np.nonzero((FREQS >= b.low_hz) & (FREQS <= b.high_hz))[0]
                k = idx[rng.integers(1, idx.size - 1)]
                power[k] = 1.0
                peaks.append(FREQS[k])
            got = sscf(power, bands, SR)
            assert np.all(np.abs(got - peaks) <= 2 * BIN)

    def test_gamma_large_converges_to_argmax(self):
        band = [SubbandSpec(0, 500.0, 1500.0, gamma=8.0)]
        power = np.full(257, 0.5)
        power[40] = 1.0
        assert abs(sscf(power, band, SR)[0] - FREQS[40]) <= 2 * BIN


spectra = arrays(np.float64, 257, elements=st.floats(0.0, 1e6, allow_nan=False, allow_infinity=False))


@settings(max_examples=200, deadline=None)
@given(spectra)
def test_band_confinement(power):
    bands = default_subbands(SR)
    got = sscf(power, bands, SR)
    for b, g in zip(bands, got):
        assert b.low_hz - 1e-9 <= g <= b.high_hz + 1e-9


def test_band_confinement_random_batch():
    r = np.random.default_rng(3)
    bands = default_subbands(SR)
    track = sscf_track(r.exponential(1.0, (1000, 257)) ** 3, bands, SR)
    for m, b in enumerate(bands):
        assert np.all(track.values[:, m] >= b.low_hz) and np.all(track.values[:, m] <= b.high_hz)


@pytest.mark.parametrize("c", [1e-3, 0.5, 1.0, 7.0, 1e3])
def test_scale_invariance(c, rng):
    bands = default_subbands(SR)
    power = rng.exponential(1.0, 257)
    np.testing.assert_allclose(sscf(c * power, bands, SR), sscf(power, bands, SR), rtol=1e-12, atol=0)
