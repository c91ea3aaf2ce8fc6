"""Band-pass design and application, verified by transfer-function evaluation.

The oracle throughout is direct evaluation of H(z) = b(z)/a(z) on the
unit circle via polynomial arithmetic, independent of any filtering code.
"""

import numpy as np
import pytest

from wlann.dataio import AudioClip
from wlann.dsp import apply_filter, design_butterworth_bandpass
from wlann.errors import ValidationError

FS = 16000


def transfer_gain(b, a, freq_hz, fs_hz):
    """|H(e^{j w})| by direct polynomial evaluation (test-local oracle)."""
    w = 2 * np.pi * freq_hz / fs_hz
    zinv = np.exp(-1j * w)
    num = sum(bk * zinv**k for k, bk in enumerate(b))
    den = sum(ak * zinv**k for k, ak in enumerate(a))
    return abs(num / den)


@pytest.fixture(scope="module")
def bandpass():
    return design_butterworth_bandpass(4, 40.0, 850.0, FS)


class TestDesign:
    def test_passband_center_is_flat(self, bandpass):
        gain = transfer_gain(bandpass.b, bandpass.a, 200.0, FS)
        assert abs(20 * np.log10(gain)) < 0.1

    def test_dc_is_fully_rejected(self, bandpass):
        # numerator has an exact root at z=1; the evaluated ratio is noise-limited
        assert abs(np.sum(bandpass.b)) < 1e-14
        assert transfer_gain(bandpass.b, bandpass.a, 0.0, FS) < 1e-8

    @pytest.mark.parametrize("edge", [40.0, 850.0])
    def test_edges_at_minus_3db(self, bandpass, edge):
        gain_db = 20 * np.log10(transfer_gain(bandpass.b, bandpass.a, edge, FS))
        assert abs(gain_db - (-3.0102999566398116)) < 0.1

    def test_stopband_attenuation(self, bandpass):
        for freq in (5.0, 3000.0):
            gain_db = 20 * np.log10(transfer_gain(bandpass.b, bandpass.a, freq, FS))
            assert gain_db < -40.0

    def test_order4_prototype_gives_8_poles(self, bandpass):
        assert len(bandpass.poles()) == 8
        assert len(bandpass.a) == 9
        assert len(bandpass.b) == 9

    def test_stability(self, bandpass):
        assert np.max(np.abs(bandpass.poles())) < 1.0

    def test_coefficients_are_real(self, bandpass):
        assert np.isrealobj(bandpass.b)
        assert np.isrealobj(bandpass.a)

    def test_matches_reference_design(self, bandpass):
        """Sanity cross-check against scipy's band-pass designer."""
        from scipy.signal import butter

        b_ref, a_ref = butter(4, [40 / (FS / 2), 850 / (FS / 2)], btype="band")
        np.testing.assert_allclose(bandpass.b, b_ref, rtol=1e-7, atol=1e-15)
        np.testing.assert_allclose(bandpass.a, a_ref, rtol=1e-7, atol=1e-12)

    def test_edge_at_nyquist_rejected(self):
        with pytest.raises(ValidationError):
            design_butterworth_bandpass(4, 40.0, 8000.0, FS)

    def test_inverted_edges_rejected(self):
        with pytest.raises(ValidationError):
            design_butterworth_bandpass(4, 850.0, 40.0, FS)


class TestApplyFilter:
    def test_dc_input_decays_to_zero(self, bandpass):
        clip = AudioClip(np.full(FS, 0.5), FS)
        out = apply_filter(bandpass, clip)
        assert len(out) == len(clip)
        assert np.max(np.abs(out.samples[-1000:])) < 1e-6

    def test_5hz_tone_blocked(self, bandpass):
        t = np.arange(2 * FS) / FS
        clip = AudioClip(0.5 * np.sin(2 * np.pi * 5.0 * t), FS)
        out = apply_filter(bandpass, clip)
        steady = out.samples[FS:]
        assert np.max(np.abs(steady)) < 0.01 * 0.5

    def test_passband_tone_passes(self, bandpass):
        t = np.arange(FS) / FS
        clip = AudioClip(0.5 * np.sin(2 * np.pi * 200.0 * t), FS)
        out = apply_filter(bandpass, clip)
        steady = out.samples[FS // 2 :]
        assert np.max(np.abs(steady)) > 0.45

    def test_impulse_response_energy_matches_parseval(self, bandpass):
        """Time-domain energy equals the mean of |H|^2 over the circle."""
        n = 1 << 15
        impulse = np.zeros(n)
        impulse[0] = 1.0
        response = apply_filter(bandpass, AudioClip(impulse, FS)).samples
        time_energy = float(np.sum(response**2))
        freqs = np.arange(n) * FS / n  # full circle, uniform grid
        gains = np.array([transfer_gain(bandpass.b, bandpass.a, f, FS) for f in freqs[: n // 2]])
        # real filter: |H| symmetric, average over the full circle
        freq_energy = float(np.mean(np.concatenate([gains, gains[::-1]]) ** 2))
        assert abs(time_energy - freq_energy) < 0.01 * freq_energy

    def test_sample_rate_mismatch_rejected(self, bandpass):
        clip = AudioClip(np.zeros(100), 8000)
        with pytest.raises(ValidationError, match="designed for"):
            apply_filter(bandpass, clip)
