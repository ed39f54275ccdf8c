"""Window, FFT, and spectrogram tests against a direct O(n^2) DFT oracle."""

import numpy as np
import pytest

from sonic.dsp import (
    RealSignal,
    SignalTooShortError,
    StftConfig,
    WindowKind,
    compute_spectrogram,
    fft,
    frequency_axis,
    num_windows,
    time_axis,
    window_coefficients,
)


def naive_dft(x):
    """Brute-force DFT, the independent oracle for the radix-2 transform."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    k = np.arange(n)
    basis = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return basis @ x


def rel_err(actual, expected):
    scale = np.abs(expected).max()
    return np.abs(actual - expected).max() / (scale if scale > 0 else 1.0)


class TestWindows:
    def test_rectangular_is_all_ones(self):
        np.testing.assert_array_equal(
            window_coefficients(WindowKind.RECTANGULAR, 4), [1.0, 1.0, 1.0, 1.0]
        )

    def test_hann_length_4(self):
        # 0.5*(1 - cos(2*pi*n/3)) at n = 0..3
        np.testing.assert_allclose(
            window_coefficients(WindowKind.HANN, 4), [0.0, 0.75, 0.75, 0.0], atol=1e-15
        )

    def test_hamming_center_peaks_at_one(self):
        # 0.54 - 0.46*cos(pi) = 1.0
        w = window_coefficients(WindowKind.HAMMING, 5)
        assert w[2] == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("kind", list(WindowKind))
    def test_length_one_is_unit(self, kind):
        np.testing.assert_array_equal(window_coefficients(kind, 1), [1.0])

    @pytest.mark.parametrize("kind", list(WindowKind))
    @pytest.mark.parametrize("length", [1, 2, 3, 16, 255, 256])
    def test_range_and_finiteness(self, kind, length):
        w = window_coefficients(kind, length)
        assert w.shape == (length,)
        assert np.all(np.isfinite(w))
        assert w.min() >= 0.0 and w.max() <= 1.08

    def test_zero_length_rejected(self):
        with pytest.raises(ValueError):
            window_coefficients(WindowKind.HANN, 0)


class TestFft:
    def test_unit_impulse(self):
        np.testing.assert_allclose(fft([1, 0, 0, 0]), np.ones(4), atol=1e-15)

    def test_dc_signal(self):
        np.testing.assert_allclose(fft([1, 1, 1, 1]), [4, 0, 0, 0], atol=1e-15)

    def test_random_length_64_matches_oracle(self):
        rng = np.random.default_rng(42)
        x = rng.normal(size=64) + 1j * rng.normal(size=64)
        assert rel_err(fft(x), naive_dft(x)) <= 1e-12

    @pytest.mark.parametrize("n", [2, 4, 8, 16, 32, 128, 256, 512])
    def test_matches_oracle_across_lengths(self, n):
        rng = np.random.default_rng(n)
        for _ in range(3):
            x = rng.normal(size=n) + 1j * rng.normal(size=n)
            assert rel_err(fft(x), naive_dft(x)) <= 1e-9

    @pytest.mark.parametrize("n", [0, 3, 6, 12, 100])
    def test_non_power_of_two_rejected(self, n):
        with pytest.raises(ValueError):
            fft(np.zeros(n, dtype=complex))

    def test_linearity(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            x = rng.normal(size=128) + 1j * rng.normal(size=128)
            y = rng.normal(size=128) + 1j * rng.normal(size=128)
            a, b = rng.normal(size=2)
            assert rel_err(fft(a * x + b * y), a * fft(x) + b * fft(y)) <= 1e-10

    def test_parseval(self):
        rng = np.random.default_rng(11)
        for n in [2, 8, 64, 512, 2048, 4096]:
            x = rng.normal(size=n) + 1j * rng.normal(size=n)
            time_energy = np.sum(np.abs(x) ** 2)
            freq_energy = np.sum(np.abs(fft(x)) ** 2) / n
            assert abs(time_energy - freq_energy) / time_energy <= 1e-9

    def test_operates_along_last_axis(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(5, 32))
        batched = fft(x)
        for i in range(5):
            np.testing.assert_allclose(batched[i], fft(x[i]), atol=1e-12)


class TestFrameArithmetic:
    def test_counts(self):
        assert num_windows(3500, 256, 64) == 51  # floor(3244/64) + 1
        assert num_windows(256, 256, 128) == 1

    def test_signal_too_short(self):
        with pytest.raises(SignalTooShortError):
            num_windows(100, 256, 64)

    def test_frequency_axis_values(self):
        f = frequency_axis(256, 700.0)
        assert f.shape == (129,)
        assert f[0] == 0.0
        assert f[64] == 175.0
        assert f[128] == 350.0
        assert np.all(np.diff(f) > 0)

    def test_frequency_axis_odd_rejected(self):
        with pytest.raises(ValueError):
            frequency_axis(255, 700.0)

    def test_time_axis_values(self):
        t = time_axis(3, 128, 700.0)
        np.testing.assert_allclose(t, [0.0, 128 / 700, 256 / 700], rtol=1e-15)
        assert time_axis(51, 64, 700.0)[-1] == pytest.approx(50 * 64 / 700)
        assert time_axis(1, 5, 10.0)[0] == 0.0


class TestSpectrogram:
    def test_zero_signal_gives_zero_matrix(self):
        sig = RealSignal(np.zeros(2048), 700.0)
        spec = compute_spectrogram(sig, StftConfig(256, 64, 256, WindowKind.HANN))
        assert spec.values.shape == (num_windows(2048, 256, 64), 129)
        assert np.all(spec.values == 0.0)

    def test_cosine_on_bin_64(self):
        # 175 Hz at fs = 700 sits exactly on bin 64 of a 256-point FFT.
        n = np.arange(3500)
        sig = RealSignal(np.cos(2 * np.pi * 175.0 * n / 700.0), 700.0)
        spec = compute_spectrogram(sig, StftConfig(256, 64, 256, WindowKind.HANN))
        assert spec.values.shape == (51, 129)
        assert np.all(np.argmax(spec.values, axis=1) == 64)
        assert spec.freqs_hz[64] == 175.0

    def test_each_frame_matches_oracle(self):
        rng = np.random.default_rng(19)
        samples = rng.normal(size=700)
        cfg = StftConfig(64, 32, 128, WindowKind.HAMMING)
        spec = compute_spectrogram(RealSignal(samples, 700.0), cfg)
        w = window_coefficients(WindowKind.HAMMING, 64)
        for m in range(spec.num_frames):
            frame = np.zeros(128, dtype=complex)
            frame[:64] = samples[m * 32 : m * 32 + 64] * w
            expected = np.abs(naive_dft(frame))[:65]
            assert rel_err(spec.values[m], expected) <= 1e-12

    def test_single_frame_rectangular_equals_dft_magnitude(self):
        rng = np.random.default_rng(23)
        samples = rng.normal(size=256)
        cfg = StftConfig(256, 64, 256, WindowKind.RECTANGULAR)
        spec = compute_spectrogram(RealSignal(samples, 700.0), cfg)
        assert spec.values.shape == (1, 129)
        expected = np.abs(naive_dft(samples))[:129]
        assert rel_err(spec.values[0], expected) <= 1e-12

    def test_shape_property_randomized(self):
        rng = np.random.default_rng(29)
        for _ in range(25):
            nfft = int(2 ** rng.integers(3, 9))
            window_len = int(rng.integers(1, nfft + 1))
            hop = int(rng.integers(1, 2 * window_len))
            n = int(rng.integers(window_len, window_len * 7))
            sig = RealSignal(rng.normal(size=n), 100.0)
            spec = compute_spectrogram(sig, StftConfig(window_len, hop, nfft))
            m = num_windows(n, window_len, hop)
            assert spec.values.shape == (m, nfft // 2 + 1)
            assert spec.freqs_hz.shape == (nfft // 2 + 1,)
            assert spec.times_s.shape == (m,)
            assert np.all(spec.values >= 0.0)
            assert np.all(np.isfinite(spec.values))
            # Last frame stays inside the signal; one more would overrun.
            assert (m - 1) * hop + window_len - 1 <= n - 1
            assert m * hop + window_len - 1 > n - 1

    def test_too_short_signal_propagates(self):
        with pytest.raises(SignalTooShortError):
            compute_spectrogram(RealSignal(np.ones(100), 700.0), StftConfig())

    def test_axes_monotone(self):
        sig = RealSignal(np.sin(np.arange(4000) * 0.01), 700.0)
        spec = compute_spectrogram(sig, StftConfig())
        assert spec.times_s[0] == 0.0
        assert np.all(np.diff(spec.times_s) > 0)
        assert spec.freqs_hz[0] == 0.0
        assert spec.freqs_hz[-1] == 350.0


class TestConfigValidation:
    def test_bad_nfft(self):
        with pytest.raises(ValueError):
            StftConfig(nfft=100)

    def test_window_longer_than_nfft(self):
        with pytest.raises(ValueError):
            StftConfig(window_len=512, nfft=256)

    def test_bad_hop(self):
        with pytest.raises(ValueError):
            StftConfig(hop=0)

    def test_signal_validation(self):
        with pytest.raises(ValueError):
            RealSignal(np.array([1.0, np.inf]), 700.0)
        with pytest.raises(ValueError):
            RealSignal(np.array([]), 700.0)
        with pytest.raises(ValueError):
            RealSignal(np.ones(10), 0.0)
