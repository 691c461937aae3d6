import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ppq5_direct, shimmer_direct
from voicemorph.audio_io import AudioBuffer
from voicemorph.errors import (
    AllUnvoicedError,
    LengthMismatchError,
    NoOverlapError,
    NoVoicedRegionError,
    TooFewPeriodsError,
    TooShortError,
    ZeroAmplitudeError,
    ZeroVarianceError,
)
from voicemorph.metrics import (
    F0Contour,
    PeriodSequence,
    extract_f0,
    extract_periods,
    jitter_ppq5,
    log_f0_znorm,
    loudness,
    pcc,
    shimmer_local,
)

SR = 16000


def sine(freq, seconds=1.0, amp=0.5):
    t = np.arange(int(SR * seconds)) / SR
    return AudioBuffer(amp * np.sin(2 * np.pi * freq * t), SR)


def pulse_train(spacings, amps, width=9, lead=80):
    """Triangular pulses at cumulative spacings; peaks exactly at the marks."""
    positions = lead + np.concatenate([[0], np.cumsum(spacings)]).astype(int)
    x = np.zeros(positions[-1] + lead + width)
    half = width // 2
    bump = 1.0 - np.abs(np.arange(-half, half + 1)) / (half + 1)
    for pos, amp in zip(positions, amps):
        x[pos - half:pos + half + 1] = amp * bump
    return AudioBuffer(x, SR), positions


def const_contour(f0_value, n_samples, hop=320):
    frames = max(n_samples // hop, 1)
    return F0Contour(np.full(frames, float(f0_value)), hop, SR)


class TestExtractF0:
    def test_pure_sine_accuracy(self):
        contour = extract_f0(sine(220.0))
        voiced = contour.values[contour.voiced_mask]
        assert len(voiced) == len(contour)          # fully voiced
        assert np.all(np.abs(voiced - 220.0) < 1.0)

    def test_silence_unvoiced(self):
        contour = extract_f0(AudioBuffer(np.zeros(SR), SR))
        assert not np.any(contour.voiced_mask)

    def test_sine_sweep_relative_error(self):
        rng = np.random.default_rng(8)
        for freq in rng.uniform(80, 500, 8):
            contour = extract_f0(sine(freq))
            voiced = contour.values[contour.voiced_mask]
            assert abs(np.median(voiced) - freq) < 0.01 * freq

    def test_too_short(self):
        with pytest.raises(TooShortError):
            extract_f0(AudioBuffer(np.zeros(500), SR))

    def test_frame_geometry(self):
        contour = extract_f0(sine(150.0), frame_len=1024, hop=320)
        assert len(contour) == 1 + (SR - 1024) // 320
        assert contour.hop_samples == 320


class TestExtractPeriods:
    def test_exact_pulse_train(self):
        buf, _ = pulse_train([160] * 99, np.ones(100))
        contour = const_contour(100.0, len(buf))
        periods = extract_periods(buf, contour)
        np.testing.assert_allclose(periods.period_s, 0.01, atol=1.0 / SR)
        assert np.all(periods.peak_amp == periods.peak_amp[0])

    def test_alternating_amplitudes(self):
        amps = np.tile([1.0, 0.8], 30)
        buf, _ = pulse_train([160] * 59, amps)
        periods = extract_periods(buf, const_contour(100.0, len(buf)))
        np.testing.assert_allclose(periods.peak_amp, amps[:len(periods)])
        assert set(np.round(periods.peak_amp, 6)) == {1.0, 0.8}

    def test_alternating_period_lengths(self):
        spacings = np.tile([158, 162], 25)
        buf, _ = pulse_train(spacings, np.ones(51))
        periods = extract_periods(buf, const_contour(100.0, len(buf)))
        np.testing.assert_allclose(periods.period_s,
                                   np.asarray(spacings[:len(periods)]) / SR)
        assert set(np.round(periods.period_s, 8)) == {0.009875, 0.010125}

    def test_no_voiced_region(self):
        buf = AudioBuffer(np.zeros(SR), SR)
        with pytest.raises(NoVoicedRegionError):
            extract_periods(buf, F0Contour(np.zeros(10), 320, SR))

    def test_unvoiced_gap_splits(self):
        """Landmarks must not bridge an unvoiced stretch in the contour."""
        buf, _ = pulse_train([160] * 99, np.ones(100))
        values = np.full(len(buf) // 320, 100.0)
        values[20:30] = 0.0
        periods = extract_periods(buf, F0Contour(values, 320, SR))
        # 10 unvoiced frames at hop 320 remove ~20 cycles from the middle
        assert 60 <= len(periods) <= 80
        np.testing.assert_allclose(periods.period_s, 0.01, atol=1.0 / SR)


class TestJitterPpq5:
    def test_constant_is_zero(self):
        p = PeriodSequence(np.full(5, 0.010), np.ones(5))
        assert jitter_ppq5(p) == 0.0

    def test_frozen_seven_point_case(self):
        t_ms = [10, 10.4, 9.6, 10, 10.4, 9.6, 10]
        p = PeriodSequence(np.array(t_ms) / 1000.0, np.ones(7))
        assert jitter_ppq5(p) == pytest.approx(1.6, abs=1e-9)
        assert jitter_ppq5(p) == pytest.approx(ppq5_direct(t_ms), rel=1e-10)

    def test_frozen_alternating_case(self):
        t_ms = [9.0, 11.0] * 10
        p = PeriodSequence(np.array(t_ms) / 1000.0, np.ones(20))
        assert jitter_ppq5(p) == pytest.approx(128.0 / 19.0, abs=1e-9)
        assert jitter_ppq5(p) == pytest.approx(ppq5_direct(t_ms), rel=1e-10)

    def test_matches_oracle_randomized(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            n = int(rng.integers(5, 120))
            t = rng.uniform(0.002, 0.02, n)
            p = PeriodSequence(t, np.ones(n))
            assert jitter_ppq5(p) == pytest.approx(ppq5_direct(t), rel=1e-10)

    def test_too_few(self):
        with pytest.raises(TooFewPeriodsError):
            jitter_ppq5(PeriodSequence(np.full(4, 0.01), np.ones(4)))

    @given(st.floats(min_value=0.25, max_value=2.0))
    @settings(max_examples=25, deadline=None)
    def test_time_scale_invariance(self, scale):
        rng = np.random.default_rng(99)
        t = rng.uniform(0.005, 0.012, 30)
        a = jitter_ppq5(PeriodSequence(t, np.ones(30)))
        b = jitter_ppq5(PeriodSequence(np.clip(scale * t, 1 / 2000, 1 / 40), np.ones(30)))
        if np.all(scale * t >= 1 / 2000) and np.all(scale * t <= 1 / 40):
            assert b == pytest.approx(a, rel=1e-9)


class TestShimmerLocal:
    def test_constant_is_zero(self):
        assert shimmer_local(PeriodSequence(np.full(6, 0.01), np.full(6, 0.3))) == 0.0

    def test_frozen_alternating_case(self):
        p = PeriodSequence(np.full(4, 0.01), np.array([1.0, 0.8, 1.0, 0.8]))
        assert shimmer_local(p) == pytest.approx(2.0 / 9.0, abs=1e-12)
        assert shimmer_local(p) == pytest.approx(
            shimmer_direct([1.0, 0.8, 1.0, 0.8]), rel=1e-12)

    def test_matches_oracle_randomized(self):
        rng = np.random.default_rng(18)
        for _ in range(25):
            n = int(rng.integers(2, 150))
            a = rng.uniform(0.05, 1.0, n)
            p = PeriodSequence(np.full(n, 0.01), a)
            assert shimmer_local(p) == pytest.approx(shimmer_direct(a), rel=1e-10)

    def test_amplitude_scale_invariance(self):
        rng = np.random.default_rng(19)
        a = rng.uniform(0.1, 1.0, 40)
        base = shimmer_local(PeriodSequence(np.full(40, 0.01), a))
        for c in (0.25, 3.0, 17.5):
            scaled = shimmer_local(PeriodSequence(np.full(40, 0.01), c * a))
            assert scaled == pytest.approx(base, rel=1e-12)

    def test_errors(self):
        with pytest.raises(TooFewPeriodsError):
            shimmer_local(PeriodSequence(np.array([0.01]), np.array([1.0])))
        with pytest.raises(ZeroAmplitudeError):
            shimmer_local(PeriodSequence(np.full(3, 0.01), np.zeros(3)))


class TestLoudness:
    def test_silence_floor(self):
        frames = loudness(AudioBuffer(np.zeros(SR), SR))
        assert frames.dim == 1
        np.testing.assert_allclose(frames.frames, 20 * np.log10(1e-7), atol=1e-6)

    def test_full_scale_square(self):
        x = np.ones(SR)
        x[::2] = -1.0
        frames = loudness(AudioBuffer(x, SR))
        np.testing.assert_allclose(frames.frames, 0.0, atol=1e-5)

    def test_halving_drops_six_db(self):
        x = 0.5 * np.sin(2 * np.pi * 200 * np.arange(SR) / SR)
        full = loudness(AudioBuffer(x, SR)).frames
        half = loudness(AudioBuffer(0.5 * x, SR)).frames
        np.testing.assert_allclose(full - half, 20 * np.log10(2), atol=1e-4)


class TestLogF0Znorm:
    def test_constant_contour_rejected(self):
        with pytest.raises(ZeroVarianceError):
            log_f0_znorm(F0Contour(np.full(10, 200.0), 320, SR))

    def test_two_point(self):
        out = log_f0_znorm(F0Contour(np.array([100.0, 200.0]), 320, SR))
        np.testing.assert_allclose(out.frames[:, 0], [-1.0, 1.0], atol=1e-12)

    def test_multiplicative_invariance(self):
        rng = np.random.default_rng(20)
        values = np.where(rng.random(50) < 0.3, 0.0, rng.uniform(80, 300, 50))
        if not np.any(values > 0):
            values[0] = 100.0
        base = log_f0_znorm(F0Contour(values, 320, SR)).frames
        scaled = log_f0_znorm(F0Contour(
            np.clip(values * 2.0, 0, 2000) * (values > 0), 320, SR)).frames
        np.testing.assert_allclose(scaled, base, atol=1e-9)

    def test_unvoiced_frames_zero(self):
        values = np.array([0.0, 100.0, 0.0, 200.0, 0.0])
        out = log_f0_znorm(F0Contour(values, 320, SR)).frames[:, 0]
        assert out[0] == out[2] == out[4] == 0.0

    def test_all_unvoiced(self):
        with pytest.raises(AllUnvoicedError):
            log_f0_znorm(F0Contour(np.zeros(5), 320, SR))


class TestPcc:
    def _contour(self, values):
        return F0Contour(np.asarray(values, dtype=float), 320, SR)

    def test_self_correlation(self):
        x = self._contour([100, 150, 200, 120, 180])
        assert pcc(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_anticorrelation(self):
        x = np.array([100.0, 150.0, 200.0, 120.0])
        y = -x + 400.0
        assert pcc(self._contour(x), self._contour(y)) == pytest.approx(-1.0, abs=1e-12)

    def test_affine_invariance(self):
        x = np.array([100.0, 150.0, 200.0, 120.0])
        assert pcc(self._contour(x), self._contour(1.5 * x + 30)) == pytest.approx(1.0)

    def test_symmetry(self):
        rng = np.random.default_rng(21)
        a = self._contour(rng.uniform(80, 300, 30))
        b = self._contour(rng.uniform(80, 300, 30))
        assert pcc(a, b) == pytest.approx(pcc(b, a), abs=1e-12)

    def test_joint_voicing_only(self):
        a = self._contour([100, 0, 200, 300, 0])
        b = self._contour([110, 150, 190, 310, 0])
        joint = pcc(a, b)
        dense_a = self._contour([100, 200, 300])
        dense_b = self._contour([110, 190, 310])
        assert joint == pytest.approx(pcc(dense_a, dense_b), abs=1e-12)

    def test_errors(self):
        with pytest.raises(LengthMismatchError):
            pcc(self._contour([100, 200]), self._contour([100, 200, 300]))
        with pytest.raises(NoOverlapError):
            pcc(self._contour([100, 0]), self._contour([0, 100]))
        with pytest.raises(ZeroVarianceError):
            pcc(self._contour([100, 100, 100]), self._contour([100, 120, 140]))


def test_f0_roundtrip_through_synthesiser():
    """Oscillator output at constant F0 comes back within 2 Hz."""
    from voicemorph.formats import SynthParamsSeq
    from voicemorph.synth import SynthConfig, synthesize

    params = SynthParamsSeq(np.full(100, 150.0), np.zeros((100, 176)),
                            np.full((100, 80), -40.0), 160)
    audio = synthesize(params, SynthConfig())
    contour = extract_f0(audio)
    voiced = contour.values[contour.voiced_mask]
    assert abs(np.median(voiced) - 150.0) < 2.0
