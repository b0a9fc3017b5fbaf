import math

import numpy as np
import pytest

from sonavol.channel import scenario_from_geometry, simulate_channel
from sonavol.mls import CorrelationSeries, cross_correlate, generate_mls
from sonavol.ranging import (
    EchoTrace,
    PeakSet,
    RangingConfig,
    RangingError,
    detect_peaks,
    estimate_height,
    range_with_retry,
)

CFG = RangingConfig()


def spike_series(length, spikes):
    """Correlation stand-in: zeros with (index, value) spikes."""
    values = np.zeros(length)
    for idx, val in spikes:
        values[idx] = val
    return CorrelationSeries(values=values, normalization="raw")


def gap_for_height(height, cfg=CFG):
    slant = math.hypot(height, cfg.speaker_mic_distance / 2.0)
    return (2.0 * slant - cfg.speaker_mic_distance) / cfg.speed_of_sound


class TestDetectPeaks:
    def test_direct_and_echo_at_known_samples(self):
        corr = spike_series(400, [(100, 1.0), (169, 0.6)])
        peaks = detect_peaks(corr, CFG)
        assert peaks.direct_time == pytest.approx(100 / 48000.0)
        assert peaks.echo_time == pytest.approx(169 / 48000.0)
        est = estimate_height(peaks, CFG)
        assert est.height == pytest.approx(0.3006, abs=5e-4)

    def test_single_peak_has_no_echo(self):
        corr = spike_series(400, [(100, 1.0)])
        with pytest.raises(RangingError, match="no echo candidate"):
            detect_peaks(corr, CFG)

    def test_out_of_range_candidate_discarded(self):
        # stronger candidate implies H = 2.5 m, outside [0.05, 1.0]
        gap_ok = round(gap_for_height(0.30) * 48000.0)
        gap_far = round(gap_for_height(2.50) * 48000.0)
        corr = spike_series(
            1000, [(100, 1.0), (100 + gap_ok, 0.5), (100 + gap_far, 0.8)]
        )
        peaks = detect_peaks(corr, CFG)
        est = estimate_height(peaks, CFG)
        assert est.height == pytest.approx(0.30, abs=2e-3)

    def test_all_noise_rejected(self):
        rng = np.random.default_rng(2)
        corr = CorrelationSeries(values=rng.normal(0, 1, 500), normalization="raw")
        with pytest.raises(RangingError):
            detect_peaks(corr, CFG)

    def test_direct_is_global_max(self):
        corr = spike_series(400, [(50, 0.4), (100, 1.0), (169, 0.6)])
        peaks = detect_peaks(corr, CFG)
        values = [v for _, v in peaks.peaks]
        assert values[peaks.direct_index] == max(values)

    def test_intermediate_echoes_retained(self):
        # body-reflection-like candidates below the plausible window stay listed
        gap_ok = round(gap_for_height(0.30) * 48000.0)
        corr = spike_series(600, [(100, 1.0), (110, 0.45), (100 + gap_ok, 0.5)])
        peaks = detect_peaks(corr, CFG)
        assert len(peaks.peaks) == 3
        assert peaks.echo_time > peaks.direct_time

    def test_empty_series_rejected(self):
        with pytest.raises(ValueError):
            detect_peaks(CorrelationSeries(values=np.array([]), normalization="raw"), CFG)


class TestEstimateHeight:
    def test_zero_gap_gives_zero_height(self):
        peaks = PeakSet(peaks=((1e-3, 1.0), (1e-3, 0.5)), direct_index=0, echo_index=1)
        est = estimate_height(peaks, CFG)
        assert est.height == 0.0
        assert est.round_trip_path == pytest.approx(CFG.speaker_mic_distance)

    def test_collocated_limit(self):
        cfg = RangingConfig(speaker_mic_distance=0.0)
        gap = 2.0e-3
        peaks = PeakSet(peaks=((0.0, 1.0), (gap, 0.5)), direct_index=0, echo_index=1)
        est = estimate_height(peaks, cfg)
        assert est.height == pytest.approx(cfg.speed_of_sound * gap / 2.0, rel=1e-12)

    def test_reference_gap(self):
        peaks = PeakSet(peaks=((0.0, 1.0), (1.43405e-3, 0.5)), direct_index=0, echo_index=1)
        est = estimate_height(peaks, CFG)
        assert est.height == pytest.approx(0.300, abs=1e-4)

    def test_negative_gap_rejected(self):
        peaks = PeakSet(peaks=((2e-3, 1.0), (1e-3, 0.5)), direct_index=0, echo_index=1)
        with pytest.raises(RangingError):
            estimate_height(peaks, CFG)

    def test_exact_inversion_100_random_pairs(self):
        rng = np.random.default_rng(1234)
        for _ in range(100):
            height = float(rng.uniform(0.01, 2.0))
            d = float(rng.uniform(0.0, 0.3))
            cfg = RangingConfig(speaker_mic_distance=d)
            slant = math.hypot(height, d / 2.0)
            peaks = PeakSet(
                peaks=((d / cfg.speed_of_sound, 1.0), (2.0 * slant / cfg.speed_of_sound, 0.5)),
                direct_index=0,
                echo_index=1,
            )
            est = estimate_height(peaks, cfg)
            assert abs(est.height - height) / height < 1e-9

    def test_height_monotone_in_gap(self):
        gaps = np.linspace(1e-4, 5e-3, 40)
        heights = []
        for gap in gaps:
            peaks = PeakSet(peaks=((0.0, 1.0), (float(gap), 0.5)), direct_index=0, echo_index=1)
            heights.append(estimate_height(peaks, CFG).height)
        assert all(b > a for a, b in zip(heights, heights[1:]))

    def test_sampling_bound_without_interpolation(self):
        # one-sample peak quantization maps to (v/rate) * s/(2H) of height error
        cfg = RangingConfig(parabolic=False, height_plausible_range=(0.03, 1.2))
        seq = generate_mls(10)
        rate = cfg.sample_rate
        v = cfg.speed_of_sound
        for height in np.linspace(0.07, 0.97, 10):
            channel = scenario_from_geometry(float(height), cfg)
            trace = simulate_channel(seq, channel, rng_seed=0)
            peaks = detect_peaks(cross_correlate(trace, seq), cfg)
            est = estimate_height(peaks, cfg)
            slant_true = math.hypot(height, cfg.speaker_mic_distance / 2.0)
            bound = (v / rate) * max(
                slant_true / (2.0 * height),
                (est.round_trip_path / 2.0) / (2.0 * est.height),
            )
            assert abs(est.height - height) <= bound


class TestRangeWithRetry:
    def make_clean_trace(self, seed=0, height=0.30):
        seq = generate_mls(10)
        channel = scenario_from_geometry(height, CFG, noise_snr_db=30.0)
        return simulate_channel(seq, channel, rng_seed=seed)

    def make_noise_trace(self, seed=0):
        rng = np.random.default_rng(seed)
        return EchoTrace(samples=rng.normal(0.0, 1.0, 1200), sample_rate=48000.0)

    def test_clean_first_attempt(self):
        seq = generate_mls(10)
        est = range_with_retry(iter([self.make_clean_trace()]), seq, CFG)
        assert est.attempts_used == 1
        assert est.elapsed_retry_time == 0.0
        assert est.height == pytest.approx(0.30, rel=0.02)

    def test_two_garbage_then_clean(self):
        seq = generate_mls(10)
        traces = [self.make_noise_trace(1), self.make_noise_trace(2), self.make_clean_trace()]
        est = range_with_retry(iter(traces), seq, CFG)
        assert est.attempts_used == 3
        assert est.elapsed_retry_time == pytest.approx(0.100)
        assert est.elapsed_retry_time == (est.attempts_used - 1) * CFG.retry_interval

    def test_pure_noise_exhausts(self):
        seq = generate_mls(10)
        cfg = RangingConfig(max_attempts=5)
        source = (self.make_noise_trace(s) for s in range(100))
        with pytest.raises(RangingError, match="5 attempts"):
            range_with_retry(source, seq, cfg)

    def test_callable_source(self):
        seq = generate_mls(10)
        est = range_with_retry(lambda attempt: self.make_clean_trace(seed=attempt), seq, CFG)
        assert est.attempts_used == 1

    def test_exhausted_iterator(self):
        seq = generate_mls(10)
        with pytest.raises(RangingError, match="exhausted"):
            range_with_retry(iter([self.make_noise_trace()]), seq, CFG)


class TestConfigValidation:
    def test_bad_threshold(self):
        with pytest.raises(ValueError):
            RangingConfig(peak_threshold_ratio=0.0)

    def test_bad_window(self):
        with pytest.raises(ValueError):
            RangingConfig(height_plausible_range=(1.0, 0.5))

    def test_bad_speed(self):
        with pytest.raises(ValueError):
            RangingConfig(speed_of_sound=-10.0)
