"""Echo ranging: correlation peak detection and height recovery.

The recording made while the probe sequence plays contains the direct
speaker-to-microphone path plus reflections.  Cross-correlation turns each
path into a peak; the gap between the direct peak and the surface echo,
together with the speaker <-> microphone spacing, fixes the vertical
distance of the device above the surface:

    H = sqrt((v * (t3 - t0) + d)**2 - d**2) / 2

where v is the speed of sound, d the speaker-to-microphone distance, t0
the direct-path peak time and t3 the surface-echo peak time.  The emission
instant cancels out, so only the peak gap matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import find_peaks

from .mls import CorrelationSeries, cross_correlate

__all__ = [
    "EchoTrace",
    "RangingConfig",
    "PeakSet",
    "RangeEstimate",
    "RangingError",
    "detect_peaks",
    "estimate_height",
    "range_with_retry",
]

# A real correlation peak must stand this many noise sigmas above the
# floor, otherwise the attempt is treated as noise and retried.  The floor
# is a MAD estimate that excludes the peak's own neighborhood, so short
# correlation series with dominant peaks are not misjudged.
NOISE_FLOOR_SIGMA_RATIO = 6.0
_FLOOR_GUARD_SAMPLES = 2


class RangingError(RuntimeError):
    """A ranging attempt failed; the caller may retry with a fresh trace."""


@dataclass(frozen=True)
class EchoTrace:
    """A sampled waveform, either the emitted reference or a recording."""

    samples: np.ndarray
    sample_rate: float
    role: str = "recorded"

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("trace samples must be a nonempty 1-D array")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.role not in ("recorded", "reference"):
            raise ValueError(f"role must be 'recorded' or 'reference', got {self.role!r}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.size)


@dataclass(frozen=True)
class RangingConfig:
    """Parameters of the ranging geometry and of peak acceptance."""

    speed_of_sound: float = 343.0            # m/s
    speaker_mic_distance: float = 0.12       # m, between transducers
    sample_rate: float = 48000.0             # Hz
    peak_threshold_ratio: float = 0.2        # echo candidates vs direct peak
    min_peak_separation: float = 1.0e-4      # s, between detected peaks
    height_plausible_range: tuple[float, float] = (0.05, 1.0)  # m
    retry_interval: float = 0.050            # s, between repeated probes
    max_attempts: int = 20
    parabolic: bool = True                   # sub-sample peak refinement

    def __post_init__(self):
        if self.speed_of_sound <= 0:
            raise ValueError("speed_of_sound must be positive")
        if self.speaker_mic_distance < 0:
            raise ValueError("speaker_mic_distance cannot be negative")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if not 0.0 < self.peak_threshold_ratio <= 1.0:
            raise ValueError("peak_threshold_ratio must lie in (0, 1]")
        lo, hi = self.height_plausible_range
        if not lo < hi:
            raise ValueError("height_plausible_range must be (low, high) with low < high")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")


@dataclass(frozen=True)
class PeakSet:
    """Correlation peaks as (time_seconds, correlation_value), time-sorted.

    `direct_index` points at the strongest peak (the direct path) and
    `echo_index` at the surface echo chosen by the plausibility window.
    Intermediate reflections stay in `peaks` but are otherwise unused.
    """

    peaks: tuple[tuple[float, float], ...]
    direct_index: int
    echo_index: int

    @property
    def direct_time(self) -> float:
        return self.peaks[self.direct_index][0]

    @property
    def echo_time(self) -> float:
        return self.peaks[self.echo_index][0]


@dataclass(frozen=True)
class RangeEstimate:
    """Recovered height plus the retry bookkeeping that produced it."""

    height: float            # m
    round_trip_path: float   # m, echo path length 2s = v*(t3 - t0) + d
    attempts_used: int = 1
    elapsed_retry_time: float = 0.0  # s


def _refine_peak(values: np.ndarray, idx: int, parabolic: bool) -> tuple[float, float]:
    """Sub-sample peak position and value via a three-point parabola."""
    if not parabolic or idx <= 0 or idx >= values.size - 1:
        return float(idx), float(values[idx])
    a, b, c = values[idx - 1], values[idx], values[idx + 1]
    denom = a - 2.0 * b + c
    if denom >= 0.0:
        return float(idx), float(b)
    delta = 0.5 * (a - c) / denom
    delta = min(0.5, max(-0.5, delta))
    return idx + delta, float(b - 0.25 * (a - c) * delta)


def implied_height(gap_seconds: float, config: RangingConfig) -> float:
    """Height implied by a direct-to-echo peak gap (the geometry inverse)."""
    v, d = config.speed_of_sound, config.speaker_mic_distance
    round_trip = v * gap_seconds + d
    radicand = round_trip * round_trip - d * d
    if radicand < 0.0:
        raise RangingError(
            f"peak gap {gap_seconds:.6g}s implies an impossible geometry (negative radicand)"
        )
    return math.sqrt(radicand) / 2.0


def detect_peaks(corr: CorrelationSeries, config: RangingConfig) -> PeakSet:
    """Locate the direct-path peak and the surface echo in a correlation.

    The direct peak is the global maximum.  Echo candidates are local
    maxima above `peak_threshold_ratio` times the direct value, at least
    `min_peak_separation` apart; among candidates whose implied height
    falls inside `height_plausible_range`, the strongest one is taken as
    the surface echo.  Raises RangingError when the direct peak does not
    clear the noise floor or when no candidate is plausible, which signals
    the caller to retry.
    """
    values = np.asarray(corr.values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty correlation series")

    i_direct = int(np.argmax(values))
    direct_value = float(values[i_direct])
    keep = np.ones(values.size, dtype=bool)
    keep[max(0, i_direct - _FLOOR_GUARD_SAMPLES):i_direct + _FLOOR_GUARD_SAMPLES + 1] = False
    noise_sigma = 1.4826 * float(np.median(np.abs(values[keep]))) if keep.any() else 0.0
    if not direct_value > NOISE_FLOOR_SIGMA_RATIO * noise_sigma:
        raise RangingError("no direct peak above the noise floor")

    rate = config.sample_rate
    distance = max(1, int(round(config.min_peak_separation * rate)))
    candidates, _ = find_peaks(
        values, height=config.peak_threshold_ratio * direct_value, distance=distance
    )
    candidates = candidates[candidates > i_direct]

    t_direct, v_direct = _refine_peak(values, i_direct, config.parabolic)
    entries = [(t_direct / rate, v_direct)]
    lo, hi = config.height_plausible_range
    echo_index = -1
    echo_value = -np.inf
    for raw_idx in candidates:
        pos, val = _refine_peak(values, int(raw_idx), config.parabolic)
        entries.append((pos / rate, val))
        try:
            h = implied_height(pos / rate - entries[0][0], config)
        except RangingError:
            continue
        if lo <= h <= hi and val > echo_value:
            echo_index = len(entries) - 1
            echo_value = val
    if echo_index < 0:
        raise RangingError("no echo candidate inside the plausible height window")

    return PeakSet(peaks=tuple(entries), direct_index=0, echo_index=echo_index)


def estimate_height(peaks: PeakSet, config: RangingConfig) -> RangeEstimate:
    """Solve the ranging geometry for the height above the surface."""
    gap = peaks.echo_time - peaks.direct_time
    if gap < 0.0:
        raise RangingError("echo precedes the direct peak; peaks are corrupted")
    v, d = config.speed_of_sound, config.speaker_mic_distance
    round_trip = v * gap + d
    radicand = round_trip * round_trip - d * d
    if radicand < 0.0:
        raise RangingError("peak gap implies an impossible geometry (negative radicand)")
    return RangeEstimate(height=math.sqrt(radicand) / 2.0, round_trip_path=round_trip)


def range_with_retry(trace_source, reference, config: RangingConfig) -> RangeEstimate:
    """Run correlate -> detect -> estimate per attempt until one is plausible.

    `trace_source` provides successive recording attempts: an iterable of
    EchoTrace, or a callable taking the 0-based attempt index.  Attempts
    are spaced `retry_interval` apart, so the reported elapsed retry time
    is (attempts_used - 1) * retry_interval.  Raises RangingError when
    `max_attempts` traces all fail.
    """
    if callable(trace_source):
        next_trace = trace_source
    else:
        iterator = iter(trace_source)

        def next_trace(_attempt: int):
            return next(iterator)

    lo, hi = config.height_plausible_range
    for attempt in range(1, config.max_attempts + 1):
        try:
            trace = next_trace(attempt - 1)
        except StopIteration:
            raise RangingError(
                f"trace source exhausted after {attempt - 1} attempts without a plausible height"
            ) from None
        try:
            corr = cross_correlate(trace, reference)
            peaks = detect_peaks(corr, config)
            estimate = estimate_height(peaks, config)
        except RangingError:
            continue
        if lo <= estimate.height <= hi:
            return replace(
                estimate,
                attempts_used=attempt,
                elapsed_retry_time=(attempt - 1) * config.retry_interval,
            )
    raise RangingError(
        f"no plausible height after {config.max_attempts} attempts"
    )
