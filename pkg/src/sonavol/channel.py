"""Multipath playback simulator for desk-scale echo-ranging experiments.

Synthesizes the recording a microphone would make while the reference
sequence plays: each propagation path contributes a delayed, attenuated
copy of the reference, and white Gaussian noise is added at a requested
signal-to-noise ratio.  Ambient sound-level readings from real rooms have
no hardware-free mapping to SNR; `INDICATIVE_SNR_DB` documents the rough
correspondence this project uses for its robustness sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ranging import EchoTrace, RangingConfig

__all__ = [
    "Channel",
    "INDICATIVE_SNR_DB",
    "scenario_from_geometry",
    "simulate_channel",
]

INDICATIVE_SNR_DB = {"quiet": 30.0, "restaurant": 10.0, "cafeteria": 0.0}

# Half-width of the windowed-sinc kernel used for fractional delays.
_SINC_HALF_WIDTH = 40

# The recording keeps rolling briefly after the last echo, like a real
# capture; this also keeps late peaks off the correlation boundary.
_TAIL_SAMPLES = 64


@dataclass(frozen=True)
class Channel:
    """A set of (delay_seconds, gain) paths plus an additive-noise level.

    Paths are stored sorted by delay; the first entry is the direct path.
    `noise_snr_db` of None means a noiseless channel.
    """

    paths: tuple[tuple[float, float], ...]
    noise_snr_db: float | None = None
    sample_rate: float = 48000.0

    def __post_init__(self):
        paths = tuple((float(d), float(g)) for d, g in self.paths)
        if not paths:
            raise ValueError("a channel needs at least the direct path")
        if any(d < 0 for d, _ in paths):
            raise ValueError("path delays cannot be negative")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "paths", tuple(sorted(paths, key=lambda p: p[0])))

    def to_dict(self) -> dict:
        return {
            "paths": [{"delay_s": d, "gain": g} for d, g in self.paths],
            "noise_snr_db": self.noise_snr_db,
            "sample_rate": self.sample_rate,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Channel":
        paths = []
        for entry in data["paths"]:
            if isinstance(entry, dict):
                paths.append((entry["delay_s"], entry["gain"]))
            else:
                delay, gain = entry
                paths.append((delay, gain))
        snr = data.get("noise_snr_db")
        if isinstance(snr, str):
            snr = None if snr == "none" else float(snr)
        return cls(
            paths=tuple(paths),
            noise_snr_db=snr,
            sample_rate=data.get("sample_rate", 48000.0),
        )


def scenario_from_geometry(
    height_m: float,
    config: RangingConfig,
    *,
    direct_gain: float = 1.0,
    echo_gain: float = 0.5,
    clutter=(),
    noise_snr_db: float | None = None,
) -> Channel:
    """Channel for a device held `height_m` above a flat surface.

    The direct path covers the speaker-to-microphone distance d; the
    surface echo travels 2*s with s = sqrt(H**2 + (d/2)**2).  Optional
    `clutter` adds extra (delay_seconds, gain) paths, e.g. body
    reflections between the direct path and the surface echo.
    """
    if height_m <= 0:
        raise ValueError(f"height must be positive, got {height_m}")
    if not echo_gain < direct_gain:
        raise ValueError("the surface echo must be weaker than the direct path")
    v = config.speed_of_sound
    d = config.speaker_mic_distance
    slant = math.hypot(height_m, d / 2.0)
    paths = [(d / v, direct_gain), (2.0 * slant / v, echo_gain)]
    paths.extend((float(t), float(g)) for t, g in clutter)
    return Channel(paths=tuple(paths), noise_snr_db=noise_snr_db, sample_rate=config.sample_rate)


def _fractional_shift(reference: np.ndarray, delay_samples: float, n_out: int) -> np.ndarray:
    """Place `reference` at a fractional sample offset via a windowed sinc."""
    base = int(math.floor(delay_samples))
    frac = delay_samples - base
    offsets = np.arange(-_SINC_HALF_WIDTH, _SINC_HALF_WIDTH + 1)
    u = (offsets - frac) / (_SINC_HALF_WIDTH + 1)
    window = 0.42 + 0.5 * np.cos(np.pi * u) + 0.08 * np.cos(2.0 * np.pi * u)
    kernel = np.sinc(offsets - frac) * window
    shifted = np.convolve(reference, kernel)
    out = np.zeros(n_out)
    start = base - _SINC_HALF_WIDTH
    lo = max(0, start)
    hi = min(n_out, start + shifted.size)
    if lo < hi:
        out[lo:hi] = shifted[lo - start:hi - start]
    return out


def simulate_channel(reference, channel: Channel, rng_seed: int, *, fractional: bool = False) -> EchoTrace:
    """Recording of `reference` played through `channel`.

    Integer mode (default) rounds every path delay to whole samples, which
    makes recovered delays exactly checkable.  Fractional mode interpolates
    sub-sample delays with a windowed sinc.  Noise is white Gaussian,
    scaled so clean-signal power over noise power matches `noise_snr_db`;
    the result is deterministic for a given `rng_seed`.
    """
    ref = np.asarray(getattr(reference, "samples", reference), dtype=np.float64)
    if ref.ndim != 1 or ref.size == 0:
        raise ValueError("reference must be a nonempty 1-D signal")

    rate = channel.sample_rate
    delays = [delay * rate for delay, _ in channel.paths]
    if fractional:
        n_out = int(math.ceil(max(delays))) + ref.size + _SINC_HALF_WIDTH + _TAIL_SAMPLES
    else:
        n_out = int(round(max(delays))) + ref.size + _TAIL_SAMPLES

    clean = np.zeros(n_out)
    for (_, gain), delay_samples in zip(channel.paths, delays):
        if fractional:
            clean += gain * _fractional_shift(ref, delay_samples, n_out)
        else:
            shift = int(round(delay_samples))
            clean[shift:shift + ref.size] += gain * ref

    out = clean
    if channel.noise_snr_db is not None:
        signal_power = float(np.mean(clean * clean))
        noise_power = signal_power / 10.0 ** (channel.noise_snr_db / 10.0)
        rng = np.random.default_rng(rng_seed)
        out = clean + rng.normal(0.0, math.sqrt(noise_power), n_out)
    return EchoTrace(samples=out, sample_rate=rate, role="recorded")
