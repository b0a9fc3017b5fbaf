"""End-to-end orchestration: recorded audio plus two masks -> volume report.

Stages run in order (ranging -> geometry -> volumetry); a failure stops
the pipeline and is re-raised as a StageError naming the stage, so
callers always know where a run died.  The report embeds every
intermediate quantity for auditability and carries a schema version for
downstream comparison scripts.
"""

from __future__ import annotations

import json
from contextlib import contextmanager
from dataclasses import dataclass, replace
from pathlib import Path

from .geometry import CameraIntrinsics, DEFAULT_INTRINSICS, meters_per_pixel
from .ranging import RangingConfig, RangingError, range_with_retry
from .volumetry import estimate_volume, side_profile, top_area

__all__ = [
    "SCHEMA_VERSION",
    "PipelineConfig",
    "StageError",
    "config_from_dict",
    "load_config",
    "run_pipeline",
]

SCHEMA_VERSION = 1

CONTAINERS = ("plate", "bowl")
CALIBRATIONS = ("width-matching", "explicit-side-scale")


class StageError(RuntimeError):
    """A pipeline stage failed; `stage` names the culprit."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.message = message


@dataclass(frozen=True)
class PipelineConfig:
    camera: CameraIntrinsics = DEFAULT_INTRINSICS
    ranging: RangingConfig = RangingConfig()
    mls_order: int = 10
    container: str = "plate"
    calibration: str = "width-matching"
    side_scale: float | None = None

    def __post_init__(self):
        if self.container not in CONTAINERS:
            raise ValueError(f"container must be one of {CONTAINERS}, got {self.container!r}")
        if self.calibration not in CALIBRATIONS:
            raise ValueError(f"calibration must be one of {CALIBRATIONS}, got {self.calibration!r}")
        if self.calibration == "explicit-side-scale" and not self.side_scale:
            raise ValueError("explicit-side-scale calibration needs a side_scale value")


def config_from_dict(data: dict) -> PipelineConfig:
    """Build a PipelineConfig from a JSON-style dict; missing keys default."""
    camera = DEFAULT_INTRINSICS
    if "camera" in data:
        cam = data["camera"]
        camera = CameraIntrinsics(
            focal_length=cam.get("focal_length_m", DEFAULT_INTRINSICS.focal_length),
            sensor_width=cam.get("sensor_width_m", DEFAULT_INTRINSICS.sensor_width),
            image_width=cam.get("image_width_px", DEFAULT_INTRINSICS.image_width),
        )
    ranging = RangingConfig()
    if "ranging" in data:
        rng_keys = data["ranging"]
        allowed = {
            "speed_of_sound", "speaker_mic_distance", "sample_rate",
            "peak_threshold_ratio", "min_peak_separation",
            "height_plausible_range", "retry_interval", "max_attempts",
            "parabolic",
        }
        unknown = set(rng_keys) - allowed
        if unknown:
            raise ValueError(f"unknown ranging config keys: {sorted(unknown)}")
        if "height_plausible_range" in rng_keys:
            rng_keys = dict(rng_keys)
            rng_keys["height_plausible_range"] = tuple(rng_keys["height_plausible_range"])
        ranging = RangingConfig(**rng_keys)
    mls_cfg = data.get("mls", {})
    return PipelineConfig(
        camera=camera,
        ranging=ranging,
        mls_order=mls_cfg.get("order", 10),
        container=data.get("container", "plate"),
        calibration=data.get("calibration", "width-matching"),
        side_scale=data.get("side_scale"),
    )


def load_config(path) -> PipelineConfig:
    return config_from_dict(json.loads(Path(path).read_text()))


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except (RangingError, ValueError) as exc:
        raise StageError(name, str(exc)) from exc


def run_pipeline(config: PipelineConfig, recorded, reference, top, side) -> dict:
    """Run ranging, scaling, and volumetry over in-memory inputs.

    `recorded` is an EchoTrace (one probe attempt), `reference` the emitted
    sequence, `top`/`side` the segmented masks.  Returns the report dict;
    raises StageError on the first failing stage.
    """
    with _stage("ranging"):
        if recorded is None:
            raise ValueError("recorded trace missing")
        if reference is None:
            raise ValueError("reference sequence missing")
        ranging_cfg = config.ranging
        if ranging_cfg.sample_rate != recorded.sample_rate:
            ranging_cfg = replace(ranging_cfg, sample_rate=recorded.sample_rate)
        estimate = range_with_retry(iter([recorded]), reference, ranging_cfg)

    with _stage("geometry"):
        scale = meters_per_pixel(estimate.height, config.camera)

    with _stage("volumetry"):
        if top is None:
            raise ValueError("top-view mask missing")
        if side is None:
            raise ValueError("side-view mask missing")
        s_real, top_width = top_area(top, scale)
        profile = side_profile(side)
        side_scale = config.side_scale if config.calibration == "explicit-side-scale" else None
        report = estimate_volume(s_real, top_width, profile, side_scale)

    return {
        "schema_version": SCHEMA_VERSION,
        "container": config.container,
        "ranging": {
            "height_m": estimate.height,
            "round_trip_path_m": estimate.round_trip_path,
            "attempts": estimate.attempts_used,
            "elapsed_retry_s": estimate.elapsed_retry_time,
        },
        "scale": {
            "image_width_m": scale.image_physical_width,
            "meters_per_pixel": scale.meters_per_pixel,
        },
        "volumetry": {
            "top_area_m2": report.top_area,
            "top_width_m": report.top_width,
            "side_rows": profile.rows,
            "side_scale_m": report.side_scale,
            "calibration_mode": report.calibration_mode,
            "volume_m3": report.volume,
        },
    }
