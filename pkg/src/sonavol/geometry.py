"""Pinhole scaling: vertical height -> physical size of a top-view pixel.

An image taken straight down from height H spans a physical width of
M = m * H / f, with f the focal length and m the sensor width.  Dividing
by the image width in pixels gives the meters-per-pixel scale every
area and width measurement uses.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["CameraIntrinsics", "ScaleResult", "DEFAULT_INTRINSICS", "meters_per_pixel"]


@dataclass(frozen=True)
class CameraIntrinsics:
    focal_length: float   # m
    sensor_width: float   # m
    image_width: int      # px

    def __post_init__(self):
        if self.focal_length <= 0 or self.sensor_width <= 0 or self.image_width <= 0:
            raise ValueError("camera intrinsics must all be strictly positive")


# Placeholder values typical of a phone main camera; override per device.
DEFAULT_INTRINSICS = CameraIntrinsics(focal_length=4.15e-3, sensor_width=4.8e-3, image_width=3264)


@dataclass(frozen=True)
class ScaleResult:
    image_physical_width: float  # m
    meters_per_pixel: float      # m/px


def meters_per_pixel(height: float, intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS) -> ScaleResult:
    """Physical width of the image footprint and of one pixel at `height`."""
    if height <= 0:
        raise ValueError(f"height must be positive, got {height}")
    width = intrinsics.sensor_width * height / intrinsics.focal_length
    return ScaleResult(image_physical_width=width, meters_per_pixel=width / intrinsics.image_width)
