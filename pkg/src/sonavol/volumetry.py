"""Silhouette volumetry: top-view area, side-view width profile, volume.

The solid is modeled as a stack of one-pixel-high slabs.  Each slab is the
top silhouette scaled uniformly so its width matches the side silhouette's
width at that level, so the volume is

    V = dz * sum_i  S_top * (w_i / w_top)**2

with S_top the physical top area, w_top the physical top width, w_i the
physical width of side row i and dz the slab thickness.  For solids of
revolution this Riemann sum converges to the true volume; a voxel-counting
oracle (`synth_solid`) provides the independent ground truth the model is
validated against.

Two calibrations of the side view are supported: an explicit side
meters-per-pixel (e.g. from a second ranging shot), or width matching,
which equates the widest side row with the top view's physical width and
needs no extra capture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ScaleResult

__all__ = [
    "FoodMask",
    "WidthProfile",
    "VolumeReport",
    "top_area",
    "side_profile",
    "estimate_volume",
    "miou",
    "synth_solid",
    "SHAPES",
]

SHAPES = ("cylinder", "cone", "hemisphere", "ellipsoid-cap")


@dataclass(frozen=True)
class FoodMask:
    """Binary silhouette, row-major with row 0 at the image top."""

    bits: np.ndarray
    view: str  # 'top' or 'side'

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2 or bits.size == 0:
            raise ValueError("mask bits must form a nonempty 2-D grid")
        if self.view not in ("top", "side"):
            raise ValueError(f"view must be 'top' or 'side', got {self.view!r}")
        object.__setattr__(self, "bits", bits)

    @property
    def height(self) -> int:
        return int(self.bits.shape[0])

    @property
    def width(self) -> int:
        return int(self.bits.shape[1])

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))


@dataclass(frozen=True)
class WidthProfile:
    """Per-row widths of a side silhouette, ordered bottom row to top row."""

    widths: np.ndarray  # px, one entry per side row
    base_width: int     # px, the maximal row width

    def __post_init__(self):
        widths = np.asarray(self.widths, dtype=np.int64)
        if widths.ndim != 1 or widths.size == 0:
            raise ValueError("width profile must hold at least one row")
        if np.any(widths < 0):
            raise ValueError("row widths cannot be negative")
        if self.base_width != int(widths.max()) or self.base_width <= 0:
            raise ValueError("base_width must equal the maximal row width and be positive")
        object.__setattr__(self, "widths", widths)

    @property
    def rows(self) -> int:
        return int(self.widths.size)


@dataclass(frozen=True)
class VolumeReport:
    top_area: float          # m^2, physical top-view area
    top_width: float         # m, physical top-view width
    side_scale: float        # m per side row (slab thickness dz)
    volume: float            # m^3
    calibration_mode: str    # 'explicit-side-scale' or 'width-matching'


def _row_extents(bits: np.ndarray) -> np.ndarray:
    """Per-row width as leftmost-to-rightmost food extent (0 for empty rows)."""
    extents = np.zeros(bits.shape[0], dtype=np.int64)
    any_food = bits.any(axis=1)
    if not any_food.any():
        return extents
    first = bits.argmax(axis=1)
    last = bits.shape[1] - 1 - bits[:, ::-1].argmax(axis=1)
    extents[any_food] = last[any_food] - first[any_food] + 1
    return extents


def _scale_value(scale) -> float:
    if isinstance(scale, ScaleResult):
        return scale.meters_per_pixel
    return float(scale)


def top_area(mask: FoodMask, scale) -> tuple[float, float]:
    """Physical area and width of the top silhouette.

    `scale` is a ScaleResult or a plain meters-per-pixel value.  The width
    is the largest per-row extent (bounding width), which is robust to
    interior holes.  Returns (area_m2, width_m).
    """
    if mask.view != "top":
        raise ValueError(f"top_area needs a top-view mask, got view={mask.view!r}")
    count = mask.count()
    if count == 0:
        raise ValueError("top mask contains no food pixels")
    mpp = _scale_value(scale)
    width_px = int(_row_extents(mask.bits).max())
    return count * mpp * mpp, width_px * mpp


def side_profile(mask: FoodMask) -> WidthProfile:
    """Per-row widths of the side silhouette, bottom row first.

    Rows outside the food's vertical span are dropped; empty rows inside
    the span stay as width 0.
    """
    if mask.view != "side":
        raise ValueError(f"side_profile needs a side-view mask, got view={mask.view!r}")
    extents = _row_extents(mask.bits)
    occupied = np.flatnonzero(extents > 0)
    if occupied.size == 0:
        raise ValueError("side mask contains no food pixels")
    top_row, bottom_row = int(occupied[0]), int(occupied[-1])
    widths = extents[top_row:bottom_row + 1][::-1]  # image bottom -> top
    return WidthProfile(widths=widths, base_width=int(widths.max()))


def estimate_volume(
    s_real: float,
    top_width: float,
    profile: WidthProfile,
    side_scale: float | None = None,
) -> VolumeReport:
    """Stacked-slab volume from the top area and the side width profile.

    With `side_scale` given (meters per side pixel), every slab is
    `side_scale` thick and row widths convert through it.  Otherwise the
    side scale is derived by width matching: the widest side row is
    declared equal to the physical top width.
    """
    if top_width <= 0:
        raise ValueError("top width must be positive")
    if s_real <= 0:
        raise ValueError("top area must be positive")
    widths = profile.widths.astype(np.float64)
    if side_scale is not None:
        if side_scale <= 0:
            raise ValueError("side scale must be positive")
        dz = float(side_scale)
        mode = "explicit-side-scale"
    else:
        dz = top_width / profile.base_width
        mode = "width-matching"
    ratios = widths * dz / top_width
    volume = dz * s_real * float(np.sum(ratios * ratios))
    return VolumeReport(
        top_area=s_real,
        top_width=top_width,
        side_scale=dz,
        volume=volume,
        calibration_mode=mode,
    )


def miou(pred: FoodMask, truth: FoodMask) -> float:
    """Mean intersection-over-union over the food and background classes.

    A class absent from both masks contributes an IoU of 1.  Symmetric in
    its arguments; equals 1 exactly when the masks are identical.
    """
    if pred.bits.shape != truth.bits.shape:
        raise ValueError(
            f"mask dimensions differ: {pred.bits.shape} vs {truth.bits.shape}"
        )
    scores = []
    for food in (True, False):
        p = pred.bits if food else ~pred.bits
        t = truth.bits if food else ~truth.bits
        union = int(np.count_nonzero(p | t))
        if union == 0:
            scores.append(1.0)
        else:
            scores.append(int(np.count_nonzero(p & t)) / union)
    return float(np.mean(scores))


def _profile_radius(shape: str, z: np.ndarray, radius: float, height: float) -> np.ndarray:
    """Cross-section radius of the solid at height z (pixel units)."""
    if shape == "cylinder":
        return np.full_like(z, radius, dtype=np.float64)
    if shape == "cone":
        return radius * (1.0 - z / height)
    # hemisphere is the h == r special case of the ellipsoid cap
    return radius * np.sqrt(np.clip(1.0 - (z / height) ** 2, 0.0, None))


def synth_solid(
    shape: str,
    radius_px: float,
    height_px: float,
    grid: int,
    scale: float = 1.0e-3,
):
    """Exact silhouettes of a reference solid plus its brute-force volume.

    Rasterizes the top and side silhouettes of a solid of revolution
    (radius and height in pixels) and computes the true volume by voxel
    counting: a grid**3 lattice of cell centers over the bounding box,
    each cell contributing its volume when its center lies inside the
    solid.  `scale` (meters per pixel) converts to cubic meters.

    Returns (top_mask, side_mask, true_volume_m3).
    """
    if shape not in SHAPES:
        raise ValueError(f"shape must be one of {SHAPES}, got {shape!r}")
    if grid < 64:
        raise ValueError(f"grid must be at least 64, got {grid}")
    if radius_px < 1 or height_px < 1:
        raise ValueError("radius_px and height_px must be at least 1")
    if shape == "hemisphere":
        height_px = radius_px

    r = float(radius_px)
    h = float(height_px)
    size = int(2 * round(radius_px) + 1)
    center = size // 2

    # top silhouette: the widest cross-section is the base disk
    cols = np.arange(size) - center
    xx, yy = np.meshgrid(cols, cols)
    top = FoodMask(bits=xx * xx + yy * yy <= r * r, view="top")

    # side silhouette: image row 0 at the top of the solid
    n_rows = int(round(height_px))
    z_rows = h - (np.arange(n_rows) + 0.5)  # height of each image row's center
    half = _profile_radius(shape, np.clip(z_rows, 0.0, h), r, h)
    side_bits = np.abs(cols)[np.newaxis, :] <= half[:, np.newaxis]
    side = FoodMask(bits=side_bits, view="side")

    # voxel brute force over the bounding box [-r, r]^2 x [0, h]
    dx = 2.0 * r / grid
    dz = h / grid
    axis = -r + (np.arange(grid) + 0.5) * dx
    gx, gy = np.meshgrid(axis, axis)
    rho2 = gx * gx + gy * gy
    z_cells = (np.arange(grid) + 0.5) * dz
    radii = _profile_radius(shape, z_cells, r, h)
    cells = 0
    for rad in radii:
        cells += int(np.count_nonzero(rho2 <= rad * rad))
    volume_px3 = cells * dx * dx * dz
    return top, side, volume_px3 * scale ** 3
