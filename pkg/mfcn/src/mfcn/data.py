"""Synthetic tabletop scenes for training the toy multi-task network.

Each sample is a small RGB image of a container on a table with food in
it, plus the food mask and the container class.  Bowls are ellipses the
food fills to the rim, so bowl food has a smooth rounded contour that
coincides with the container boundary; plate food is an irregular blob
strictly inside the plate.  That contrast is exactly the shape prior the
container-classification task is supposed to feed the segmenter.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["SegSample", "generate_synthetic_dataset", "write_pgm", "CONTAINERS"]

CONTAINERS = ("plate", "bowl")


@dataclass(frozen=True)
class SegSample:
    image: np.ndarray      # (H, W, 3) float32 in [0, 1]
    mask: np.ndarray       # (H, W) bool, True = food
    container: str         # 'plate' or 'bowl'

    def __post_init__(self):
        if self.image.shape[:2] != self.mask.shape:
            raise ValueError("mask dimensions must match the image")
        if self.container not in CONTAINERS:
            raise ValueError(f"container must be one of {CONTAINERS}")


def _ellipse(size, cx, cy, a, b):
    yy, xx = np.mgrid[0:size, 0:size]
    return ((xx - cx) / a) ** 2 + ((yy - cy) / b) ** 2 <= 1.0


def _food_color(rng):
    # reddish/brownish/greenish, clearly apart from the white containers
    return np.array([rng.uniform(0.45, 0.9), rng.uniform(0.2, 0.6), rng.uniform(0.1, 0.4)])


def _render(rng, container, size):
    img = np.empty((size, size, 3), dtype=np.float64)
    table = rng.uniform(0.55, 0.75)
    img[:] = table + rng.normal(0.0, 0.02, (size, size, 3))

    cx = size / 2 + rng.uniform(-4, 4)
    cy = size / 2 + rng.uniform(-4, 4)
    container_color = np.array([0.9, 0.9, rng.uniform(0.85, 0.98)])

    if container == "bowl":
        a = rng.uniform(0.28, 0.40) * size
        b = rng.uniform(0.28, 0.40) * size
        inner = _ellipse(size, cx, cy, a, b)
        rim = _ellipse(size, cx, cy, 1.12 * a, 1.12 * b) & ~inner
        img[rim] = container_color
        mask = inner  # food fills the bowl to the rim
    else:
        a = rng.uniform(0.36, 0.46) * size
        b = rng.uniform(0.36, 0.46) * size
        plate = _ellipse(size, cx, cy, a, b)
        well = _ellipse(size, cx, cy, 0.82 * a, 0.82 * b)
        img[plate] = container_color
        img[plate & ~well] = container_color * 0.88  # visible rim band
        mask = np.zeros((size, size), dtype=bool)
        for _ in range(rng.integers(3, 7)):
            fx = cx + rng.uniform(-0.35, 0.35) * a
            fy = cy + rng.uniform(-0.35, 0.35) * b
            fr = rng.uniform(0.10, 0.22) * size
            mask |= _ellipse(size, fx, fy, fr, fr)
        mask &= well  # strictly inside the plate
        if not mask.any():
            mask = _ellipse(size, cx, cy, 0.15 * size, 0.15 * size)

    img[mask] = _food_color(rng) + rng.normal(0.0, 0.04, (int(mask.sum()), 3))
    return np.clip(img, 0.0, 1.0).astype(np.float32), mask


def generate_synthetic_dataset(count: int, seed: int, size: int = 64) -> list[SegSample]:
    """Deterministic list of `count` synthetic samples, both classes drawn uniformly."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(count):
        container = "bowl" if rng.random() < 0.5 else "plate"
        image, mask = _render(rng, container, size)
        samples.append(SegSample(image=image, mask=mask, container=container))
    return samples


def write_pgm(path, mask: np.ndarray) -> None:
    """Write a boolean mask as binary PGM (P5), nonzero = food.

    This is the mask format the volume-estimation pipeline ingests.
    """
    bits = np.asarray(mask, dtype=bool)
    height, width = bits.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + (bits.astype(np.uint8) * 255).tobytes())
