"""Binary mask files: 8-bit PGM (P5) and single-channel PNG.

Nonzero pixels are food.  PGM is handled directly (the format is three
header tokens plus raw bytes); PNG goes through Pillow.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .volumetry import FoodMask

__all__ = ["read_mask", "write_mask"]


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4 and pos < len(data):
        # skip whitespace and '#' comment lines between header tokens
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if len(tokens) < 4 or tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if not 0 < maxval < 256:
        raise ValueError(f"{path}: only 8-bit PGM is supported (maxval {maxval})")
    pos += 1  # single whitespace byte after the maxval token
    raster = data[pos:pos + width * height]
    if len(raster) != width * height:
        raise ValueError(f"{path}: truncated PGM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width)


def _write_pgm(path: Path, bits: np.ndarray) -> None:
    height, width = bits.shape
    header = f"P5\n{width} {height}\n255\n".encode("ascii")
    path.write_bytes(header + (bits.astype(np.uint8) * 255).tobytes())


def read_mask(path, view: str) -> FoodMask:
    """Load a mask file (.pgm or .png) as a FoodMask with the given view."""
    p = Path(path)
    suffix = p.suffix.lower()
    if suffix == ".pgm":
        gray = _read_pgm(p)
    elif suffix == ".png":
        gray = np.asarray(Image.open(p).convert("L"))
    else:
        raise ValueError(f"{path}: unsupported mask format {suffix!r} (use .pgm or .png)")
    return FoodMask(bits=gray > 0, view=view)


def write_mask(path, mask: FoodMask) -> None:
    """Write a FoodMask as .pgm (P5) or .png depending on the suffix."""
    p = Path(path)
    suffix = p.suffix.lower()
    if suffix == ".pgm":
        _write_pgm(p, mask.bits)
    elif suffix == ".png":
        Image.fromarray(mask.bits.astype(np.uint8) * 255, mode="L").save(p)
    else:
        raise ValueError(f"{path}: unsupported mask format {suffix!r} (use .pgm or .png)")
