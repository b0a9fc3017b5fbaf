import numpy as np
import pytest

from sonavol.mask_io import read_mask, write_mask
from sonavol.volumetry import FoodMask


def random_mask(seed=0, shape=(37, 53)):
    rng = np.random.default_rng(seed)
    return FoodMask(bits=rng.random(shape) > 0.5, view="top")


@pytest.mark.parametrize("ext", ["pgm", "png"])
def test_round_trip(tmp_path, ext):
    mask = random_mask()
    path = tmp_path / f"mask.{ext}"
    write_mask(path, mask)
    back = read_mask(path, view="top")
    assert np.array_equal(back.bits, mask.bits)
    assert back.view == "top"


def test_pgm_with_comment(tmp_path):
    path = tmp_path / "commented.pgm"
    raster = bytes([0, 255, 255, 0, 255, 0])
    path.write_bytes(b"P5\n# a comment line\n3 2\n255\n" + raster)
    mask = read_mask(path, view="side")
    assert mask.bits.shape == (2, 3)
    assert mask.bits.sum() == 3


def test_pgm_truncated_rejected(tmp_path):
    path = tmp_path / "short.pgm"
    path.write_bytes(b"P5\n4 4\n255\n\x00\x00")
    with pytest.raises(ValueError, match="truncated"):
        read_mask(path, view="top")


def test_wrong_magic_rejected(tmp_path):
    path = tmp_path / "ascii.pgm"
    path.write_bytes(b"P2\n2 2\n255\n0 1 2 3\n")
    with pytest.raises(ValueError, match="P5"):
        read_mask(path, view="top")


def test_unsupported_extension(tmp_path):
    with pytest.raises(ValueError, match="unsupported"):
        read_mask(tmp_path / "mask.bmp", view="top")
    with pytest.raises(ValueError, match="unsupported"):
        write_mask(tmp_path / "mask.tiff", random_mask())
