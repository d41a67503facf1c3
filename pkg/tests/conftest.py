import io
import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

sys.path.insert(0, str(Path(__file__).parent))

from vizcritic.image_io import from_array


def png_bytes(array: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(array.astype(np.uint8), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def solid(width: int, height: int, color) -> np.ndarray:
    arr = np.zeros((height, width, 3), dtype=np.uint8)
    arr[:, :] = color
    return arr


@pytest.fixture
def white_image():
    return from_array(solid(200, 150, (255, 255, 255)))


@pytest.fixture
def half_red_blue():
    arr = solid(200, 100, (255, 0, 0))
    arr[:, 100:] = (0, 0, 255)
    return from_array(arr)


@pytest.fixture
def golden_dir():
    return Path(__file__).parent / "golden"
