"""Chart image loading, validation, and pre-scaling.

Accepts png/jpeg byte streams, enforces the 100-2000 px per-dimension
bounds, composites alpha over white, and produces the downscaled copy
used by the analysis filters (the display image is never downscaled).
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, FormatError, SizeError

MIN_DIM = 100
MAX_DIM = 2000
DEFAULT_ANALYSIS_MAX_DIM = 512

_FORMAT_TAGS = {
    "png": "png",
    "jpg": "jpeg",
    "jpeg": "jpeg",
}


@dataclass(frozen=True)
class ChartImage:
    """Validated RGB raster image; immutable and safe to share."""

    width: int
    height: int
    pixels: np.ndarray = field(repr=False)  # (height, width, 3) uint8, read-only
    source_format: str = "png"

    def __post_init__(self):
        px = self.pixels
        if px.shape != (self.height, self.width, 3) or px.dtype != np.uint8:
            raise ValueError("pixels must be (height, width, 3) uint8")
        px.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, ChartImage):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.source_format == other.source_format
            and np.array_equal(self.pixels, other.pixels)
        )


def load_chart_image(data: bytes, declared_format: str) -> ChartImage:
    """Decode and validate a chart screenshot.

    Raises FormatError for formats other than png/jpeg, DecodeError for
    undecodable bytes, and SizeError when either dimension is outside
    [100, 2000]. Alpha, if present, is composited over white.
    """
    tag = _FORMAT_TAGS.get(declared_format.lower().lstrip("."))
    if tag is None:
        raise FormatError(f"unsupported format {declared_format!r}; expected png or jpeg")
    if not data:
        raise DecodeError("empty byte stream")
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"not a valid png/jpeg stream: {exc}") from None
    actual = (img.format or "").lower()
    if actual not in ("png", "jpeg"):
        raise DecodeError(f"stream decodes as {actual or 'unknown'}, not png/jpeg")

    w, h = img.size
    if not (MIN_DIM <= w <= MAX_DIM and MIN_DIM <= h <= MAX_DIM):
        raise SizeError(
            f"image is {w}x{h} px; each dimension must be within "
            f"{MIN_DIM}x{MIN_DIM} and {MAX_DIM}x{MAX_DIM}"
        )

    if img.mode in ("RGBA", "LA", "PA") or (img.mode == "P" and "transparency" in img.info):
        rgba = img.convert("RGBA")
        background = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
        img = Image.alpha_composite(background, rgba).convert("RGB")
    else:
        img = img.convert("RGB")

    pixels = np.asarray(img, dtype=np.uint8).copy()
    return ChartImage(width=w, height=h, pixels=pixels, source_format=actual)


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def downsample_for_analysis(img: ChartImage, max_dim: int = DEFAULT_ANALYSIS_MAX_DIM) -> ChartImage:
    """Scale so the larger dimension equals max_dim (area-average resampling).

    Returns the input unchanged when it already fits. Aspect ratio is
    preserved with round-half-up on the minor dimension.
    """
    if max_dim < MIN_DIM:
        raise ValueError(f"max_dim must be >= {MIN_DIM}")
    major = max(img.width, img.height)
    if major <= max_dim:
        return img
    scale = max_dim / major
    if img.width >= img.height:
        new_w = max_dim
        new_h = max(1, _round_half_up(img.height * scale))
    else:
        new_h = max_dim
        new_w = max(1, _round_half_up(img.width * scale))
    pil = Image.fromarray(img.pixels, mode="RGB").resize((new_w, new_h), Image.BOX)
    return ChartImage(
        width=new_w,
        height=new_h,
        pixels=np.asarray(pil, dtype=np.uint8).copy(),
        source_format=img.source_format,
    )


def encode_png(img: ChartImage) -> bytes:
    """Serialize to png; all derived artifact images go through here."""
    buf = io.BytesIO()
    Image.fromarray(img.pixels, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def from_array(pixels: np.ndarray, source_format: str = "png") -> ChartImage:
    """Wrap an (h, w, 3) uint8 array without validation against size bounds."""
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    h, w = arr.shape[:2]
    return ChartImage(width=w, height=h, pixels=arr, source_format=source_format)
