"""Saliency map acquisition and the attention heuristics built on it.

Four heuristics: the raw map itself (rendered as a heatmap overlay),
share of attention on text boxes, share in the chart center, and
coverage of color-transition zones by high saliency.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from PIL import Image
from scipy.ndimage import binary_dilation

from .errors import BackendError, EmptyReference
from .image_io import ChartImage, encode_png, from_array

DEFAULT_TRANSITION_RGB_THRESHOLD = 30.0
DEFAULT_HIGH_SALIENCY_CUTOFF = 0.5
TRANSITION_ZONE_RADIUS = 5


@dataclass(frozen=True)
class SaliencyMap:
    """Per-pixel attention estimate, max-normalized to [0, 1]."""

    width: int
    height: int
    values: np.ndarray  # (height, width) float64 in [0, 1]
    backend_id: str

    def __post_init__(self):
        v = self.values
        if v.shape != (self.height, self.width):
            raise ValueError("saliency values must match declared dimensions")
        v.setflags(write=False)

    @property
    def total_mass(self) -> float:
        return float(self.values.sum())


@dataclass(frozen=True)
class ReferenceDistribution:
    """Sorted per-image metric samples over a reference chart corpus."""

    metric_name: str
    samples: tuple[float, ...]

    def __post_init__(self):
        if not self.samples:
            raise EmptyReference(f"reference distribution {self.metric_name!r} is empty")
        if list(self.samples) != sorted(self.samples):
            raise ValueError(f"reference samples for {self.metric_name!r} must be sorted ascending")


@dataclass(frozen=True)
class SaliencyMetrics:
    """The three numeric attention heuristics; optional parts may be absent."""

    text_ratio: float | None
    center_fraction: float
    transition_coverage: float | None


def compute_saliency(img: ChartImage, backend) -> SaliencyMap:
    """Run the saliency backend and normalize its map onto [0, 1].

    The backend receives png bytes and must answer with a grayscale png
    of identical dimensions; anything else is a BackendError.
    """
    raw = backend.predict(encode_png(img))
    try:
        pil = Image.open(io.BytesIO(raw))
        pil.load()
    except Exception as exc:
        raise BackendError(f"saliency backend returned undecodable data: {exc}") from None
    if pil.size != (img.width, img.height):
        raise BackendError(
            f"saliency backend returned {pil.size[0]}x{pil.size[1]}, "
            f"expected {img.width}x{img.height}"
        )
    values = np.asarray(pil.convert("L"), dtype=np.float64) / 255.0
    peak = values.max()
    if peak > 0:
        values = values / peak
    return SaliencyMap(width=img.width, height=img.height, values=values, backend_id=backend.backend_id)


def center_saliency_fraction(smap: SaliencyMap) -> float:
    """Share of total saliency mass inside the centered w/3 x h/3 rectangle."""
    total = smap.values.sum()
    if total <= 0:
        return 0.0
    cw = smap.width // 3
    ch = smap.height // 3
    x0 = (smap.width - cw) // 2
    y0 = (smap.height - ch) // 2
    inner = smap.values[y0 : y0 + ch, x0 : x0 + cw].sum()
    return float(inner / total)


def text_saliency_ratio(smap: SaliencyMap, boxes) -> float | None:
    """Saliency mass fraction in the text-box union over its area fraction.

    1.0 means text draws exactly its share of attention; absent when
    there are no boxes or the map carries no mass.
    """
    if not boxes:
        return None
    total = smap.values.sum()
    if total <= 0:
        return None
    mask = np.zeros((smap.height, smap.width), dtype=bool)
    for box in boxes:
        x0 = max(0, box.x)
        y0 = max(0, box.y)
        x1 = min(smap.width, box.x + box.w)
        y1 = min(smap.height, box.y + box.h)
        if x1 > x0 and y1 > y0:
            mask[y0:y1, x0:x1] = True
    area = int(mask.sum())
    if area == 0:
        return None
    mass_fraction = float(smap.values[mask].sum() / total)
    area_fraction = area / (smap.width * smap.height)
    return mass_fraction / area_fraction


_DISCS: dict[int, np.ndarray] = {}


def _disc_footprint(radius: int) -> np.ndarray:
    if radius not in _DISCS:
        yy, xx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
        _DISCS[radius] = (yy * yy + xx * xx) <= radius * radius
    return _DISCS[radius]


def transition_zone_coverage(
    img: ChartImage,
    smap: SaliencyMap,
    rgb_threshold: float = DEFAULT_TRANSITION_RGB_THRESHOLD,
    high_cutoff: float = DEFAULT_HIGH_SALIENCY_CUTOFF,
) -> float | None:
    """Fraction of the color-transition zone covered by high saliency.

    Transition pixels differ from a 4-neighbor by more than rgb_threshold
    (Euclidean RGB distance); the zone is their 5-px-radius dilation.
    Absent when the image has no transitions at all.
    """
    if (img.height, img.width) != (smap.height, smap.width):
        raise ValueError("image and saliency map dimensions must match")
    px = img.pixels.astype(np.float64)
    edges = np.zeros((img.height, img.width), dtype=bool)
    dh = np.sqrt(((px[:, 1:] - px[:, :-1]) ** 2).sum(axis=2))
    dv = np.sqrt(((px[1:, :] - px[:-1, :]) ** 2).sum(axis=2))
    edges[:, 1:] |= dh > rgb_threshold
    edges[:, :-1] |= dh > rgb_threshold
    edges[1:, :] |= dv > rgb_threshold
    edges[:-1, :] |= dv > rgb_threshold
    if not edges.any():
        return None
    zone = binary_dilation(edges, structure=_disc_footprint(TRANSITION_ZONE_RADIUS))
    covered = int((smap.values[zone] >= high_cutoff).sum())
    return covered / int(zone.sum())


def percentile_flag(metric: float, ref: ReferenceDistribution, percentile: int, direction: str) -> bool:
    """Nearest-rank percentile comparison against a reference corpus."""
    if not 1 <= percentile <= 99:
        raise ValueError("percentile must be in 1..99")
    if direction not in ("above", "below"):
        raise ValueError("direction must be 'above' or 'below'")
    n = len(ref.samples)
    rank = math.ceil(percentile / 100 * n) - 1
    pivot = ref.samples[rank]
    return metric > pivot if direction == "above" else metric < pivot


# Colormap anchors: dark blue for quiet regions through red to yellow
# for the most salient ones, blended 50/50 over the chart.
_COLORMAP_STOPS = np.array([[0.0, 0.0, 64.0], [255.0, 0.0, 0.0], [255.0, 255.0, 0.0]])


def colormap_color(value: float) -> tuple[int, int, int]:
    """Map a saliency value in [0, 1] through the heatmap palette."""
    v = min(max(value, 0.0), 1.0)
    if v <= 0.5:
        t = v / 0.5
        lo, hi = _COLORMAP_STOPS[0], _COLORMAP_STOPS[1]
    else:
        t = (v - 0.5) / 0.5
        lo, hi = _COLORMAP_STOPS[1], _COLORMAP_STOPS[2]
    mixed = lo + (hi - lo) * t
    return tuple(int(c) for c in np.floor(mixed + 0.5))


def render_heatmap_overlay(img: ChartImage, smap: SaliencyMap) -> ChartImage:
    """Blend the saliency heatmap 50/50 over the chart image."""
    if (img.height, img.width) != (smap.height, smap.width):
        raise ValueError("image and saliency map dimensions must match")
    v = np.clip(smap.values, 0.0, 1.0)
    low = v <= 0.5
    t = np.where(low, v / 0.5, (v - 0.5) / 0.5)[..., None]
    start = np.where(low[..., None], _COLORMAP_STOPS[0], _COLORMAP_STOPS[1])
    end = np.where(low[..., None], _COLORMAP_STOPS[1], _COLORMAP_STOPS[2])
    heat = np.floor(start + (end - start) * t + 0.5)
    blended = np.floor(0.5 * img.pixels.astype(np.float64) + 0.5 * heat + 0.5)
    return from_array(np.clip(blended, 0, 255).astype(np.uint8), img.source_format)


# --------------------------------------------------------------------------
# Reference distribution config: one sorted sample list per metric name.
# --------------------------------------------------------------------------


def parse_reference_distributions(text: str) -> dict[str, ReferenceDistribution]:
    refs: dict[str, ReferenceDistribution] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, _, rest = line.partition(":")
        name = name.strip()
        samples = tuple(float(tok) for tok in rest.split())
        refs[name] = ReferenceDistribution(metric_name=name, samples=samples)
    return refs


def load_default_references() -> dict[str, ReferenceDistribution]:
    text = resources.files("vizcritic.data").joinpath("reference_distributions.txt").read_text()
    return parse_reference_distributions(text)


def format_reference_distributions(refs: dict[str, ReferenceDistribution], header: str = "") -> str:
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    for name in sorted(refs):
        samples = " ".join(f"{s:.6f}" for s in refs[name].samples)
        lines.append(f"{name}: {samples}")
    return "\n".join(lines) + "\n"
