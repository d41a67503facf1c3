"""Color analysis: distinct/similar color grouping, color vision
deficiency simulation, and entropy-based information loss.

The CVD transforms are exact plane projections in linear RGB built from
published primitives (the IEC 61966-2-1 sRGB matrix, the
Hunt-Pointer-Estevez cone fundamentals, and CIE 1931 anchor stimuli at
575 nm and 485 nm), hinged on the display neutral axis so grays are
fixed points. Out-of-gamut results are desaturated toward gray, which
stays inside the projection plane, and the 8-bit encoding is iterated to
a fixed point so simulating an already-simulated image is a no-op.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image_io import ChartImage, from_array

DEFAULT_GROUPING_THRESHOLD = 10.0
DEFAULT_BACKGROUND_COVERAGE = 0.40
DEFAULT_PALETTE_CAP = 4096
DEFAULT_LOSS_THRESHOLD = 0.10

DEFICIENCIES = ("deuteranopia", "protanopia", "tritanopia")


@dataclass(frozen=True)
class Palette:
    """Distinct colors of an image with pixel frequencies, most frequent first."""

    entries: tuple[tuple[tuple[int, int, int], int], ...]
    background_excluded: bool


@dataclass(frozen=True)
class ColorGroup:
    """Colors within mutual RGB distance below the grouping threshold."""

    members: tuple[tuple[int, int, int], ...]
    centroid: tuple[int, int, int]
    total_frequency: int


@dataclass(frozen=True)
class CvdResult:
    deficiency: str
    simulated: ChartImage
    entropy_original: float
    entropy_simulated: float
    relative_loss: float
    significantly_affected: bool


def quantize_palette(
    img: ChartImage,
    max_entries: int = DEFAULT_PALETTE_CAP,
    exclude_background: bool = True,
    background_coverage: float = DEFAULT_BACKGROUND_COVERAGE,
) -> Palette:
    """Exact color census, keeping the max_entries most frequent colors.

    With exclude_background on, a color covering more than the coverage
    cutoff (charts are usually dominated by their background) is dropped.
    Ties are broken by lexicographic color order for determinism.
    """
    flat = img.pixels.reshape(-1, 3)
    colors, counts = np.unique(flat, axis=0, return_counts=True)
    order = np.lexsort((colors[:, 2], colors[:, 1], colors[:, 0], -counts))
    colors = colors[order]
    counts = counts[order]

    background_excluded = False
    if exclude_background and len(counts) and counts[0] > background_coverage * flat.shape[0]:
        colors = colors[1:]
        counts = counts[1:]
        background_excluded = True

    colors = colors[:max_entries]
    counts = counts[:max_entries]
    entries = tuple(
        ((int(c[0]), int(c[1]), int(c[2])), int(n)) for c, n in zip(colors, counts)
    )
    return Palette(entries=entries, background_excluded=background_excluded)


def _rgb_distance(a, b) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


def _pairwise_distances(colors: np.ndarray) -> np.ndarray:
    diff = colors[:, None, :].astype(np.float64) - colors[None, :, :].astype(np.float64)
    return np.sqrt((diff * diff).sum(axis=2))


def _threshold_components(dist: np.ndarray, threshold: float) -> list[list[int]]:
    """Connected components of the pairs-below-threshold graph.

    Complete linkage can never join clusters from different components,
    so each component clusters independently.
    """
    n = dist.shape[0]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    ii, jj = np.nonzero(np.triu(dist < threshold, k=1))
    for a, b in zip(ii.tolist(), jj.tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
    components: dict[int, list[int]] = {}
    for idx in range(n):
        components.setdefault(find(idx), []).append(idx)
    return list(components.values())


def _cluster_component(indices, colors, freqs, dist, threshold):
    """Exact greedy complete linkage within one component.

    Closest pair merges first; ties break on the lexicographically
    smallest member color of each cluster. Cluster distances update via
    the max rule, which is exactly the recomputed max pairwise distance.
    """
    import heapq

    m = len(indices)
    local = dist[np.ix_(indices, indices)].copy()
    members: list[list[int] | None] = [[i] for i in range(m)]
    keys = [tuple(int(c) for c in colors[indices[i]]) for i in range(m)]
    freq_sums = [int(freqs[indices[i]]) for i in range(m)]
    version = [0] * m

    heap = []
    for a in range(m):
        for b in range(a + 1, m):
            d = local[a, b]
            if d < threshold:
                lo, hi = sorted((keys[a], keys[b]))
                heapq.heappush(heap, (d, lo, hi, a, b, 0, 0))

    while heap:
        d, lo, hi, a, b, va, vb = heapq.heappop(heap)
        if members[a] is None or members[b] is None or version[a] != va or version[b] != vb:
            continue
        # merge b into a; a's row becomes the max of both rows
        members[a] = members[a] + members[b]
        members[b] = None
        freq_sums[a] += freq_sums[b]
        keys[a] = min(keys[a], keys[b])
        version[a] += 1
        np.maximum(local[a, :], local[b, :], out=local[a, :])
        local[:, a] = local[a, :]
        for k in range(m):
            if k != a and members[k] is not None and local[a, k] < threshold:
                lo, hi = sorted((keys[a], keys[k]))
                entry_a, entry_b = (a, k) if a < k else (k, a)
                heapq.heappush(
                    heap,
                    (local[a, k], lo, hi, entry_a, entry_b, version[entry_a], version[entry_b]),
                )

    clusters = []
    for slot, member_list in enumerate(members):
        if member_list is None:
            continue
        clusters.append(
            (
                [tuple(int(c) for c in colors[indices[i]]) for i in member_list],
                freq_sums[slot],
            )
        )
    return clusters


def group_colors(palette: Palette, threshold: float = DEFAULT_GROUPING_THRESHOLD) -> list[ColorGroup]:
    """Complete-linkage agglomerative grouping of the palette colors.

    Groups merge closest pair first while the merged group's maximum
    pairwise distance stays below the threshold; ties are broken by the
    lexicographically smallest member color of each group.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if not palette.entries:
        return []
    colors = np.array([c for c, _ in palette.entries], dtype=np.int64)
    freqs = np.array([n for _, n in palette.entries], dtype=np.int64)
    dist = _pairwise_distances(colors)

    raw_clusters = []
    for component in _threshold_components(dist, threshold):
        if len(component) == 1:
            idx = component[0]
            raw_clusters.append(([tuple(int(c) for c in colors[idx])], int(freqs[idx])))
        else:
            raw_clusters.extend(_cluster_component(component, colors, freqs, dist, threshold))

    groups = []
    for member_colors, freq_sum in raw_clusters:
        members = tuple(sorted(member_colors))
        means = [sum(m[ch] for m in members) / len(members) for ch in range(3)]
        centroid = tuple(int(math.floor(v + 0.5)) for v in means)
        groups.append(ColorGroup(members=members, centroid=centroid, total_frequency=freq_sum))
    groups.sort(key=lambda g: (-g.total_frequency, g.members[0]))
    return groups


def color_variability(groups: list[ColorGroup]) -> dict:
    """More than 2 distinct color groups reads as a multi-color design."""
    distinct = len(groups)
    return {"distinct_count": distinct, "multiple_colors": distinct > 2}


def color_similarity(groups: list[ColorGroup]) -> dict:
    """More than 2 multi-member groups reads as a similar-colors design."""
    similar = sum(1 for g in groups if len(g.members) >= 2)
    return {"similar_group_count": similar, "similar_colors": similar > 2}


# --------------------------------------------------------------------------
# Color vision deficiency simulation
# --------------------------------------------------------------------------

# sRGB -> XYZ (IEC 61966-2-1, D65 white)
_RGB2XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
# XYZ -> LMS (Hunt-Pointer-Estevez)
_XYZ2LMS = np.array(
    [
        [0.38971, 0.68898, -0.07868],
        [-0.22981, 1.18340, 0.04641],
        [0.0, 0.0, 1.0],
    ]
)
_RGB2LMS = _XYZ2LMS @ _RGB2XYZ
_LMS2RGB = np.linalg.inv(_RGB2LMS)

# CIE 1931 2-degree color matching values at the dichromat anchor stimuli
_ANCHOR_XYZ = {575: (0.8425, 0.9154, 0.0018), 485: (0.05795, 0.1693, 0.6162)}
_WHITE_LMS = _RGB2LMS @ np.ones(3)

_LUMA = np.array([0.2126, 0.7152, 0.0722])


def _projection_matrix(missing_axis: int, anchor_nm: int) -> np.ndarray:
    anchor = _XYZ2LMS @ np.array(_ANCHOR_XYZ[anchor_nm])
    normal = np.cross(_WHITE_LMS, anchor)
    direction = np.zeros(3)
    direction[missing_axis] = 1.0
    proj = np.eye(3) - np.outer(direction, normal) / normal[missing_axis]
    return _LMS2RGB @ proj @ _RGB2LMS


CVD_MATRICES = {
    "protanopia": _projection_matrix(0, 575),
    "deuteranopia": _projection_matrix(1, 575),
    "tritanopia": _projection_matrix(2, 485),
}


def srgb_decode(u8: np.ndarray) -> np.ndarray:
    u = u8 / 255.0
    return np.where(u <= 0.04045, u / 12.92, ((u + 0.055) / 1.055) ** 2.4)


def srgb_encode(linear: np.ndarray) -> np.ndarray:
    v = np.clip(linear, 0.0, 1.0)
    u = np.where(v <= 0.0031308, v * 12.92, 1.055 * v ** (1 / 2.4) - 0.055)
    return np.clip(np.rint(u * 255.0), 0, 255).astype(np.uint8)


def _desaturate_into_gamut(z: np.ndarray) -> np.ndarray:
    gray = np.clip((z * _LUMA).sum(axis=-1, keepdims=True), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_hi = np.where(z > 1.0, (z - 1.0) / (z - gray), 0.0)
        t_lo = np.where(z < 0.0, -z / (gray - z), 0.0)
    t = np.maximum(
        np.nan_to_num(t_hi, nan=1.0, posinf=1.0),
        np.nan_to_num(t_lo, nan=1.0, posinf=1.0),
    ).max(axis=-1, keepdims=True)
    t = np.clip(t, 0.0, 1.0)
    return np.clip((1.0 - t) * z + t * gray, 0.0, 1.0)


def _apply_once(flat_u8: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    projected = srgb_decode(flat_u8.astype(np.float64)) @ matrix.T
    return srgb_encode(_desaturate_into_gamut(projected))


def simulate_cvd(img: ChartImage, deficiency: str, max_iterations: int = 64) -> ChartImage:
    """Simulate full-severity dichromacy.

    The 8-bit map is iterated to a per-pixel fixed point; a pixel caught
    in a rounding flip-flop settles on the lexicographically smaller
    state, so the result is stable under re-simulation.
    """
    if deficiency not in CVD_MATRICES:
        raise ValueError(f"unknown deficiency {deficiency!r}; expected one of {DEFICIENCIES}")
    matrix = CVD_MATRICES[deficiency]
    flat = img.pixels.reshape(-1, 3)
    current = _apply_once(flat, matrix)
    active = np.arange(len(current))
    for _ in range(max_iterations):
        if not len(active):
            break
        nxt = _apply_once(current[active], matrix)
        moved = (nxt != current[active]).any(axis=-1)
        current[active] = nxt
        active = active[moved]
    if len(active):
        # settle residual rounding oscillations deterministically
        alt = _apply_once(current[active], matrix)
        cur = current[active]
        take_alt = (
            (alt[:, 0] < cur[:, 0])
            | ((alt[:, 0] == cur[:, 0]) & (alt[:, 1] < cur[:, 1]))
            | ((alt[:, 0] == cur[:, 0]) & (alt[:, 1] == cur[:, 1]) & (alt[:, 2] < cur[:, 2]))
        )
        current[active] = np.where(take_alt[:, None], alt, cur)
    return from_array(current.reshape(img.pixels.shape), img.source_format)


# --------------------------------------------------------------------------
# Entropy
# --------------------------------------------------------------------------

ENTROPY_BINS = 512  # 8 x 8 x 8 (top 3 bits per channel)


def image_entropy(img: ChartImage) -> float:
    """Shannon entropy (bits) of the 512-bin RGB histogram."""
    px = img.pixels
    bins = (
        (px[..., 0].astype(np.int32) >> 5) << 6
        | (px[..., 1].astype(np.int32) >> 5) << 3
        | (px[..., 2].astype(np.int32) >> 5)
    )
    counts = np.bincount(bins.ravel(), minlength=ENTROPY_BINS).astype(np.float64)
    probs = counts[counts > 0] / counts.sum()
    return float(-(probs * np.log2(probs)).sum())


def cvd_information_loss(
    img: ChartImage, deficiency: str, loss_threshold: float = DEFAULT_LOSS_THRESHOLD
) -> CvdResult:
    """Relative histogram-entropy loss between the image and its simulation."""
    simulated = simulate_cvd(img, deficiency)
    e_orig = image_entropy(img)
    e_sim = image_entropy(simulated)
    loss = (e_orig - e_sim) / e_orig if e_orig > 0 else 0.0
    return CvdResult(
        deficiency=deficiency,
        simulated=simulated,
        entropy_original=e_orig,
        entropy_simulated=e_sim,
        relative_loss=loss,
        significantly_affected=loss > loss_threshold,
    )
