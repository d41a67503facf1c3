"""Synthetic chart generation for tests and the reference corpus.

Charts are drawn with PIL primitives (bars, axes, title and label text)
from a seeded RNG, so every fixture is reproducible. Generators return
the png bytes together with ground-truth text boxes, which doubles as a
perfect OCR stub for pipeline runs.
"""
from __future__ import annotations

import io
import random

from PIL import Image, ImageDraw

PALETTES = [
    ["#4477AA", "#EE6677", "#228833", "#CCBB44", "#66CCEE", "#AA3377"],
    ["#E69F00", "#56B4E9", "#009E73", "#F0E442", "#0072B2", "#D55E00"],
    ["#648FFF", "#785EF0", "#DC267F", "#FE6100", "#FFB000"],
    ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e"],
]


def _hex_to_rgb(code: str) -> tuple[int, int, int]:
    code = code.lstrip("#")
    return tuple(int(code[i : i + 2], 16) for i in (0, 2, 4))


def make_bar_chart(seed: int, width: int | None = None, height: int | None = None):
    """Draw a bar chart; returns (png_bytes, text_box_lines).

    Box lines use the OCR wire format "x y w h confidence content" in the
    chart's own pixel coordinates.
    """
    rng = random.Random(seed)
    width = width or rng.randrange(360, 900, 20)
    height = height or rng.randrange(280, 700, 20)
    img = Image.new("RGB", (width, height), "white")
    draw = ImageDraw.Draw(img)

    palette = [_hex_to_rgb(c) for c in rng.choice(PALETTES)]
    margin_l, margin_r, margin_t, margin_b = 60, 20, 48, 40
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    axis_color = (60, 60, 60)
    draw.line([(margin_l, margin_t), (margin_l, height - margin_b)], fill=axis_color, width=2)
    draw.line([(margin_l, height - margin_b), (width - margin_r, height - margin_b)], fill=axis_color, width=2)

    boxes = []

    def draw_text(x, y, text, fill=(20, 20, 20)):
        draw.text((x, y), text, fill=fill)
        tw = int(draw.textlength(text))
        boxes.append(f"{x} {y} {max(tw, 1)} 11 0.99 {text}")

    title = f"Series {seed} by group"
    if rng.random() < 0.85:
        draw_text(margin_l, 16, title)

    n_bars = rng.randint(3, 8)
    single_color = rng.random() < 0.4
    gap = plot_w // (n_bars * 4)
    bar_w = max(4, (plot_w - gap * (n_bars + 1)) // n_bars)
    for i in range(n_bars):
        value = rng.uniform(0.15, 1.0)
        bar_h = int(value * (plot_h - 10))
        x0 = margin_l + gap + i * (bar_w + gap)
        y0 = height - margin_b - bar_h
        color = palette[0] if single_color else palette[i % len(palette)]
        draw.rectangle([x0, y0, x0 + bar_w, height - margin_b], fill=color)
        if rng.random() < 0.7:
            draw_text(x0, height - margin_b + 8, f"g{i + 1}")

    if rng.random() < 0.6:
        for frac in (0.25, 0.5, 0.75, 1.0):
            y = int(height - margin_b - frac * (plot_h - 10))
            draw_text(margin_l - 40, y - 5, f"{frac:0.2f}")

    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue(), boxes


def make_solid_image(color: tuple[int, int, int], width: int = 200, height: int = 150) -> bytes:
    img = Image.new("RGB", (width, height), color)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def scale_boxes(boxes: list[str], scale: float) -> list[str]:
    """Rescale ground-truth boxes into analysis-image coordinates."""
    scaled = []
    for line in boxes:
        parts = line.split(" ", 5)
        x, y, w, h = (int(round(int(v) * scale)) for v in parts[:4])
        rest = f"{parts[4]} {parts[5]}" if len(parts) == 6 else parts[4]
        scaled.append(f"{x} {y} {max(w, 1)} {max(h, 1)} {rest}")
    return scaled


def corpus(n: int = 60):
    """The reference corpus: n seeded charts with ground-truth boxes."""
    return [make_bar_chart(seed) for seed in range(1, n + 1)]
