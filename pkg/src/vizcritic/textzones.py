"""Text zone detection via a pluggable OCR backend."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import BackendError
from .image_io import ChartImage, encode_png


@dataclass(frozen=True)
class TextBox:
    """One detected text box (letter- or word-level, backend's choice)."""

    x: int
    y: int
    w: int
    h: int
    content: str
    confidence: float


def _parse_box_line(line: str) -> TextBox | None:
    parts = line.split(" ", 5)
    if len(parts) < 5:
        return None
    try:
        x, y, w, h = (int(p) for p in parts[:4])
        conf = float(parts[4])
    except ValueError:
        return None
    content = parts[5] if len(parts) == 6 else ""
    return TextBox(x=x, y=y, w=w, h=h, content=content, confidence=conf)


def detect_text_boxes(img: ChartImage, backend) -> list[TextBox]:
    """Run OCR and clip every returned box to the image bounds.

    Boxes that clip to zero area are dropped. Malformed lines in the
    backend response are a BackendError.
    """
    response = backend.detect(encode_png(img))
    boxes: list[TextBox] = []
    for raw in response.splitlines():
        line = raw.strip()
        if not line:
            continue
        box = _parse_box_line(line)
        if box is None:
            raise BackendError(f"ocr backend returned malformed box line: {raw!r}")
        x0 = max(0, box.x)
        y0 = max(0, box.y)
        x1 = min(img.width, box.x + box.w)
        y1 = min(img.height, box.y + box.h)
        if x1 <= x0 or y1 <= y0:
            continue
        boxes.append(TextBox(x=x0, y=y0, w=x1 - x0, h=y1 - y0, content=box.content, confidence=box.confidence))
    return boxes


def has_text(boxes: list[TextBox]) -> bool:
    """True when at least one box carries an alphanumeric character.

    Whitespace-only and punctuation-only content counts as no text.
    """
    return any(ch.isalnum() for box in boxes for ch in box.content)
