"""Chart-to-table extraction, title detection, chart-type recommendation
input assembly, and chartjunk detection."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BackendError
from .image_io import ChartImage, encode_png

DEFAULT_CONFIDENCE_FLOOR = 0.5

# Perceptual effectiveness ranking of visual encodings used as design
# knowledge for chart recommendation. Repo-authored configuration.
PERCEPTUAL_RANKING_PREAMBLE = (
    "Rank visual encodings for quantitative data from most to least "
    "perceptually effective: position, length, angle, slope, area, volume, "
    "density, color saturation, color hue. For ordinal data prefer position, "
    "then density, saturation, and hue. For nominal data prefer position, "
    "then color hue, texture, and shape. If the data table has one "
    "categorical and one quantitative column, then a bar chart is usually "
    "the strongest choice. If both columns are quantitative, then consider "
    "a scatterplot. If one column is temporal, then consider a line chart."
)


@dataclass(frozen=True)
class ChartTable:
    """Tabular reading of a chart image produced by the chart-to-table backend."""

    title: str | None
    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    extraction_ok: bool
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class DetectedObject:
    label: str
    x: int
    y: int
    w: int
    h: int
    confidence: float


def _parse_table_response(text: str) -> ChartTable:
    lines = text.splitlines()
    if not lines or not any(line.strip() for line in lines):
        return ChartTable(title=None, columns=(), rows=(), extraction_ok=False)
    title_line = lines[0].strip()
    title = title_line or None
    body = [line for line in lines[1:] if line.strip()]
    if not body:
        return ChartTable(title=title, columns=(), rows=(), extraction_ok=False)
    columns = tuple(cell.strip() for cell in body[0].split("\t"))
    warnings: list[str] = []
    rows: list[tuple[str, ...]] = []
    for line in body[1:]:
        cells = [cell.strip() for cell in line.split("\t")]
        if len(cells) != len(columns):
            warnings.append(f"row padded/truncated from {len(cells)} to {len(columns)} cells")
            cells = (cells + [""] * len(columns))[: len(columns)]
        rows.append(tuple(cells))
    return ChartTable(
        title=title,
        columns=columns,
        rows=tuple(rows),
        extraction_ok=True,
        warnings=tuple(warnings),
    )


def extract_chart_table(img: ChartImage, backend) -> ChartTable:
    """Ask the chart-to-table backend for a title line plus TSV table.

    A transport failure raises BackendError; an unparseable chart is a
    normal result with extraction_ok=False.
    """
    return _parse_table_response(backend.extract(encode_png(img)))


def detect_title(table: ChartTable) -> dict:
    """Title presence depends only on the table's title field."""
    present = bool(table.title and table.title.strip())
    return {"present": present}


def serialize_table(table: ChartTable) -> str:
    lines = ["\t".join(table.columns)]
    lines.extend("\t".join(row) for row in table.rows)
    return "\n".join(lines)


def assemble_chart_recommendation_input(
    table: ChartTable, ranking_preamble: str = PERCEPTUAL_RANKING_PREAMBLE
) -> str | None:
    """Build the prompt fragment for chart-type recommendation.

    Absent when the table could not be extracted or carries no data rows;
    downstream then emits no suggestion.
    """
    if not table.extraction_ok or not table.rows:
        return None
    return f"{ranking_preamble} Data table: {serialize_table(table)}"


def detect_chartjunk(
    img: ChartImage, backend, confidence_floor: float = DEFAULT_CONFIDENCE_FLOOR
) -> list[DetectedObject]:
    """Run the object detector; detections above the floor count as chartjunk."""
    response = backend.detect(encode_png(img))
    objects: list[DetectedObject] = []
    for raw in response.splitlines():
        line = raw.strip()
        if not line:
            continue
        parts = line.split(" ")
        if len(parts) != 6:
            raise BackendError(f"detector returned malformed line: {raw!r}")
        label = parts[0]
        try:
            x, y, w, h = (int(p) for p in parts[1:5])
            conf = float(parts[5])
        except ValueError:
            raise BackendError(f"detector returned malformed line: {raw!r}") from None
        if conf < confidence_floor:
            continue
        x0 = max(0, x)
        y0 = max(0, y)
        x1 = min(img.width, x + w)
        y1 = min(img.height, y + h)
        if x1 <= x0 or y1 <= y0:
            continue
        objects.append(DetectedObject(label=label, x=x0, y=y0, w=x1 - x0, h=y1 - y0, confidence=conf))
    return objects
