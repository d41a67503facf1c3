"""Turn raw filter metrics into flagged/unflagged findings with
canonical plain-language clarification text.

Flag heuristics are threshold-based and fully deterministic; the strings
live in an editable catalog file so wording can evolve without code
changes. Unflagged findings carry the filter's intent text.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources

from .errors import SchemaError
from .saliency import ReferenceDistribution, percentile_flag

TOPICS = ("salience", "text", "representation", "color", "accessibility")

FILTER_TOPICS = {
    "virtual_eyetracker": "salience",
    "focus_text": "salience",
    "focus_center": "salience",
    "focus_attention": "salience",
    "title": "text",
    "text_content": "text",
    "chart_type": "representation",
    "chartjunk": "representation",
    "color_variability": "color",
    "color_similarity": "color",
    "cvd": "accessibility",
}

FILTER_ORDER = tuple(FILTER_TOPICS)

METRIC_SCHEMA = {
    "virtual_eyetracker": {"mean_saliency"},
    "focus_text": {"text_ratio"},
    "focus_center": {"center_fraction"},
    "focus_attention": {"transition_coverage"},
    "title": {"title_present", "table_extracted"},
    "text_content": {"has_text", "text_box_count"},
    "chart_type": {"table_extracted", "table_rows", "table_columns"},
    "chartjunk": {"object_count"},
    "color_variability": {"distinct_color_count"},
    "color_similarity": {"similar_group_count"},
    "cvd": {
        "entropy_bits",
        "loss_deuteranopia",
        "loss_protanopia",
        "loss_tritanopia",
        "max_loss",
    },
}


@dataclass(frozen=True)
class FilterFinding:
    topic: str
    filter_id: str
    flagged: bool
    metrics: dict
    clarification_text: str
    artifacts: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class ClarifyConfig:
    """Clarification thresholds; defaults follow the shipped heuristics."""

    focus_text_percentile: int = 10
    focus_text_direction: str = "above"
    focus_center_percentile: int = 10
    focus_center_direction: str = "above"
    focus_attention_percentile: int = 90
    focus_attention_direction: str = "below"
    text_ratio_cutoff: float = 0.6
    color_grouping_threshold: float = 10.0
    distinct_flag_min: int = 3
    similar_flag_min: int = 3
    cvd_loss_threshold: float = 0.10
    detection_confidence_floor: float = 0.5

    def __post_init__(self):
        for name in ("focus_text_percentile", "focus_center_percentile", "focus_attention_percentile"):
            value = getattr(self, name)
            if not 1 <= value <= 99:
                raise ValueError(f"{name} must be in 1..99")
        for name in (
            "text_ratio_cutoff",
            "color_grouping_threshold",
            "cvd_loss_threshold",
            "detection_confidence_floor",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


# --------------------------------------------------------------------------
# Clarification string catalog
# --------------------------------------------------------------------------


def parse_catalog(text: str) -> dict[str, str]:
    catalog: dict[str, str] = {}
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, template = stripped.partition(" = ")
        if not sep:
            raise SchemaError(f"malformed catalog line: {line!r}")
        catalog[key.strip()] = template
    return catalog


_CATALOG: dict[str, str] | None = None


def load_catalog() -> dict[str, str]:
    global _CATALOG
    if _CATALOG is None:
        text = resources.files("vizcritic.data").joinpath("clarifications.txt").read_text()
        _CATALOG = parse_catalog(text)
    return _CATALOG


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def render_template(key: str, values: dict | None = None, catalog: dict[str, str] | None = None) -> str:
    catalog = catalog if catalog is not None else load_catalog()
    if key not in catalog:
        raise SchemaError(f"clarification catalog has no entry for {key!r}")
    formatted = {name: _fmt(v) for name, v in (values or {}).items()}
    try:
        return catalog[key].format(**formatted)
    except KeyError as exc:
        raise SchemaError(f"catalog entry {key!r} references unknown metric {exc}") from None


# --------------------------------------------------------------------------
# Per-filter flag logic
# --------------------------------------------------------------------------


def _pct(metric, references, metric_name, percentile, direction, notes):
    ref = references.get(metric_name)
    if ref is None:
        notes.append(f"no reference distribution for {metric_name}; percentile flag skipped")
        return False
    return percentile_flag(metric, ref, percentile, direction)


def clarify_all(
    bundle: dict,
    config: ClarifyConfig,
    references: dict[str, ReferenceDistribution] | None = None,
    artifacts: dict[str, list[str]] | None = None,
) -> list[FilterFinding]:
    """Produce exactly one finding per configured filter.

    The bundle must contain a metrics dict (or None as the explicit
    absent marker) for every filter id in FILTER_ORDER; extra filters or
    metric names are schema violations.
    """
    references = references or {}
    artifacts = artifacts or {}
    unknown = set(bundle) - set(FILTER_ORDER)
    if unknown:
        raise SchemaError(f"bundle contains unknown filters: {sorted(unknown)}")
    missing = [f for f in FILTER_ORDER if f not in bundle]
    if missing:
        raise SchemaError(f"bundle is missing filters: {missing}")

    findings = []
    for filter_id in FILTER_ORDER:
        metrics = bundle[filter_id]
        if metrics is not None:
            extra = set(metrics) - METRIC_SCHEMA[filter_id]
            if extra:
                raise SchemaError(f"{filter_id} metrics contain unknown keys: {sorted(extra)}")
        finding = _clarify_one(filter_id, metrics, config, references)
        refs = tuple(artifacts.get(filter_id, ()))
        if refs:
            finding = replace(finding, artifacts=refs)
        findings.append(finding)
    return findings


def _clarify_one(filter_id, metrics, config, references) -> FilterFinding:
    topic = FILTER_TOPICS[filter_id]
    notes: list[str] = []

    def make(flagged, key, values=None):
        return FilterFinding(
            topic=topic,
            filter_id=filter_id,
            flagged=flagged,
            metrics=dict(metrics or {}),
            clarification_text=render_template(key, values),
            notes=tuple(notes),
        )

    if metrics is None:
        return make(False, f"{filter_id}.absent")

    if filter_id == "virtual_eyetracker":
        if metrics["mean_saliency"] == 0:
            return make(True, "virtual_eyetracker.no_salience")
        return make(False, "virtual_eyetracker.ok")

    if filter_id == "focus_text":
        ratio = metrics["text_ratio"]
        if ratio < config.text_ratio_cutoff:
            return make(True, "focus_text.low_ratio", {"text_ratio": ratio})
        if _pct(ratio, references, "text_ratio", config.focus_text_percentile, config.focus_text_direction, notes):
            return make(True, "focus_text.high_share", {"text_ratio": ratio})
        return make(False, "focus_text.ok", {"text_ratio": ratio})

    if filter_id == "focus_center":
        frac = metrics["center_fraction"]
        if _pct(frac, references, "center_fraction", config.focus_center_percentile, config.focus_center_direction, notes):
            return make(True, "focus_center.flagged", {"center_fraction": frac})
        return make(False, "focus_center.ok", {"center_fraction": frac})

    if filter_id == "focus_attention":
        cov = metrics["transition_coverage"]
        if _pct(cov, references, "transition_coverage", config.focus_attention_percentile, config.focus_attention_direction, notes):
            return make(True, "focus_attention.flagged", {"transition_coverage": cov})
        return make(False, "focus_attention.ok", {"transition_coverage": cov})

    if filter_id == "title":
        if not metrics["table_extracted"]:
            notes.append(render_template("note.title_low_confidence"))
        if not metrics["title_present"]:
            return make(True, "title.flagged")
        return make(False, "title.ok")

    if filter_id == "text_content":
        if not metrics["has_text"]:
            return make(True, "text_content.flagged")
        return make(False, "text_content.ok", {"text_box_count": int(metrics["text_box_count"])})

    if filter_id == "chart_type":
        if not metrics["table_extracted"] or metrics["table_rows"] == 0:
            return make(False, "chart_type.no_table")
        return make(
            False,
            "chart_type.ok",
            {"table_rows": int(metrics["table_rows"]), "table_columns": int(metrics["table_columns"])},
        )

    if filter_id == "chartjunk":
        count = int(metrics["object_count"])
        if count > 0:
            return make(True, "chartjunk.flagged", {"object_count": count})
        return make(False, "chartjunk.ok")

    if filter_id == "color_variability":
        count = int(metrics["distinct_color_count"])
        if count >= config.distinct_flag_min:
            return make(True, "color_variability.flagged", {"distinct_color_count": count})
        return make(False, "color_variability.ok", {"distinct_color_count": count})

    if filter_id == "color_similarity":
        count = int(metrics["similar_group_count"])
        if count >= config.similar_flag_min:
            return make(True, "color_similarity.flagged", {"similar_group_count": count})
        return make(False, "color_similarity.ok", {"similar_group_count": count})

    if filter_id == "cvd":
        loss = metrics["max_loss"]
        if loss > config.cvd_loss_threshold:
            return make(True, "cvd.flagged", {"max_loss": loss})
        return make(False, "cvd.ok", {"max_loss": loss})

    raise SchemaError(f"no clarification logic for filter {filter_id!r}")


def section_status(findings: list[FilterFinding]) -> str:
    """Status dot for one topic: none, yellow (one issue), orange (more)."""
    flagged = sum(1 for f in findings if f.flagged)
    if flagged == 0:
        return "none"
    if flagged == 1:
        return "yellow"
    return "orange"
