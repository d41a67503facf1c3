"""Revision tracking: metric deltas between consecutive reports and
LLM-generated per-topic change summaries."""
from __future__ import annotations

from dataclasses import dataclass

from .clarify import TOPICS, render_template
from .errors import SchemaMismatch, UnknownRevision
from .feedback import LlmParameters, build_track_prompt, generate_feedback
from .report import SCHEMA_VERSION, DesignReport, TrackerBlock

UNCHANGED_TOLERANCE = 1e-9


@dataclass(frozen=True)
class MetricDelta:
    topic: str
    metric_name: str
    prev: float | None
    curr: float | None
    delta: float | None
    direction: str  # increase, decrease, unchanged, incomparable

    def to_dict(self) -> dict:
        return {
            "topic": self.topic,
            "metric": self.metric_name,
            "prev": self.prev,
            "curr": self.curr,
            "delta": self.delta,
            "direction": self.direction,
        }


def _collect_metrics(report: DesignReport) -> dict[tuple[str, str], float]:
    values: dict[tuple[str, str], float] = {}
    for section in report.sections:
        for sub in section.subsections:
            for name, value in sub.raw_metrics.items():
                values[(section.topic, name)] = float(value)
    return values


def diff_metrics(prev: DesignReport, curr: DesignReport, schema_versions: tuple[int, int] = (SCHEMA_VERSION, SCHEMA_VERSION)) -> list[MetricDelta]:
    """One delta per (topic, metric) present in either report.

    Order is deterministic: topic order, then metric name.
    """
    if schema_versions[0] != schema_versions[1]:
        raise SchemaMismatch(
            f"cannot compare schema_version {schema_versions[0]} with {schema_versions[1]}"
        )
    prev_vals = _collect_metrics(prev)
    curr_vals = _collect_metrics(curr)
    deltas = []
    keys = set(prev_vals) | set(curr_vals)
    for topic in TOPICS:
        for topic_key, name in sorted(k for k in keys if k[0] == topic):
            p = prev_vals.get((topic, name))
            c = curr_vals.get((topic, name))
            if p is None or c is None:
                deltas.append(MetricDelta(topic, name, p, c, None, "incomparable"))
                continue
            d = c - p
            if abs(d) < UNCHANGED_TOLERANCE:
                direction = "unchanged"
            elif d > 0:
                direction = "increase"
            else:
                direction = "decrease"
            deltas.append(MetricDelta(topic, name, p, c, d, direction))
    return deltas


def _topic_texts(report: DesignReport, topic: str) -> tuple[str, str]:
    for section in report.sections:
        if section.topic == topic:
            outputs = " ".join(sub.clarification for sub in section.subsections)
            interpretations = " ".join(sub.explanations for sub in section.subsections)
            return outputs, interpretations
    return "", ""


def track_summary(
    deltas: list[MetricDelta],
    prev: DesignReport | None,
    curr: DesignReport,
    backend,
    questions: dict[str, str],
    mode: str = "live",
    store=None,
    params: LlmParameters = LlmParameters(),
) -> TrackerBlock:
    """One change sentence per topic, stating whether the change helps.

    Topics whose metrics all stayed put get the fixed no-change sentence
    without an LLM call; a missing previous report short-circuits to the
    first-version marker.
    """
    if prev is None:
        return TrackerBlock(first_version=True, summaries={}, deltas=())

    summaries: dict[str, str] = {}
    for topic in TOPICS:
        topic_deltas = [d for d in deltas if d.topic == topic]
        comparable = [d for d in topic_deltas if d.direction != "incomparable"]
        if not comparable or all(d.direction == "unchanged" for d in comparable):
            summaries[topic] = render_template("tracker.no_change", {"topic": topic})
            continue
        curr_out, curr_interp = _topic_texts(curr, topic)
        prev_out, prev_interp = _topic_texts(prev, topic)
        changed = "; ".join(
            f"{d.metric_name} {d.direction} from {d.prev:.3f} to {d.curr:.3f}"
            for d in comparable
            if d.direction != "unchanged"
        )
        prompt = build_track_prompt(
            questions[topic],
            f"Measured changes: {changed}. {curr_out}",
            curr_interp,
            prev_out,
            prev_interp,
        )
        summaries[topic] = generate_feedback(prompt.assembled, backend, mode, store, params)
    return TrackerBlock(
        first_version=False,
        summaries=summaries,
        deltas=tuple(d.to_dict() for d in deltas),
    )


def archive_pair(project, rev_a: int, rev_b: int, load_report) -> tuple[DesignReport, DesignReport]:
    """Fetch two revisions' reports for side-by-side comparison.

    load_report is a callable (project, sequence) -> DesignReport; a
    missing revision raises UnknownRevision.
    """
    if rev_a not in project.revisions or rev_b not in project.revisions:
        missing = rev_a if rev_a not in project.revisions else rev_b
        raise UnknownRevision(f"revision {missing} does not exist in project {project.id}")
    return load_report(project, rev_a), load_report(project, rev_b)
