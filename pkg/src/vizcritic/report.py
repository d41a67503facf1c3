"""Assembly and canonical serialization of design reports.

A report has exactly five sections in fixed topic order (salience, text,
representation, color, accessibility), each carrying a status dot, a
one-line summary, and expandable per-filter subsections down to raw
metrics. One canonical JSON serialization feeds the CLI, the HTTP API,
and the web client alike.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .clarify import FILTER_ORDER, FILTER_TOPICS, TOPICS, FilterFinding, section_status
from .errors import MissingText, SchemaError

SCHEMA_VERSION = 1

STATUS_GLYPHS = {"none": "", "yellow": "\U0001f7e1", "orange": "\U0001f7e0"}


@dataclass(frozen=True)
class Subsection:
    filter_id: str
    flagged: bool
    clarification: str
    explanations: str
    suggestions: str
    raw_metrics: dict
    artifacts: tuple[str, ...]
    notes: tuple[str, ...]


@dataclass(frozen=True)
class Section:
    topic: str
    status: str
    summary: str
    subsections: tuple[Subsection, ...]


@dataclass(frozen=True)
class TrackerBlock:
    first_version: bool
    summaries: dict
    deltas: tuple[dict, ...]


@dataclass(frozen=True)
class DesignReport:
    revision_id: str
    created_at: str
    sections: tuple[Section, ...]
    overview_summary: str
    tracker: TrackerBlock | None = None


def canonical_json(obj) -> bytes:
    """Key-sorted, compact, UTF-8 JSON; the one wire format for reports."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _topic_summary(topic: str, findings: list[FilterFinding]) -> str:
    flagged = [f.filter_id for f in findings if f.flagged]
    if not flagged:
        return "no issues detected"
    noun = "issue" if len(flagged) == 1 else "issues"
    return f"{len(flagged)} {noun} flagged: {', '.join(flagged)}"


def assemble_report(
    findings: list[FilterFinding],
    llm_texts: dict[str, dict],
    artifacts_present: set[str] | None = None,
    revision_id: str = "",
    created_at: str = "",
    extra_notes: dict[str, list[str]] | None = None,
    tracker: TrackerBlock | None = None,
) -> DesignReport:
    """Build the hierarchical report from findings and generated texts.

    llm_texts maps filter_id to {"explanations": ..., "suggestions": ...};
    a finding without its pair raises MissingText. When
    artifacts_present is given, every artifact referenced by a finding
    must exist in it.
    """
    extra_notes = extra_notes or {}
    by_topic: dict[str, list[FilterFinding]] = {topic: [] for topic in TOPICS}
    for finding in findings:
        if finding.filter_id not in FILTER_TOPICS:
            raise SchemaError(f"finding for unknown filter {finding.filter_id!r}")
        by_topic[finding.topic].append(finding)

    sections = []
    overview_lines = []
    for topic in TOPICS:
        topic_findings = sorted(
            by_topic[topic], key=lambda f: FILTER_ORDER.index(f.filter_id)
        )
        subsections = []
        for finding in topic_findings:
            texts = llm_texts.get(finding.filter_id)
            if not texts or "explanations" not in texts or "suggestions" not in texts:
                raise MissingText(f"no generated texts for filter {finding.filter_id!r}")
            if artifacts_present is not None:
                for ref in finding.artifacts:
                    if ref not in artifacts_present:
                        raise SchemaError(f"artifact {ref!r} referenced but not stored")
            subsections.append(
                Subsection(
                    filter_id=finding.filter_id,
                    flagged=finding.flagged,
                    clarification=finding.clarification_text,
                    explanations=texts["explanations"],
                    suggestions=texts["suggestions"],
                    raw_metrics=dict(finding.metrics),
                    artifacts=tuple(finding.artifacts),
                    notes=tuple(finding.notes) + tuple(extra_notes.get(finding.filter_id, ())),
                )
            )
        status = section_status(topic_findings)
        summary = _topic_summary(topic, topic_findings)
        overview_lines.append(f"{topic}: {summary}")
        sections.append(Section(topic=topic, status=status, summary=summary, subsections=tuple(subsections)))

    return DesignReport(
        revision_id=revision_id,
        created_at=created_at,
        sections=tuple(sections),
        overview_summary="\n".join(overview_lines),
        tracker=tracker,
    )


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------


def report_to_dict(report: DesignReport) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "revision_id": report.revision_id,
        "created_at": report.created_at,
        "overview_summary": report.overview_summary,
        "sections": [
            {
                "topic": s.topic,
                "status": s.status,
                "summary": s.summary,
                "subsections": [
                    {
                        "filter_id": sub.filter_id,
                        "flagged": sub.flagged,
                        "clarification": sub.clarification,
                        "explanations": sub.explanations,
                        "suggestions": sub.suggestions,
                        "raw_metrics": sub.raw_metrics,
                        "artifacts": list(sub.artifacts),
                        "notes": list(sub.notes),
                    }
                    for sub in s.subsections
                ],
            }
            for s in report.sections
        ],
        "tracker": None,
    }
    if report.tracker is not None:
        doc["tracker"] = {
            "first_version": report.tracker.first_version,
            "summaries": report.tracker.summaries,
            "deltas": list(report.tracker.deltas),
        }
    return doc


def serialize_report(report: DesignReport) -> bytes:
    return canonical_json(report_to_dict(report))


def parse_report(data: bytes | str) -> DesignReport:
    doc = json.loads(data)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {doc.get('schema_version')!r}")
    sections = tuple(
        Section(
            topic=s["topic"],
            status=s["status"],
            summary=s["summary"],
            subsections=tuple(
                Subsection(
                    filter_id=sub["filter_id"],
                    flagged=sub["flagged"],
                    clarification=sub["clarification"],
                    explanations=sub["explanations"],
                    suggestions=sub["suggestions"],
                    raw_metrics=sub["raw_metrics"],
                    artifacts=tuple(sub["artifacts"]),
                    notes=tuple(sub["notes"]),
                )
                for sub in s["subsections"]
            ),
        )
        for s in doc["sections"]
    )
    tracker = None
    if doc.get("tracker") is not None:
        t = doc["tracker"]
        tracker = TrackerBlock(
            first_version=t["first_version"],
            summaries=t["summaries"],
            deltas=tuple(t["deltas"]),
        )
    return DesignReport(
        revision_id=doc["revision_id"],
        created_at=doc["created_at"],
        sections=sections,
        overview_summary=doc["overview_summary"],
        tracker=tracker,
    )


# --------------------------------------------------------------------------
# Markdown rendering
# --------------------------------------------------------------------------


def _fmt_metric(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, int):
        return str(value)
    return f"{value:g}"


def render_markdown(report: DesignReport) -> str:
    lines = [f"# Design report {report.revision_id}".rstrip(), ""]
    if report.created_at:
        lines += [f"Created: {report.created_at}", ""]
    lines += ["## Overview", ""]
    lines += [f"- {line}" for line in report.overview_summary.splitlines()]
    lines.append("")
    for section in report.sections:
        glyph = STATUS_GLYPHS[section.status]
        heading = f"## {glyph} {section.topic}".replace("##  ", "## ")
        lines += [heading, "", section.summary, ""]
        for sub in section.subsections:
            lines += [f"### {sub.filter_id}", ""]
            lines += [f"{sub.clarification}", ""]
            lines += ["**Explanations:** " + sub.explanations, ""]
            lines += ["**Suggestions:** " + sub.suggestions, ""]
            if sub.raw_metrics:
                lines += ["| metric | value |", "| --- | --- |"]
                lines += [
                    f"| {name} | {_fmt_metric(sub.raw_metrics[name])} |"
                    for name in sorted(sub.raw_metrics)
                ]
                lines.append("")
            for ref in sub.artifacts:
                lines += [f"![{sub.filter_id}]({ref})", ""]
            for note in sub.notes:
                lines += [f"> {note}", ""]
    if report.tracker is not None:
        lines += ["## Revision tracker", ""]
        if report.tracker.first_version:
            lines += ["first version - nothing to compare", ""]
        else:
            for topic in TOPICS:
                if topic in report.tracker.summaries:
                    lines += [f"- **{topic}**: {report.tracker.summaries[topic]}"]
            lines.append("")
            if report.tracker.deltas:
                lines += ["| topic | metric | previous | current | delta | direction |", "| --- | --- | --- | --- | --- | --- |"]
                for d in report.tracker.deltas:
                    prev = "-" if d["prev"] is None else f"{d['prev']:g}"
                    curr = "-" if d["curr"] is None else f"{d['curr']:g}"
                    delta = "-" if d["delta"] is None else f"{d['delta']:g}"
                    lines.append(
                        f"| {d['topic']} | {d['metric']} | {prev} | {curr} | {delta} | {d['direction']} |"
                    )
                lines.append("")
    return "\n".join(lines).rstrip() + "\n"
