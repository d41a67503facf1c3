import random

import pytest

from vizcritic.backends import EchoLlm, PoisonLlm
from vizcritic.clarify import FILTER_ORDER, FILTER_TOPICS, FilterFinding, TOPICS
from vizcritic.errors import SchemaMismatch, UnknownRevision
from vizcritic.feedback import load_question_bank
from vizcritic.report import assemble_report
from vizcritic.store import Project
from vizcritic.tracker import archive_pair, diff_metrics, track_summary


def report_with_metrics(metric_overrides=None, rng=None):
    """Deterministic report whose raw metrics can be overridden per filter."""
    metric_overrides = metric_overrides or {}
    base = {
        "virtual_eyetracker": {"mean_saliency": 0.3},
        "focus_text": {"text_ratio": 0.8},
        "focus_center": {"center_fraction": 0.1},
        "focus_attention": {"transition_coverage": 0.5},
        "title": {"title_present": 1, "table_extracted": 1},
        "text_content": {"has_text": 1, "text_box_count": 3},
        "chart_type": {"table_extracted": 1, "table_rows": 4, "table_columns": 2},
        "chartjunk": {"object_count": 0},
        "color_variability": {"distinct_color_count": 2},
        "color_similarity": {"similar_group_count": 1},
        "cvd": {
            "entropy_bits": 2.0,
            "loss_deuteranopia": 0.05,
            "loss_protanopia": 0.04,
            "loss_tritanopia": 0.01,
            "max_loss": 0.05,
        },
    }
    if rng is not None:
        for metrics in base.values():
            for key in metrics:
                if isinstance(metrics[key], float):
                    metrics[key] = round(rng.uniform(0, 2), 6)
    base.update(metric_overrides)
    findings = [
        FilterFinding(
            topic=FILTER_TOPICS[f],
            filter_id=f,
            flagged=False,
            metrics=base[f],
            clarification_text=f"clar {f}",
        )
        for f in FILTER_ORDER
    ]
    texts = {
        f: {"explanations": f"explains {f}", "suggestions": f"suggests {f}"} for f in FILTER_ORDER
    }
    return assemble_report(findings, texts, revision_id="r", created_at="t")


class TestDiffMetrics:
    def test_identical_reports_all_unchanged(self):
        r = report_with_metrics()
        deltas = diff_metrics(r, r)
        assert deltas and all(d.direction == "unchanged" for d in deltas)

    def test_decrease(self):
        prev = report_with_metrics({"focus_text": {"text_ratio": 0.8}})
        curr = report_with_metrics({"focus_text": {"text_ratio": 0.6}})
        (delta,) = [d for d in diff_metrics(prev, curr) if d.metric_name == "text_ratio"]
        assert delta.delta == pytest.approx(-0.2)
        assert delta.direction == "decrease"

    def test_metric_only_in_curr_incomparable(self):
        prev = report_with_metrics({"focus_attention": {}})
        curr = report_with_metrics()
        (delta,) = [d for d in diff_metrics(prev, curr) if d.metric_name == "transition_coverage"]
        assert delta.direction == "incomparable"
        assert delta.prev is None

    def test_antisymmetric_on_random_pairs(self):
        rng = random.Random(17)
        for _ in range(50):
            a = report_with_metrics(rng=rng)
            b = report_with_metrics(rng=rng)
            forward = {(d.topic, d.metric_name): d for d in diff_metrics(a, b)}
            backward = {(d.topic, d.metric_name): d for d in diff_metrics(b, a)}
            assert set(forward) == set(backward)
            for key, d in forward.items():
                if d.delta is not None:
                    assert abs(d.delta + backward[key].delta) < 1e-9

    def test_deterministic_order(self):
        r = report_with_metrics()
        order = [(d.topic, d.metric_name) for d in diff_metrics(r, r)]
        topics = [t for t, _ in order]
        assert topics == sorted(topics, key=list(TOPICS).index)
        assert order == [(d.topic, d.metric_name) for d in diff_metrics(r, r)]

    def test_schema_mismatch(self):
        r = report_with_metrics()
        with pytest.raises(SchemaMismatch):
            diff_metrics(r, r, schema_versions=(1, 2))

    def test_unchanged_tolerance(self):
        prev = report_with_metrics({"focus_text": {"text_ratio": 0.8}})
        curr = report_with_metrics({"focus_text": {"text_ratio": 0.8 + 1e-12}})
        (delta,) = [d for d in diff_metrics(prev, curr) if d.metric_name == "text_ratio"]
        assert delta.direction == "unchanged"


class TestTrackSummary:
    def questions(self):
        return load_question_bank().track

    def test_first_version_marker_no_llm_call(self):
        block = track_summary([], None, report_with_metrics(), PoisonLlm(), self.questions())
        assert block.first_version is True
        assert block.summaries == {}

    def test_all_unchanged_no_llm_call(self):
        r = report_with_metrics()
        deltas = diff_metrics(r, r)
        block = track_summary(deltas, r, r, PoisonLlm(), self.questions())
        assert block.first_version is False
        assert set(block.summaries) == set(TOPICS)
        for topic, sentence in block.summaries.items():
            assert "No measurable change" in sentence
            assert topic in sentence

    def test_changed_topic_calls_llm(self):
        prev = report_with_metrics({"focus_text": {"text_ratio": 0.9}})
        curr = report_with_metrics({"focus_text": {"text_ratio": 0.5}})
        deltas = diff_metrics(prev, curr)
        block = track_summary(deltas, prev, curr, EchoLlm(12), self.questions())
        assert block.summaries["salience"].startswith("Given the information")
        assert "No measurable change" in block.summaries["color"]

    def test_deltas_recorded_in_block(self):
        prev = report_with_metrics({"focus_text": {"text_ratio": 0.9}})
        curr = report_with_metrics({"focus_text": {"text_ratio": 0.5}})
        deltas = diff_metrics(prev, curr)
        block = track_summary(deltas, prev, curr, EchoLlm(), self.questions())
        recorded = [d for d in block.deltas if d["metric"] == "text_ratio"]
        assert recorded and recorded[0]["direction"] == "decrease"


class TestArchivePair:
    def project(self):
        return Project(id="p1", owner="u", name="n", created_at="t", revisions=[1, 2, 3])

    def test_pair_returned(self):
        reports = {1: "r1", 2: "r2", 3: "r3"}
        a, b = archive_pair(self.project(), 1, 3, lambda p, seq: reports[seq])
        assert (a, b) == ("r1", "r3")

    def test_same_revision_twice_allowed(self):
        a, b = archive_pair(self.project(), 2, 2, lambda p, seq: f"r{seq}")
        assert a == b == "r2"

    def test_unknown_revision(self):
        with pytest.raises(UnknownRevision):
            archive_pair(self.project(), 1, 99, lambda p, seq: "r")
