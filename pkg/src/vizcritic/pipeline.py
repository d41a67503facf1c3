"""Analysis pipeline: ingest, filters, clarify, feedback, report, track.

The same pipeline backs the CLI and the HTTP service, so both produce
byte-identical canonical reports for identical inputs. Filters run on a
downscaled analysis copy; the display image is stored untouched.
"""
from __future__ import annotations

import datetime
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from threading import BoundedSemaphore, Lock

from . import chartdata, color, saliency, textzones
from .backends import (
    NullChartTable,
    NullDetector,
    NullOcr,
    SpectralResidualSaliency,
    TemplateLlm,
)
from .clarify import clarify_all, render_template
from .config import AnalysisConfig
from .errors import StageError
from .feedback import (
    ExchangeStore,
    LlmParameters,
    QuestionBank,
    build_acg_prompt,
    generate_feedback,
    grounding_preamble,
    interpretation_conditions,
    load_question_bank,
)
from .image_io import ChartImage, downsample_for_analysis, encode_png, load_chart_image
from .report import DesignReport, assemble_report
from .saliency import load_default_references
from .tracker import diff_metrics, track_summary

HEATMAP_ARTIFACT = "artifacts/heatmap_overlay.png"
CVD_ARTIFACTS = {d: f"artifacts/cvd_{d}.png" for d in color.DEFICIENCIES}


def utc_now_iso() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class Backends:
    saliency: object = field(default_factory=SpectralResidualSaliency)
    ocr: object = field(default_factory=NullOcr)
    chart_table: object = field(default_factory=NullChartTable)
    detector: object = field(default_factory=NullDetector)
    llm: object = field(default_factory=TemplateLlm)


@dataclass
class AnalysisContext:
    backends: Backends = field(default_factory=Backends)
    config: AnalysisConfig = field(default_factory=AnalysisConfig)
    references: dict = field(default_factory=load_default_references)
    questions: QuestionBank = field(default_factory=load_question_bank)
    mode: str = "live"
    exchange_store: ExchangeStore | None = None
    llm_params: LlmParameters = field(default_factory=LlmParameters)
    clock: callable = utc_now_iso


class _RateLimitedLlm:
    """Caps concurrent in-flight requests and enforces a minimum spacing
    between request starts against one LLM backend."""

    def __init__(self, backend, max_concurrency: int, min_interval: float = 0.0):
        self._backend = backend
        self._semaphore = BoundedSemaphore(max_concurrency)
        self._min_interval = min_interval
        self._pace_lock = Lock()
        self._next_start = 0.0
        self.backend_id = backend.backend_id

    def _pace(self):
        if self._min_interval <= 0:
            return
        with self._pace_lock:
            now = time.monotonic()
            wait = self._next_start - now
            self._next_start = max(now, self._next_start) + self._min_interval
        if wait > 0:
            time.sleep(wait)

    def complete(self, system, prompt, temperature, max_length):
        with self._semaphore:
            self._pace()
            return self._backend.complete(system, prompt, temperature, max_length)


@dataclass
class FilterOutputs:
    saliency_map: saliency.SaliencyMap
    metrics: saliency.SaliencyMetrics
    boxes: list
    table: chartdata.ChartTable
    detections: list
    groups: list
    cvd_results: dict


def _stage(name):
    def wrap(fn):
        def run(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except Exception as exc:
                raise StageError(name, exc) from exc

        return run

    return wrap


@_stage("ingest")
def _run_ingest(image_bytes: bytes, declared_format: str, ctx: AnalysisContext):
    display = load_chart_image(image_bytes, declared_format)
    analysis = downsample_for_analysis(display, ctx.config.analysis_max_dim)
    return display, analysis


@_stage("filters")
def _run_filters(analysis: ChartImage, ctx: AnalysisContext, write_artifact) -> FilterOutputs:
    cfg = ctx.config

    def saliency_job():
        return saliency.compute_saliency(analysis, ctx.backends.saliency)

    def ocr_job():
        return textzones.detect_text_boxes(analysis, ctx.backends.ocr)

    def chart_job():
        return chartdata.extract_chart_table(analysis, ctx.backends.chart_table)

    def detect_job():
        return chartdata.detect_chartjunk(
            analysis, ctx.backends.detector, cfg.clarify.detection_confidence_floor
        )

    def color_job():
        palette = color.quantize_palette(
            analysis,
            max_entries=cfg.palette_cap,
            exclude_background=True,
            background_coverage=cfg.background_coverage,
        )
        return color.group_colors(palette, cfg.clarify.color_grouping_threshold)

    def cvd_job():
        return {
            d: color.cvd_information_loss(analysis, d, cfg.clarify.cvd_loss_threshold)
            for d in color.DEFICIENCIES
        }

    # failures carry the individual filter's name, not the aggregate stage
    jobs = [
        ("saliency", saliency_job),
        ("text", ocr_job),
        ("chart", chart_job),
        ("detect", detect_job),
        ("color", color_job),
        ("cvd", cvd_job),
    ]

    def run_named(name, job):
        try:
            return job()
        except Exception as exc:
            raise StageError(name, exc) from exc

    if cfg.filter_workers > 1:
        with ThreadPoolExecutor(max_workers=min(cfg.filter_workers, len(jobs))) as pool:
            futures = [pool.submit(run_named, name, job) for name, job in jobs]
            smap, boxes, table, detections, groups, cvd_results = [f.result() for f in futures]
    else:
        smap, boxes, table, detections, groups, cvd_results = [
            run_named(name, job) for name, job in jobs
        ]

    metrics = saliency.SaliencyMetrics(
        text_ratio=saliency.text_saliency_ratio(smap, boxes),
        center_fraction=saliency.center_saliency_fraction(smap),
        transition_coverage=saliency.transition_zone_coverage(
            analysis, smap, cfg.transition_rgb_threshold, cfg.high_saliency_cutoff
        ),
    )

    overlay = saliency.render_heatmap_overlay(analysis, smap)
    write_artifact(HEATMAP_ARTIFACT, encode_png(overlay))
    for deficiency, result in cvd_results.items():
        write_artifact(CVD_ARTIFACTS[deficiency], encode_png(result.simulated))

    return FilterOutputs(
        saliency_map=smap,
        metrics=metrics,
        boxes=boxes,
        table=table,
        detections=detections,
        groups=groups,
        cvd_results=cvd_results,
    )


def _metrics_bundle(outputs: FilterOutputs) -> dict:
    smap = outputs.saliency_map
    metrics = outputs.metrics
    table = outputs.table
    variability = color.color_variability(outputs.groups)
    similarity = color.color_similarity(outputs.groups)
    losses = {d: outputs.cvd_results[d].relative_loss for d in color.DEFICIENCIES}
    entropy_bits = outputs.cvd_results["deuteranopia"].entropy_original
    return {
        "virtual_eyetracker": {"mean_saliency": float(smap.values.mean())},
        "focus_text": None if metrics.text_ratio is None else {"text_ratio": metrics.text_ratio},
        "focus_center": {"center_fraction": metrics.center_fraction},
        "focus_attention": (
            None
            if metrics.transition_coverage is None
            else {"transition_coverage": metrics.transition_coverage}
        ),
        "title": {
            "title_present": int(chartdata.detect_title(table)["present"]),
            "table_extracted": int(table.extraction_ok),
        },
        "text_content": {
            "has_text": int(textzones.has_text(outputs.boxes)),
            "text_box_count": len(outputs.boxes),
        },
        "chart_type": {
            "table_extracted": int(table.extraction_ok),
            "table_rows": len(table.rows),
            "table_columns": len(table.columns),
        },
        "chartjunk": {"object_count": len(outputs.detections)},
        "color_variability": {"distinct_color_count": variability["distinct_count"]},
        "color_similarity": {"similar_group_count": similarity["similar_group_count"]},
        "cvd": {
            "entropy_bits": entropy_bits,
            "loss_deuteranopia": losses["deuteranopia"],
            "loss_protanopia": losses["protanopia"],
            "loss_tritanopia": losses["tritanopia"],
            "max_loss": max(losses.values()),
        },
    }


@_stage("clarify")
def _run_clarify(outputs: FilterOutputs, ctx: AnalysisContext):
    bundle = _metrics_bundle(outputs)
    artifacts = {
        "virtual_eyetracker": [HEATMAP_ARTIFACT],
        "cvd": [CVD_ARTIFACTS[d] for d in color.DEFICIENCIES],
    }
    return clarify_all(bundle, ctx.config.clarify, ctx.references, artifacts)


@_stage("feedback")
def _run_feedback(findings, outputs: FilterOutputs, ctx: AnalysisContext) -> dict:
    llm = _RateLimitedLlm(
        ctx.backends.llm, ctx.config.llm_max_concurrency, ctx.config.llm_min_interval
    )
    texts: dict[str, dict] = {}

    def cond_for(finding) -> str:
        cond = interpretation_conditions(finding.filter_id)
        measured = f"Measured result: {finding.clarification_text}"
        if finding.filter_id == "chart_type":
            fragment = chartdata.assemble_chart_recommendation_input(outputs.table)
            if fragment is not None:
                measured = f"{measured} {fragment}"
        return f"{cond} {measured}"

    def generate(finding):
        cond = cond_for(finding)
        suggestions_preamble = grounding_preamble(finding.filter_id)
        explain_q = ctx.questions.interpretation_question(finding.filter_id)
        explain_prompt = build_acg_prompt(explain_q, cond, suggestions_preamble)
        explanations = generate_feedback(
            explain_prompt.assembled, llm, ctx.mode, ctx.exchange_store, ctx.llm_params
        )
        no_table = (
            finding.filter_id == "chart_type"
            and chartdata.assemble_chart_recommendation_input(outputs.table) is None
        )
        if no_table:
            suggestions = render_template("chart_type.no_table")
        else:
            suggest_q = ctx.questions.suggestion_question(finding.filter_id)
            suggest_prompt = build_acg_prompt(suggest_q, cond, suggestions_preamble)
            suggestions = generate_feedback(
                suggest_prompt.assembled, llm, ctx.mode, ctx.exchange_store, ctx.llm_params
            )
        return finding.filter_id, {"explanations": explanations, "suggestions": suggestions}

    for finding in findings:
        filter_id, pair = generate(finding)
        texts[filter_id] = pair
    return texts


@_stage("report")
def _run_report(findings, texts, artifacts_written, ctx: AnalysisContext, revision_id: str) -> DesignReport:
    bias_note = render_template("note.saliency_bias")
    backend_notes = {
        "virtual_eyetracker": [f"analysis backend: {ctx.backends.saliency.backend_id}", bias_note],
        "focus_text": [
            f"analysis backends: {ctx.backends.saliency.backend_id} + {ctx.backends.ocr.backend_id}",
            bias_note,
        ],
        "focus_center": [f"analysis backend: {ctx.backends.saliency.backend_id}", bias_note],
        "focus_attention": [f"analysis backend: {ctx.backends.saliency.backend_id}", bias_note],
        "title": [f"analysis backend: {ctx.backends.chart_table.backend_id}"],
        "text_content": [f"analysis backend: {ctx.backends.ocr.backend_id}"],
        "chart_type": [f"analysis backend: {ctx.backends.chart_table.backend_id}"],
        "chartjunk": [f"analysis backend: {ctx.backends.detector.backend_id}"],
        "color_variability": ["analysis backend: built-in color census"],
        "color_similarity": ["analysis backend: built-in color census"],
        "cvd": ["analysis backend: built-in dichromacy simulation"],
    }
    cvd_finding = next(f for f in findings if f.filter_id == "cvd")
    if cvd_finding.flagged:
        palettes = ", ".join(sorted(_load_palette_names()))
        backend_notes["cvd"].append(render_template("note.cvd_palettes", {"palettes": palettes}))
    return assemble_report(
        findings,
        texts,
        artifacts_present=artifacts_written,
        revision_id=revision_id,
        created_at=ctx.clock(),
        extra_notes=backend_notes,
    )


def _load_palette_names() -> list[str]:
    from importlib import resources

    names = []
    text = resources.files("vizcritic.data").joinpath("cvd_safe_palettes.txt").read_text()
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        name, _, _ = stripped.partition(" = ")
        names.append(name.strip())
    return names


@_stage("tracker")
def _run_tracker(report: DesignReport, prev_report: DesignReport | None, ctx: AnalysisContext):
    if prev_report is None:
        return None
    deltas = diff_metrics(prev_report, report)
    llm = _RateLimitedLlm(
        ctx.backends.llm, ctx.config.llm_max_concurrency, ctx.config.llm_min_interval
    )
    return track_summary(
        deltas,
        prev_report,
        report,
        llm,
        ctx.questions.track,
        ctx.mode,
        ctx.exchange_store,
        ctx.llm_params,
    )


def run_pipeline(
    image_bytes: bytes,
    declared_format: str,
    ctx: AnalysisContext,
    revision_id: str = "adhoc",
    prev_report: DesignReport | None = None,
    write_artifact=None,
) -> DesignReport:
    """Run the full workflow on one image and return the finished report.

    write_artifact(relative_name, png_bytes) persists derived images as
    they are produced, so partial artifacts survive a failed run.
    """
    written: set[str] = set()

    def sink(name: str, data: bytes):
        written.add(name)
        if write_artifact is not None:
            write_artifact(name, data)

    display, analysis = _run_ingest(image_bytes, declared_format, ctx)
    outputs = _run_filters(analysis, ctx, sink)
    findings = _run_clarify(outputs, ctx)
    texts = _run_feedback(findings, outputs, ctx)
    report = _run_report(findings, texts, written, ctx, revision_id)
    tracker = _run_tracker(report, prev_report, ctx)
    if tracker is not None:
        from dataclasses import replace

        report = replace(report, tracker=tracker)
    return report
