"""Command-line interface: offline single-image analysis, report
comparison, and a development server.

Exit codes: 0 success, 1 stage failure, 2 usage error, 3 replay miss,
4 schema mismatch between compared reports.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import backends as be
from .config import load_thresholds
from .errors import ReplayMiss, SchemaMismatch, StageError, ValidationError, VizcriticError
from .feedback import ExchangeStore
from .pipeline import AnalysisContext, Backends, run_pipeline
from .report import parse_report, render_markdown, serialize_report
from .tracker import diff_metrics, track_summary

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_REPLAY_MISS = 3
EXIT_SCHEMA_MISMATCH = 4


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    for name in ("saliency", "ocr", "chart", "detector", "llm"):
        parser.add_argument(f"--backend-{name}-url", default=None, help=f"HTTP {name} backend URL")


def _build_backends(args) -> Backends:
    backends = Backends()
    if args.backend_saliency_url:
        backends.saliency = be.HttpSaliency(args.backend_saliency_url)
    if args.backend_ocr_url:
        backends.ocr = be.HttpOcr(args.backend_ocr_url)
    if args.backend_chart_url:
        backends.chart_table = be.HttpChartTable(args.backend_chart_url)
    if args.backend_detector_url:
        backends.detector = be.HttpDetector(args.backend_detector_url)
    if args.backend_llm_url:
        backends.llm = be.HttpLlm(args.backend_llm_url)
    return backends


def _build_context(args) -> AnalysisContext:
    ctx = AnalysisContext(backends=_build_backends(args), mode=args.mode)
    if args.thresholds:
        ctx.config = load_thresholds(args.thresholds)
    if args.exchanges:
        ctx.exchange_store = ExchangeStore(args.exchanges)
    if getattr(args, "timestamp", None):
        ctx.clock = lambda: args.timestamp
    return ctx


def cmd_analyze(args) -> int:
    input_path = Path(args.input)
    if not input_path.is_file():
        print(f"error: input file {input_path} does not exist", file=sys.stderr)
        return EXIT_USAGE
    if args.mode == "replay" and not args.exchanges:
        print("error: --mode replay requires --exchanges", file=sys.stderr)
        return EXIT_USAGE
    suffix = input_path.suffix.lstrip(".").lower()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx = _build_context(args)

    def sink(name: str, data: bytes):
        path = out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)

    try:
        report = run_pipeline(
            input_path.read_bytes(),
            suffix,
            ctx,
            revision_id=input_path.stem,
            write_artifact=sink,
        )
    except StageError as exc:
        if isinstance(exc.cause, ReplayMiss):
            print(f"replay miss: no recorded exchange for digest {exc.cause.digest}", file=sys.stderr)
            return EXIT_REPLAY_MISS
        print(f"analysis failed at stage '{exc.stage}': {exc.cause}", file=sys.stderr)
        return EXIT_FAILURE

    if args.format == "md":
        out_file = out_dir / "report.md"
        out_file.write_text(render_markdown(report), encoding="utf-8")
    else:
        out_file = out_dir / "report.json"
        out_file.write_bytes(serialize_report(report))
    print(f"report written to {out_file}")
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        report_a = parse_report(Path(args.report_a).read_bytes())
        report_b = parse_report(Path(args.report_b).read_bytes())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VizcriticError as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return EXIT_SCHEMA_MISMATCH
    try:
        deltas = diff_metrics(report_a, report_b)
    except SchemaMismatch as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        return EXIT_SCHEMA_MISMATCH

    print(f"{'topic':<15}{'metric':<25}{'previous':>12}{'current':>12}{'delta':>12}  direction")
    for d in deltas:
        prev = "-" if d.prev is None else f"{d.prev:.4f}"
        curr = "-" if d.curr is None else f"{d.curr:.4f}"
        delta = "-" if d.delta is None else f"{d.delta:+.4f}"
        print(f"{d.topic:<15}{d.metric_name:<25}{prev:>12}{curr:>12}{delta:>12}  {d.direction}")

    if args.track:
        ctx = _build_context(args)
        try:
            block = track_summary(
                deltas,
                report_a,
                report_b,
                ctx.backends.llm,
                ctx.questions.track,
                ctx.mode,
                ctx.exchange_store,
                ctx.llm_params,
            )
        except ReplayMiss as exc:
            print(f"replay miss: no recorded exchange for digest {exc.digest}", file=sys.stderr)
            return EXIT_REPLAY_MISS
        print()
        for topic, sentence in block.summaries.items():
            print(f"{topic}: {sentence}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import os

    import uvicorn

    os.environ.setdefault("VIZCRITIC_STORAGE", args.storage)
    os.environ.setdefault("VIZCRITIC_MODE", args.mode)
    if args.exchanges:
        os.environ.setdefault("VIZCRITIC_EXCHANGES", args.exchanges)
    if args.thresholds:
        os.environ.setdefault("VIZCRITIC_THRESHOLDS", args.thresholds)
    uvicorn.run("vizcritic.service:create_app_from_env", factory=True, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vizcritic", description="Design feedback for chart images")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="analyze one chart image and write a report")
    analyze.add_argument("--input", required=True, help="path to a .png or .jpg chart image")
    analyze.add_argument("--out", required=True, help="output directory for report and artifacts")
    analyze.add_argument("--format", choices=("md", "canonical"), default="md")
    analyze.add_argument("--mode", choices=("live", "replay", "record"), default="live")
    analyze.add_argument("--thresholds", default=None, help="thresholds JSON file")
    analyze.add_argument("--exchanges", default=None, help="LLM exchange store path")
    analyze.add_argument("--timestamp", default=None, help="fixed created_at for reproducible output")
    _add_backend_flags(analyze)
    analyze.set_defaults(func=cmd_analyze)

    compare = sub.add_parser("compare", help="diff two canonical reports")
    compare.add_argument("report_a")
    compare.add_argument("report_b")
    compare.add_argument("--track", action="store_true", help="also generate track summaries")
    compare.add_argument("--mode", choices=("live", "replay", "record"), default="live")
    compare.add_argument("--thresholds", default=None)
    compare.add_argument("--exchanges", default=None)
    _add_backend_flags(compare)
    compare.set_defaults(func=cmd_compare)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--storage", default="./vizcritic-data")
    serve.add_argument("--mode", choices=("live", "replay", "record"), default="live")
    serve.add_argument("--thresholds", default=None)
    serve.add_argument("--exchanges", default=None)
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
