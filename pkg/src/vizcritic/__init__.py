"""Automated design feedback for data-visualization images.

Analyzes a chart screenshot with perceptual filters, clarifies the raw
metrics into plain language, generates guidance through templated LLM
prompts, and tracks design quality across revisions.
"""

__version__ = "0.1.0"

from .clarify import ClarifyConfig, FilterFinding, clarify_all, section_status
from .image_io import ChartImage, downsample_for_analysis, load_chart_image
from .pipeline import AnalysisContext, Backends, run_pipeline
from .report import DesignReport, assemble_report, parse_report, render_markdown, serialize_report

__all__ = [
    "AnalysisContext",
    "Backends",
    "ChartImage",
    "ClarifyConfig",
    "DesignReport",
    "FilterFinding",
    "assemble_report",
    "clarify_all",
    "downsample_for_analysis",
    "load_chart_image",
    "parse_report",
    "render_markdown",
    "run_pipeline",
    "section_status",
    "serialize_report",
    "__version__",
]
