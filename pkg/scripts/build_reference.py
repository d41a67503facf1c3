#!/usr/bin/env python3
"""Regenerate the bundled reference distributions from the synthetic
chart corpus in tests/fixtures.py.

Usage: python scripts/build_reference.py [output_path]
"""
from __future__ import annotations

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))
sys.path.insert(0, str(REPO / "src"))

from fixtures import corpus, scale_boxes  # noqa: E402

from vizcritic.backends import SpectralResidualSaliency, StubOcr  # noqa: E402
from vizcritic.config import AnalysisConfig  # noqa: E402
from vizcritic.image_io import downsample_for_analysis, load_chart_image  # noqa: E402
from vizcritic.saliency import (  # noqa: E402
    ReferenceDistribution,
    center_saliency_fraction,
    compute_saliency,
    format_reference_distributions,
    text_saliency_ratio,
    transition_zone_coverage,
)
from vizcritic.textzones import detect_text_boxes  # noqa: E402

HEADER = (
    "Per-image metric samples over the bundled synthetic chart corpus\n"
    "(tests/fixtures.py, seeds 1..60, spectral-residual saliency).\n"
    "Regenerate with scripts/build_reference.py.\n"
    "Flag directions are configurable in the thresholds file; shipped\n"
    "defaults flag text/center above the 10th percentile and attention\n"
    "coverage below the 90th. For stricter flagging that only marks the\n"
    "extreme decile, use above-90 for text/center and below-10 for\n"
    "attention coverage."
)


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        REPO / "src" / "vizcritic" / "data" / "reference_distributions.txt"
    )
    config = AnalysisConfig()
    backend = SpectralResidualSaliency()

    samples = {"text_ratio": [], "center_fraction": [], "transition_coverage": []}
    for png, boxes in corpus():
        display = load_chart_image(png, "png")
        analysis = downsample_for_analysis(display, config.analysis_max_dim)
        scale = analysis.width / display.width
        smap = compute_saliency(analysis, backend)
        ocr = StubOcr(scale_boxes(boxes, scale))
        text_boxes = detect_text_boxes(analysis, ocr)

        ratio = text_saliency_ratio(smap, text_boxes)
        if ratio is not None:
            samples["text_ratio"].append(ratio)
        samples["center_fraction"].append(center_saliency_fraction(smap))
        coverage = transition_zone_coverage(
            analysis, smap, config.transition_rgb_threshold, config.high_saliency_cutoff
        )
        if coverage is not None:
            samples["transition_coverage"].append(coverage)

    refs = {
        name: ReferenceDistribution(metric_name=name, samples=tuple(sorted(values)))
        for name, values in samples.items()
    }
    out.write_text(format_reference_distributions(refs, HEADER), encoding="utf-8")
    for name, values in samples.items():
        print(f"{name}: {len(values)} samples, range [{min(values):.4f}, {max(values):.4f}]")
    print(f"written to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
