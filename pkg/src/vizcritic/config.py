"""Engine configuration and the thresholds file.

One JSON file configures every tunable threshold; unknown keys are
rejected so typos fail loudly.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .clarify import ClarifyConfig
from .errors import ValidationError


@dataclass(frozen=True)
class AnalysisConfig:
    clarify: ClarifyConfig = field(default_factory=ClarifyConfig)
    analysis_max_dim: int = 512
    transition_rgb_threshold: float = 30.0
    high_saliency_cutoff: float = 0.5
    background_coverage: float = 0.40
    palette_cap: int = 4096
    filter_workers: int = 4
    llm_max_concurrency: int = 4
    llm_min_interval: float = 0.0


def load_thresholds(path: str | Path) -> AnalysisConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read thresholds file {path}: {exc}") from None
    clarify_fields = {f.name for f in dataclasses.fields(ClarifyConfig)}
    top_fields = {f.name for f in dataclasses.fields(AnalysisConfig)} - {"clarify"}
    clarify_kwargs = {}
    top_kwargs = {}
    for key, value in raw.items():
        if key in clarify_fields:
            clarify_kwargs[key] = value
        elif key in top_fields:
            top_kwargs[key] = value
        else:
            raise ValidationError(f"unknown threshold key {key!r}")
    try:
        return AnalysisConfig(clarify=ClarifyConfig(**clarify_kwargs), **top_kwargs)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"invalid thresholds: {exc}") from None
