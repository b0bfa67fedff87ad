"""Prompt-construction, output-parsing and evaluation toolkit for aspect-based
sentiment analysis and sentiment classification."""

from .types import (
    AbsaSentence,
    AspectCategory,
    OpinionTriplet,
    Polarity,
    PolarityDocument,
    SplitKind,
    SplitSpec,
    star_to_polarity,
)
from .prompting import PromptRendering, Regime, TemplateConfig, Verbalizer
from .parsing import ParsedOutput, Task, TaskPrediction
from .metrics import MetricReport, MicroCounts, accuracy, aggregate_seeds, micro_f1

__all__ = [
    "AbsaSentence",
    "AspectCategory",
    "OpinionTriplet",
    "Polarity",
    "PolarityDocument",
    "SplitKind",
    "SplitSpec",
    "star_to_polarity",
    "PromptRendering",
    "Regime",
    "TemplateConfig",
    "Verbalizer",
    "ParsedOutput",
    "Task",
    "TaskPrediction",
    "MetricReport",
    "MicroCounts",
    "accuracy",
    "aggregate_seeds",
    "micro_f1",
]

__version__ = "0.1.0"
