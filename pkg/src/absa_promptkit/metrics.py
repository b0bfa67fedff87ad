"""Micro F1 / accuracy scoring and multi-seed aggregation."""
from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Sequence

from scipy import stats as scipy_stats

from .errors import ValidationError
from .parsing import Task, TaskPrediction
from .types import Polarity


@dataclass
class MicroCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "MicroCounts") -> "MicroCounts":
        return MicroCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp > 0 else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn > 0 else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0


def micro_f1(
    gold: Sequence[TaskPrediction], pred: Sequence[TaskPrediction]
) -> tuple[float, float, float, MicroCounts]:
    """Pool TP/FP/FN over examples aligned by id; exact item equality."""
    if len(gold) != len(pred):
        raise ValidationError(f"gold has {len(gold)} examples, pred has {len(pred)}")
    counts = MicroCounts()
    pred_by_id = {p.example_id: p for p in pred}
    for g in gold:
        p = pred_by_id.get(g.example_id)
        if p is None:
            raise ValidationError(f"no prediction for example {g.example_id!r}")
        counts.tp += len(g.items & p.items)
        counts.fp += len(p.items - g.items)
        counts.fn += len(g.items - p.items)
    return counts.precision, counts.recall, counts.f1, counts


def accuracy(gold: Sequence[Polarity], pred: Sequence[Polarity]) -> float:
    if len(gold) != len(pred):
        raise ValidationError(f"length mismatch: {len(gold)} gold vs {len(pred)} pred")
    if not gold:
        raise ValidationError("no examples")
    return sum(g == p for g, p in zip(gold, pred)) / len(gold)


@dataclass
class MetricReport:
    task: Task
    per_seed: list[float]
    mean: float
    ci95_halfwidth: float
    single_seed_warning: bool = False

    def cell(self) -> str:
        """Percent with one decimal, paper-table style, e.g. '84.0±3.9'."""
        return f"{100 * self.mean:.1f}±{100 * self.ci95_halfwidth:.1f}"


def aggregate_seeds(
    scores: Sequence[float], task: Task = Task.TASD, n_expected: int = 5
) -> MetricReport:
    """Mean with a Student-t 95% confidence half-width over seed runs."""
    if not scores:
        raise ValidationError("aggregate_seeds needs at least one score")
    n = len(scores)
    mean = statistics.fmean(scores)
    if n == 1:
        return MetricReport(task, list(scores), mean, 0.0, single_seed_warning=True)
    t = scipy_stats.t.ppf(0.975, n - 1)
    halfwidth = t * statistics.stdev(scores) / n**0.5
    return MetricReport(task, list(scores), mean, halfwidth)
