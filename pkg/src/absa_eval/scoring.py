"""Exact-match micro precision/recall/F1, per run and aggregated across runs."""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyRunList
from .parsing import CanonicalizationPolicy, canonicalize
from .types import SentimentTuple


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


@dataclass(frozen=True)
class RunMetrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "RunMetrics":
        p = _ratio(tp, tp + fp)
        r = _ratio(tp, tp + fn)
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        return cls(tp, fp, fn, p, r, f1)


def score_sentence(
    pred: Iterable[SentimentTuple],
    gold: Iterable[SentimentTuple],
    policy: CanonicalizationPolicy = CanonicalizationPolicy(),
) -> tuple[int, int, int]:
    """(tp, fp, fn) under set semantics: a prediction counts only when every
    element exactly matches a gold tuple after canonicalization."""
    pred_set = {canonicalize(t, policy) for t in pred}
    gold_set = {canonicalize(t, policy) for t in gold}
    tp = len(pred_set & gold_set)
    return tp, len(pred_set) - tp, len(gold_set) - tp


def score_run(counts: Iterable[tuple[int, int, int]]) -> RunMetrics:
    """Micro aggregation: sum per-sentence counts, then apply the ratio formulas."""
    tp = fp = fn = 0
    for s_tp, s_fp, s_fn in counts:
        tp += s_tp
        fp += s_fp
        fn += s_fn
    return RunMetrics.from_counts(tp, fp, fn)


@dataclass(frozen=True)
class AggregateMetrics:
    mean_precision: float
    mean_recall: float
    mean_f1: float
    stddev_f1: float
    runs: int


def aggregate(runs: Sequence[RunMetrics]) -> AggregateMetrics:
    """Arithmetic mean over runs; sample standard deviation of F1 (0 for one run)."""
    if not runs:
        raise EmptyRunList("need at least one run to aggregate")
    f1s = [r.f1 for r in runs]
    return AggregateMetrics(
        mean_precision=statistics.mean(r.precision for r in runs),
        mean_recall=statistics.mean(r.recall for r in runs),
        mean_f1=statistics.mean(f1s),
        stddev_f1=statistics.stdev(f1s) if len(f1s) > 1 else 0.0,
        runs=len(runs),
    )


def percent(v: float) -> str:
    """Ratio rendered as a two-decimal percentage, the reporting convention."""
    return f"{100 * v:.2f}"
