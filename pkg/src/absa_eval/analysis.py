"""Error attribution: which sentiment elements a wrong prediction got wrong.

Predictions left after removing exact matches are aligned greedily to the
remaining golds by ascending number of differing elements (ties prefer an
aspect match, then a category match, then input order). Predictions or golds
with no counterpart count as erring on every schema element, so histogram
mass is never lost.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .types import Polarity, SentimentTuple, TaskSchema, Term


@dataclass(frozen=True)
class ErrorRecord:
    sentence: str
    pred: SentimentTuple | None
    gold: SentimentTuple | None
    differing: frozenset[str]
    near_miss: bool

    @property
    def kind(self) -> str:
        if self.pred is None:
            return "missed"
        if self.gold is None:
            return "spurious"
        return "mismatch"


def _differing(pred: SentimentTuple, gold: SentimentTuple, schema: TaskSchema) -> frozenset[str]:
    return frozenset(e for e in schema.elements() if pred.element(e) != gold.element(e))


def _contains(a: Term, b: Term) -> bool:
    if a.text is None or b.text is None:
        return False
    return a.text in b.text or b.text in a.text


def _near_miss(pred: SentimentTuple, gold: SentimentTuple, differing: frozenset[str]) -> bool:
    """Exactly one term element differs, and one side's text contains the other's."""
    if len(differing) != 1:
        return False
    (element,) = differing
    if element not in ("aspect", "opinion"):
        return False
    return _contains(pred.element(element), gold.element(element))


def align_errors(
    pred: Iterable[SentimentTuple],
    gold: Iterable[SentimentTuple],
    schema: TaskSchema,
    sentence: str = "",
) -> list[ErrorRecord]:
    """Error records for one sentence; empty when prediction equals gold.

    Inputs are expected to be canonicalized already (this mirrors the scorer's
    equality).
    """
    pred_list = list(dict.fromkeys(pred))
    gold_list = list(dict.fromkeys(gold))
    exact = set(pred_list) & set(gold_list)
    P = [t for t in pred_list if t not in exact]
    G = [t for t in gold_list if t not in exact]

    pairs = []
    for pi, p in enumerate(P):
        for gi, g in enumerate(G):
            diff = _differing(p, g, schema)
            pairs.append((len(diff), "aspect" in diff, "category" in diff, pi, gi, diff))
    pairs.sort(key=lambda x: x[:5])

    used_p: set[int] = set()
    used_g: set[int] = set()
    records: list[ErrorRecord] = []
    for _, _, _, pi, gi, diff in pairs:
        if pi in used_p or gi in used_g:
            continue
        used_p.add(pi)
        used_g.add(gi)
        records.append(ErrorRecord(sentence, P[pi], G[gi], diff, _near_miss(P[pi], G[gi], diff)))

    everything = frozenset(schema.elements())
    for pi, p in enumerate(P):
        if pi not in used_p:
            records.append(ErrorRecord(sentence, p, None, everything, False))
    for gi, g in enumerate(G):
        if gi not in used_g:
            records.append(ErrorRecord(sentence, None, g, everything, False))
    return records


def error_histogram(records: Iterable[ErrorRecord], schema: TaskSchema) -> dict[str, int]:
    """Per-element error tally over the schema's elements, zeros included."""
    hist = {e: 0 for e in schema.elements()}
    for r in records:
        for e in r.differing:
            if e in hist:
                hist[e] += 1
    return hist


def polarity_confusion(records: Iterable[ErrorRecord]) -> dict[str, dict[str, int]]:
    """gold polarity -> predicted polarity counts, over records where polarity differs."""
    labels = [p.value for p in Polarity]
    matrix = {g: {p: 0 for p in labels} for g in labels}
    for r in records:
        if r.pred is None or r.gold is None or "polarity" not in r.differing:
            continue
        matrix[r.gold.polarity.value][r.pred.polarity.value] += 1
    return matrix


def sample_for_review(refs: Sequence[str], n: int, seed: int) -> list[str]:
    """Deterministic pseudo-random sample of sentence refs for manual inspection."""
    if n > len(refs):
        raise ValueError(f"asked for {n} samples from {len(refs)} sentences")
    return random.Random(seed).sample(list(refs), n)


def _tuple_json(t: SentimentTuple | None) -> dict | None:
    if t is None:
        return None
    return {
        "aspect": t.aspect.text,
        "category": t.category,
        "polarity": t.polarity.value,
        "opinion": None if t.opinion is None else t.opinion.text,
    }


def write_error_records(records: Iterable[ErrorRecord], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            row = {
                "sentence": r.sentence,
                "kind": r.kind,
                "pred": _tuple_json(r.pred),
                "gold": _tuple_json(r.gold),
                "differing": sorted(r.differing),
                "near_miss": r.near_miss,
            }
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def write_histogram_csv(hist: dict[str, int], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["element", "errors"])
        for element, count in hist.items():
            writer.writerow([element, count])
