"""Loading the public ABSA datasets into validated bundles.

Three on-disk layouts are supported:

* ``canonical-jsonl`` - one JSON object per line,
  ``{"text": ..., "tuples": [{"aspect": ..., "category": ..., "polarity": ..., "opinion": ...}]}``,
  with JSON null (or the string "null") for implicit terms and keys absent
  for elements the task lacks.
* ``sep-line`` - ``sentence####[tuple-list]`` where the label part is a
  Python literal list; term fields are strings ('NULL' = implicit) or token
  index lists resolved against the whitespace-tokenized sentence; elements
  follow the task wire order.
* ``acos-tsv`` - tab-separated ``sentence<TAB>quad<TAB>quad...`` with quads
  ``aspect_span category sentiment opinion_span``; spans are "start,end"
  token ranges ("-1,-1" = implicit), categories are "FOOD#QUALITY"-style
  (lowercased, '#' becomes ' '), sentiment digits 0/1/2 mean
  negative/neutral/positive.
"""

from __future__ import annotations

import ast
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .errors import DataError, MalformedRecord, MissingSplit, SchemaViolation
from .parsing import CanonicalizationPolicy, canonicalize_text
from .types import (
    TERM_NOT_IN_TEXT,
    AnnotatedSentence,
    DatasetBundle,
    Polarity,
    SentimentTuple,
    TaskSchema,
    Term,
    Violation,
    validate_tuple,
)

#: Restaurant-domain category vocabulary, in the order the prompt enumerates it.
RESTAURANT_CATEGORIES = (
    "ambience general",
    "drinks prices",
    "drinks quality",
    "drinks style_options",
    "food general",
    "food prices",
    "food quality",
    "food style_options",
    "location general",
    "restaurant general",
    "restaurant miscellaneous",
    "restaurant prices",
    "service general",
)

ADAPTERS = ("canonical-jsonl", "sep-line", "acos-tsv")

_ADAPTER_EXT = {"canonical-jsonl": ".jsonl", "sep-line": ".txt", "acos-tsv": ".tsv"}

_ACOS_SENTIMENT = {"0": Polarity.NEGATIVE, "1": Polarity.NEUTRAL, "2": Polarity.POSITIVE}

#: Policy used for the explicit-term substring check during validation.
_SUBSTRING_POLICY = CanonicalizationPolicy()


@dataclass(frozen=True)
class SplitStats:
    sentences: int
    tuples: int
    categories: int
    positive: int
    negative: int
    neutral: int

    @property
    def polarity_counts(self) -> tuple[int, int, int]:
        return (self.positive, self.negative, self.neutral)


def _split_file(path: Path, split: str, adapter: str) -> Path:
    ext = _ADAPTER_EXT[adapter]
    exact = path / f"{split}{ext}"
    if exact.is_file():
        return exact
    candidates = sorted(p for p in path.glob(f"*{split}*{ext}") if p.is_file())
    if len(candidates) == 1:
        return candidates[0]
    detail = "no matching file" if not candidates else f"ambiguous: {[c.name for c in candidates]}"
    raise MissingSplit(split, str(path), detail)


def _read_lines(fpath: Path) -> list[str]:
    text = fpath.read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines()]
    if not any(ln.strip() for ln in lines):
        raise MalformedRecord(str(fpath), 0, "empty split file")
    return lines


def _term_from_field(value, tokens: list[str], fpath: Path, line_no: int) -> Term:
    """A term field is a string ('NULL' = implicit) or a token-index list."""
    if isinstance(value, (list, tuple)):
        try:
            picked = [tokens[int(i)] for i in value]
        except (IndexError, ValueError, TypeError):
            raise MalformedRecord(str(fpath), line_no, f"bad token indices {value!r}") from None
        if not picked:
            raise MalformedRecord(str(fpath), line_no, "empty token index list")
        return Term.explicit(" ".join(picked))
    if isinstance(value, str):
        if value.strip().lower() == "null":
            return Term.implicit()
        try:
            return Term.explicit(value)
        except ValueError as e:
            raise MalformedRecord(str(fpath), line_no, str(e)) from None
    raise MalformedRecord(str(fpath), line_no, f"bad term field {value!r}")


def _parse_sep_line(fpath: Path, schema: TaskSchema) -> list[AnnotatedSentence]:
    sentences = []
    for line_no, line in enumerate(_read_lines(fpath), start=1):
        if not line.strip():
            continue
        parts = line.split("####")
        if len(parts) != 2:
            raise MalformedRecord(str(fpath), line_no, "expected exactly one '####' separator")
        text, label_part = parts[0], parts[1]
        try:
            labels = ast.literal_eval(label_part.strip())
        except (ValueError, SyntaxError) as e:
            raise MalformedRecord(str(fpath), line_no, f"bad label literal: {e}") from None
        if not isinstance(labels, (list, tuple)):
            raise MalformedRecord(str(fpath), line_no, "label part is not a list")
        tokens = text.split()
        gold = []
        for item in labels:
            if not isinstance(item, (list, tuple)) or len(item) != schema.arity:
                raise MalformedRecord(str(fpath), line_no, f"tuple arity != {schema.arity}: {item!r}")
            kw: dict = {}
            for name, field in zip(schema.wire_order, item):
                if name in ("aspect", "opinion"):
                    kw[name] = _term_from_field(field, tokens, fpath, line_no)
                elif name == "category":
                    if not isinstance(field, str) or not field.strip():
                        raise MalformedRecord(str(fpath), line_no, f"bad category {field!r}")
                    kw[name] = field
                else:
                    try:
                        kw[name] = Polarity.parse(str(field))
                    except ValueError as e:
                        raise MalformedRecord(str(fpath), line_no, str(e)) from None
            gold.append(SentimentTuple(**kw))
        sentences.append(AnnotatedSentence(text.strip(), tuple(gold)))
    return sentences


def _span_term(span: str, tokens: list[str], fpath: Path, line_no: int) -> Term:
    try:
        start, end = (int(x) for x in span.split(","))
    except ValueError:
        raise MalformedRecord(str(fpath), line_no, f"bad span {span!r}") from None
    if (start, end) == (-1, -1):
        return Term.implicit()
    if not (0 <= start < end <= len(tokens)):
        raise MalformedRecord(str(fpath), line_no, f"span {span!r} outside sentence")
    return Term.explicit(" ".join(tokens[start:end]))


def _parse_acos_tsv(fpath: Path, schema: TaskSchema) -> list[AnnotatedSentence]:
    sentences = []
    for line_no, line in enumerate(_read_lines(fpath), start=1):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        text = parts[0]
        tokens = text.split()
        gold = []
        for quad in parts[1:]:
            if not quad.strip():
                continue
            fields = quad.split()
            if len(fields) != 4:
                raise MalformedRecord(str(fpath), line_no, f"quad needs 4 fields: {quad!r}")
            aspect_span, category, sentiment, opinion_span = fields
            if sentiment not in _ACOS_SENTIMENT:
                raise MalformedRecord(str(fpath), line_no, f"bad sentiment digit {sentiment!r}")
            gold.append(
                SentimentTuple(
                    aspect=_span_term(aspect_span, tokens, fpath, line_no),
                    category=category.lower().replace("#", " "),
                    polarity=_ACOS_SENTIMENT[sentiment],
                    opinion=_span_term(opinion_span, tokens, fpath, line_no),
                )
            )
        if not gold:
            raise MalformedRecord(str(fpath), line_no, "sentence has no annotations")
        sentences.append(AnnotatedSentence(text.strip(), tuple(gold)))
    return sentences


def _parse_canonical_jsonl(fpath: Path, schema: TaskSchema) -> list[AnnotatedSentence]:
    sentences = []
    for line_no, line in enumerate(_read_lines(fpath), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedRecord(str(fpath), line_no, f"bad JSON: {e}") from None
        try:
            text = rec["text"]
            raw_tuples = rec["tuples"]
        except (KeyError, TypeError):
            raise MalformedRecord(str(fpath), line_no, "record needs 'text' and 'tuples'") from None
        gold = []
        for item in raw_tuples:
            kw: dict = {}
            for name in schema.wire_order:
                if name not in item:
                    raise MalformedRecord(str(fpath), line_no, f"tuple missing {name!r}")
                value = item[name]
                if name in ("aspect", "opinion"):
                    if value is None or (isinstance(value, str) and value.strip().lower() == "null"):
                        kw[name] = Term.implicit()
                    elif isinstance(value, str):
                        try:
                            kw[name] = Term.explicit(value)
                        except ValueError as e:
                            raise MalformedRecord(str(fpath), line_no, str(e)) from None
                    else:
                        raise MalformedRecord(str(fpath), line_no, f"bad {name} field {value!r}")
                elif name == "category":
                    if not isinstance(value, str) or not value.strip():
                        raise MalformedRecord(str(fpath), line_no, f"bad category {value!r}")
                    kw[name] = value
                else:
                    try:
                        kw[name] = Polarity.parse(str(value))
                    except ValueError as e:
                        raise MalformedRecord(str(fpath), line_no, str(e)) from None
            gold.append(SentimentTuple(**kw))
        sentences.append(AnnotatedSentence(text, tuple(gold)))
    return sentences


_PARSERS: dict[str, Callable[[Path, TaskSchema], list[AnnotatedSentence]]] = {
    "canonical-jsonl": _parse_canonical_jsonl,
    "sep-line": _parse_sep_line,
    "acos-tsv": _parse_acos_tsv,
}


def _validate_sentence(
    s: AnnotatedSentence, schema: TaskSchema, vocab: Sequence[str] | None
) -> list[Violation]:
    out = []
    text_canon = canonicalize_text(s.text, _SUBSTRING_POLICY)
    for t in s.gold:
        out.extend(validate_tuple(t, schema, vocab))
        for name in ("aspect", "opinion"):
            term = t.element(name)
            if isinstance(term, Term) and term.text is not None:
                if canonicalize_text(term.text, _SUBSTRING_POLICY) not in text_canon:
                    out.append(Violation(TERM_NOT_IN_TEXT, f"{name} {term.text!r} not a substring of the sentence"))
    return out


def load_dataset(
    path: str | Path,
    adapter: str,
    schema: TaskSchema,
    name: str,
    vocabulary: Sequence[str] | None = None,
) -> DatasetBundle:
    """Loads train/dev/test from ``path`` and validates every sentence.

    ``vocabulary`` fixes the category list (e.g. the restaurant prompt
    vocabulary); when None it is derived from the train split's gold
    categories, sorted lexicographically.
    """
    if adapter not in _PARSERS:
        raise DataError(f"unknown adapter {adapter!r}; expected one of {ADAPTERS}")
    path = Path(path)
    if not path.is_dir():
        raise MissingSplit("train", str(path), "not a directory")
    parser = _PARSERS[adapter]
    splits = {split: parser(_split_file(path, split, adapter), schema) for split in ("train", "dev", "test")}

    if vocabulary is not None:
        categories = tuple(vocabulary)
    elif schema.has_category:
        categories = tuple(sorted({t.category for s in splits["train"] for t in s.gold if t.category}))
    else:
        categories = ()

    vocab_for_check = categories if schema.has_category else None
    for split, sentences in splits.items():
        for idx, s in enumerate(sentences):
            violations = _validate_sentence(s, schema, vocab_for_check)
            if violations:
                raise SchemaViolation(s, violations, f"{name} {split} sentence {idx}")

    return DatasetBundle(
        name=name,
        schema=schema,
        train=tuple(splits["train"]),
        dev=tuple(splits["dev"]),
        test=tuple(splits["test"]),
        categories=categories,
    )


def compute_stats(bundle: DatasetBundle) -> dict[str, SplitStats]:
    """Per-split sentence/tuple/category/polarity counts."""
    out = {}
    for split, sentences in bundle.splits():
        tuples = [t for s in sentences for t in s.gold]
        cats = {t.category for t in tuples if t.category is not None}
        by_pol = {p: 0 for p in Polarity}
        for t in tuples:
            by_pol[t.polarity] += 1
        out[split] = SplitStats(
            sentences=len(sentences),
            tuples=len(tuples),
            categories=len(cats),
            positive=by_pol[Polarity.POSITIVE],
            negative=by_pol[Polarity.NEGATIVE],
            neutral=by_pol[Polarity.NEUTRAL],
        )
    return out


def dataset_manifest(bundle: DatasetBundle) -> str:
    """Stable content digest over order-normalized records; keys caches and reports."""
    h = hashlib.sha256()
    h.update(bundle.schema.task.value.encode())
    for split, sentences in bundle.splits():
        h.update(f"\x00split:{split}".encode())
        for s in sentences:
            wire = sorted(json.dumps(t.wire_values(bundle.schema), ensure_ascii=False) for t in s.gold)
            h.update(json.dumps([s.text, wire], ensure_ascii=False).encode())
    return h.hexdigest()
