"""Synthetic dataset fixtures with exactly prescribed per-split statistics.

The public corpora live in third-party repositories; this module fabricates
stand-ins in the same on-disk layouts (sep-line for ASQP/TASD/ASTE, tsv for
ACOS), deterministic byte-for-byte, so the full adapter -> validate -> stats
path can be exercised offline. Each fixture split hits its prescribed
sentence/tuple/category/polarity counts exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .ingest import RESTAURANT_CATEGORIES
from .types import Task, schema_for


@dataclass(frozen=True)
class SplitSpec:
    sentences: int
    tuples: int
    categories: int
    positive: int
    negative: int
    neutral: int


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    task: Task
    adapter: str
    domain: str  # "restaurant" | "laptop"
    train: SplitSpec
    dev: SplitSpec
    test: SplitSpec


def _lap_categories(n: int) -> tuple[str, ...]:
    return tuple(f"part{k:03d} general" for k in range(n))


LAPTOP_CATEGORIES = _lap_categories(114)

#: The eight dataset/task combinations with their per-split statistics.
DATASETS: tuple[DatasetSpec, ...] = (
    DatasetSpec(
        "asqp-rest15", Task.ASQP, "sep-line", "restaurant",
        SplitSpec(834, 1354, 13, 1005, 315, 34),
        SplitSpec(209, 347, 12, 252, 81, 14),
        SplitSpec(537, 795, 12, 453, 305, 37),
    ),
    DatasetSpec(
        "asqp-rest16", Task.ASQP, "sep-line", "restaurant",
        SplitSpec(1264, 1989, 12, 1369, 558, 62),
        SplitSpec(316, 507, 13, 341, 143, 23),
        SplitSpec(544, 799, 12, 583, 176, 40),
    ),
    DatasetSpec(
        "acos-lap", Task.ACOS, "acos-tsv", "laptop",
        SplitSpec(2934, 4172, 114, 2583, 1362, 227),
        SplitSpec(326, 440, 71, 279, 137, 24),
        SplitSpec(816, 1161, 81, 716, 380, 65),
    ),
    DatasetSpec(
        "acos-rest", Task.ACOS, "acos-tsv", "restaurant",
        SplitSpec(1530, 2484, 12, 1656, 733, 95),
        SplitSpec(171, 261, 13, 180, 69, 12),
        SplitSpec(583, 916, 12, 667, 205, 44),
    ),
    DatasetSpec(
        "tasd-rest15", Task.TASD, "sep-line", "restaurant",
        SplitSpec(1120, 1654, 13, 1198, 403, 53),
        SplitSpec(10, 13, 6, 6, 7, 0),
        SplitSpec(582, 845, 12, 454, 346, 45),
    ),
    DatasetSpec(
        "tasd-rest16", Task.TASD, "sep-line", "restaurant",
        SplitSpec(1708, 2507, 12, 1657, 749, 101),
        SplitSpec(29, 44, 9, 23, 20, 1),
        SplitSpec(587, 859, 12, 611, 204, 44),
    ),
    DatasetSpec(
        "aste-rest15", Task.ASTE, "sep-line", "restaurant",
        SplitSpec(605, 1013, 0, 783, 205, 25),
        SplitSpec(148, 249, 0, 185, 53, 11),
        SplitSpec(322, 485, 0, 317, 143, 25),
    ),
    DatasetSpec(
        "aste-rest16", Task.ASTE, "sep-line", "restaurant",
        SplitSpec(857, 1394, 0, 1015, 329, 50),
        SplitSpec(210, 339, 0, 252, 76, 11),
        SplitSpec(326, 514, 0, 407, 78, 29),
    ),
)

DATASET_SPECS = {d.name: d for d in DATASETS}


@dataclass
class _TupleSketch:
    aspect: str | None          # token text, None = implicit
    aspect_span: tuple[int, int] | None
    opinion: str | None
    opinion_span: tuple[int, int] | None
    category: str | None
    polarity: str               # "positive" | "negative" | "neutral"


def _polarity_at(j: int, spec: SplitSpec) -> str:
    if j < spec.positive:
        return "positive"
    if j < spec.positive + spec.negative:
        return "negative"
    return "neutral"


def _build_split(ds: DatasetSpec, split: str, spec: SplitSpec) -> list[tuple[str, list[_TupleSketch]]]:
    schema = schema_for(ds.task)
    vocab = RESTAURANT_CATEGORIES if ds.domain == "restaurant" else LAPTOP_CATEGORIES
    vocab = vocab[: spec.categories] if spec.categories else ()

    counts = [1] * spec.sentences
    for extra in range(spec.tuples - spec.sentences):
        counts[extra % spec.sentences] += 1

    sentences = []
    j = 0  # global tuple index within the split
    for i in range(spec.sentences):
        tokens: list[str] = []
        sketches: list[_TupleSketch] = []
        for _ in range(counts[i]):
            implicit_aspect = schema.implicit_allowed and j % 7 == 3
            implicit_opinion = schema.has_opinion and schema.implicit_allowed and j % 11 == 5
            sk = _TupleSketch(
                aspect=None, aspect_span=None, opinion=None, opinion_span=None,
                category=vocab[j % len(vocab)] if vocab else None,
                polarity=_polarity_at(j, spec),
            )
            if not implicit_aspect:
                sk.aspect = f"{split[0]}{i}a{j}"
                sk.aspect_span = (len(tokens), len(tokens) + 1)
                tokens.append(sk.aspect)
            tokens.append("was")
            if schema.has_opinion and not implicit_opinion:
                sk.opinion = f"{split[0]}{i}o{j}"
                sk.opinion_span = (len(tokens), len(tokens) + 1)
                tokens.append(sk.opinion)
            if implicit_aspect and (not schema.has_opinion or implicit_opinion):
                tokens.append(f"{split[0]}{i}f{j}")
            sketches.append(sk)
            j += 1
        tokens.append(".")
        sentences.append((" ".join(tokens), sketches))
    return sentences


def _sep_line_field(term: str | None) -> str:
    return "NULL" if term is None else term


_POLARITY_ABBREV = {"positive": "POS", "negative": "NEG", "neutral": "NEU"}


def _write_sep_line(ds: DatasetSpec, split_rows, fpath: Path) -> None:
    """ASQP/TASD rows carry term strings; ASTE rows carry token-index lists."""
    schema = schema_for(ds.task)
    index_terms = ds.task is Task.ASTE
    lines = []
    for text, sketches in split_rows:
        labels = []
        for sk in sketches:
            item: list = []
            for name in schema.wire_order:
                if name == "aspect":
                    item.append(list(range(*sk.aspect_span)) if index_terms else _sep_line_field(sk.aspect))
                elif name == "opinion":
                    item.append(list(range(*sk.opinion_span)) if index_terms else _sep_line_field(sk.opinion))
                elif name == "category":
                    item.append(sk.category)
                else:
                    item.append(_POLARITY_ABBREV[sk.polarity])
            labels.append(tuple(item) if index_terms else item)
        lines.append(f"{text}####{labels!r}")
    fpath.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _acos_span(span: tuple[int, int] | None) -> str:
    return "-1,-1" if span is None else f"{span[0]},{span[1]}"


def _write_acos_tsv(ds: DatasetSpec, split_rows, fpath: Path) -> None:
    sentiment_digit = {"negative": "0", "neutral": "1", "positive": "2"}
    lines = []
    for text, sketches in split_rows:
        quads = []
        for sk in sketches:
            category = sk.category.upper().replace(" ", "#")
            quads.append(
                f"{_acos_span(sk.aspect_span)} {category} {sentiment_digit[sk.polarity]} {_acos_span(sk.opinion_span)}"
            )
        lines.append("\t".join([text] + quads))
    fpath.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_dataset(ds: DatasetSpec, root: str | Path) -> Path:
    """Writes one dataset's three splits under ``root/<name>/``; returns the directory."""
    out_dir = Path(root) / ds.name
    out_dir.mkdir(parents=True, exist_ok=True)
    writer = _write_acos_tsv if ds.adapter == "acos-tsv" else _write_sep_line
    ext = ".tsv" if ds.adapter == "acos-tsv" else ".txt"
    for split in ("train", "dev", "test"):
        rows = _build_split(ds, split, getattr(ds, split))
        writer(ds, rows, out_dir / f"{split}{ext}")
    return out_dir


def write_all(root: str | Path) -> dict[str, Path]:
    """All eight fixture datasets; returns name -> directory."""
    return {ds.name: write_dataset(ds, root) for ds in DATASETS}
