"""Domain vocabulary shared by every other module: tasks, tuples, labels.

All types are immutable values and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

#: Wire marker for implicit aspect/opinion terms.
IMPLICIT_MARKER = "null"


class Polarity(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"

    @classmethod
    def parse(cls, raw: str) -> "Polarity":
        """Accepts both the prompt words and the dataset abbreviations (POS/NEG/NEU)."""
        try:
            return _POLARITY_SYNONYMS[raw.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown polarity: {raw!r}") from None


_POLARITY_SYNONYMS = {
    "positive": Polarity.POSITIVE,
    "pos": Polarity.POSITIVE,
    "negative": Polarity.NEGATIVE,
    "neg": Polarity.NEGATIVE,
    "neutral": Polarity.NEUTRAL,
    "neu": Polarity.NEUTRAL,
}


@dataclass(frozen=True)
class Term:
    """An aspect or opinion term. ``text`` is None for implicit terms.

    Explicit text must be non-empty after trimming and may not spell the
    reserved implicit marker, which could not survive a wire round-trip.
    """

    text: str | None = None

    def __post_init__(self) -> None:
        if self.text is not None:
            stripped = self.text.strip()
            if not stripped:
                raise ValueError("explicit term text must be non-empty")
            if stripped.lower() == IMPLICIT_MARKER:
                raise ValueError(f"explicit term may not be the reserved marker {IMPLICIT_MARKER!r}")

    @classmethod
    def explicit(cls, text: str) -> "Term":
        return cls(text)

    @classmethod
    def implicit(cls) -> "Term":
        return cls(None)

    @property
    def is_implicit(self) -> bool:
        return self.text is None

    def wire(self) -> str:
        return IMPLICIT_MARKER if self.text is None else self.text


class Task(Enum):
    ASQP = "asqp"
    ACOS = "acos"
    TASD = "tasd"
    ASTE = "aste"

    @classmethod
    def parse(cls, raw: "Task | str") -> "Task":
        if isinstance(raw, Task):
            return raw
        try:
            return cls(raw.strip().lower())
        except ValueError:
            raise ValueError(f"unknown task: {raw!r}") from None


#: Canonical element-name order (also the Figure-style reporting order).
ELEMENTS = ("aspect", "category", "polarity", "opinion")


@dataclass(frozen=True)
class TaskSchema:
    """Per-task contract: which elements exist, their wire order, implicit legality."""

    task: Task
    has_category: bool
    has_opinion: bool
    implicit_allowed: bool
    wire_order: tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.wire_order)

    def elements(self) -> tuple[str, ...]:
        """Schema elements in canonical reporting order."""
        present = {"aspect", "polarity"}
        if self.has_category:
            present.add("category")
        if self.has_opinion:
            present.add("opinion")
        return tuple(e for e in ELEMENTS if e in present)


_QUAD_ORDER = ("aspect", "category", "polarity", "opinion")

SCHEMAS: dict[Task, TaskSchema] = {
    Task.ASQP: TaskSchema(Task.ASQP, True, True, True, _QUAD_ORDER),
    Task.ACOS: TaskSchema(Task.ACOS, True, True, True, _QUAD_ORDER),
    Task.TASD: TaskSchema(Task.TASD, True, False, True, ("aspect", "category", "polarity")),
    Task.ASTE: TaskSchema(Task.ASTE, False, True, False, ("aspect", "opinion", "polarity")),
}


def schema_for(task: Task | str) -> TaskSchema:
    return SCHEMAS[Task.parse(task)]


@dataclass(frozen=True)
class SentimentTuple:
    """One extracted opinion. category/opinion presence is dictated by the task schema."""

    aspect: Term
    polarity: Polarity
    category: str | None = None
    opinion: Term | None = None

    def element(self, name: str):
        """Value of a schema element by name (aspect/category/polarity/opinion)."""
        return getattr(self, name)

    def wire_values(self, schema: TaskSchema) -> tuple[str, ...]:
        """Element strings in the schema's wire order, implicit terms as the marker."""
        out = []
        for name in schema.wire_order:
            value = self.element(name)
            if isinstance(value, Term):
                out.append(value.wire())
            elif isinstance(value, Polarity):
                out.append(value.value)
            elif value is None:
                raise ValueError(f"tuple has no {name} but schema {schema.task.value} requires it")
            else:
                out.append(value)
        return tuple(out)


@dataclass(frozen=True)
class Violation:
    """A schema-contract breach found in a tuple; data, not a fault."""

    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


IMPLICIT_NOT_ALLOWED = "implicit_not_allowed"
UNEXPECTED_ELEMENT = "unexpected_element"
MISSING_ELEMENT = "missing_element"
UNKNOWN_CATEGORY = "unknown_category"
TERM_NOT_IN_TEXT = "term_not_in_text"


def validate_tuple(
    t: SentimentTuple,
    schema: TaskSchema,
    vocab: Sequence[str] | None = None,
) -> list[Violation]:
    """Checks element presence, implicit legality, and category vocabulary membership.

    Returns an empty list iff the tuple satisfies the schema. Membership is
    only checked when a vocabulary is given.
    """
    out: list[Violation] = []
    if schema.has_category:
        if t.category is None:
            out.append(Violation(MISSING_ELEMENT, "category required but absent"))
        elif vocab is not None and t.category not in vocab:
            out.append(Violation(UNKNOWN_CATEGORY, f"category {t.category!r} not in vocabulary"))
    elif t.category is not None:
        out.append(Violation(UNEXPECTED_ELEMENT, f"category not part of {schema.task.value}"))
    if schema.has_opinion:
        if t.opinion is None:
            out.append(Violation(MISSING_ELEMENT, "opinion required but absent"))
    elif t.opinion is not None:
        out.append(Violation(UNEXPECTED_ELEMENT, f"opinion term not part of {schema.task.value}"))
    if not schema.implicit_allowed:
        if t.aspect.is_implicit:
            out.append(Violation(IMPLICIT_NOT_ALLOWED, "implicit aspect not allowed"))
        if t.opinion is not None and t.opinion.is_implicit:
            out.append(Violation(IMPLICIT_NOT_ALLOWED, "implicit opinion not allowed"))
    return out


@dataclass(frozen=True)
class AnnotatedSentence:
    """A sentence with its gold tuples in corpus order."""

    text: str
    gold: tuple[SentimentTuple, ...]


SPLIT_NAMES = ("train", "dev", "test")


@dataclass(frozen=True)
class DatasetBundle:
    name: str
    schema: TaskSchema
    train: tuple[AnnotatedSentence, ...]
    dev: tuple[AnnotatedSentence, ...]
    test: tuple[AnnotatedSentence, ...]
    categories: tuple[str, ...]

    def split(self, name: str) -> tuple[AnnotatedSentence, ...]:
        if name not in SPLIT_NAMES:
            raise ValueError(f"unknown split: {name!r}")
        return getattr(self, name)

    def splits(self) -> Iterator[tuple[str, tuple[AnnotatedSentence, ...]]]:
        for name in SPLIT_NAMES:
            yield name, getattr(self, name)
