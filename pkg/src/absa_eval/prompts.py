"""Prompt rendering and tuple serialization.

Instructions are stored as data assets (templates/<task>.txt) with a
``{categories}`` placeholder; few-shot demonstrations are the first k
training examples rendered as Input/target pairs; targets and fine-tuning
completions are the quoted-tuple wire format the parser reads back.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Sequence

from .errors import EmptyVocabulary, InsufficientDemonstrations, SchemaViolation
from .parsing import EXPECTED_PREFIX, wire_representable
from .types import AnnotatedSentence, DatasetBundle, SentimentTuple, TaskSchema, validate_tuple


#: Default shot count when few-shot prompting is requested.
DEFAULT_FEW_SHOT_K = 10


def _template(schema: TaskSchema) -> str:
    path = resources.files(__package__) / "templates" / f"{schema.task.value}.txt"
    return path.read_text(encoding="utf-8").rstrip("\n")


def build_instruction(schema: TaskSchema, vocab: Sequence[str] | None = None) -> str:
    """The full task instruction with the category vocabulary enumerated.

    The vocabulary is rendered in the order given; tasks without categories
    ignore it.
    """
    text = _template(schema)
    if not schema.has_category:
        return text
    if not vocab:
        raise EmptyVocabulary(f"{schema.task.value} needs a category vocabulary")
    enumerated = ", ".join(f'"{c}"' for c in vocab)
    return text.format(categories=enumerated)


def serialize_tuples(tuples: Iterable[SentimentTuple], schema: TaskSchema) -> str:
    """Renders tuples as ``Sentiment elements: [("...", ...), ...]``.

    Elements are double-quoted in the schema's wire order with implicit terms
    as "null". Raises SchemaViolation when a tuple breaks the schema or an
    element cannot be represented in the quoted wire format.
    """
    rendered = []
    for t in tuples:
        violations = validate_tuple(t, schema)
        if violations:
            raise SchemaViolation(t, violations, "cannot serialize")
        values = t.wire_values(schema)
        bad = [v for v in values if not wire_representable(v)]
        if bad:
            raise SchemaViolation(t, [], f"element {bad[0]!r} not representable in quoted wire format")
        rendered.append("(" + ", ".join(f'"{v}"' for v in values) + ")")
    return EXPECTED_PREFIX + "[" + ", ".join(rendered) + "]"


def input_line(text: str) -> str:
    return f'Input: """{text}"""'


@dataclass(frozen=True)
class PromptPackage:
    """A fully rendered request: instruction, optional demonstrations, query."""

    instruction: str
    demonstrations: tuple[tuple[str, str], ...]
    query: str
    expected_prefix: str = EXPECTED_PREFIX

    def render(self) -> str:
        """Single user-message text: instruction, demo pairs, then the query line."""
        parts = [self.instruction]
        for demo_input, demo_target in self.demonstrations:
            parts.append(demo_input)
            parts.append(demo_target)
        parts.append(self.query)
        return "\n\n".join(parts)


def build_package(
    schema: TaskSchema,
    vocab: Sequence[str] | None,
    demos: Sequence[AnnotatedSentence],
    k: int,
    query: str,
) -> PromptPackage:
    """Zero-shot (k=0) or few-shot package; demonstrations are demos[0:k] in order."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k > len(demos):
        raise InsufficientDemonstrations(f"asked for {k} demonstrations, only {len(demos)} available")
    instruction = build_instruction(schema, vocab)
    pairs = tuple(
        (input_line(s.text), serialize_tuples(s.gold, schema)) for s in demos[:k]
    )
    return PromptPackage(instruction, pairs, input_line(query))


def build_finetune_pairs(bundle: DatasetBundle, split: str) -> list[tuple[str, str]]:
    """(prompt, completion) per sentence: the zero-shot prompt and the serialized gold."""
    sentences = bundle.split(split)
    out = []
    for s in sentences:
        pkg = build_package(bundle.schema, bundle.categories, (), 0, s.text)
        out.append((pkg.render(), serialize_tuples(s.gold, bundle.schema)))
    return out
