"""Seeded random generators shared by the parser/scorer tests."""

from __future__ import annotations

import random
import string

from absa_eval.types import Polarity, SentimentTuple, TaskSchema, Term

# Realistic review-term charset. Double quotes are excluded: the quoted wire
# format cannot carry `"` followed by a delimiter, and the serializer refuses.
_WORD_CHARS = string.ascii_letters + string.digits + "'-"
_CATEGORIES = (
    "food quality",
    "service general",
    "drinks style_options",
    "ambience general",
    "restaurant miscellaneous",
    "keyboard usability",
    "battery general",
)


def random_word(rng: random.Random) -> str:
    return "".join(rng.choice(_WORD_CHARS) for _ in range(rng.randint(1, 8)))


def random_term_text(rng: random.Random) -> str:
    while True:
        words = [random_word(rng) for _ in range(rng.randint(1, 4))]
        if rng.random() < 0.15:
            words.insert(rng.randrange(len(words)), rng.choice([",", "(", ")", "n't"]))
        text = " ".join(words)
        if text.strip() and text.strip().lower() != "null":
            return text


def random_term(rng: random.Random, allow_implicit: bool) -> Term:
    if allow_implicit and rng.random() < 0.2:
        return Term.implicit()
    return Term.explicit(random_term_text(rng))


def random_tuple(rng: random.Random, schema: TaskSchema) -> SentimentTuple:
    return SentimentTuple(
        aspect=random_term(rng, schema.implicit_allowed),
        polarity=rng.choice(list(Polarity)),
        category=rng.choice(_CATEGORIES) if schema.has_category else None,
        opinion=random_term(rng, schema.implicit_allowed) if schema.has_opinion else None,
    )


def random_tuple_list(rng: random.Random, schema: TaskSchema, max_n: int = 5) -> list[SentimentTuple]:
    """Distinct tuples (the wire format has set semantics)."""
    out: list[SentimentTuple] = []
    seen = set()
    for _ in range(rng.randint(0, max_n)):
        t = random_tuple(rng, schema)
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out
