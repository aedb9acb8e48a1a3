"""Parsing of raw model output into sentiment tuples.

Tolerant mode never fails: it extracts the first bracketed tuple list found
anywhere in the text, accepts single or double quotes, and records every
deviation as a diagnostic. Strict mode requires exactly
``Sentiment elements: [...]`` with double-quoted elements and raises on
structural problems. In both modes, tuples that break the task contract
(wrong arity, illegal implicit marker, unknown polarity, duplicates) are
dropped into diagnostics, never returned.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .errors import ParseError
from .types import IMPLICIT_MARKER, Polarity, SentimentTuple, TaskSchema, Term

# Diagnostic kinds
NO_TUPLE_LIST = "no_tuple_list"
UNBALANCED_BRACKETS = "unbalanced_brackets"
MALFORMED_TUPLE = "malformed_tuple"
BAD_ARITY = "bad_arity"
ILLEGAL_IMPLICIT = "illegal_implicit"
UNKNOWN_POLARITY = "unknown_polarity"
EMPTY_ELEMENT = "empty_element"
EXTRANEOUS_TEXT = "extraneous_text"
DUPLICATE_TUPLE = "duplicate_tuple"
UNQUOTED_ELEMENT = "unquoted_element"

EXPECTED_PREFIX = "Sentiment elements: "


@dataclass(frozen=True)
class CanonicalizationPolicy:
    """How strings are normalized before equality checks.

    ``strict`` means byte equality and implies the other flags are off.
    """

    lowercase: bool = True
    collapse_whitespace: bool = True
    strict: bool = False

    def __post_init__(self) -> None:
        if self.strict and (self.lowercase or self.collapse_whitespace):
            raise ValueError("strict policy implies lowercase and collapse_whitespace are off")

    @classmethod
    def exact(cls) -> "CanonicalizationPolicy":
        return cls(lowercase=False, collapse_whitespace=False, strict=True)

    def key(self) -> str:
        return f"lowercase={self.lowercase},collapse_whitespace={self.collapse_whitespace},strict={self.strict}"


def canonicalize_text(s: str, policy: CanonicalizationPolicy) -> str:
    if policy.strict:
        return s
    out = s.strip()
    if policy.collapse_whitespace:
        out = " ".join(out.split())
    if policy.lowercase:
        out = out.lower()
    return out


def canonicalize(t: SentimentTuple, policy: CanonicalizationPolicy) -> SentimentTuple:
    """Normal form of a tuple under the policy; implicit terms and polarity unchanged."""
    if policy.strict:
        return t

    def term(x: Term | None) -> Term | None:
        if x is None or x.text is None:
            return x
        return Term(canonicalize_text(x.text, policy))

    return replace(
        t,
        aspect=term(t.aspect),
        opinion=term(t.opinion),
        category=None if t.category is None else canonicalize_text(t.category, policy),
    )


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    span: tuple[int, int] | None = None
    detail: str = ""


@dataclass(frozen=True)
class ParseOutcome:
    tuples: tuple[SentimentTuple, ...]
    diagnostics: tuple[Diagnostic, ...]


@dataclass
class _RawTuple:
    elements: list[str]
    quoted: list[str]  # the quote char per element, "" when bare
    span: tuple[int, int]


@dataclass
class _ListScan:
    """Result of attempting to read a tuple list starting at one '['."""

    tuples: list[_RawTuple] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    end: int = -1          # index just past the closing ']' (or scan end)
    closed: bool = False   # saw the matching ']'
    ok: bool = False       # candidate counts as a tuple list


def _scan_quoted(s: str, i: int) -> tuple[str, int] | None:
    """Reads a quoted element starting at the quote char ``s[i]``.

    The delimiter closes only when followed by optional whitespace and ','
    or ')', so apostrophes and stray quotes inside terms survive. Returns
    (content, index past closing quote), or None if unterminated.
    """
    quote = s[i]
    j = i + 1
    n = len(s)
    while j < n:
        if s[j] == quote:
            k = j + 1
            while k < n and s[k].isspace():
                k += 1
            if k >= n or s[k] in ",)":
                return s[i + 1 : j], j + 1
        j += 1
    return None


def _scan_tuple(s: str, i: int, diags: list[Diagnostic]) -> tuple[_RawTuple | None, int]:
    """Reads one parenthesized tuple starting at ``s[i] == '('``.

    Returns (raw tuple, next index); raw tuple is None when scanning failed,
    in which case next index points at where a resync should start.
    """
    start = i
    i += 1
    n = len(s)
    elements: list[str] = []
    quoted: list[str] = []
    while True:
        while i < n and s[i].isspace():
            i += 1
        if i >= n:
            diags.append(Diagnostic(MALFORMED_TUPLE, (start, n), "unterminated tuple"))
            return None, n
        c = s[i]
        if c == ")":
            return _RawTuple(elements, quoted, (start, i + 1)), i + 1
        if c in "\"'":
            got = _scan_quoted(s, i)
            if got is None:
                diags.append(Diagnostic(MALFORMED_TUPLE, (start, n), "unterminated quoted element"))
                return None, n
            value, i = got
            elements.append(value)
            quoted.append(c)
        else:
            j = i
            while j < n and s[j] not in ",)":
                j += 1
            if j >= n:
                diags.append(Diagnostic(MALFORMED_TUPLE, (start, n), "unterminated tuple"))
                return None, n
            bare = s[i:j].strip()
            if not bare:
                diags.append(Diagnostic(MALFORMED_TUPLE, (start, j), "empty element slot"))
                return None, j
            elements.append(bare)
            quoted.append("")
            i = j
        while i < n and s[i].isspace():
            i += 1
        if i >= n:
            diags.append(Diagnostic(MALFORMED_TUPLE, (start, n), "unterminated tuple"))
            return None, n
        if s[i] == ",":
            i += 1
        elif s[i] != ")":
            diags.append(Diagnostic(MALFORMED_TUPLE, (start, i), f"unexpected {s[i]!r} in tuple"))
            return None, i


def _scan_list(s: str, start: int) -> _ListScan:
    """Attempts to read a tuple list at ``s[start] == '['``.

    Fails fast on junk before the first tuple (so prose brackets are skipped
    cheaply); after at least one tuple it recovers by resyncing to the next
    '(' or ']'.
    """
    out = _ListScan()
    i = start + 1
    n = len(s)
    while True:
        while i < n and s[i].isspace():
            i += 1
        if i >= n:
            out.diagnostics.append(Diagnostic(UNBALANCED_BRACKETS, (start, n), "list never closed"))
            out.end = n
            out.ok = bool(out.tuples)
            return out
        c = s[i]
        if c == "]":
            out.end = i + 1
            out.closed = True
            out.ok = True
            return out
        if c == "(":
            raw, i = _scan_tuple(s, i, out.diagnostics)
            if raw is not None:
                out.tuples.append(raw)
            elif not out.tuples:
                out.end = i
                return out  # junk-leading candidate: not a tuple list
            else:
                # resync after a malformed tuple
                while i < n and s[i] not in "(]":
                    i += 1
            # separator between tuples
            while i < n and s[i].isspace():
                i += 1
            if i < n and s[i] == ",":
                i += 1
        elif not out.tuples:
            out.end = i
            return out
        else:
            j = i
            while j < n and s[j] not in "(]":
                j += 1
            out.diagnostics.append(Diagnostic(MALFORMED_TUPLE, (i, j), "unexpected content in list"))
            i = j


def _realize_tuples(
    raw_tuples: list[_RawTuple],
    schema: TaskSchema,
    diags: list[Diagnostic],
) -> list[SentimentTuple]:
    tuples: list[SentimentTuple] = []
    seen: set[SentimentTuple] = set()
    for idx, raw in enumerate(raw_tuples):
        if len(raw.elements) != schema.arity:
            diags.append(
                Diagnostic(BAD_ARITY, raw.span, f"tuple {idx}: got {len(raw.elements)} elements, schema has {schema.arity}")
            )
            continue
        if not all(raw.quoted):
            diags.append(Diagnostic(UNQUOTED_ELEMENT, raw.span, f"tuple {idx}: unquoted element accepted"))
        kw: dict = {}
        ok = True
        for name, value in zip(schema.wire_order, raw.elements):
            stripped = value.strip()
            if stripped.lower() == IMPLICIT_MARKER:
                if name in ("aspect", "opinion") and schema.implicit_allowed:
                    kw[name] = Term.implicit()
                else:
                    diags.append(Diagnostic(ILLEGAL_IMPLICIT, raw.span, f"tuple {idx}: {IMPLICIT_MARKER!r} {name} not allowed"))
                    ok = False
                    break
                continue
            if not stripped:
                diags.append(Diagnostic(EMPTY_ELEMENT, raw.span, f"tuple {idx}: empty {name}"))
                ok = False
                break
            if name in ("aspect", "opinion"):
                kw[name] = Term.explicit(value)
            elif name == "category":
                kw[name] = value
            else:  # polarity
                try:
                    kw[name] = Polarity.parse(stripped)
                except ValueError:
                    diags.append(Diagnostic(UNKNOWN_POLARITY, raw.span, f"tuple {idx}: {stripped!r}"))
                    ok = False
                    break
        if not ok:
            continue
        t = SentimentTuple(**kw)
        if t in seen:
            diags.append(Diagnostic(DUPLICATE_TUPLE, raw.span, f"tuple {idx} repeats an earlier tuple"))
            continue
        seen.add(t)
        tuples.append(t)
    return tuples


def _parse_tolerant(text: str, schema: TaskSchema) -> ParseOutcome:
    diags: list[Diagnostic] = []
    chosen: _ListScan | None = None
    chosen_start = -1
    pos = text.find("[")
    while pos != -1:
        scan = _scan_list(text, pos)
        if scan.ok:
            chosen = scan
            chosen_start = pos
            break
        pos = text.find("[", pos + 1)
    if chosen is None:
        diags.append(Diagnostic(NO_TUPLE_LIST, None, "no bracketed tuple list found"))
        return ParseOutcome((), tuple(diags))

    leading = text[:chosen_start]
    if leading.strip() and leading.strip() != EXPECTED_PREFIX.strip():
        diags.append(Diagnostic(EXTRANEOUS_TEXT, (0, chosen_start), "text before tuple list"))
    trailing = text[chosen.end :]
    if trailing.strip():
        diags.append(Diagnostic(EXTRANEOUS_TEXT, (chosen.end, len(text)), "text after tuple list"))

    diags.extend(chosen.diagnostics)
    tuples = _realize_tuples(chosen.tuples, schema, diags)
    return ParseOutcome(tuple(tuples), tuple(diags))


def _parse_strict(text: str, schema: TaskSchema) -> ParseOutcome:
    body = text.rstrip()
    if not body.startswith(EXPECTED_PREFIX):
        raise ParseError(NO_TUPLE_LIST, "output must start with the expected prefix")
    rest = body[len(EXPECTED_PREFIX) :]
    if not rest.startswith("["):
        raise ParseError(NO_TUPLE_LIST, "expected '[' after prefix")
    scan = _scan_list(rest, 0)
    if not scan.closed:
        raise ParseError(UNBALANCED_BRACKETS, "tuple list never closed")
    if scan.diagnostics:
        raise ParseError(MALFORMED_TUPLE, scan.diagnostics[0].detail)
    if rest[scan.end :].strip():
        raise ParseError(NO_TUPLE_LIST, "trailing text after tuple list")
    for raw in scan.tuples:
        if any(q != '"' for q in raw.quoted):
            raise ParseError(MALFORMED_TUPLE, "strict mode requires double-quoted elements")
    diags: list[Diagnostic] = []
    tuples = _realize_tuples(scan.tuples, schema, diags)
    return ParseOutcome(tuple(tuples), tuple(diags))


def parse_response(text: str, schema: TaskSchema, mode: str = "tolerant") -> ParseOutcome:
    """Parses raw model output into tuples for the given task.

    ``mode`` is "tolerant" (total: any byte string yields an outcome) or
    "strict" (raises ParseError on structural deviations).
    """
    if mode == "strict":
        return _parse_strict(text, schema)
    if mode == "tolerant":
        return _parse_tolerant(text, schema)
    raise ValueError(f"unknown parse mode: {mode!r}")


_UNREPRESENTABLE = re.compile(r"\"\s*[,)]")


def wire_representable(value: str) -> bool:
    """Whether an element string survives the quoted-tuple wire format."""
    return not _UNREPRESENTABLE.search(value)
