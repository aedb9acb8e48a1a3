"""Completion-only loss masking.

Each (prompt, completion) pair becomes one token sequence whose loss mask is
0 over the prompt tokens and 1 over the completion tokens: the mask is a
contiguous suffix aligned to the completion boundary, so training loss is
computed only on the tokens the model is supposed to generate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence


class Tokenizer(Protocol):
    def encode(self, text: str) -> list[int]: ...


class OverlongExample(Exception):
    def __init__(self, index: int, length: int, context_length: int):
        self.index = index
        self.length = length
        super().__init__(f"pair {index}: {length} tokens exceeds context length {context_length}")


@dataclass
class MaskedExample:
    input_ids: list[int]
    loss_mask: list[int]
    degenerate: bool = False  # empty completion: nothing to learn from

    def __post_init__(self) -> None:
        assert len(self.input_ids) == len(self.loss_mask)

    @property
    def completion_tokens(self) -> int:
        return sum(self.loss_mask)

    def mask_is_contiguous_suffix(self) -> bool:
        first_one = self.loss_mask.index(1) if 1 in self.loss_mask else len(self.loss_mask)
        return all(v == 0 for v in self.loss_mask[:first_one]) and all(
            v == 1 for v in self.loss_mask[first_one:]
        )


def read_pairs(path: str | Path) -> list[tuple[str, str]]:
    """Reads exported JSON-lines pairs: one {"prompt": ..., "completion": ...} per line."""
    pairs = []
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        row = json.loads(line)
        try:
            pairs.append((row["prompt"], row["completion"]))
        except (KeyError, TypeError):
            raise ValueError(f"{path}:{line_no}: expected 'prompt' and 'completion' fields") from None
    return pairs


def build_masked_dataset(
    pairs: Sequence[tuple[str, str]],
    tokenizer: Tokenizer,
    context_length: int = 2048,
    truncation: str = "error",
) -> list[MaskedExample]:
    """Tokenizes pairs so the loss mask covers exactly the completion tokens.

    ``truncation`` is "error" (raise OverlongExample) or "truncate-completion"
    (drop completion tokens from the tail; a prompt that alone exceeds the
    context still raises).
    """
    if truncation not in ("error", "truncate-completion"):
        raise ValueError(f"unknown truncation policy {truncation!r}")
    out = []
    for index, (prompt, completion) in enumerate(pairs):
        prompt_ids = list(tokenizer.encode(prompt))
        completion_ids = list(tokenizer.encode(completion))
        total = len(prompt_ids) + len(completion_ids)
        if total > context_length:
            if truncation == "error" or len(prompt_ids) >= context_length:
                raise OverlongExample(index, total, context_length)
            completion_ids = completion_ids[: context_length - len(prompt_ids)]
        out.append(
            MaskedExample(
                input_ids=prompt_ids + completion_ids,
                loss_mask=[0] * len(prompt_ids) + [1] * len(completion_ids),
                degenerate=not completion_ids,
            )
        )
    return out
