"""Minimal low-rank adapters over frozen base projections.

Wraps every linear projection inside the repeated transformer blocks
(both torch.nn.Linear and the Conv1D used by GPT-2-style models) with
``base(x) + (alpha/r) * B(A(x))``; A is Kaiming-initialized, B starts at
zero so training begins at the base model's function.
"""

from __future__ import annotations

import math
import re

import torch
from torch import nn

try:  # Conv1D is the projection type in GPT-2-style transformers
    from transformers.pytorch_utils import Conv1D
except ImportError:  # pragma: no cover
    Conv1D = ()


def _features(module: nn.Module) -> tuple[int, int]:
    if isinstance(module, nn.Linear):
        return module.in_features, module.out_features
    # Conv1D weight is (in, out)
    return module.weight.shape[0], module.weight.shape[1]


class LoRALinear(nn.Module):
    def __init__(self, base: nn.Module, r: int, alpha: int):
        super().__init__()
        if r < 1:
            raise ValueError("adapter rank must be >= 1")
        in_features, out_features = _features(base)
        self.base = base
        self.scale = alpha / r
        self.lora_a = nn.Parameter(torch.empty(r, in_features))
        self.lora_b = nn.Parameter(torch.zeros(out_features, r))
        nn.init.kaiming_uniform_(self.lora_a, a=math.sqrt(5))
        for p in self.base.parameters():
            p.requires_grad_(False)

    def forward(self, x):
        delta = nn.functional.linear(nn.functional.linear(x, self.lora_a), self.lora_b)
        return self.base(x) + self.scale * delta


_BLOCK_INDEX = re.compile(r"\.\d+\.")


def _in_transformer_block(qualified_name: str) -> bool:
    # repeated blocks show up as a numeric path component (h.0., layers.3., ...)
    return bool(_BLOCK_INDEX.search("." + qualified_name + "."))


def attach_adapters(model: nn.Module, r: int, alpha: int) -> list[str]:
    """Replaces all block-level linear projections with adapted ones and
    freezes every non-adapter parameter. Returns the wrapped module names."""
    targets = []
    linear_types = (nn.Linear, Conv1D) if Conv1D else (nn.Linear,)
    for name, module in model.named_modules():
        if isinstance(module, linear_types) and _in_transformer_block(name):
            targets.append(name)
    if not targets:
        raise ValueError("no linear transformer-block layers found to adapt")
    for name in targets:
        parent = model.get_submodule(name.rsplit(".", 1)[0]) if "." in name else model
        attr = name.rsplit(".", 1)[-1]
        setattr(parent, attr, LoRALinear(getattr(parent, attr), r, alpha))
    for pname, param in model.named_parameters():
        if "lora_" not in pname:
            param.requires_grad_(False)
    return targets


def adapter_state_dict(model: nn.Module) -> dict[str, torch.Tensor]:
    return {name: p.detach().clone() for name, p in model.named_parameters() if "lora_" in name}


def load_adapter_state(model: nn.Module, state: dict[str, torch.Tensor]) -> None:
    own = {name: p for name, p in model.named_parameters() if "lora_" in name}
    if set(own) != set(state):
        raise ValueError("adapter state does not match the model's adapted layers")
    with torch.no_grad():
        for name, tensor in state.items():
            own[name].copy_(tensor)
