"""Completion-masked low-rank-adapter fine-tuning on exported prompt/completion pairs."""

__version__ = "0.1.0"

from .config import TrainConfig, read_manifest, write_manifest
from .lora import LoRALinear, adapter_state_dict, attach_adapters, load_adapter_state
from .masking import MaskedExample, OverlongExample, build_masked_dataset, read_pairs
from .train import collate, evaluate_loss, masked_loss, train

__all__ = [
    "LoRALinear",
    "MaskedExample",
    "OverlongExample",
    "TrainConfig",
    "adapter_state_dict",
    "attach_adapters",
    "build_masked_dataset",
    "collate",
    "evaluate_loss",
    "load_adapter_state",
    "masked_loss",
    "read_manifest",
    "read_pairs",
    "train",
    "write_manifest",
]
