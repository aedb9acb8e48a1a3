"""Training configuration and checkpoint manifests.

Defaults pin the full recipe: 4-bit NormalFloat quantization with double
quantization and bf16 compute, batch size 16, constant learning rate 2e-4,
AdamW, low-rank adapters (r=64, alpha=16) on all linear transformer-block
layers, up to 5 epochs with min-validation-loss checkpoint selection.
Any deviation from these defaults is recorded in the manifest.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class TrainConfig:
    base_model: str = ""
    quant_type: str = "nf4"
    double_quant: bool = True
    compute_dtype: str = "bf16"
    batch_size: int = 16
    learning_rate: float = 2e-4
    lr_schedule: str = "constant"
    optimizer: str = "adamw"
    lora_r: int = 64
    lora_alpha: int = 16
    lora_targets: str = "all-linear"
    max_epochs: int = 5
    selection: str = "min-val-loss"
    context_length: int = 2048
    truncation: str = "error"
    seed: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def overrides(self) -> dict:
        """Fields that deviate from the recipe defaults (base model and seed
        are experiment identity, not recipe knobs)."""
        defaults = TrainConfig()
        skip = {"base_model", "seed"}
        return {
            f.name: getattr(self, f.name)
            for f in dataclasses.fields(self)
            if f.name not in skip and getattr(self, f.name) != getattr(defaults, f.name)
        }


def write_manifest(manifest: dict, out_dir: str | Path) -> Path:
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_manifest(out_dir: str | Path) -> dict:
    return json.loads((Path(out_dir) / "manifest.json").read_text(encoding="utf-8"))
