"""Training loop: completion-masked loss, per-epoch validation, and
min-validation-loss checkpoint selection with a JSON manifest.
"""

from __future__ import annotations

import logging
import random
from pathlib import Path
from typing import Sequence

import torch
from torch import nn

from .config import TrainConfig, write_manifest
from .lora import adapter_state_dict, attach_adapters
from .masking import MaskedExample

log = logging.getLogger(__name__)

ADAPTER_FILE = "adapter-best.pt"


def collate(batch: Sequence[MaskedExample], pad_token_id: int = 0) -> tuple[torch.Tensor, torch.Tensor]:
    width = max(len(ex.input_ids) for ex in batch)
    ids = torch.full((len(batch), width), pad_token_id, dtype=torch.long)
    mask = torch.zeros((len(batch), width), dtype=torch.long)
    for i, ex in enumerate(batch):
        ids[i, : len(ex.input_ids)] = torch.tensor(ex.input_ids, dtype=torch.long)
        mask[i, : len(ex.loss_mask)] = torch.tensor(ex.loss_mask, dtype=torch.long)
    return ids, mask


def masked_loss(
    model: nn.Module,
    input_ids: torch.Tensor,
    loss_mask: torch.Tensor,
    labels: torch.Tensor | None = None,
) -> torch.Tensor:
    """Mean cross-entropy over completion-token targets only.

    ``labels`` defaults to the inputs; label entries at masked-out (prompt or
    padding) positions never contribute to the loss.
    """
    if labels is None:
        labels = input_ids
    out = model(input_ids)
    logits = getattr(out, "logits", out)
    shift_logits = logits[:, :-1, :]
    shift_labels = labels[:, 1:]
    target_mask = loss_mask[:, 1:].bool()
    if not target_mask.any():
        return torch.zeros((), dtype=logits.dtype)
    per_token = nn.functional.cross_entropy(
        shift_logits.reshape(-1, shift_logits.size(-1)),
        shift_labels.reshape(-1),
        reduction="none",
    )
    selected = per_token[target_mask.reshape(-1)]
    return selected.mean()


def _epoch_batches(data, batch_size, rng):
    order = list(range(len(data)))
    rng.shuffle(order)
    for start in range(0, len(order), batch_size):
        yield [data[i] for i in order[start : start + batch_size]]


def evaluate_loss(model, data, batch_size, pad_token_id=0) -> float:
    model.eval()
    total = 0.0
    count = 0
    with torch.no_grad():
        for start in range(0, len(data), batch_size):
            batch = data[start : start + batch_size]
            ids, mask = collate(batch, pad_token_id)
            tokens = int(mask[:, 1:].sum())
            if tokens == 0:
                continue
            total += float(masked_loss(model, ids, mask)) * tokens
            count += tokens
    return total / count if count else 0.0


def load_base_model(cfg: TrainConfig):
    """Loads the backbone, quantized when the 4-bit stack is available.

    Returns (model, runtime_overrides); the recipe's quantization settings are
    recorded as disabled when bitsandbytes/GPU support is absent.
    """
    from transformers import AutoModelForCausalLM

    runtime_overrides: dict = {}
    try:
        from transformers import BitsAndBytesConfig

        quant = BitsAndBytesConfig(
            load_in_4bit=True,
            bnb_4bit_quant_type=cfg.quant_type,
            bnb_4bit_use_double_quant=cfg.double_quant,
            bnb_4bit_compute_dtype=torch.bfloat16,
        )
        model = AutoModelForCausalLM.from_pretrained(cfg.base_model, quantization_config=quant)
    except Exception as e:  # quantization stack unavailable: record and fall back
        log.warning("4-bit quantized load unavailable (%s); loading unquantized", e)
        runtime_overrides["quantization"] = "disabled"
        model = AutoModelForCausalLM.from_pretrained(cfg.base_model)
    return model, runtime_overrides


def train(
    cfg: TrainConfig,
    train_data: Sequence[MaskedExample],
    val_data: Sequence[MaskedExample],
    out_dir: str | Path,
    model: nn.Module | None = None,
    pad_token_id: int = 0,
) -> dict:
    """Fine-tunes adapters for up to cfg.max_epochs and exports the epoch with
    the lowest validation loss. Returns the manifest (also written to disk)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    runtime_overrides: dict = {}
    if model is None:
        model, runtime_overrides = load_base_model(cfg)

    torch.manual_seed(cfg.seed)
    adapted = attach_adapters(model, cfg.lora_r, cfg.lora_alpha)
    trainable = [p for p in model.parameters() if p.requires_grad]
    optimizer = torch.optim.AdamW(trainable, lr=cfg.learning_rate)

    usable = [ex for ex in train_data if not ex.degenerate]
    degenerate = len(train_data) - len(usable)
    if degenerate:
        log.warning("%d degenerate pairs (empty completion) excluded from training", degenerate)

    epochs = []
    best_epoch = -1
    best_val = float("inf")
    for epoch in range(cfg.max_epochs):
        model.train()
        rng = random.Random(cfg.seed * 100003 + epoch)
        total = 0.0
        count = 0
        for batch in _epoch_batches(usable, cfg.batch_size, rng):
            ids, mask = collate(batch, pad_token_id)
            loss = masked_loss(model, ids, mask)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            tokens = int(mask[:, 1:].sum())
            total += loss.detach().item() * tokens
            count += tokens
        train_loss = total / count if count else 0.0
        val_loss = evaluate_loss(model, val_data, cfg.batch_size, pad_token_id)
        epochs.append({"epoch": epoch, "train_loss": train_loss, "val_loss": val_loss})
        log.info("epoch %d: train %.4f val %.4f", epoch, train_loss, val_loss)
        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            torch.save(adapter_state_dict(model), out_dir / ADAPTER_FILE)

    manifest = {
        "config": cfg.to_dict(),
        "overrides": cfg.overrides(),
        "runtime_overrides": runtime_overrides,
        "masking": "completion-only",
        "adapted_modules": adapted,
        "train_pairs": len(train_data),
        "degenerate_pairs": degenerate,
        "epochs": epochs,
        "best_epoch": best_epoch,
        "best_val_loss": best_val,
        "adapter_file": ADAPTER_FILE,
    }
    write_manifest(manifest, out_dir)
    return manifest
