"""Acceptance suite for the fine-tuning driver. Run with ``pytest -v -s``."""

import time
from contextlib import contextmanager

import torch

from absa_finetune.config import TrainConfig
from absa_finetune.masking import build_masked_dataset
from absa_finetune.train import collate, masked_loss, train


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"FAIL: {name}")
        raise
    print(f"PASS: {name}")


PAIRS = [
    (f"classify the review {i} carefully now", f"Sentiment elements: verdict {i % 3}")
    for i in range(16)
]


def test_mask_correctness_on_frozen_model(toy_tokenizer_factory, tiny_model_factory):
    with criterion("mask correctness: perturbing masked-out label tokens leaves the loss unchanged"):
        corpus = [p + " " + c for p, c in PAIRS]
        tok = toy_tokenizer_factory(corpus)
        model = tiny_model_factory(tok.vocab_size + 4, seed=11)
        model.eval()
        data = build_masked_dataset(PAIRS, tok, context_length=64)
        ids, mask = collate(data)
        with torch.no_grad():
            base = masked_loss(model, ids, mask).item()
            for trial in range(5):
                generator = torch.Generator().manual_seed(trial)
                noise = torch.randint(0, tok.vocab_size, ids.shape, generator=generator)
                perturbed = torch.where(mask.bool(), ids, noise)
                assert not torch.equal(perturbed, ids)
                loss = masked_loss(model, ids, mask, labels=perturbed).item()
                assert abs(loss - base) <= 1e-6, (loss, base)


def test_recipe_defaults_serialize_exactly():
    with criterion("recipe defaults: NF4 + double quant, bf16, batch 16, lr 2e-4, r=64, alpha=16, <=5 epochs"):
        d = TrainConfig().to_dict()
        assert d["quant_type"] == "nf4"
        assert d["double_quant"] is True
        assert d["compute_dtype"] == "bf16"
        assert d["batch_size"] == 16
        assert d["learning_rate"] == 2e-4
        assert d["lr_schedule"] == "constant"
        assert d["optimizer"] == "adamw"
        assert d["lora_r"] == 64
        assert d["lora_alpha"] == 16
        assert d["lora_targets"] == "all-linear"
        assert d["max_epochs"] == 5
        assert d["selection"] == "min-val-loss"
        assert TrainConfig.from_dict(d) == TrainConfig()


def test_smoke_finetune_sixteen_pairs(toy_tokenizer_factory, tiny_model_factory, tmp_path):
    with criterion("smoke fine-tune: 16 pairs complete with a loadable adapter inside the time budget"):
        corpus = [p + " " + c for p, c in PAIRS]
        tok = toy_tokenizer_factory(corpus)
        model = tiny_model_factory(tok.vocab_size + 4, seed=12)
        train_data = build_masked_dataset(PAIRS, tok, context_length=64)
        val_data = build_masked_dataset(PAIRS[:4], tok, context_length=64)
        cfg = TrainConfig(base_model="toy", lora_r=8, max_epochs=5, batch_size=16, seed=13)
        started = time.perf_counter()
        manifest = train(cfg, train_data, val_data, tmp_path, model=model)
        elapsed = time.perf_counter() - started
        assert elapsed < 1800, f"smoke run took {elapsed:.0f}s"
        assert manifest["train_pairs"] == 16
        assert len(manifest["epochs"]) == 5
        state = torch.load(tmp_path / manifest["adapter_file"])
        assert state and all("lora_" in k for k in state)
