"""CLI: fine-tune adapters on exported prompt/completion pairs."""

from __future__ import annotations

import argparse
import json
import logging
import sys


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="absa-finetune", description=__doc__)
    parser.add_argument("--pairs", required=True, help="training pairs (JSONL with prompt/completion)")
    parser.add_argument("--val-pairs", required=True, help="validation pairs (JSONL)")
    parser.add_argument("--base-model", required=True, help="backbone model id or path")
    parser.add_argument("--out", required=True, help="output directory for adapter + manifest")
    parser.add_argument("--config", default=None, help="JSON file overriding recipe defaults")
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--batch-size", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")

    from .config import TrainConfig
    from .masking import build_masked_dataset, read_pairs
    from .train import train

    raw = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    raw["base_model"] = args.base_model
    if args.epochs is not None:
        raw["max_epochs"] = args.epochs
    if args.batch_size is not None:
        raw["batch_size"] = args.batch_size
    if args.seed is not None:
        raw["seed"] = args.seed
    cfg = TrainConfig.from_dict(raw)

    from transformers import AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(cfg.base_model, use_fast=True)
    train_data = build_masked_dataset(
        read_pairs(args.pairs), tokenizer, cfg.context_length, cfg.truncation
    )
    val_data = build_masked_dataset(
        read_pairs(args.val_pairs), tokenizer, cfg.context_length, cfg.truncation
    )
    manifest = train(cfg, train_data, val_data, args.out,
                     pad_token_id=tokenizer.pad_token_id or 0)
    print(json.dumps({"best_epoch": manifest["best_epoch"], "best_val_loss": manifest["best_val_loss"]}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
