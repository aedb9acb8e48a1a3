import subprocess
import sys

import pytest
import torch


class ToyTokenizer:
    """Whitespace tokenizer with a corpus-built vocabulary; id 0 is padding."""

    def __init__(self, corpus):
        self.vocab = {"<pad>": 0}
        for text in corpus:
            for word in text.split():
                self.vocab.setdefault(word, len(self.vocab))

    def encode(self, text):
        return [self.vocab[w] for w in text.split()]

    @property
    def vocab_size(self):
        return len(self.vocab)


def tiny_model(vocab_size, seed=0):
    from transformers import GPT2Config, GPT2LMHeadModel

    torch.manual_seed(seed)
    config = GPT2Config(
        vocab_size=vocab_size,
        n_positions=256,
        n_embd=32,
        n_layer=2,
        n_head=2,
        embd_pdrop=0.0,
        resid_pdrop=0.0,
        attn_pdrop=0.0,
    )
    return GPT2LMHeadModel(config)


@pytest.fixture(scope="session")
def toy_tokenizer_factory():
    return ToyTokenizer


@pytest.fixture(scope="session")
def tiny_model_factory():
    return tiny_model


@pytest.fixture(scope="session")
def exported_pairs_path(tmp_path_factory):
    """Training pairs produced through the evaluation harness's public CLI."""
    root = tmp_path_factory.mktemp("export")
    fixtures = root / "fixtures"
    subprocess.run(
        [sys.executable, "-m", "absa_eval.cli", "make-fixtures", "--out", str(fixtures)],
        check=True,
        capture_output=True,
    )
    out = root / "pairs.jsonl"
    subprocess.run(
        [
            sys.executable, "-m", "absa_eval.cli", "export-finetune",
            "--data", str(fixtures / "asqp-rest15"),
            "--task", "asqp",
            "--adapter", "sep-line",
            "--vocab", "restaurant",
            "--split", "train",
            "--out", str(out),
        ],
        check=True,
        capture_output=True,
    )
    return out
