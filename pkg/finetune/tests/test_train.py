import torch

from absa_finetune.config import TrainConfig
from absa_finetune.lora import adapter_state_dict, attach_adapters, load_adapter_state
from absa_finetune.masking import build_masked_dataset
from absa_finetune.train import collate, evaluate_loss, masked_loss, train

PAIRS = [
    (f"review number {i} reads well", f"Sentiment elements: answer {i % 4}")
    for i in range(16)
]
VAL_PAIRS = PAIRS[:4]


def build_toy(toy_tokenizer_factory, tiny_model_factory, seed=0):
    corpus = [p + " " + c for p, c in PAIRS]
    tok = toy_tokenizer_factory(corpus)
    model = tiny_model_factory(tok.vocab_size + 4, seed=seed)
    train_data = build_masked_dataset(PAIRS, tok, context_length=64)
    val_data = build_masked_dataset(VAL_PAIRS, tok, context_length=64)
    return tok, model, train_data, val_data


class TestLora:
    def test_attach_freezes_base(self, toy_tokenizer_factory, tiny_model_factory):
        _, model, _, _ = build_toy(toy_tokenizer_factory, tiny_model_factory)
        names = attach_adapters(model, r=4, alpha=16)
        assert names
        assert all(".h." in n for n in names)  # GPT-2 blocks live under transformer.h.<i>
        for pname, p in model.named_parameters():
            assert p.requires_grad == ("lora_" in pname)

    def test_zero_init_preserves_function(self, toy_tokenizer_factory, tiny_model_factory):
        _, model, train_data, _ = build_toy(toy_tokenizer_factory, tiny_model_factory)
        ids, mask = collate(train_data[:4])
        with torch.no_grad():
            before = masked_loss(model, ids, mask).item()
        attach_adapters(model, r=4, alpha=16)
        with torch.no_grad():
            after = masked_loss(model, ids, mask).item()
        assert abs(before - after) < 1e-5

    def test_adapter_state_round_trip(self, toy_tokenizer_factory, tiny_model_factory):
        _, model, train_data, _ = build_toy(toy_tokenizer_factory, tiny_model_factory)
        attach_adapters(model, r=4, alpha=16)
        state = adapter_state_dict(model)

        _, fresh, _, _ = build_toy(toy_tokenizer_factory, tiny_model_factory)
        attach_adapters(fresh, r=4, alpha=16)
        load_adapter_state(fresh, state)
        assert all(
            torch.equal(state[name], p)
            for name, p in fresh.named_parameters()
            if "lora_" in name
        )


class TestMaskedLoss:
    def test_padding_excluded(self, toy_tokenizer_factory, tiny_model_factory):
        _, model, train_data, _ = build_toy(toy_tokenizer_factory, tiny_model_factory)
        short = train_data[0]
        long = train_data[1]
        ids, mask = collate([short, long])
        with torch.no_grad():
            padded = masked_loss(model, ids, mask).item()
        # the same two examples collated alone, then token-weighted
        with torch.no_grad():
            la, ma = collate([short])
            lb, mb = collate([long])
            na = int(ma[:, 1:].sum())
            nb = int(mb[:, 1:].sum())
            separate = (
                masked_loss(model, la, ma).item() * na + masked_loss(model, lb, mb).item() * nb
            ) / (na + nb)
        assert abs(padded - separate) < 1e-5

    def test_all_prompt_batch_gives_zero(self, toy_tokenizer_factory, tiny_model_factory):
        tok = toy_tokenizer_factory(["just a prompt"])
        model = tiny_model_factory(tok.vocab_size + 4)
        data = build_masked_dataset([("just a prompt", "")], tok)
        ids, mask = collate(data)
        assert masked_loss(model, ids, mask).item() == 0.0


class TestTrain:
    def test_selects_min_val_loss_epoch(self, toy_tokenizer_factory, tiny_model_factory, tmp_path):
        _, model, train_data, val_data = build_toy(toy_tokenizer_factory, tiny_model_factory)
        cfg = TrainConfig(base_model="toy", lora_r=4, lora_alpha=16, max_epochs=3, batch_size=16, seed=1)
        manifest = train(cfg, train_data, val_data, tmp_path, model=model)
        assert len(manifest["epochs"]) == 3
        val_losses = [e["val_loss"] for e in manifest["epochs"]]
        assert manifest["best_epoch"] == val_losses.index(min(val_losses))
        assert (tmp_path / manifest["adapter_file"]).is_file()
        assert manifest["overrides"] == {"lora_r": 4, "max_epochs": 3}
        assert manifest["masking"] == "completion-only"

    def test_training_reduces_validation_loss(self, toy_tokenizer_factory, tiny_model_factory, tmp_path):
        _, model, train_data, val_data = build_toy(toy_tokenizer_factory, tiny_model_factory)
        before = evaluate_loss(model, val_data, batch_size=16)
        cfg = TrainConfig(base_model="toy", lora_r=8, lora_alpha=16, max_epochs=4, batch_size=16, seed=2)
        manifest = train(cfg, train_data, val_data, tmp_path, model=model)
        assert manifest["best_val_loss"] < before

    def test_same_seed_same_selection(self, toy_tokenizer_factory, tiny_model_factory, tmp_path):
        runs = []
        for attempt in range(2):
            _, model, train_data, val_data = build_toy(toy_tokenizer_factory, tiny_model_factory, seed=3)
            cfg = TrainConfig(base_model="toy", lora_r=4, max_epochs=3, batch_size=8, seed=5)
            manifest = train(cfg, train_data, val_data, tmp_path / str(attempt), model=model)
            runs.append(manifest)
        assert runs[0]["best_epoch"] == runs[1]["best_epoch"]
        assert runs[0]["epochs"] == runs[1]["epochs"]

    def test_exported_adapter_reproduces_best_val_loss(
        self, toy_tokenizer_factory, tiny_model_factory, tmp_path
    ):
        _, model, train_data, val_data = build_toy(toy_tokenizer_factory, tiny_model_factory, seed=4)
        cfg = TrainConfig(base_model="toy", lora_r=4, max_epochs=3, batch_size=16, seed=6)
        manifest = train(cfg, train_data, val_data, tmp_path, model=model)

        _, fresh, _, _ = build_toy(toy_tokenizer_factory, tiny_model_factory, seed=4)
        attach_adapters(fresh, r=4, alpha=16)
        load_adapter_state(fresh, torch.load(tmp_path / manifest["adapter_file"]))
        reproduced = evaluate_loss(fresh, val_data, batch_size=16)
        assert abs(reproduced - manifest["best_val_loss"]) < 1e-6
