import json

import yaml

from absa_eval.cli import main
from absa_eval.mock_endpoint import MockEndpoint, echo_gold_responder


def write_config(path, fixtures_root, name, url, **extra):
    from absa_eval.synth import DATASET_SPECS

    ds = DATASET_SPECS[name]
    cfg = {
        "dataset": {
            "name": name,
            "path": str(fixtures_root / name),
            "adapter": ds.adapter,
            "task": ds.task.value,
            "vocabulary": "restaurant" if ds.domain == "restaurant" else None,
        },
        "endpoint": {"base_url": url, "model": "mock-model", "max_retries": 1, "max_in_flight": 8},
        "runs": 1,
        "shots": 0,
    }
    cfg.update(extra)
    path.write_text(yaml.safe_dump(cfg), encoding="utf-8")
    return path


def test_stats_subcommand(fixtures_root, capsys):
    rc = main(
        [
            "stats",
            "--data", str(fixtures_root / "asqp-rest15"),
            "--task", "asqp",
            "--adapter", "sep-line",
            "--vocab", "restaurant",
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert "834" in out and "1354" in out


def test_stats_bad_data_dir_exit_2(tmp_path, capsys):
    rc = main(["stats", "--data", str(tmp_path / "nope"), "--task", "asqp", "--adapter", "sep-line"])
    assert rc == 2


def test_prompt_subcommand(capsys):
    rc = main(["prompt", "--task", "tasd", "--vocab", "restaurant"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "Triplets with objective sentiment polarity should be ignored." in out


def test_prompt_bad_vocab_exit_1(capsys):
    rc = main(["prompt", "--task", "tasd", "--vocab", "/nonexistent/vocab.txt"])
    assert rc == 1


def test_run_score_analyze_report_cycle(fixtures_root, tmp_path, bundles, capsys):
    bundle = bundles["aste-rest15"]
    with MockEndpoint(echo_gold_responder(bundle)) as ep:
        cfg_path = write_config(tmp_path / "exp.yaml", fixtures_root, "aste-rest15", ep.base_url)
        out_dir = tmp_path / "out"
        rc = main(["run", "--config", str(cfg_path), "--output", str(out_dir)])
        assert rc == 0
        assert "100.00" in capsys.readouterr().out

    # offline re-score from cache (endpoint is gone now)
    rc = main(["score", "--config", str(cfg_path), "--output", str(out_dir)])
    assert rc == 0
    assert "100.00" in capsys.readouterr().out

    rc = main(["analyze", "--run-output", str(out_dir), "--sample", "5"])
    assert rc == 0
    assert "error records" in capsys.readouterr().out

    rc = main(["report", str(out_dir / "report.json")])
    assert rc == 0
    table = capsys.readouterr().out
    assert "aste-rest15" in table and "100.00" in table


def test_run_unreachable_endpoint_exit_3(fixtures_root, tmp_path, capsys):
    cfg_path = write_config(
        tmp_path / "exp.yaml", fixtures_root, "aste-rest15", "http://127.0.0.1:9/v1",
        endpoint={"base_url": "http://127.0.0.1:9/v1", "model": "mock-model", "max_retries": 0, "max_in_flight": 8},
    )
    rc = main(["run", "--config", str(cfg_path), "--output", str(tmp_path / "out")])
    assert rc == 3


def test_run_missing_config_exit_1(tmp_path):
    rc = main(["run", "--config", str(tmp_path / "nope.yaml")])
    assert rc == 1


def test_export_finetune(fixtures_root, tmp_path, capsys):
    out = tmp_path / "pairs.jsonl"
    rc = main(
        [
            "export-finetune",
            "--data", str(fixtures_root / "tasd-rest15"),
            "--task", "tasd",
            "--adapter", "sep-line",
            "--vocab", "restaurant",
            "--split", "dev",
            "--out", str(out),
        ]
    )
    assert rc == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(rows) == 10
    assert set(rows[0]) == {"prompt", "completion"}
    assert rows[0]["completion"].startswith("Sentiment elements: ")


def test_make_fixtures(tmp_path, capsys):
    rc = main(["make-fixtures", "--out", str(tmp_path / "fx")])
    assert rc == 0
    assert (tmp_path / "fx" / "acos-lap" / "train.tsv").is_file()
