"""Command-line interface.

Exit codes: 0 success, 1 config error, 2 data error, 3 endpoint error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .analysis import sample_for_review
from .errors import ConfigError, DataError, EndpointError
from .ingest import load_dataset
from .orchestrator import (
    RunConfig,
    report_table,
    resolve_vocabulary,
    run_eval,
    stats_table,
)
from .prompts import DEFAULT_FEW_SHOT_K, build_instruction, build_package
from .types import Task, schema_for


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset directory with train/dev/test files")
    p.add_argument("--task", required=True, choices=[t.value for t in Task])
    p.add_argument("--adapter", default="canonical-jsonl", help="canonical-jsonl | sep-line | acos-tsv")
    p.add_argument("--vocab", default=None, help="'restaurant', 'derived', or a category file")
    p.add_argument("--name", default=None, help="dataset name (defaults to the directory name)")


def _load_from_args(args) -> tuple:
    task = Task.parse(args.task)
    schema = schema_for(task)
    name = args.name or Path(args.data).name
    vocab = resolve_vocabulary(args.vocab, task)
    bundle = load_dataset(args.data, args.adapter, schema, name, vocab)
    return bundle, schema


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="YAML run config")
    p.add_argument("--data", dest="data_dir", default=None, help="override dataset path")
    p.add_argument("--dataset-name", default=None)
    p.add_argument("--adapter", default=None)
    p.add_argument("--task", default=None)
    p.add_argument("--vocab", dest="vocabulary", default=None)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--method", default=None)
    p.add_argument("--endpoint-url", dest="base_url", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--max-tokens", type=int, default=None)
    p.add_argument("--output", dest="output_dir", default=None)
    p.add_argument("--cache-dir", default=None)


def _config_from_args(args, offline: bool | None = None) -> RunConfig:
    keys = (
        "data_dir", "dataset_name", "adapter", "task", "vocabulary", "shots",
        "runs", "method", "base_url", "model", "max_tokens", "output_dir", "cache_dir",
    )
    overrides = {k: getattr(args, k) for k in keys}
    if offline is not None:
        overrides["offline"] = offline
    return RunConfig.from_file(args.config, **overrides)


def cmd_stats(args) -> int:
    bundle, _ = _load_from_args(args)
    print(stats_table(bundle), end="")
    return 0


def cmd_prompt(args) -> int:
    task = Task.parse(args.task)
    schema = schema_for(task)
    if args.shots and not args.data:
        raise ConfigError("--shots needs --data to draw demonstrations from a train split")
    if args.data:
        bundle, _ = _load_from_args(args)
        vocab = bundle.categories
        if args.shots:
            pkg = build_package(schema, vocab, bundle.train, args.shots, args.query or "<input sentence>")
            print(pkg.render())
            return 0
    else:
        vocab = resolve_vocabulary(args.vocab or "restaurant", task)
    print(build_instruction(schema, vocab))
    return 0


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    report = run_eval(cfg)
    print(report.to_text(), end="")
    print(f"report written to {Path(cfg.output_dir) / 'report.json'}")
    return 0


def cmd_score(args) -> int:
    cfg = _config_from_args(args, offline=True)
    report = run_eval(cfg)
    print(report.to_text(), end="")
    return 0


def cmd_analyze(args) -> int:
    out_dir = Path(args.run_output)
    records_path = out_dir / "error_records.jsonl"
    if not records_path.is_file():
        raise DataError(f"{records_path} not found; run an evaluation first")
    records = [json.loads(line) for line in records_path.read_text(encoding="utf-8").splitlines() if line]
    print(f"{len(records)} error records")
    by_kind: dict[str, int] = {}
    for r in records:
        by_kind[r["kind"]] = by_kind.get(r["kind"], 0) + 1
    for kind, n in sorted(by_kind.items()):
        print(f"  {kind}: {n}")
    hist_path = out_dir / "error_histogram.csv"
    if hist_path.is_file():
        print(hist_path.read_text(encoding="utf-8"), end="")
    labels = ["positive", "negative", "neutral"]
    confusion = {g: {p: 0 for p in labels} for g in labels}
    for r in records:
        if r["pred"] and r["gold"] and "polarity" in r["differing"]:
            confusion[r["gold"]["polarity"]][r["pred"]["polarity"]] += 1
    if any(v for row in confusion.values() for v in row.values()):
        print("polarity confusion (gold -> predicted):")
        for g in labels:
            cells = "  ".join(f"{p}={confusion[g][p]}" for p in labels if p != g)
            print(f"  {g}: {cells}")
    if args.sample:
        refs = sorted({r["sentence"] for r in records})
        n = min(args.sample, len(refs))
        sample = sample_for_review(refs, n, args.seed)
        sample_path = out_dir / "review_sample.json"
        sample_path.write_text(json.dumps(sample, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        print(f"{n} sentences sampled for review -> {sample_path}")
    return 0


def cmd_report(args) -> int:
    reports = []
    for path in args.reports:
        reports.append(json.loads(Path(path).read_text(encoding="utf-8")))
    print(report_table(reports), end="")
    return 0


def cmd_export_finetune(args) -> int:
    from .prompts import build_finetune_pairs

    bundle, _ = _load_from_args(args)
    pairs = build_finetune_pairs(bundle, args.split)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        for prompt, completion in pairs:
            fh.write(json.dumps({"prompt": prompt, "completion": completion}, ensure_ascii=False) + "\n")
    print(f"{len(pairs)} pairs -> {out}")
    return 0


def cmd_make_fixtures(args) -> int:
    from .synth import write_all

    dirs = write_all(args.out)
    for name, path in dirs.items():
        print(f"{name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="absa-eval", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="dataset split statistics")
    _add_dataset_args(p)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("prompt", help="print the rendered prompt for a task")
    p.add_argument("--task", required=True, choices=[t.value for t in Task])
    p.add_argument("--vocab", default=None)
    p.add_argument("--data", default=None, help="dataset directory (for vocabulary and demonstrations)")
    p.add_argument("--adapter", default="canonical-jsonl")
    p.add_argument("--name", default=None)
    p.add_argument(
        "--shots", type=int, nargs="?", const=DEFAULT_FEW_SHOT_K, default=0,
        help=f"demonstration count; bare --shots means {DEFAULT_FEW_SHOT_K}",
    )
    p.add_argument("--query", default=None)
    p.set_defaults(fn=cmd_prompt)

    p = sub.add_parser("run", help="run an evaluation against an endpoint")
    _add_config_args(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("score", help="re-score from cached completions (no network)")
    _add_config_args(p)
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("analyze", help="summarize error records of a finished run")
    p.add_argument("--run-output", required=True, help="output directory of a finished run")
    p.add_argument("--sample", type=int, default=0, help="also sample N sentences for manual review")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("report", help="tabulate one or more report.json files")
    p.add_argument("reports", nargs="+")
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("export-finetune", help="emit prompt/completion training pairs")
    _add_dataset_args(p)
    p.add_argument("--split", default="train", choices=["train", "dev", "test"])
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_export_finetune)

    p = sub.add_parser("make-fixtures", help="write synthetic benchmark-shaped datasets")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_make_fixtures)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except EndpointError as e:
        print(f"endpoint error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
