"""End-to-end evaluation runs: load -> prompt -> complete -> parse -> score
-> analyze -> report.

A run is described by one declarative YAML config (overridable by CLI
flags). All artifacts land under the configured output directory; responses
are cached content-addressed, so re-running or offline re-scoring replays a
frozen experiment and reproduces the report byte-identically. The report's
config echo carries only experiment-semantic fields (no local paths, URLs,
or timestamps) for exactly that reason.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import yaml

from . import __version__
from .analysis import align_errors, error_histogram, write_error_records, write_histogram_csv
from .client import BatchItemError, CompletionClient, EndpointConfig, apply_env_overrides
from .errors import ConfigError, EndpointError, MixedPolicy
from .ingest import RESTAURANT_CATEGORIES, compute_stats, dataset_manifest, load_dataset
from .parsing import NO_TUPLE_LIST, CanonicalizationPolicy, canonicalize, parse_response
from .prompts import build_package
from .scoring import AggregateMetrics, RunMetrics, aggregate, percent, score_run, score_sentence
from .types import DatasetBundle, Task, schema_for

log = logging.getLogger(__name__)

#: The eight dataset/task combinations reported in the reference experiments.
CANONICAL_DATASETS: dict[str, Task] = {
    "asqp-rest15": Task.ASQP,
    "asqp-rest16": Task.ASQP,
    "acos-lap": Task.ACOS,
    "acos-rest": Task.ACOS,
    "tasd-rest15": Task.TASD,
    "tasd-rest16": Task.TASD,
    "aste-rest15": Task.ASTE,
    "aste-rest16": Task.ASTE,
}

DATASET_COLUMN_ORDER = tuple(CANONICAL_DATASETS)


def resolve_vocabulary(spec: str | Sequence[str] | None, task: Task) -> tuple[str, ...] | None:
    """"restaurant" -> the fixed prompt vocabulary; "derived"/None -> from train
    data; otherwise a path to a one-category-per-line file or an explicit list."""
    if spec is None or spec == "derived":
        return None
    if spec == "restaurant":
        return RESTAURANT_CATEGORIES
    if isinstance(spec, (list, tuple)):
        return tuple(spec)
    path = Path(spec)
    if path.is_file():
        lines = [ln.strip() for ln in path.read_text(encoding="utf-8").splitlines()]
        return tuple(ln for ln in lines if ln)
    raise ConfigError(f"vocabulary {spec!r} is neither 'restaurant', 'derived', nor a readable file")


@dataclass
class RunConfig:
    dataset_name: str
    data_dir: str
    adapter: str
    task: Task
    endpoint: EndpointConfig
    output_dir: str
    vocabulary: str | None = None
    shots: int = 0
    runs: int = 5
    seeds: tuple[int, ...] = ()
    method: str | None = None
    policy: CanonicalizationPolicy = field(default_factory=CanonicalizationPolicy)
    cache_dir: str | None = None
    offline: bool = False

    def __post_init__(self) -> None:
        self.task = Task.parse(self.task)
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.shots < 0:
            raise ConfigError("shots must be >= 0")
        if not self.seeds:
            self.seeds = tuple(range(self.runs))
        expected = CANONICAL_DATASETS.get(self.dataset_name)
        if expected is not None and expected is not self.task:
            raise ConfigError(
                f"dataset {self.dataset_name!r} is a {expected.value} benchmark, not {self.task.value}"
            )

    @property
    def method_label(self) -> str:
        return self.method or f"{self.endpoint.model} ({self.shots}-shot)"

    def resolved_cache_dir(self) -> Path:
        return Path(self.cache_dir) if self.cache_dir else Path(self.output_dir) / "cache"

    def echo(self) -> dict:
        """Experiment-semantic config echo for the report."""
        return {
            "dataset": self.dataset_name,
            "task": self.task.value,
            "adapter": self.adapter,
            "vocabulary": self.vocabulary or "derived",
            "shots": self.shots,
            "runs": self.runs,
            "seeds": list(self.seeds),
            "policy": {
                "lowercase": self.policy.lowercase,
                "collapse_whitespace": self.policy.collapse_whitespace,
                "strict": self.policy.strict,
            },
            "model": self.endpoint.model,
            "temperature": 0.0,
            "max_tokens": self.endpoint.max_tokens,
        }

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "RunConfig":
        try:
            raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        return cls.from_dict(raw, **overrides)

    @classmethod
    def from_dict(cls, raw: dict, **overrides) -> "RunConfig":
        overrides = {k: v for k, v in overrides.items() if v is not None}
        ds = dict(raw.get("dataset") or {})
        ep = dict(raw.get("endpoint") or {})
        pol = dict(raw.get("policy") or {})
        try:
            endpoint = EndpointConfig(
                base_url=overrides.pop("base_url", None) or ep.get("base_url", ""),
                model=overrides.pop("model", None) or ep.get("model", ""),
                max_tokens=int(overrides.pop("max_tokens", None) or ep.get("max_tokens", 512)),
                timeout=float(ep.get("timeout", 60.0)),
                max_retries=int(ep.get("max_retries", 3)),
                max_in_flight=int(ep.get("max_in_flight", 4)),
                auth_token=ep.get("auth_token"),
                backoff_base=float(ep.get("backoff_base", 0.5)),
            )
            endpoint = apply_env_overrides(endpoint)
            if not endpoint.base_url or not endpoint.model:
                raise ConfigError("endpoint.base_url and endpoint.model are required")
            seeds = raw.get("seeds") or ()
            return cls(
                dataset_name=overrides.pop("dataset_name", None) or ds.get("name", ""),
                data_dir=overrides.pop("data_dir", None) or ds.get("path", ""),
                adapter=overrides.pop("adapter", None) or ds.get("adapter", "canonical-jsonl"),
                task=Task.parse(overrides.pop("task", None) or ds.get("task", "")),
                vocabulary=overrides.pop("vocabulary", None) or ds.get("vocabulary"),
                shots=int(overrides.pop("shots", raw.get("shots", 0))),
                runs=int(overrides.pop("runs", raw.get("runs", 5))),
                seeds=tuple(int(s) for s in seeds),
                method=overrides.pop("method", None) or raw.get("method"),
                policy=CanonicalizationPolicy(
                    lowercase=bool(pol.get("lowercase", True)),
                    collapse_whitespace=bool(pol.get("collapse_whitespace", True)),
                    strict=bool(pol.get("strict", False)),
                ),
                endpoint=endpoint,
                output_dir=str(overrides.pop("output_dir", None) or raw.get("output_dir", "out")),
                cache_dir=overrides.pop("cache_dir", None) or raw.get("cache_dir"),
                offline=bool(overrides.pop("offline", raw.get("offline", False))),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad run config: {e}") from None


def load_bundle(cfg: RunConfig) -> DatasetBundle:
    vocab = resolve_vocabulary(cfg.vocabulary, cfg.task)
    return load_dataset(cfg.data_dir, cfg.adapter, schema_for(cfg.task), cfg.dataset_name, vocab)


@dataclass(frozen=True)
class EvalReport:
    method: str
    dataset: str
    task: str
    config: dict
    dataset_digest: str
    per_run: tuple[RunMetrics, ...]
    aggregate: AggregateMetrics
    histogram: dict[str, int]
    diagnostics: dict
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "tool": {"name": "absa-eval", "version": self.version},
            "method": self.method,
            "dataset": self.dataset,
            "task": self.task,
            "config": self.config,
            "dataset_digest": self.dataset_digest,
            "per_run": [
                {
                    "run": i,
                    "tp": r.tp,
                    "fp": r.fp,
                    "fn": r.fn,
                    "precision": r.precision,
                    "recall": r.recall,
                    "f1": r.f1,
                }
                for i, r in enumerate(self.per_run)
            ],
            "aggregate": {
                "mean_precision": self.aggregate.mean_precision,
                "mean_recall": self.aggregate.mean_recall,
                "mean_f1": self.aggregate.mean_f1,
                "stddev_f1": self.aggregate.stddev_f1,
                "runs": self.aggregate.runs,
            },
            "error_histogram": self.histogram,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        lines = [
            f"dataset: {self.dataset} ({self.task})   method: {self.method}",
            f"digest: {self.dataset_digest}",
            "",
            f"{'run':>4} {'tp':>6} {'fp':>6} {'fn':>6} {'P':>8} {'R':>8} {'F1':>8}",
        ]
        for i, r in enumerate(self.per_run):
            lines.append(
                f"{i:>4} {r.tp:>6} {r.fp:>6} {r.fn:>6} {percent(r.precision):>8} {percent(r.recall):>8} {percent(r.f1):>8}"
            )
        a = self.aggregate
        lines.append("")
        lines.append(
            f"mean over {a.runs} runs: P {percent(a.mean_precision)}  R {percent(a.mean_recall)}  "
            f"F1 {percent(a.mean_f1)}  (stddev {percent(a.stddev_f1)})"
        )
        lines.append("")
        lines.append("error histogram (best run): " + ", ".join(f"{k}={v}" for k, v in self.histogram.items()))
        return "\n".join(lines) + "\n"


def run_eval(cfg: RunConfig) -> EvalReport:
    """Executes cfg.runs evaluation passes over the test split and writes the
    report plus all intermediate artifacts under cfg.output_dir."""
    bundle = load_bundle(cfg)
    schema = bundle.schema
    digest = dataset_manifest(bundle)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    packages = [
        build_package(schema, bundle.categories, bundle.train, cfg.shots, s.text)
        for s in bundle.test
    ]
    # corpus/parse order is kept everywhere feeding the analyzer: alignment
    # tie-breaks depend on input order, and replay must be process-independent
    gold_canon = [
        tuple(dict.fromkeys(canonicalize(t, cfg.policy) for t in s.gold)) for s in bundle.test
    ]

    per_run: list[RunMetrics] = []
    per_run_preds: list[list[tuple]] = []
    diag_by_kind: dict[str, int] = {}
    responses_with_diags = 0
    parse_failures = 0

    with CompletionClient(cfg.endpoint, cfg.resolved_cache_dir(), offline=cfg.offline) as client:
        for run_idx in range(cfg.runs):
            run_dir = out_dir / "runs" / f"run-{run_idx}"
            run_dir.mkdir(parents=True, exist_ok=True)
            results = client.batch_complete(packages)
            failures = [r for r in results if isinstance(r, BatchItemError)]

            rows = []
            counts = []
            preds: list[tuple] = []
            for i, (sentence, result) in enumerate(zip(bundle.test, results)):
                if isinstance(result, BatchItemError):
                    rows.append(
                        {"index": i, "text": sentence.text, "error": result.kind, "detail": result.message}
                    )
                    continue
                outcome = parse_response(result.response, schema, mode="tolerant")
                pred = tuple(dict.fromkeys(canonicalize(t, cfg.policy) for t in outcome.tuples))
                preds.append(pred)
                tp, fp, fn = score_sentence(outcome.tuples, sentence.gold, cfg.policy)
                counts.append((tp, fp, fn))
                if outcome.diagnostics:
                    responses_with_diags += 1
                for d in outcome.diagnostics:
                    diag_by_kind[d.kind] = diag_by_kind.get(d.kind, 0) + 1
                    if d.kind == NO_TUPLE_LIST:
                        parse_failures += 1
                rows.append(
                    {
                        "index": i,
                        "text": sentence.text,
                        "digest": result.digest,
                        "response": result.response,
                        "pred": [list(t.wire_values(schema)) for t in outcome.tuples],
                        "diagnostics": [d.kind for d in outcome.diagnostics],
                        "tp": tp,
                        "fp": fp,
                        "fn": fn,
                    }
                )

            with open(run_dir / "predictions.jsonl", "w", encoding="utf-8") as fh:
                for row in rows:
                    fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

            if failures:
                # partial artifacts are on disk; surface the run-level failure
                raise EndpointError(
                    f"{cfg.dataset_name} run {run_idx}: {len(failures)} of {len(packages)} requests failed "
                    f"(first: {failures[0].kind}: {failures[0].message})"
                )

            metrics = score_run(counts)
            per_run.append(metrics)
            per_run_preds.append(preds)
            (run_dir / "metrics.json").write_text(
                json.dumps(
                    {
                        "run": run_idx,
                        "tp": metrics.tp,
                        "fp": metrics.fp,
                        "fn": metrics.fn,
                        "precision": metrics.precision,
                        "recall": metrics.recall,
                        "f1": metrics.f1,
                    },
                    indent=2,
                    sort_keys=True,
                )
                + "\n",
                encoding="utf-8",
            )
            log.info("%s run %d: F1 %s", cfg.dataset_name, run_idx, percent(metrics.f1))

    best = max(range(len(per_run)), key=lambda i: per_run[i].f1)
    records = []
    for sentence, pred, gold in zip(bundle.test, per_run_preds[best], gold_canon):
        records.extend(align_errors(pred, gold, schema, sentence.text))
    hist = error_histogram(records, schema)
    write_error_records(records, out_dir / "error_records.jsonl")
    write_histogram_csv(hist, out_dir / "error_histogram.csv")

    report = EvalReport(
        method=cfg.method_label,
        dataset=cfg.dataset_name,
        task=cfg.task.value,
        config=cfg.echo(),
        dataset_digest=digest,
        per_run=tuple(per_run),
        aggregate=aggregate(per_run),
        histogram=hist,
        diagnostics={
            "responses": len(bundle.test) * cfg.runs,
            "responses_with_diagnostics": responses_with_diags,
            "parse_failures": parse_failures,
            "by_kind": dict(sorted(diag_by_kind.items())),
        },
    )
    (out_dir / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out_dir / "report.txt").write_text(report.to_text(), encoding="utf-8")
    return report


def stats_table(bundle: DatasetBundle) -> str:
    stats = compute_stats(bundle)
    lines = [
        f"dataset: {bundle.name} ({bundle.schema.task.value}); vocabulary size {len(bundle.categories)}",
        f"{'split':<7} {'sentences':>9} {'tuples':>7} {'categories':>10} {'POS':>6} {'NEG':>6} {'NEU':>6}",
    ]
    for split in ("train", "dev", "test"):
        s = stats[split]
        lines.append(
            f"{split:<7} {s.sentences:>9} {s.tuples:>7} {s.categories:>10} {s.positive:>6} {s.negative:>6} {s.neutral:>6}"
        )
    return "\n".join(lines) + "\n"


def _as_report_dict(report) -> dict:
    return report.to_dict() if isinstance(report, EvalReport) else report


def report_table(reports: Sequence) -> str:
    """Methods x datasets grid of mean F1 (two-decimal percentages) with an
    AVG column; blank cells for missing combinations, AVG over present cells."""
    dicts = [_as_report_dict(r) for r in reports]
    if not dicts:
        raise ConfigError("no reports to tabulate")
    policies = {json.dumps(d["config"].get("policy", {}), sort_keys=True) for d in dicts}
    if len(policies) > 1:
        raise MixedPolicy("reports were scored under different canonicalization policies")

    columns = [c for c in DATASET_COLUMN_ORDER]
    for d in dicts:
        if d["dataset"] not in columns:
            columns.append(d["dataset"])
    methods: list[str] = []
    cells: dict[tuple[str, str], float] = {}
    for d in dicts:
        m = d["method"]
        if m not in methods:
            methods.append(m)
        cells[(m, d["dataset"])] = d["aggregate"]["mean_f1"]

    used_columns = [c for c in columns if any((m, c) in cells for m in methods)]
    left = max(len("method"), *(len(m) for m in methods))
    widths = [max(len(c), 6) for c in used_columns]

    header = "method".ljust(left) + "".join(f"  {c:>{w}}" for c, w in zip(used_columns, widths)) + f"  {'AVG':>6}"
    sep = "-" * len(header)
    lines = [header, sep]
    # the AVG column is defined over the eight benchmark datasets; a row
    # missing any of them (or any displayed column) is averaging fewer cells
    full_grid = list(dict.fromkeys([*used_columns, *DATASET_COLUMN_ORDER]))
    missing_any = any((m, c) not in cells for m in methods for c in full_grid)
    for m in methods:
        row = [m.ljust(left)]
        present = []
        for c, w in zip(used_columns, widths):
            if (m, c) in cells:
                value = cells[(m, c)]
                present.append(value)
                row.append(f"  {percent(value):>{w}}")
            else:
                row.append(f"  {'':>{w}}")
        avg = sum(present) / len(present) if present else 0.0
        row.append(f"  {percent(avg):>6}")
        lines.append("".join(row))
    if missing_any:
        lines.append("note: AVG computed over present cells only")
    return "\n".join(lines) + "\n"
