"""Evaluation harness for compound aspect-based sentiment analysis tasks
(ASQP, ACOS, TASD, ASTE) against chat-completion LLM endpoints."""

__version__ = "0.1.0"

from .analysis import ErrorRecord, align_errors, error_histogram, polarity_confusion, sample_for_review
from .client import CompletionClient, CompletionRecord, EndpointConfig
from .ingest import RESTAURANT_CATEGORIES, SplitStats, compute_stats, dataset_manifest, load_dataset
from .orchestrator import EvalReport, RunConfig, report_table, run_eval
from .parsing import CanonicalizationPolicy, Diagnostic, ParseOutcome, canonicalize, parse_response
from .prompts import PromptPackage, build_finetune_pairs, build_instruction, build_package, serialize_tuples
from .scoring import AggregateMetrics, RunMetrics, aggregate, score_run, score_sentence
from .types import (
    SCHEMAS,
    AnnotatedSentence,
    DatasetBundle,
    Polarity,
    SentimentTuple,
    Task,
    TaskSchema,
    Term,
    schema_for,
    validate_tuple,
)

__all__ = [
    "AggregateMetrics",
    "AnnotatedSentence",
    "CanonicalizationPolicy",
    "CompletionClient",
    "CompletionRecord",
    "DatasetBundle",
    "Diagnostic",
    "EndpointConfig",
    "ErrorRecord",
    "EvalReport",
    "ParseOutcome",
    "Polarity",
    "PromptPackage",
    "RESTAURANT_CATEGORIES",
    "RunConfig",
    "RunMetrics",
    "SCHEMAS",
    "SentimentTuple",
    "SplitStats",
    "Task",
    "TaskSchema",
    "Term",
    "aggregate",
    "align_errors",
    "build_finetune_pairs",
    "build_instruction",
    "build_package",
    "canonicalize",
    "compute_stats",
    "dataset_manifest",
    "error_histogram",
    "load_dataset",
    "parse_response",
    "polarity_confusion",
    "report_table",
    "run_eval",
    "sample_for_review",
    "schema_for",
    "score_run",
    "score_sentence",
    "serialize_tuples",
    "validate_tuple",
]
