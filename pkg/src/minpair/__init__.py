"""Contrastive minimal-pair construction, scoring and evaluation for
English-German machine translation, with semi-automatic validation of
machine-generated references."""

__version__ = "0.1.0"

from .corpus import Origin, SentencePair, filter_pairs, read_parallel
from .perturb import MinimalPair, PhenomenonSpans, build_testset, make_rule
from .resources import RuleResources, default_resources
from .scoring import TableBackend, TokenLogProbs, conditional_score, sequence_score
from .ngram import NgramBackend, train_ngram
from .report import (
    EvalReport,
    Verdict,
    accuracy,
    aggregate_runs,
    discrepancy,
    judge_pair,
    render_report,
)
from .validation import (
    RecordStore,
    Status,
    ValidationRecord,
    apply_decision,
    build_machine_testset,
    classify_candidate,
)

__all__ = [
    "Origin", "SentencePair", "filter_pairs", "read_parallel",
    "MinimalPair", "PhenomenonSpans", "build_testset", "make_rule",
    "RuleResources", "default_resources",
    "TableBackend", "TokenLogProbs", "conditional_score", "sequence_score",
    "NgramBackend", "train_ngram",
    "EvalReport", "Verdict", "accuracy", "aggregate_runs", "discrepancy",
    "judge_pair", "render_report",
    "RecordStore", "Status", "ValidationRecord", "apply_decision",
    "build_machine_testset", "classify_candidate",
]
