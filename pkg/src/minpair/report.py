"""Accuracy, distributional discrepancy and report rendering.

Accuracy is the percentage of minimal pairs where the correct variant
outscores the contrastive one. Discrepancy is the mean gap between the
score of the system's own 1-best output and the score of the preferred
test-set variant; it is reported per backend and never averaged across
different backends, since score differences are not comparable between
models.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import EmptyTestset, NonFiniteScore
from .perturb import MinimalPair
from .scoring import ScorerBackend, conditional_score, make_request_id


class Verdict(Enum):
    CORRECT_PREFERRED = "CORRECT_PREFERRED"
    CONTRASTIVE_PREFERRED = "CONTRASTIVE_PREFERRED"
    TIE = "TIE"


@dataclass(frozen=True)
class JudgedPair:
    id: str
    score_correct: float
    score_contrastive: float
    verdict: Verdict


@dataclass(frozen=True)
class DiscrepancyInput:
    id: str
    score_onebest: float
    score_preferred: float


def judge_pair(score_correct: float, score_contrastive: float) -> Verdict:
    if not (math.isfinite(score_correct) and math.isfinite(score_contrastive)):
        raise NonFiniteScore(f"scores must be finite: {score_correct}, {score_contrastive}")
    if score_correct > score_contrastive:
        return Verdict.CORRECT_PREFERRED
    if score_correct < score_contrastive:
        return Verdict.CONTRASTIVE_PREFERRED
    return Verdict.TIE


def accuracy(judged: Sequence[JudgedPair | Verdict], ties_as_half: bool = False) -> float:
    """Percentage of pairs preferring the correct variant.

    Ties count against the model by default; ``ties_as_half`` counts them
    as 0.5 instead.
    """
    if not judged:
        raise EmptyTestset("cannot compute accuracy of an empty test set")
    verdicts = [j.verdict if isinstance(j, JudgedPair) else j for j in judged]
    correct = sum(1.0 for v in verdicts if v is Verdict.CORRECT_PREFERRED)
    if ties_as_half:
        correct += sum(0.5 for v in verdicts if v is Verdict.TIE)
    return 100.0 * correct / len(verdicts)


def discrepancy(inputs: Sequence[DiscrepancyInput]) -> float:
    """Mean of (score of the 1-best output minus score of the preferred variant)."""
    if not inputs:
        raise EmptyTestset("cannot compute discrepancy of an empty test set")
    return math.fsum(i.score_onebest - i.score_preferred for i in inputs) / len(inputs)


def aggregate_runs(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample (n-1) standard deviation; std is 0 for one value."""
    if not values:
        raise EmptyTestset("no values to aggregate")
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


@dataclass(frozen=True)
class BackendEval:
    """Evaluation of one test set against one backend."""

    backend: str
    accuracy: float
    discrepancy: float | None
    judged: tuple[JudgedPair, ...] = ()


def evaluate_testset(pairs: Sequence[MinimalPair], backend: ScorerBackend,
                     onebest: Mapping[str, str] | None = None,
                     ties_as_half: bool = False) -> BackendEval:
    """Score a test set with one backend; onebest texts enable discrepancy."""
    if not pairs:
        raise EmptyTestset("empty test set")
    judged = []
    gaps = []
    for pair in pairs:
        sc = conditional_score(backend, pair.source, pair.correct,
                               make_request_id(pair.id, "correct"))
        sx = conditional_score(backend, pair.source, pair.contrastive,
                               make_request_id(pair.id, "contrastive"))
        judged.append(JudgedPair(pair.id, sc, sx, judge_pair(sc, sx)))
        if onebest is not None and pair.id in onebest:
            so = conditional_score(backend, pair.source, onebest[pair.id],
                                   make_request_id(pair.id, "onebest"))
            gaps.append(DiscrepancyInput(pair.id, so, max(sc, sx)))
    return BackendEval(
        backend=backend.name,
        accuracy=accuracy(judged, ties_as_half=ties_as_half),
        discrepancy=discrepancy(gaps) if gaps else None,
        judged=tuple(judged),
    )


@dataclass(frozen=True)
class EvalReport:
    """One (error type, test-set type) row: per-backend values grouped by model family."""

    error_type: str
    testset_type: str  # "human references" | "machine references"
    accuracy_by_backend: dict[str, dict[str, float]] = field(default_factory=dict)
    discrepancy_by_backend: dict[str, dict[str, float]] = field(default_factory=dict)

    def groups(self) -> list[str]:
        seen = dict.fromkeys(list(self.discrepancy_by_backend) + list(self.accuracy_by_backend))
        return list(seen)


_TESTSET_ORDER = {"human references": 0, "machine references": 1}


def _fmt_mean_std(values: Iterable[float], decimals: int = 1) -> str:
    values = list(values)
    if not values:
        return "—"
    mean, std = aggregate_runs(values)
    scale = 10 ** decimals
    std_up = math.ceil(round(std * scale, 9)) / scale  # round std up at displayed precision
    return f"{mean:.{decimals}f}±{std_up:.{decimals}f}"


def render_report(reports: Sequence[EvalReport], format: str = "tsv") -> str:
    """Render rows of "mean±std" cells, one per (error type, test-set type)."""
    if not reports:
        raise EmptyTestset("no reports to render")
    groups = list(dict.fromkeys(g for r in reports for g in r.groups()))
    header = (["error_type", "testset_type"]
              + [f"discrepancy[{g}]" for g in groups]
              + [f"accuracy[{g}]" for g in groups])
    ordered = sorted(reports, key=lambda r: (r.error_type,
                                             _TESTSET_ORDER.get(r.testset_type, 2)))
    rows = []
    for r in ordered:
        cells = [r.error_type, r.testset_type]
        for g in groups:
            cells.append(_fmt_mean_std((r.discrepancy_by_backend.get(g) or {}).values()))
        for g in groups:
            cells.append(_fmt_mean_std((r.accuracy_by_backend.get(g) or {}).values()))
        rows.append(cells)

    if format == "tsv":
        lines = ["\t".join(header)] + ["\t".join(row) for row in rows]
        return "\n".join(lines) + "\n"
    if format == "markdown":
        lines = ["| " + " | ".join(header) + " |",
                 "| " + " | ".join("---" for _ in header) + " |"]
        lines += ["| " + " | ".join(row) + " |" for row in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format: {format!r}")


def write_report_records(reports: Sequence[EvalReport], path) -> None:
    """Machine-readable companion: full-precision values, one record per
    (error_type, testset_type, backend)."""
    with open(path, "w", encoding="utf-8") as f:
        for r in reports:
            for group in r.groups():
                backends = set((r.accuracy_by_backend.get(group) or {})) | set(
                    (r.discrepancy_by_backend.get(group) or {}))
                for backend in sorted(backends):
                    record = {
                        "error_type": r.error_type,
                        "testset_type": r.testset_type,
                        "group": group,
                        "backend": backend,
                        "accuracy": (r.accuracy_by_backend.get(group) or {}).get(backend),
                        "discrepancy": (r.discrepancy_by_backend.get(group) or {}).get(backend),
                    }
                    f.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_report_records(path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def reports_from_records(records: Sequence[dict]) -> list[EvalReport]:
    keyed: dict[tuple[str, str], EvalReport] = {}
    for rec in records:
        key = (rec["error_type"], rec["testset_type"])
        report = keyed.setdefault(key, EvalReport(error_type=key[0], testset_type=key[1]))
        group = rec.get("group") or rec["backend"]
        if rec.get("accuracy") is not None:
            report.accuracy_by_backend.setdefault(group, {})[rec["backend"]] = rec["accuracy"]
        if rec.get("discrepancy") is not None:
            report.discrepancy_by_backend.setdefault(group, {})[rec["backend"]] = rec["discrepancy"]
    return list(keyed.values())
