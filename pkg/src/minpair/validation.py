"""Semi-automatic validation of machine-generated references.

Machine references are classified against the human-derived minimal pair
by phenomenon-specific lexical overlap: same phenomenon material as the
human correct variant -> auto-accept; material of the human contrastive
variant -> route to human review; no overlap -> drop (cannot be
validated automatically). Human decisions are persisted in an
append-only log with optimistic concurrency.
"""

from __future__ import annotations

import difflib
import json
import os
import threading
import time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import MACHINE, Origin, SentencePair
from .errors import (
    IllegalTransition,
    RuleNotApplicable,
    SpanOutOfRange,
    UnresolvedReviews,
    VersionConflict,
)
from .perturb import (
    MinimalPair,
    PhenomenonSpans,
    make_rule,
    select_target_noun,
)
from .errors import NoCandidateNoun
from .resources import RuleResources, default_resources
from .tokenization import tokenize


class Status(Enum):
    AUTO_ACCEPT = "AUTO_ACCEPT"
    NEEDS_REVIEW = "NEEDS_REVIEW"
    USE_AS_CONTRASTIVE = "USE_AS_CONTRASTIVE"
    DROPPED = "DROPPED"
    REVIEWED_ACCEPT = "REVIEWED_ACCEPT"
    REVIEWED_CONTRASTIVE = "REVIEWED_CONTRASTIVE"
    REVIEWED_DROP = "REVIEWED_DROP"


TERMINAL_STATUSES = frozenset(Status) - {Status.NEEDS_REVIEW}

ACCEPT_STATUSES = frozenset({Status.AUTO_ACCEPT, Status.REVIEWED_ACCEPT})
CONTRASTIVE_STATUSES = frozenset({Status.USE_AS_CONTRASTIVE, Status.REVIEWED_CONTRASTIVE})
DROP_STATUSES = frozenset({Status.DROPPED, Status.REVIEWED_DROP})


@dataclass(frozen=True)
class PhenomenonKey:
    error_type: str
    tokens: tuple[str, ...]


def extract_phenomenon_key(variant_text: str, error_type: str,
                           spans: Sequence[tuple[int, int]]) -> PhenomenonKey:
    """Extract the phenomenon-bearing surface tokens from a variant.

    For the hypercorrect genitive the preceding preposition is included
    alongside the determiner+noun span.
    """
    toks = tokenize(variant_text).tokens
    indices: list[int] = []
    for start, end in spans:
        if not 0 <= start <= end <= len(toks):
            raise SpanOutOfRange(f"span ({start}, {end}) invalid for {len(toks)} tokens")
        indices.extend(range(start, end))
    if not indices:
        raise SpanOutOfRange("empty phenomenon spans")
    if error_type == "hypercorrect_genitive" and indices[0] > 0:
        indices.insert(0, indices[0] - 1)
    return PhenomenonKey(error_type=error_type,
                         tokens=tuple(toks[i] for i in indices))


def _contains_key(text: str, key: PhenomenonKey) -> bool:
    # Case-sensitive token match; only a sentence-initial token is
    # compared case-folded (German capitalization is lexically meaningful).
    toks = tokenize(text).tokens
    for needed in key.tokens:
        found = any(
            t == needed or (i == 0 and t.lower() == needed.lower())
            for i, t in enumerate(toks)
        )
        if not found:
            return False
    return True


def classify_candidate(machine_reference: str, human_pair: MinimalPair,
                       resources: RuleResources | None = None) -> Status:
    """Classify one machine reference against the human minimal pair."""
    res = resources if resources is not None else default_resources()
    if human_pair.error_type == "placeholder_ding":
        # the phenomenon is injected, not preserved: any candidate noun works
        try:
            select_target_noun(tokenize(machine_reference), 0, res.noun_stoplist)
            return Status.AUTO_ACCEPT
        except NoCandidateNoun:
            return Status.DROPPED

    key_correct = extract_phenomenon_key(
        human_pair.correct, human_pair.error_type, human_pair.phenomenon_spans.correct)
    if _contains_key(machine_reference, key_correct):
        return Status.AUTO_ACCEPT
    try:
        key_contrastive = extract_phenomenon_key(
            human_pair.contrastive, human_pair.error_type,
            human_pair.phenomenon_spans.contrastive)
    except SpanOutOfRange:
        key_contrastive = None  # deletion phenomena leave no contrastive material
    if key_contrastive is not None and _contains_key(machine_reference, key_contrastive):
        return Status.NEEDS_REVIEW
    return Status.DROPPED


@dataclass(frozen=True)
class ValidationRecord:
    id: str
    error_type: str
    source: str
    human_correct: str
    human_contrastive: str
    machine_reference: str
    engine_name: str
    status: Status
    phenomenon_spans: PhenomenonSpans | None = None
    reviewer_note: str | None = None
    manually_derived_correct: str | None = None
    version: int = 0

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "error_type": self.error_type,
            "source": self.source,
            "human_correct": self.human_correct,
            "human_contrastive": self.human_contrastive,
            "machine_reference": self.machine_reference,
            "engine_name": self.engine_name,
            "status": self.status.value,
            "phenomenon_spans": (self.phenomenon_spans.to_json()
                                 if self.phenomenon_spans else None),
            "reviewer_note": self.reviewer_note,
            "manually_derived_correct": self.manually_derived_correct,
            "version": self.version,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ValidationRecord":
        spans = obj.get("phenomenon_spans")
        return cls(
            id=obj["id"],
            error_type=obj["error_type"],
            source=obj["source"],
            human_correct=obj["human_correct"],
            human_contrastive=obj["human_contrastive"],
            machine_reference=obj["machine_reference"],
            engine_name=obj["engine_name"],
            status=Status(obj["status"]),
            phenomenon_spans=PhenomenonSpans.from_json(spans) if spans else None,
            reviewer_note=obj.get("reviewer_note"),
            manually_derived_correct=obj.get("manually_derived_correct"),
            version=int(obj.get("version", 0)),
        )


@dataclass(frozen=True)
class MachineReference:
    id: str
    reference: str
    engine: str


def classify_references(human_pairs: Sequence[MinimalPair],
                        machine_refs: Sequence[MachineReference],
                        resources: RuleResources | None = None) -> list[ValidationRecord]:
    """Build validation records for every machine reference with a human pair."""
    by_id = {p.id: p for p in human_pairs}
    records = []
    for ref in machine_refs:
        pair = by_id.get(ref.id)
        if pair is None:
            continue
        records.append(ValidationRecord(
            id=ref.id,
            error_type=pair.error_type,
            source=pair.source,
            human_correct=pair.correct,
            human_contrastive=pair.contrastive,
            machine_reference=ref.reference,
            engine_name=ref.engine,
            status=classify_candidate(ref.reference, pair, resources),
            phenomenon_spans=pair.phenomenon_spans,
        ))
    return records


DECISIONS = ("accept", "mark_contrastive", "drop")

_DECISION_TARGET = {
    "accept": Status.REVIEWED_ACCEPT,
    "mark_contrastive": Status.REVIEWED_CONTRASTIVE,
    "drop": Status.REVIEWED_DROP,
}


def apply_decision(record: ValidationRecord, decision: str,
                   expected_version: int,
                   manually_derived_correct: str | None = None,
                   reviewer_note: str | None = None) -> ValidationRecord:
    """Advance a NEEDS_REVIEW record along the transition table (compare-and-set)."""
    if decision not in _DECISION_TARGET:
        raise IllegalTransition(f"unknown decision {decision!r}")
    if record.status is not Status.NEEDS_REVIEW:
        raise IllegalTransition(
            f"record {record.id!r} is {record.status.value}, a terminal status")
    if expected_version != record.version:
        raise VersionConflict(
            f"record {record.id!r} is at version {record.version}, "
            f"decision expected {expected_version}")
    if decision == "mark_contrastive":
        if not manually_derived_correct or not manually_derived_correct.strip():
            raise IllegalTransition("mark_contrastive requires a manually derived correct variant")
        if manually_derived_correct == record.machine_reference:
            raise IllegalTransition("the derived correct variant must differ from the machine reference")
    return replace(
        record,
        status=_DECISION_TARGET[decision],
        manually_derived_correct=(manually_derived_correct
                                  if decision == "mark_contrastive" else
                                  record.manually_derived_correct),
        reviewer_note=reviewer_note if reviewer_note is not None else record.reviewer_note,
        version=record.version + 1,
    )


class RecordStore:
    """File-backed store: base records plus an append-only decision log.

    Every applied decision is appended to the log before being
    acknowledged; loading replays the log over the base records, so
    audits can reconstruct every human decision. A single writer is
    enforced in-process; concurrent reviewers are serialized through
    compare-and-set on the record version.
    """

    BASE_FILE = "records.jsonl"
    LOG_FILE = "decisions.log"
    STATE_FILE = "state.jsonl"

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._lock = threading.Lock()
        self._records: dict[str, ValidationRecord] = {}
        # (id, expected_version) -> acknowledged decision, for at-most-once retries
        self._applied: dict[tuple[str, int], dict] = {}

    # --- lifecycle ---

    @classmethod
    def create(cls, directory: str | Path,
               records: Sequence[ValidationRecord]) -> "RecordStore":
        store = cls(directory)
        store.directory.mkdir(parents=True, exist_ok=True)
        with open(store.directory / cls.BASE_FILE, "w", encoding="utf-8") as f:
            for r in records:
                f.write(json.dumps(r.to_json(), ensure_ascii=False) + "\n")
        (store.directory / cls.LOG_FILE).touch()
        store._records = {r.id: r for r in records}
        store._materialize()
        return store

    @classmethod
    def open(cls, directory: str | Path) -> "RecordStore":
        store = cls(directory)
        base = store.directory / cls.BASE_FILE
        with open(base, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    record = ValidationRecord.from_json(json.loads(line))
                    store._records[record.id] = record
        log = store.directory / cls.LOG_FILE
        if log.exists():
            with open(log, encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if not line:
                        continue
                    entry = json.loads(line)
                    record = store._records[entry["id"]]
                    store._records[entry["id"]] = apply_decision(
                        record, entry["decision"], entry["expected_version"],
                        entry.get("manually_derived_correct"),
                        entry.get("reviewer_note"))
                    store._remember(entry)
        return store

    # --- queries ---

    def records(self) -> list[ValidationRecord]:
        return sorted(self._records.values(), key=lambda r: r.id)

    def get(self, record_id: str) -> ValidationRecord | None:
        return self._records.get(record_id)

    def pending(self) -> list[ValidationRecord]:
        return [r for r in self.records() if r.status is Status.NEEDS_REVIEW]

    def stats(self) -> dict[str, dict[str, int]]:
        """Exact counts per error type per status."""
        out: dict[str, dict[str, int]] = {}
        for r in self._records.values():
            per_type = out.setdefault(r.error_type, {})
            per_type[r.status.value] = per_type.get(r.status.value, 0) + 1
        return out

    def status_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for r in self._records.values():
            counts[r.status.value] = counts.get(r.status.value, 0) + 1
        return counts

    # --- mutation ---

    def apply(self, record_id: str, decision: str, expected_version: int,
              reviewer: str = "", manually_derived_correct: str | None = None,
              reviewer_note: str | None = None) -> ValidationRecord:
        with self._lock:
            if record_id not in self._records:
                raise KeyError(record_id)
            retry_key = (record_id, expected_version)
            acknowledged = self._applied.get(retry_key)
            if acknowledged is not None:
                # retry of an acknowledged decision: same result, no double-apply
                if acknowledged["decision"] == decision:
                    return self._records[record_id]
                raise VersionConflict(
                    f"record {record_id!r} already decided at version {expected_version}")
            updated = apply_decision(
                self._records[record_id], decision, expected_version,
                manually_derived_correct, reviewer_note)
            entry = {
                "id": record_id,
                "decision": decision,
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
                "reviewer": reviewer,
                "expected_version": expected_version,
            }
            if manually_derived_correct is not None:
                entry["manually_derived_correct"] = manually_derived_correct
            if reviewer_note is not None:
                entry["reviewer_note"] = reviewer_note
            with open(self.directory / self.LOG_FILE, "a", encoding="utf-8") as f:
                f.write(json.dumps(entry, ensure_ascii=False) + "\n")
                f.flush()
                os.fsync(f.fileno())
            self._records[record_id] = updated
            self._remember(entry)
            self._materialize()
            return updated

    def _remember(self, entry: dict) -> None:
        self._applied[(entry["id"], entry["expected_version"])] = entry

    def _materialize(self) -> None:
        tmp = self.directory / (self.STATE_FILE + ".tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            for r in self.records():
                f.write(json.dumps(r.to_json(), ensure_ascii=False) + "\n")
        tmp.replace(self.directory / self.STATE_FILE)


def _diff_spans(correct_tokens: Sequence[str],
                contrastive_tokens: Sequence[str]) -> PhenomenonSpans:
    matcher = difflib.SequenceMatcher(a=list(correct_tokens), b=list(contrastive_tokens),
                                      autojunk=False)
    a_idx, b_idx = [], []
    for op, a0, a1, b0, b1 in matcher.get_opcodes():
        if op != "equal":
            a_idx.extend((a0, a1))
            b_idx.extend((b0, b1))
    if not a_idx:
        a_idx = b_idx = [0, 0]
    return PhenomenonSpans(
        correct=((min(a_idx), max(a_idx)),),
        contrastive=((min(b_idx), max(b_idx)),),
    )


def build_machine_testset(human_pairs: Sequence[MinimalPair],
                          records: Sequence[ValidationRecord],
                          resources: RuleResources | None = None,
                          seed: int = 0,
                          allow_unresolved: bool = False) -> tuple[list[MinimalPair], list[tuple[str, str]]]:
    """Assemble the machine-reference test set from resolved records.

    Accepted machine references get a contrastive variant from the same
    perturbation rule; reviewed-contrastive records use the machine
    reference as the contrastive variant and the manually derived text as
    the correct one. Returns (pairs, skipped) where skipped carries
    (record id, reason).
    """
    pending = [r.id for r in records if r.status is Status.NEEDS_REVIEW]
    if pending and not allow_unresolved:
        raise UnresolvedReviews(pending)

    rules: dict[str, object] = {}
    pairs: list[MinimalPair] = []
    skipped: list[tuple[str, str]] = []
    for record in records:
        origin = Origin(MACHINE, record.engine_name)
        if record.status in DROP_STATUSES:
            skipped.append((record.id, record.status.value))
        elif record.status is Status.NEEDS_REVIEW:
            skipped.append((record.id, record.status.value))
        elif record.status in ACCEPT_STATUSES:
            rule = rules.get(record.error_type)
            if rule is None:
                rule = rules[record.error_type] = make_rule(
                    record.error_type, seed=seed, resources=resources)
            sp = SentencePair(id=record.id, source=record.source,
                              target=record.machine_reference, origin=origin)
            try:
                pairs.append(rule.apply(sp))
            except RuleNotApplicable as e:
                skipped.append((record.id, e.code))
        elif record.status in CONTRASTIVE_STATUSES:
            correct = record.manually_derived_correct
            if not correct:
                skipped.append((record.id, "MISSING_DERIVED_CORRECT"))
                continue
            spans = _diff_spans(tokenize(correct).tokens,
                                tokenize(record.machine_reference).tokens)
            pairs.append(MinimalPair(
                id=record.id,
                error_type=record.error_type,
                source=record.source,
                correct=correct,
                contrastive=record.machine_reference,
                phenomenon_spans=spans,
                ref_origin=origin,
            ))
    return pairs, skipped


def read_machine_references(path: str | Path) -> list[MachineReference]:
    refs = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            refs.append(MachineReference(
                id=obj["id"],
                reference=obj.get("machine_reference", obj.get("reference")),
                engine=obj.get("engine", "unknown"),
            ))
    return refs


def resolved_counts(records: Mapping[str, ValidationRecord] | Sequence[ValidationRecord]) -> dict[str, int]:
    values = records.values() if isinstance(records, Mapping) else records
    counts: dict[str, int] = {}
    for r in values:
        counts[r.status.value] = counts.get(r.status.value, 0) + 1
    return counts
