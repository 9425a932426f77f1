"""Parallel corpus ingestion, filtering and the canonical JSONL format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyInput, LineCountMismatch, MalformedRow
from .tokenization import tokenize

HUMAN = "human"
MACHINE = "machine"


@dataclass(frozen=True)
class Origin:
    kind: str  # "human" | "machine"
    engine: str | None = None

    def __post_init__(self):
        if self.kind not in (HUMAN, MACHINE):
            raise ValueError(f"unknown origin kind: {self.kind!r}")
        if self.kind == MACHINE and not self.engine:
            raise ValueError("machine origin requires an engine name")

    def __str__(self) -> str:
        return self.kind if self.kind == HUMAN else f"{MACHINE}:{self.engine}"

    @classmethod
    def parse(cls, value: str) -> "Origin":
        if value == HUMAN:
            return cls(HUMAN)
        if value.startswith(MACHINE + ":"):
            return cls(MACHINE, value.split(":", 1)[1])
        raise ValueError(f"unknown origin: {value!r}")


@dataclass(frozen=True)
class SentencePair:
    id: str
    source: str
    target: str
    origin: Origin = field(default_factory=lambda: Origin(HUMAN))
    dataset_tag: str = ""

    def __post_init__(self):
        if not self.source.strip() or not self.target.strip():
            raise EmptyInput(f"pair {self.id!r}: empty source or target")


def read_parallel(
    source_path: str | Path | None = None,
    target_path: str | Path | None = None,
    tsv_path: str | Path | None = None,
    dataset_tag: str = "corpus",
    origin: Origin | None = None,
) -> list[SentencePair]:
    """Read a parallel corpus from two line-aligned files or one TSV.

    Ids are positional: ``<dataset_tag>:<line_number>`` (1-based), so
    re-runs over the same input produce identical datasets.
    """
    origin = origin or Origin(HUMAN)
    if tsv_path is not None:
        rows = _read_lines(tsv_path)
        pairs = []
        for i, row in enumerate(rows, start=1):
            cols = row.split("\t")
            if len(cols) < 2:
                raise MalformedRow(i, f"expected >=2 tab-separated columns, got {len(cols)}")
            pairs.append(SentencePair(
                id=f"{dataset_tag}:{i}", source=cols[0], target=cols[1],
                origin=origin, dataset_tag=dataset_tag,
            ))
        return pairs

    if source_path is None or target_path is None:
        raise ValueError("need either tsv_path or both source_path and target_path")
    src_lines = _read_lines(source_path)
    tgt_lines = _read_lines(target_path)
    if len(src_lines) != len(tgt_lines):
        raise LineCountMismatch(
            f"{source_path} has {len(src_lines)} lines, {target_path} has {len(tgt_lines)}"
        )
    return [
        SentencePair(
            id=f"{dataset_tag}:{i}", source=s, target=t,
            origin=origin, dataset_tag=dataset_tag,
        )
        for i, (s, t) in enumerate(zip(src_lines, tgt_lines), start=1)
    ]


def _read_lines(path: str | Path) -> list[str]:
    # UTF-8 only; invalid bytes are a hard error by design.
    raw = Path(path).read_text(encoding="utf-8")
    lines = raw.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


TOO_LONG = "TOO_LONG"
RATIO = "RATIO"


def filter_pairs(
    pairs: list[SentencePair],
    max_tokens: int = 250,
    max_ratio: float = 1.5,
) -> tuple[list[SentencePair], dict[str, int]]:
    """Drop over-long pairs and pairs with an extreme length ratio.

    The ratio is max(len_s, len_t) / min(len_s, len_t) over token counts;
    the boundary is inclusive (ratio == max_ratio is kept). Returns the
    survivors in stable order plus removal counts per reason.
    """
    kept: list[SentencePair] = []
    removed = {TOO_LONG: 0, RATIO: 0}
    for pair in pairs:
        len_s = len(tokenize(pair.source))
        len_t = len(tokenize(pair.target))
        if len_s > max_tokens or len_t > max_tokens:
            removed[TOO_LONG] += 1
            continue
        if max(len_s, len_t) / min(len_s, len_t) > max_ratio:
            removed[RATIO] += 1
            continue
        kept.append(pair)
    return kept, removed


def write_corpus(pairs: list[SentencePair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for p in pairs:
            record = {
                "id": p.id,
                "source": p.source,
                "target": p.target,
                "origin": str(p.origin),
                "dataset_tag": p.dataset_tag,
            }
            f.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_corpus(path: str | Path) -> list[SentencePair]:
    pairs = []
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise MalformedRow(i, str(e)) from e
            pairs.append(SentencePair(
                id=record["id"],
                source=record["source"],
                target=record["target"],
                origin=Origin.parse(record["origin"]),
                dataset_tag=record.get("dataset_tag", ""),
            ))
    return pairs
