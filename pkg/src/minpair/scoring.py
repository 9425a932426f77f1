"""Sequence scoring from per-token log-probabilities.

A backend is anything that returns per-token conditional log-probs for
(source, target); the score of a sequence is the sum of those log-probs,
and conditional scores are length-normalized over all scored positions
(target tokens plus one end-of-sequence position).
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import BackendFailure, EmptyTarget
from .tokenization import tokenize

EOS = "</s>"


@dataclass(frozen=True)
class TokenLogProbs:
    """Aligned tokens and natural-log probabilities, each finite and <= 0."""

    logprobs: tuple[float, ...]
    tokens: tuple[str, ...] | None = None

    def __post_init__(self):
        if len(self.logprobs) < 1:
            raise ValueError("TokenLogProbs needs at least one position")
        for lp in self.logprobs:
            if not math.isfinite(lp) or lp > 0:
                raise ValueError(f"invalid log-probability: {lp}")
        if self.tokens is not None and len(self.tokens) != len(self.logprobs):
            raise ValueError("tokens and logprobs lengths differ")

    def __len__(self) -> int:
        return len(self.logprobs)


@dataclass(frozen=True)
class ScoreRequest:
    id: str
    source: str
    target_tokens: tuple[str, ...]


class ScorerBackend(ABC):
    """Deterministic source of per-token log-probabilities.

    Implementations must return ``len(target_tokens) + 1`` positions (the
    final one scoring end-of-sequence) and identical output for identical
    input.
    """

    name: str = "backend"

    @abstractmethod
    def token_logprobs(self, request: ScoreRequest) -> TokenLogProbs:
        ...

    def score_batch(self, requests: Sequence[ScoreRequest]) -> list[tuple[str, TokenLogProbs]]:
        return [(r.id, self.token_logprobs(r)) for r in requests]


def sequence_score(lp: TokenLogProbs | Iterable[float]) -> float:
    """Sum of token log-probabilities; no normalization."""
    values = lp.logprobs if isinstance(lp, TokenLogProbs) else tuple(lp)
    return math.fsum(values)


def conditional_score(backend: ScorerBackend, source: str, target: str,
                      request_id: str = "") -> float:
    """Length-normalized score of target given source.

    Scores every target token plus one end-of-sequence position and
    divides the summed log-probability by that position count.
    """
    stripped = target.strip()
    if not stripped:
        raise EmptyTarget("target is empty")
    target_tokens = tokenize(target).tokens
    try:
        lp = backend.token_logprobs(ScoreRequest(request_id, source, target_tokens))
    except (BackendFailure, EmptyTarget):
        raise
    except Exception as e:
        raise BackendFailure(f"backend {backend.name!r} failed on {request_id!r}: {e}") from e
    if len(lp) != len(target_tokens) + 1:
        raise BackendFailure(
            f"backend {backend.name!r} returned {len(lp)} positions "
            f"for {len(target_tokens)} target tokens (+EOS) on {request_id!r}"
        )
    return sequence_score(lp) / len(lp)


def make_request_id(pair_id: str, variant: str) -> str:
    return f"{pair_id}#{variant}"


def split_request_id(request_id: str) -> tuple[str, str]:
    if "#" not in request_id:
        raise BackendFailure(f"request id {request_id!r} lacks '#variant' suffix")
    pair_id, variant = request_id.rsplit("#", 1)
    return pair_id, variant


class TableBackend(ScorerBackend):
    """Backend reading precomputed log-probabilities from a TSV table.

    Rows are ``pair_id \\t variant \\t comma-separated logprobs``; requests
    are looked up by their ``pair_id#variant`` id.
    """

    def __init__(self, path: str | Path, name: str = "table"):
        self.name = name
        self.path = Path(path)
        self._table: dict[tuple[str, str], tuple[float, ...]] = {}
        with open(self.path, encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                try:
                    pair_id, variant, values = line.split("\t")
                except ValueError as e:
                    raise BackendFailure(f"{self.path}:{line_no}: expected 3 columns") from e
                self._table[(pair_id, variant)] = tuple(
                    float(v) for v in values.split(",")
                )

    def token_logprobs(self, request: ScoreRequest) -> TokenLogProbs:
        key = split_request_id(request.id)
        try:
            values = self._table[key]
        except KeyError:
            raise BackendFailure(f"no table entry for {request.id!r} in {self.path}")
        if len(values) != len(request.target_tokens) + 1:
            raise BackendFailure(
                f"table entry for {request.id!r} has {len(values)} positions, "
                f"expected {len(request.target_tokens) + 1}"
            )
        return TokenLogProbs(logprobs=values,
                             tokens=tuple(request.target_tokens) + (EOS,))


def write_score_table(rows: Iterable[tuple[str, str, Sequence[float]]],
                      path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for pair_id, variant, values in rows:
            f.write(f"{pair_id}\t{variant}\t" + ",".join(repr(float(v)) for v in values) + "\n")
