"""Add-k smoothed n-gram language model over target-side tokens.

A built-in oracle backend: it makes the full scoring and evaluation
pipeline testable without a neural model. It deliberately ignores the
source sentence, so it says nothing about translation quality.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from typing import Sequence

from sklearn.base import BaseEstimator

from .errors import EmptyCorpus
from .scoring import EOS, ScoreRequest, ScorerBackend, TokenLogProbs
from .tokenization import tokenize

BOS = "<s>"
UNK = "<unk>"


class NgramBackend(BaseEstimator, ScorerBackend):
    """Backend estimator with the usual fit() lifecycle.

    Probabilities are add-k smoothed over the training vocabulary plus
    UNK and EOS, so every history distribution sums to one and no token
    ever scores -inf.
    """

    def __init__(self, order: int = 2, k: float = 1.0, name: str = "ngram"):
        self.order = order
        self.k = k
        self.name = name

    def fit(self, X: Sequence[str], y=None) -> "NgramBackend":
        """Train on an iterable of target-side sentences."""
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if self.k <= 0:
            raise ValueError("smoothing constant k must be > 0")
        sentences = list(X)
        if not sentences:
            raise EmptyCorpus("no training sentences")
        vocab: set[str] = set()
        counts: dict[tuple[str, ...], Counter] = defaultdict(Counter)
        totals: dict[tuple[str, ...], int] = defaultdict(int)
        pad = (BOS,) * (self.order - 1)
        for sentence in sentences:
            tokens = tokenize(sentence).tokens
            vocab.update(tokens)
            stream = pad + tokens + (EOS,)
            for i in range(self.order - 1, len(stream)):
                history = stream[i - self.order + 1:i]
                counts[history][stream[i]] += 1
                totals[history] += 1
        self.vocab_ = frozenset(vocab)
        self.counts_ = dict(counts)
        self.totals_ = dict(totals)
        # normalization vocabulary: observed tokens plus UNK and EOS
        self.vocab_size_ = len(vocab) + 2
        return self

    def logprob(self, token: str, history: Sequence[str]) -> float:
        history = tuple(
            t if t in self.vocab_ or t == BOS else UNK for t in history
        )[max(0, len(history) - self.order + 1):]
        if token not in self.vocab_ and token != EOS:
            token = UNK
        count = self.counts_.get(history, {}).get(token, 0)
        total = self.totals_.get(history, 0)
        return math.log((count + self.k) / (total + self.k * self.vocab_size_))

    def token_logprobs(self, request: ScoreRequest) -> TokenLogProbs:
        tokens = tuple(request.target_tokens)
        pad = (BOS,) * (self.order - 1)
        stream = pad + tokens + (EOS,)
        logprobs = []
        for i in range(self.order - 1, len(stream)):
            logprobs.append(self.logprob(stream[i], stream[i - self.order + 1:i]))
        return TokenLogProbs(logprobs=tuple(logprobs), tokens=tokens + (EOS,))


def train_ngram(targets: Sequence[str], order: int = 2, k: float = 1.0,
                name: str = "ngram") -> NgramBackend:
    return NgramBackend(order=order, k=k, name=name).fit(targets)
