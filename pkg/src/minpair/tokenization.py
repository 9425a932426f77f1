"""Deterministic rule-based tokenizer with character offsets.

Splits on whitespace and peels leading/trailing punctuation into separate
tokens; intra-word hyphens are kept. Offsets allow lossless reconstruction
of the original string, which the perturbation rules rely on for splicing
edits into otherwise untouched text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import EmptyInput

# Punctuation peeled off token edges. Hyphen is deliberately absent.
_EDGE_PUNCT = set('.,;:!?"»«()„“’‘')

_CHUNK = re.compile(r"\S+")


@dataclass(frozen=True)
class TokenizedSentence:
    text: str
    tokens: tuple[str, ...]
    spans: tuple[tuple[int, int], ...]  # [start, end) character offsets

    def __len__(self) -> int:
        return len(self.tokens)

    def detokenize(self) -> str:
        """Reconstruct the original text from tokens and offsets."""
        out = []
        prev_end = 0
        for token, (start, end) in zip(self.tokens, self.spans):
            out.append(self.text[prev_end:start])
            out.append(token)
            prev_end = end
        out.append(self.text[prev_end:])
        return "".join(out)


def tokenize(text: str) -> TokenizedSentence:
    if not text or not text.strip():
        raise EmptyInput("cannot tokenize empty text")
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []

    def emit(start: int, end: int) -> None:
        tokens.append(text[start:end])
        spans.append((start, end))

    for m in _CHUNK.finditer(text):
        lo, hi = m.start(), m.end()
        i, j = lo, hi
        while i < j and text[i] in _EDGE_PUNCT:
            i += 1
        while j > i and text[j - 1] in _EDGE_PUNCT:
            j -= 1
        for p in range(lo, i):
            emit(p, p + 1)
        if i < j:
            emit(i, j)
        for p in range(j, hi):
            emit(p, p + 1)

    return TokenizedSentence(text=text, tokens=tuple(tokens), spans=tuple(spans))


def detokenize(sentence: TokenizedSentence) -> str:
    return sentence.detokenize()


def splice(text: str, edits: list[tuple[int, int, str]]) -> str:
    """Apply non-overlapping character-range replacements to ``text``.

    Each edit is (start, end, replacement). Edits may be given in any
    order; they are applied right-to-left so offsets stay valid.
    """
    out = text
    for start, end, replacement in sorted(edits, reverse=True):
        out = out[:start] + replacement + out[end:]
    return out
