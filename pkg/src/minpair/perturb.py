"""Rule-based construction of contrastive minimal pairs.

Each rule takes a reference translation and produces a contrastive
variant that differs only in the targeted phenomenon. Rules are
sklearn-style transformers: ``fit`` loads lexical resources,
``transform`` maps sentence pairs to minimal pairs, skipping sentences
the rule does not apply to (skips are recorded on ``skipped_``).

Edits are spliced into the original string via character offsets, so
everything outside the edited material is byte-identical to the
reference.
"""

from __future__ import annotations

import random
import zlib
from dataclasses import dataclass
from typing import ClassVar

from sklearn.base import BaseEstimator, TransformerMixin

from .corpus import Origin, SentencePair
from .errors import (
    EmptyInput,
    NoCandidateNoun,
    NoEligiblePhrase,
    NoEligibleSite,
    NoEligibleToken,
    RuleNotApplicable,
    SingleClause,
    UnknownErrorType,
)
from .resources import RuleResources, default_resources
from .tokenization import TokenizedSentence, splice, tokenize

ERROR_TYPES = (
    "placeholder_ding",
    "hypercorrect_genitive",
    "polarity_affix_del",
    "polarity_particle_kein_del",
    "polarity_particle_nicht_del",
    "clause_omission",
    "np_agreement",
    "subj_verb_agreement",
)

_SENTENCE_FINAL = {".", "!", "?", ":"}
_QUOTE_CHARS = set('"»«„“')


@dataclass(frozen=True)
class PhenomenonSpans:
    """Token index ranges (end-exclusive) marking the edited material."""

    correct: tuple[tuple[int, int], ...]
    contrastive: tuple[tuple[int, int], ...]

    def to_json(self) -> dict:
        return {
            "correct": [list(r) for r in self.correct],
            "contrastive": [list(r) for r in self.contrastive],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PhenomenonSpans":
        return cls(
            correct=tuple((int(a), int(b)) for a, b in obj["correct"]),
            contrastive=tuple((int(a), int(b)) for a, b in obj["contrastive"]),
        )


@dataclass(frozen=True)
class MinimalPair:
    id: str
    error_type: str
    source: str
    correct: str
    contrastive: str
    phenomenon_spans: PhenomenonSpans
    ref_origin: Origin

    def __post_init__(self):
        if self.error_type not in ERROR_TYPES:
            raise UnknownErrorType(self.error_type)
        if self.correct == self.contrastive:
            raise ValueError(f"pair {self.id!r}: correct equals contrastive")


def _outside_spans(tokens: tuple[str, ...], ranges: tuple[tuple[int, int], ...]) -> list[str]:
    covered = set()
    for start, end in ranges:
        covered.update(range(start, end))
    return [t for i, t in enumerate(tokens) if i not in covered]


def check_minimality(pair: MinimalPair) -> bool:
    """True iff tokens outside the phenomenon spans are identical."""
    correct = tokenize(pair.correct).tokens
    contrastive = tokenize(pair.contrastive).tokens
    return _outside_spans(correct, pair.phenomenon_spans.correct) == _outside_spans(
        contrastive, pair.phenomenon_spans.contrastive
    )


def _is_noun_like(token: str) -> bool:
    return len(token) > 1 and token[0].isupper() and token.isalpha()


def select_target_noun(sentence: TokenizedSentence, seed: int,
                       stoplist: frozenset[str] = frozenset()) -> int:
    """Pick a noun token to replace, by seeded deterministic choice.

    Candidates are capitalized tokens at non-initial positions that do not
    immediately follow a sentence boundary. German capitalization serves
    as the POS proxy; the stoplist removes known non-nouns.
    """
    candidates = [
        i
        for i, t in enumerate(sentence.tokens)
        if i > 0
        and _is_noun_like(t)
        and t not in stoplist
        and sentence.tokens[i - 1] not in _SENTENCE_FINAL
    ]
    if not candidates:
        raise NoCandidateNoun("no capitalized non-initial token")
    return candidates[random.Random(seed).randrange(len(candidates))]


def _mix_seed(seed: int, pair_id: str) -> int:
    # Stable across processes, unlike the builtin hash().
    return zlib.crc32(f"{seed}:{pair_id}".encode("utf-8"))


class PerturbRule(BaseEstimator, TransformerMixin):
    """Base transformer mapping SentencePair -> MinimalPair."""

    error_type: ClassVar[str]

    def __init__(self, resources: RuleResources | None = None):
        self.resources = resources

    def fit(self, X=None, y=None):
        self.resources_ = self.resources if self.resources is not None else default_resources()
        return self

    def transform(self, X: list[SentencePair]) -> list[MinimalPair]:
        if not hasattr(self, "resources_"):
            self.fit()
        out: list[MinimalPair] = []
        skipped: list[tuple[str, str]] = []
        for pair in X:
            try:
                out.append(self.apply(pair))
            except RuleNotApplicable as e:
                skipped.append((pair.id, e.code))
        self.skipped_ = skipped
        return out

    def apply(self, pair: SentencePair) -> MinimalPair:
        raise NotImplementedError

    def _build(self, pair: SentencePair, contrastive: str,
               correct_spans, contrastive_spans) -> MinimalPair:
        return MinimalPair(
            id=pair.id,
            error_type=self.error_type,
            source=pair.source,
            correct=pair.target,
            contrastive=contrastive,
            phenomenon_spans=PhenomenonSpans(
                correct=tuple(correct_spans), contrastive=tuple(contrastive_spans)
            ),
            ref_origin=pair.origin,
        )


class PlaceholderDingRule(PerturbRule):
    """Replace a random noun with the uninflected placeholder "Ding".

    Determiners are left untouched, mirroring the attested construction
    ("über die Ding"). The choice of noun is seeded per sentence id.
    """

    error_type = "placeholder_ding"

    def __init__(self, resources: RuleResources | None = None, seed: int = 0):
        super().__init__(resources)
        self.seed = seed

    def apply(self, pair: SentencePair) -> MinimalPair:
        toks = tokenize(pair.target)
        idx = select_target_noun(toks, _mix_seed(self.seed, pair.id),
                                 self.resources_.noun_stoplist)
        start, end = toks.spans[idx]
        contrastive = splice(pair.target, [(start, end, "Ding")])
        return self._build(pair, contrastive, [(idx, idx + 1)], [(idx, idx + 1)])


def _genitive_noun(noun: str, overrides: dict[str, str]) -> str:
    if noun in overrides:
        return overrides[noun]
    if noun.lower().endswith(("s", "ß", "x", "z", "sch")):
        return noun + "es"
    return noun + "s"


class HypercorrectGenitiveRule(PerturbRule):
    """Convert a dative preposition phrase into a hypercorrect genitive.

    Applies only to masculine/neuter singular phrases whose determiner
    visibly changes (dem -> des etc.); feminine and plural phrases are
    skipped because the surface form would stay the same.
    """

    error_type = "hypercorrect_genitive"

    def apply(self, pair: SentencePair) -> MinimalPair:
        toks = tokenize(pair.target)
        res = self.resources_
        n = len(toks.tokens)
        for i, t in enumerate(toks.tokens):
            if t.lower() not in res.dative_prepositions:
                continue
            if t[0].isupper() and i != 0:
                continue  # capitalized mid-sentence: a noun, not the preposition
            if i + 1 >= n:
                continue
            det = toks.tokens[i + 1]
            if det not in res.determiner_case_table:
                continue
            # head noun: next capitalized token, allowing adjectives between
            head = None
            for j in range(i + 2, min(i + 5, n)):
                if _is_noun_like(toks.tokens[j]):
                    head = j
                    break
            if head is None:
                continue
            new_det = res.determiner_case_table[det]
            new_noun = _genitive_noun(toks.tokens[head], res.genitive_noun_overrides)
            contrastive = splice(pair.target, [
                (*toks.spans[i + 1], new_det),
                (*toks.spans[head], new_noun),
            ])
            span = [(i + 1, head + 1)]
            return self._build(pair, contrastive, span, span)
        raise NoEligiblePhrase("no dative preposition phrase with a surface-changing determiner")


class PolarityAffixRule(PerturbRule):
    """Delete the polarity prefix un- from the first lexicon word."""

    error_type = "polarity_affix_del"

    def apply(self, pair: SentencePair) -> MinimalPair:
        toks = tokenize(pair.target)
        lex = self.resources_.un_polarity_lexicon
        for i, t in enumerate(toks.tokens):
            base = lex.get(t)
            if base is None and i == 0 and t[:1].isupper():
                folded = lex.get(t[0].lower() + t[1:])
                if folded is not None:
                    base = folded[0].upper() + folded[1:]
            if base is None:
                continue
            contrastive = splice(pair.target, [(*toks.spans[i], base)])
            return self._build(pair, contrastive, [(i, i + 1)], [(i, i + 1)])
        raise NoEligibleToken("no polarity-flipping un- word found")


_KEIN_FORMS = {"kein", "keine", "keinen", "keinem", "keiner", "keines"}


class NegationParticleRule(PerturbRule):
    """Delete "nicht" or turn a kein-form into the matching ein-form.

    kein-forms preceding a plural head noun (per the plural lexicon) are
    deleted outright since German has no plural indefinite article.
    """

    error_type = "polarity_particle_nicht_del"  # overridden for kein

    def __init__(self, resources: RuleResources | None = None, lexeme: str = "nicht"):
        super().__init__(resources)
        if lexeme not in ("kein", "nicht"):
            raise ValueError(f"unsupported negation lexeme: {lexeme!r}")
        self.lexeme = lexeme

    @property
    def error_type(self):  # type: ignore[override]
        return ("polarity_particle_kein_del" if self.lexeme == "kein"
                else "polarity_particle_nicht_del")

    def apply(self, pair: SentencePair) -> MinimalPair:
        toks = tokenize(pair.target)
        if self.lexeme == "nicht":
            for i, t in enumerate(toks.tokens):
                if t == "nicht":
                    return self._delete_token(pair, toks, i)
            raise NoEligibleToken('no token "nicht"')

        for i, t in enumerate(toks.tokens):
            if t.lower() not in _KEIN_FORMS:
                continue
            if self._is_plural_context(toks, i):
                return self._delete_token(pair, toks, i)
            replacement = t[1:]  # kein -> ein, keine -> eine, ...
            if t[0].isupper():
                replacement = replacement[0].upper() + replacement[1:]
            contrastive = splice(pair.target, [(*toks.spans[i], replacement)])
            return self._build(pair, contrastive, [(i, i + 1)], [(i, i + 1)])
        raise NoEligibleToken("no inflected form of kein")

    def _is_plural_context(self, toks: TokenizedSentence, i: int) -> bool:
        for j in range(i + 1, min(i + 4, len(toks.tokens))):
            if _is_noun_like(toks.tokens[j]):
                return toks.tokens[j] in self.resources_.plural_nouns
        return False

    def _delete_token(self, pair: SentencePair, toks: TokenizedSentence, i: int) -> MinimalPair:
        start, end = toks.spans[i]
        if i > 0:
            start = toks.spans[i - 1][1]  # take the preceding space too
        else:
            end = toks.spans[i + 1][0] if i + 1 < len(toks.tokens) else end
        contrastive = splice(pair.target, [(start, end, "")])
        return self._build(pair, contrastive, [(i, i + 1)], [(i, i)])


def _clause_spans(text: str, abbreviations: frozenset[str]) -> list[tuple[int, int]]:
    boundaries = []
    n = len(text)
    for p, ch in enumerate(text):
        if ch not in _SENTENCE_FINAL:
            continue
        q = p + 1
        if q >= n or not text[q].isspace():
            continue
        while q < n and text[q].isspace():
            q += 1
        if q >= n:
            continue
        nxt = text[q]
        if not (nxt.isupper() or nxt in _QUOTE_CHARS):
            continue
        if ch == ".":
            # suppress abbreviation and ordinal-number false splits
            tok_start = p
            while tok_start > 0 and not text[tok_start - 1].isspace():
                tok_start -= 1
            token = text[tok_start:p + 1]
            if token in abbreviations or token[:-1].isdigit():
                continue
        boundaries.append(p + 1)
    spans = []
    start = 0
    for b in boundaries:
        spans.append((start, b))
        start = b
    spans.append((start, n))
    # trim surrounding whitespace per clause
    trimmed = []
    for s, e in spans:
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        if s < e:
            trimmed.append((s, e))
    return trimmed or [(0, n)]


def segment_clauses(text: str, resources: RuleResources | None = None) -> list[str]:
    """Split after sentence-final punctuation followed by an uppercase
    letter or quote; the abbreviation list suppresses false splits."""
    if not text or not text.strip():
        raise EmptyInput("cannot segment empty text")
    res = resources if resources is not None else default_resources()
    return [text[s:e] for s, e in _clause_spans(text, res.abbreviations)]


class ClauseOmissionRule(PerturbRule):
    """Delete one clause from the reference (the last one by default)."""

    error_type = "clause_omission"

    def __init__(self, resources: RuleResources | None = None, clause_index: int = -1):
        super().__init__(resources)
        self.clause_index = clause_index

    def apply(self, pair: SentencePair) -> MinimalPair:
        text = pair.target
        spans = _clause_spans(text, self.resources_.abbreviations)
        if len(spans) < 2:
            raise SingleClause("target has a single clause")
        k = self.clause_index if self.clause_index >= 0 else len(spans) + self.clause_index
        if not 0 <= k < len(spans):
            raise SingleClause(f"clause index {self.clause_index} out of range")
        cs, ce = spans[k]
        # delete the clause plus the whitespace joining it to its neighbors;
        # an interior clause leaves a single joining space behind
        del_start = spans[k - 1][1] if k > 0 else cs
        del_end = spans[k + 1][0] if k + 1 < len(spans) else ce
        joiner = " " if 0 < k < len(spans) - 1 else ""
        contrastive = splice(text, [(del_start, del_end, joiner)]).strip()

        toks = tokenize(text)
        covered = [i for i, (s, e) in enumerate(toks.spans) if s >= cs and e <= ce]
        first, last = covered[0], covered[-1]
        before = sum(1 for s, _ in toks.spans if s < cs)
        return self._build(pair, contrastive, [(first, last + 1)], [(before, before)])


class NpAgreementRule(PerturbRule):
    """Flip a determiner form directly before a noun, breaking agreement."""

    error_type = "np_agreement"

    def apply(self, pair: SentencePair) -> MinimalPair:
        toks = tokenize(pair.target)
        table = self.resources_.determiner_flip_table
        for i, t in enumerate(toks.tokens[:-1]):
            flipped = table.get(t.lower())
            if flipped is None or not _is_noun_like(toks.tokens[i + 1]):
                continue
            if t[0].isupper():
                flipped = flipped[0].upper() + flipped[1:]
            contrastive = splice(pair.target, [(*toks.spans[i], flipped)])
            return self._build(pair, contrastive, [(i, i + 1)], [(i, i + 1)])
        raise NoEligibleSite("no determiner+noun site in the flip table")


class SubjVerbAgreementRule(PerturbRule):
    """Flip the number of a finite verb adjacent to its subject noun."""

    error_type = "subj_verb_agreement"

    _WINDOW = 3

    def apply(self, pair: SentencePair) -> MinimalPair:
        toks = tokenize(pair.target)
        table = self.resources_.verb_number_table
        for i, t in enumerate(toks.tokens):
            flipped = table.get(t)
            if flipped is None:
                continue
            window = toks.tokens[max(0, i - self._WINDOW):i]
            if not any(_is_noun_like(w) for w in window):
                continue
            contrastive = splice(pair.target, [(*toks.spans[i], flipped)])
            return self._build(pair, contrastive, [(i, i + 1)], [(i, i + 1)])
        raise NoEligibleSite("no finite verb from the number table near a noun")


def make_rule(error_type: str, seed: int = 0,
              resources: RuleResources | None = None) -> PerturbRule:
    if error_type == "placeholder_ding":
        rule: PerturbRule = PlaceholderDingRule(resources=resources, seed=seed)
    elif error_type == "hypercorrect_genitive":
        rule = HypercorrectGenitiveRule(resources=resources)
    elif error_type == "polarity_affix_del":
        rule = PolarityAffixRule(resources=resources)
    elif error_type == "polarity_particle_kein_del":
        rule = NegationParticleRule(resources=resources, lexeme="kein")
    elif error_type == "polarity_particle_nicht_del":
        rule = NegationParticleRule(resources=resources, lexeme="nicht")
    elif error_type == "clause_omission":
        rule = ClauseOmissionRule(resources=resources)
    elif error_type == "np_agreement":
        rule = NpAgreementRule(resources=resources)
    elif error_type == "subj_verb_agreement":
        rule = SubjVerbAgreementRule(resources=resources)
    else:
        raise UnknownErrorType(error_type)
    return rule.fit()


@dataclass(frozen=True)
class TestsetBuild:
    pairs: list[MinimalPair]
    skipped: list[tuple[str, str]]  # (pair id, skip reason code)


def build_testset(pairs: list[SentencePair], error_type: str, seed: int = 0,
                  resources: RuleResources | None = None) -> TestsetBuild:
    """Apply one rule to every sentence pair, skipping ineligible ones."""
    rule = make_rule(error_type, seed=seed, resources=resources)
    produced = rule.transform(pairs)
    return TestsetBuild(pairs=produced, skipped=rule.skipped_)


def write_testset(pairs: list[MinimalPair], path) -> None:
    """Write minimal pairs in the newline-delimited interchange format."""
    import json

    with open(path, "w", encoding="utf-8") as f:
        for p in pairs:
            record = {
                "id": p.id,
                "error_type": p.error_type,
                "source": p.source,
                "correct": p.correct,
                "contrastive": p.contrastive,
                "phenomenon_spans": p.phenomenon_spans.to_json(),
                "ref_origin": str(p.ref_origin),
            }
            f.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_testset(path) -> list[MinimalPair]:
    import json

    pairs = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            r = json.loads(line)
            pairs.append(MinimalPair(
                id=r["id"],
                error_type=r["error_type"],
                source=r["source"],
                correct=r["correct"],
                contrastive=r["contrastive"],
                phenomenon_spans=PhenomenonSpans.from_json(r["phenomenon_spans"]),
                ref_origin=Origin.parse(r["ref_origin"]),
            ))
    return pairs


# Convenience single-pair entry points.

def perturb_placeholder_ding(pair: SentencePair, seed: int = 0,
                             resources: RuleResources | None = None) -> MinimalPair:
    return PlaceholderDingRule(resources=resources, seed=seed).fit().apply(pair)


def perturb_hypercorrect_genitive(pair: SentencePair,
                                  resources: RuleResources | None = None) -> MinimalPair:
    return HypercorrectGenitiveRule(resources=resources).fit().apply(pair)


def perturb_polarity_affix(pair: SentencePair,
                           resources: RuleResources | None = None) -> MinimalPair:
    return PolarityAffixRule(resources=resources).fit().apply(pair)


def perturb_negation_particle(pair: SentencePair, lexeme: str,
                              resources: RuleResources | None = None) -> MinimalPair:
    return NegationParticleRule(resources=resources, lexeme=lexeme).fit().apply(pair)


def perturb_clause_omission(pair: SentencePair, clause_index: int = -1,
                            resources: RuleResources | None = None) -> MinimalPair:
    return ClauseOmissionRule(resources=resources, clause_index=clause_index).fit().apply(pair)


def perturb_agreement(pair: SentencePair, kind: str,
                      resources: RuleResources | None = None) -> MinimalPair:
    if kind == "np":
        return NpAgreementRule(resources=resources).fit().apply(pair)
    if kind == "subj_verb":
        return SubjVerbAgreementRule(resources=resources).fit().apply(pair)
    raise UnknownErrorType(kind)
