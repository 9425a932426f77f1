"""Plain-text lexical resources driving the perturbation rules.

All tables ship as editable data files (one entry per line; mappings are
two-column TSV) so the rules stay transparent and amendable without code
changes. A directory with the same file names can override the bundled
defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path

_DATA_PACKAGE = "minpair.data"


def _read_data(name: str, override_dir: Path | None) -> str:
    if override_dir is not None:
        candidate = override_dir / name
        if candidate.exists():
            return candidate.read_text(encoding="utf-8")
    return importlib_resources.files(_DATA_PACKAGE).joinpath(name).read_text(encoding="utf-8")


def _word_set(text: str) -> frozenset[str]:
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def _mapping(text: str) -> dict[str, str]:
    table = {}
    for line in text.splitlines():
        line = line.rstrip("\n")
        if not line.strip():
            continue
        key, value = line.split("\t")
        table[key] = value
    return table


@dataclass(frozen=True)
class RuleResources:
    dative_prepositions: frozenset[str]
    determiner_case_table: dict[str, str]  # dative determiner -> genitive
    determiner_flip_table: dict[str, str]  # agreement-breaking flips
    genitive_noun_overrides: dict[str, str]
    un_polarity_lexicon: dict[str, str]  # un-word -> base form
    verb_number_table: dict[str, str]  # 3sg <-> 3pl
    noun_stoplist: frozenset[str]
    plural_nouns: frozenset[str]
    abbreviations: frozenset[str]

    def __post_init__(self):
        required_preps = {
            "entgegen", "entsprechend", "gegenüber", "gemäß",
            "nahe", "nebst", "mitsamt", "samt", "seit",
        }
        missing = required_preps - self.dative_prepositions
        if missing:
            raise ValueError(f"dative preposition list is missing {sorted(missing)}")
        for word, base in self.un_polarity_lexicon.items():
            if not word.startswith(("un", "Un")):
                raise ValueError(f"polarity lexicon entry {word!r} lacks un- prefix")
            if base.lower() != word[2:].lower():
                raise ValueError(f"polarity base {base!r} is not {word!r} minus its prefix")

    @classmethod
    def load(cls, directory: str | Path | None = None) -> "RuleResources":
        override = Path(directory) if directory is not None else None
        return cls(
            dative_prepositions=_word_set(_read_data("dative_prepositions.txt", override)),
            determiner_case_table=_mapping(_read_data("determiner_dat2gen.tsv", override)),
            determiner_flip_table=_mapping(_read_data("determiner_flip.tsv", override)),
            genitive_noun_overrides=_mapping(_read_data("genitive_noun_overrides.tsv", override)),
            un_polarity_lexicon=_mapping(_read_data("un_polarity.tsv", override)),
            verb_number_table=_mapping(_read_data("verb_number_table.tsv", override)),
            noun_stoplist=_word_set(_read_data("noun_stoplist.txt", override)),
            plural_nouns=_word_set(_read_data("plural_nouns.txt", override)),
            abbreviations=_word_set(_read_data("abbreviations.txt", override)),
        )


_default: RuleResources | None = None


def default_resources() -> RuleResources:
    global _default
    if _default is None:
        _default = RuleResources.load()
    return _default
