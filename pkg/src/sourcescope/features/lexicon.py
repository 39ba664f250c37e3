"""Keyword lexicon driving the section and telephone detectors.

Phrases are grouped per feature and per language tag; matching is
casefolded and whitespace-normalized, so lexicon files may use any case.
The built-in lexicon ships English seed phrases (with their link-path
forms) plus Italian, Spanish, French and German equivalents, and may be
replaced or extended via a JSON file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping

from ..errors import LexiconError

__all__ = ["KeywordLexicon", "SECTION_KINDS", "load_lexicon", "default_lexicon"]

SECTION_KINDS = ("contact", "about", "terms")

# Baseline English synonyms every lexicon must keep so the three section
# detectors retain their documented meaning.
_REQUIRED_ENGLISH = {
    "contact": ("contact us", "connect with us", "gives us a tip"),
    "about": ("about us", "information", "who we are"),
    "terms": ("terms and conditions", "terms", "legal notes", "terms of use"),
}


def _normalize_phrase(phrase: str) -> str:
    return " ".join(phrase.casefold().split())


@dataclass(frozen=True)
class KeywordLexicon:
    """Immutable phrase lists for the contact/about/terms/telephone detectors."""

    contact: Mapping[str, tuple[str, ...]]
    about: Mapping[str, tuple[str, ...]]
    terms: Mapping[str, tuple[str, ...]]
    telephone_keywords: tuple[str, ...]
    languages: tuple[str, ...]

    def __post_init__(self):
        if not self.languages:
            raise LexiconError("lexicon declares no languages")
        for kind in SECTION_KINDS:
            table = getattr(self, kind)
            for lang, phrases in table.items():
                if lang not in self.languages:
                    raise LexiconError(f"{kind}: language {lang!r} not declared in 'languages'")
                for phrase in phrases:
                    if not phrase.strip():
                        raise LexiconError(f"{kind}/{lang}: empty phrase")
            present = {_normalize_phrase(p) for p in table.get("en", ())}
            missing = [p for p in _REQUIRED_ENGLISH[kind] if p not in present]
            if missing:
                raise LexiconError(f"{kind}: lexicon must keep English seed phrases {missing}")
        if not self.telephone_keywords:
            raise LexiconError("lexicon declares no telephone keywords")
        for keyword in self.telephone_keywords:
            if not keyword.strip():
                raise LexiconError("empty telephone keyword")

    def phrases_for(self, kind: str) -> tuple[str, ...]:
        """All normalized phrases for a section feature, across languages."""
        if kind not in SECTION_KINDS:
            raise LexiconError(f"unknown section kind {kind!r}; expected one of {SECTION_KINDS}")
        table = getattr(self, kind)
        out = []
        for lang in self.languages:
            out.extend(_normalize_phrase(p) for p in table.get(lang, ()))
        return tuple(dict.fromkeys(out))

    def all_section_phrases(self) -> tuple[str, ...]:
        """Union of the three section vocabularies (secondary-page candidates)."""
        out = []
        for kind in SECTION_KINDS:
            out.extend(self.phrases_for(kind))
        return tuple(dict.fromkeys(out))

    def telephone_keywords_normalized(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(_normalize_phrase(k) for k in self.telephone_keywords))


def _lexicon_from_mapping(raw: Mapping, origin: str) -> KeywordLexicon:
    try:
        languages = tuple(raw["languages"])
        telephone = tuple(raw["telephone_keywords"])
        tables = {}
        for kind in SECTION_KINDS:
            tables[kind] = {
                lang: tuple(phrases) for lang, phrases in dict(raw[kind]).items()
            }
    except (KeyError, TypeError) as exc:
        raise LexiconError(f"{origin}: malformed lexicon document ({exc})") from None
    return KeywordLexicon(
        contact=tables["contact"],
        about=tables["about"],
        terms=tables["terms"],
        telephone_keywords=telephone,
        languages=languages,
    )


def load_lexicon(path: str | Path) -> KeywordLexicon:
    """Load a lexicon from a UTF-8 JSON file."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LexiconError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise LexiconError(f"{path}: lexicon document must be a JSON object")
    return _lexicon_from_mapping(raw, str(path))


@lru_cache(maxsize=1)
def default_lexicon() -> KeywordLexicon:
    """The packaged five-language lexicon."""
    raw = json.loads(
        resources.files("sourcescope.data").joinpath("lexicon.json").read_text("utf-8"))
    return _lexicon_from_mapping(raw, "builtin lexicon")
