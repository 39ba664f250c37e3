"""The five binary site detectors and their composition.

Each detector is a pure function of an immutable snapshot and lexicon, so
adding pages or languages can only raise bits, never lower them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional
from urllib.parse import urlsplit

from ..errors import MissingFeatureError
from .html_text import normalize_text, parse_page
from .lexicon import SECTION_KINDS, KeywordLexicon, default_lexicon
from .snapshot import FetchPolicy, SiteSnapshot, fetch_site

__all__ = [
    "FeatureVector",
    "FEATURE_NAMES",
    "detect_padlock",
    "detect_section",
    "detect_telephone",
    "extract_features",
]

FEATURE_NAMES = ("padlock", "contact", "telephone", "about", "terms")

_PHONE_SCHEMES = ("tel:", "fax:", "callto:")
# maximal run of digits with common separators, optionally led by '+'
_DIGIT_RUN = re.compile(r"\+?\d[\d\s().\-]*")
_PHONE_PROXIMITY = 40
_MIN_DIGITS, _MAX_DIGITS = 7, 15


@dataclass(frozen=True)
class FeatureVector:
    """The five 0/1 predictors for one website."""

    padlock: int
    contact: int
    telephone: int
    about: int
    terms: int
    source_url: Optional[str] = None

    def __post_init__(self):
        for name in FEATURE_NAMES:
            if getattr(self, name) not in (0, 1):
                raise ValueError(f"feature {name!r} must be 0 or 1")

    def as_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in FEATURE_NAMES}

    def get(self, name: str) -> int:
        if name not in FEATURE_NAMES:
            raise MissingFeatureError(f"unknown feature {name!r}")
        return getattr(self, name)


def detect_padlock(snapshot: SiteSnapshot) -> int:
    """1 iff the connection that served the final URL was TLS-secured."""
    return int(snapshot.final_scheme_secure)


def _page_regions(html: str):
    """Anchor texts, link paths, headings and footer text of one page."""
    page = parse_page(html)
    regions = [text for text, _ in page.anchors]
    for _, href in page.anchors:
        if href and not href.startswith(_PHONE_SCHEMES):
            regions.append(normalize_text(urlsplit(href).path))
    regions.extend(page.headings)
    if page.footer_text:
        regions.append(page.footer_text)
    return regions


def detect_section(snapshot: SiteSnapshot, lexicon: KeywordLexicon, kind: str) -> int:
    """1 iff any page shows a ``kind`` phrase in a link, heading or footer."""
    if kind not in SECTION_KINDS:
        raise ValueError(f"kind must be one of {SECTION_KINDS}, got {kind!r}")
    phrases = lexicon.phrases_for(kind)
    for _, html in snapshot.pages:
        for region in _page_regions(html):
            if region and any(phrase in region for phrase in phrases):
                return 1
    return 0


def _digit_spans(text: str):
    """(start, end) spans of separator-tolerant digit runs of phone length."""
    for match in _DIGIT_RUN.finditer(text):
        run = match.group().rstrip(" ().-")
        digits = sum(ch.isdigit() for ch in run)
        if _MIN_DIGITS <= digits <= _MAX_DIGITS:
            yield match.start(), match.start() + len(run)


def detect_telephone(snapshot: SiteSnapshot, lexicon: KeywordLexicon) -> int:
    """1 iff a phone-scheme link exists or a phone-length digit run sits
    within 40 characters of a telephone/fax keyword."""
    keywords = lexicon.telephone_keywords_normalized()
    keyword_res = [re.compile(rf"(?<!\w){re.escape(k)}(?!\w)") for k in keywords]
    for _, html in snapshot.pages:
        page = parse_page(html)
        for _, href in page.anchors:
            if href and href.strip().casefold().startswith(_PHONE_SCHEMES):
                return 1
        text = page.full_text
        number_spans = list(_digit_spans(text))
        if not number_spans:
            continue
        for regex in keyword_res:
            for kw in regex.finditer(text):
                for start, end in number_spans:
                    gap = max(start - kw.end(), kw.start() - end)
                    if gap <= _PHONE_PROXIMITY:
                        return 1
    return 0


def extract_features(url: str, policy: FetchPolicy,
                     lexicon: Optional[KeywordLexicon] = None) -> FeatureVector:
    """Fetch a site and reduce it to the five binary predictors."""
    lexicon = lexicon or default_lexicon()
    snapshot = fetch_site(url, policy, lexicon)
    return features_from_snapshot(snapshot, lexicon, source_url=url)


def features_from_snapshot(snapshot: SiteSnapshot, lexicon: Optional[KeywordLexicon] = None,
                           source_url: Optional[str] = None) -> FeatureVector:
    """Apply all five detectors to an existing snapshot."""
    lexicon = lexicon or default_lexicon()
    return FeatureVector(
        padlock=detect_padlock(snapshot),
        contact=detect_section(snapshot, lexicon, "contact"),
        telephone=detect_telephone(snapshot, lexicon),
        about=detect_section(snapshot, lexicon, "about"),
        terms=detect_section(snapshot, lexicon, "terms"),
        source_url=source_url if source_url is not None else snapshot.requested_url,
    )
