"""Site fetching: live HTTP with bounded redirects/size, or offline fixtures.

A snapshot is the landing page plus up to ``max_secondary_pages``
same-domain pages whose link text or target path matches the lexicon
(candidate contact/about/terms pages).  Offline mode reads saved HTML from
a fixture directory and performs zero network operations.
"""

from __future__ import annotations

import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional
from urllib.parse import urljoin, urlsplit, urlunsplit

import requests

from ..errors import (
    BodyTooLargeError,
    FetchTimeoutError,
    NetworkUnreachableError,
    NonHtmlContentError,
    TooManyRedirectsError,
)
from ..screener import normalize_domain
from .html_text import normalize_text, parse_page
from .lexicon import KeywordLexicon, default_lexicon

__all__ = [
    "FetchPolicy",
    "SiteSnapshot",
    "FetchCounters",
    "fetch_site",
    "get_fetch_counters",
    "reset_fetch_counters",
]

logger = logging.getLogger(__name__)

_REDIRECT_CODES = (301, 302, 303, 307, 308)
_HTML_TYPES = ("text/html", "application/xhtml+xml")
_SECONDARY_WORKERS = 4


@dataclass(frozen=True)
class FetchPolicy:
    """Bounds on a single site fetch; immutable and shareable."""

    timeout: float = 10.0
    max_redirects: int = 5
    max_body_bytes: int = 2_000_000
    max_secondary_pages: int = 5
    offline_root: Optional[Path] = None

    def __post_init__(self):
        for name in ("timeout", "max_redirects", "max_body_bytes", "max_secondary_pages"):
            if getattr(self, name) <= 0:
                raise ValueError(f"FetchPolicy.{name} must be strictly positive")
        if self.offline_root is not None:
            object.__setattr__(self, "offline_root", Path(self.offline_root))


@dataclass(frozen=True)
class SiteSnapshot:
    """One fetched website: landing page first, candidate pages after."""

    requested_url: str
    final_url: str
    final_scheme_secure: bool
    pages: tuple[tuple[str, str], ...]   # (url, html)

    def __post_init__(self):
        if not self.pages:
            raise ValueError("snapshot must contain at least the landing page")
        scheme = urlsplit(self.final_url).scheme
        if self.final_scheme_secure != (scheme == "https"):
            raise ValueError("final_scheme_secure contradicts the final URL scheme")


@dataclass
class FetchCounters:
    """Observability hook: lets tests assert that no fetching happened."""

    snapshots: int = 0
    http_requests: int = 0


_counters = FetchCounters()
_counters_lock = threading.Lock()


def get_fetch_counters() -> FetchCounters:
    with _counters_lock:
        return FetchCounters(_counters.snapshots, _counters.http_requests)


def reset_fetch_counters() -> None:
    with _counters_lock:
        _counters.snapshots = 0
        _counters.http_requests = 0


def _count(field_name: str) -> None:
    with _counters_lock:
        setattr(_counters, field_name, getattr(_counters, field_name) + 1)


def _complete_url(url: str) -> str:
    # default to http so an upgrade redirect is observable
    return url if "://" in url else "http://" + url


def _looks_like_html(head: bytes) -> bool:
    sample = head[:512].lstrip().lower()
    return sample.startswith(b"<!doctype") or b"<html" in sample or sample.startswith(b"<")


class _HttpFetcher:
    """One session worth of GETs with explicit redirect and size bounds."""

    def __init__(self, policy: FetchPolicy):
        self.policy = policy
        self.session = requests.Session()
        self.session.headers["User-Agent"] = "sourcescope/0.1"
        self._verify = True
        self._warned_cert = False

    def close(self):
        self.session.close()

    def _single_get(self, url: str) -> requests.Response:
        _count("http_requests")
        try:
            return self.session.get(
                url, timeout=self.policy.timeout, allow_redirects=False,
                stream=True, verify=self._verify)
        except requests.exceptions.SSLError:
            if self._verify:
                # TLS negotiated but the certificate failed validation; the
                # padlock bit tracks protocol use, not certificate health.
                logger.warning("certificate verification failed for %s; "
                               "continuing unverified (padlock unaffected)", url)
                self._verify = False
                return self._single_get(url)
            raise

    def get_html(self, url: str) -> tuple[str, str]:
        """Follow redirects and return (final_url, html_text)."""
        current = url
        for _ in range(self.policy.max_redirects + 1):
            try:
                response = self._single_get(current)
            except requests.exceptions.Timeout:
                raise FetchTimeoutError(current, "request timed out") from None
            except requests.exceptions.ConnectionError as exc:
                raise NetworkUnreachableError(current, f"connection failed: {exc}") from None
            except requests.exceptions.RequestException as exc:
                raise NetworkUnreachableError(current, f"request failed: {exc}") from None
            with response:
                if response.status_code in _REDIRECT_CODES:
                    location = response.headers.get("Location")
                    if not location:
                        raise NetworkUnreachableError(current, "redirect without Location")
                    current = urljoin(current, location)
                    continue
                if response.status_code >= 400:
                    raise NetworkUnreachableError(
                        current, f"HTTP {response.status_code}")
                content_type = (response.headers.get("Content-Type") or "").split(";")[0].strip().lower()
                if content_type and content_type not in _HTML_TYPES:
                    raise NonHtmlContentError(current, f"content type {content_type!r}")
                body = self._read_limited(response, current)
                if not content_type and not _looks_like_html(body):
                    raise NonHtmlContentError(current, "response does not look like HTML")
                encoding = response.encoding or "utf-8"
                try:
                    text = body.decode(encoding, errors="replace")
                except LookupError:
                    text = body.decode("utf-8", errors="replace")
                return current, text
        raise TooManyRedirectsError(url, f"more than {self.policy.max_redirects} redirects")

    def _read_limited(self, response: requests.Response, url: str) -> bytes:
        limit = self.policy.max_body_bytes
        chunks = []
        read = 0
        for chunk in response.iter_content(chunk_size=65536):
            read += len(chunk)
            if read > limit:
                raise BodyTooLargeError(url, f"body exceeds {limit} bytes")
            chunks.append(chunk)
        return b"".join(chunks)


def _candidate_links(landing_url: str, html: str, lexicon: KeywordLexicon,
                     limit: int) -> list[str]:
    """Same-domain links whose text or path matches any section phrase."""
    phrases = lexicon.all_section_phrases()
    try:
        site_domain = normalize_domain(landing_url)
    except Exception:
        return []
    page = parse_page(html)
    seen: dict[str, None] = {}
    for text, href in page.anchors:
        if not href or href.startswith(("#", "mailto:", "tel:", "fax:", "callto:", "javascript:")):
            continue
        resolved = urljoin(landing_url, href)
        parts = urlsplit(resolved)
        if parts.scheme not in ("http", "https"):
            continue
        resolved = urlunsplit((parts.scheme, parts.netloc, parts.path, parts.query, ""))
        if resolved == landing_url:
            continue
        try:
            if normalize_domain(resolved) != site_domain:
                continue
        except Exception:
            continue
        path = normalize_text(parts.path)
        if any(p in text or p in path for p in phrases):
            seen.setdefault(resolved, None)
        if len(seen) >= limit:
            break
    return list(seen)


def _fetch_live(url: str, policy: FetchPolicy, lexicon: KeywordLexicon) -> SiteSnapshot:
    requested = _complete_url(url)
    fetcher = _HttpFetcher(policy)
    try:
        final_url, landing_html = fetcher.get_html(requested)
        pages = [(final_url, landing_html)]
        candidates = _candidate_links(final_url, landing_html, lexicon,
                                      policy.max_secondary_pages)

        def fetch_one(link: str):
            try:
                return fetcher.get_html(link)
            except Exception as exc:
                logger.warning("skipping candidate page %s: %s", link, exc)
                return None

        if candidates:
            with ThreadPoolExecutor(max_workers=_SECONDARY_WORKERS) as pool:
                for result in pool.map(fetch_one, candidates):
                    if result is not None:
                        pages.append(result)
    finally:
        fetcher.close()
    secure = urlsplit(final_url).scheme == "https"
    return SiteSnapshot(
        requested_url=url,
        final_url=final_url,
        final_scheme_secure=secure,
        pages=tuple(pages),
    )


def _force_scheme(url: str, secure: bool) -> str:
    parts = urlsplit(_complete_url(url))
    scheme = "https" if secure else "http"
    return urlunsplit((scheme, parts.netloc, parts.path or "/", parts.query, ""))


def _fixture_dir(root: Path, url: str) -> Path:
    if (root / "index.html").is_file():
        return root
    candidates = []
    try:
        candidates.append(normalize_domain(url))
    except Exception:
        pass
    host = urlsplit(_complete_url(url)).hostname
    if host:
        candidates.append(host.casefold())
    for name in candidates:
        site_dir = root / name
        if (site_dir / "index.html").is_file():
            return site_dir
    raise NetworkUnreachableError(url, f"no offline fixture under {root}")


def _fetch_offline(url: str, policy: FetchPolicy) -> SiteSnapshot:
    assert policy.offline_root is not None
    site_dir = _fixture_dir(policy.offline_root, url)

    manifest = {}
    manifest_path = site_dir / "manifest.json"
    if manifest_path.is_file():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))

    requested_scheme = urlsplit(_complete_url(url)).scheme
    secure = bool(manifest.get("final_scheme_secure", requested_scheme == "https"))
    final_url = _force_scheme(manifest.get("final_url", url), secure)

    pages = [(final_url, (site_dir / "index.html").read_text(encoding="utf-8"))]
    for name in manifest.get("secondary_pages", [])[: policy.max_secondary_pages]:
        page_path = site_dir / name
        if not page_path.is_file():
            raise NetworkUnreachableError(url, f"fixture lists missing page {name!r}")
        pages.append((urljoin(final_url, name), page_path.read_text(encoding="utf-8")))
    return SiteSnapshot(
        requested_url=url,
        final_url=final_url,
        final_scheme_secure=secure,
        pages=tuple(pages),
    )


def fetch_site(url: str, policy: FetchPolicy,
               lexicon: Optional[KeywordLexicon] = None) -> SiteSnapshot:
    """Fetch a website's landing page plus candidate secondary pages.

    With ``policy.offline_root`` set, the snapshot is read from fixtures
    and no sockets are opened.
    """
    _count("snapshots")
    if policy.offline_root is not None:
        return _fetch_offline(url, policy)
    return _fetch_live(url, policy, lexicon or default_lexicon())
