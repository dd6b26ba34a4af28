"""The detection robot: query construction, search fan-out, breadth-first
depth-limited link following, and the OA/NOA verdict for one article.

The crawl is deterministic: frontier order is (priority, discovery order)
within each depth level, a visited set over canonical URLs guarantees each
URL is fetched at most once, and the first full-text hit in that order wins.
"""

from __future__ import annotations

import time
import urllib.request
import urllib.robotparser
from dataclasses import dataclass, field
from typing import Optional, Protocol

from ..records import ArticleRecord, DetectionEvidence, Verdict
from . import urls as urlmod
from .extract import ExternalConverter, ExtractionError, extract_text, format_for
from .match import (
    NotFoundReason,
    contains_title,
    extract_candidate_links,
    match_full_text,
)


class DetectionError(RuntimeError):
    """Every search provider failed; the article's status stays UNKNOWN."""


@dataclass(frozen=True)
class FetchResult:
    url: str
    status: int
    format_tag: str
    data: bytes

    @property
    def ok(self) -> bool:
        return self.status == 200


class SearchProvider(Protocol):
    name: str
    blocklist: tuple[str, ...]

    def query(self, author: str, title: str) -> list[str]: ...


class Fetcher(Protocol):
    def fetch(self, url: str) -> FetchResult: ...


@dataclass(frozen=True)
class CrawlConfig:
    max_depth: int = 3
    per_host_rate: float = 0.0  # requests/second; 0 disables throttling
    max_in_flight: int = 1
    fetch_timeout: float = 10.0
    max_links_followed_per_page: int = 20
    title_similarity_threshold: float = 0.90
    head_fraction: float = 0.20
    tail_fraction: float = 0.20

    def validate(self) -> None:
        if not (0.0 < self.head_fraction <= 0.5):
            raise ValueError("head_fraction must be in (0, 0.5]")
        if not (0.0 < self.tail_fraction <= 0.5):
            raise ValueError("tail_fraction must be in (0, 0.5]")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")


class Clock:
    """Wall clock; tests substitute a fake with the same surface."""

    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


@dataclass
class FetchLogEntry:
    timestamp: float
    url: str
    status: int
    host: str


class HostRateLimiter:
    """Token-spacing limiter: consecutive fetches to one host are at least
    1/rate seconds apart."""

    def __init__(self, rate: float, clock: Clock):
        self.min_interval = 1.0 / rate if rate > 0 else 0.0
        self.clock = clock
        self._last: dict[str, float] = {}

    def wait(self, host: str) -> None:
        if self.min_interval <= 0:
            return
        last = self._last.get(host)
        now = self.clock.now()
        if last is not None:
            wake = last + self.min_interval
            if now < wake:
                self.clock.sleep(wake - now)
                now = wake
        self._last[host] = now


def format_query(surname: str, title: str) -> str:
    """Search query: bare surname plus the exact title as a quoted phrase."""
    title = title.replace("\\", "\\\\").replace('"', '\\"')
    title = " ".join(title.split())
    surname = " ".join(surname.split())
    return f'{surname} "{title}"'


def build_query(record: ArticleRecord) -> str:
    return format_query(record.first_author_surname, record.title)


@dataclass
class CrawlObserver:
    """Collects the per-article fetch log for audit assertions."""

    fetch_log: list[FetchLogEntry] = field(default_factory=list)


def _search_fanout(record, providers, config) -> list[str]:
    results: list[str] = []
    n_failed = 0
    for provider in providers:
        try:
            urls = provider.query(record.first_author_surname, record.title)
        except Exception:
            n_failed += 1
            continue
        results.extend(
            urlmod.filter_irrelevant_links(urls, getattr(provider, "blocklist", ())))
    if n_failed == len(providers):
        raise DetectionError(
            f"all {len(providers)} search providers failed for {record.id}")
    return urlmod.prioritize_urls(urlmod.dedup_urls(results))


def detect_oa(record: ArticleRecord, providers, fetcher: Fetcher,
              config: CrawlConfig = CrawlConfig(), *,
              converter: Optional[ExternalConverter] = None,
              clock: Optional[Clock] = None,
              observer: Optional[CrawlObserver] = None) -> DetectionEvidence:
    """Classify one article OA or NOA with evidence.

    Breadth-first over search results and candidate links, PDF/PS-first
    within each page's contribution, visited set on canonical URLs, depth
    capped at config.max_depth. Raises DetectionError when every provider
    fails (status stays UNKNOWN); provider responses that are merely empty
    yield NOA{EXHAUSTED}.
    """
    if not providers:
        raise DetectionError("no search providers configured")
    config.validate()
    clock = clock or Clock()
    limiter = HostRateLimiter(config.per_host_rate, clock)

    frontier = [(url, 0) for url in _search_fanout(record, providers, config)]
    visited: set[str] = set()
    max_depth_seen = 0
    low_confidence = False

    idx = 0
    while idx < len(frontier):
        url, depth = frontier[idx]
        idx += 1
        if url in visited:
            continue
        visited.add(url)
        max_depth_seen = max(max_depth_seen, depth)

        host = urlmod.host_of(url)
        limiter.wait(host)
        result = fetcher.fetch(url)
        if observer is not None:
            observer.fetch_log.append(
                FetchLogEntry(clock.now(), url, result.status, host))
        if not result.ok:
            continue
        try:
            text = extract_text(result.data, result.format_tag, converter)
        except ExtractionError:
            continue

        verdict = match_full_text(
            text, record,
            title_similarity_threshold=config.title_similarity_threshold,
            head_fraction=config.head_fraction,
            tail_fraction=config.tail_fraction)
        low_confidence = low_confidence or verdict.low_confidence
        if verdict.found:
            return DetectionEvidence(
                article_id=record.id, verdict=Verdict.OA, url=url,
                match_head_offset=verdict.head_offset,
                match_tail_marker=verdict.tail_evidence,
                depth=depth, timestamp=clock.now(),
                low_confidence=low_confidence)
        # Title present but no full text in an HTML page: follow links.
        title_present = (
            verdict.reason is NotFoundReason.NO_REFERENCES_SECTION
            or (verdict.reason is NotFoundReason.NO_TITLE_MATCH
                and contains_title(
                    text, record,
                    title_similarity_threshold=config.title_similarity_threshold)))
        if (title_present and result.format_tag in ("html", "xml")
                and depth < config.max_depth):
            links = extract_candidate_links(
                result.data.decode("utf-8", errors="replace"), url, record,
                max_links=config.max_links_followed_per_page)
            links = urlmod.prioritize_urls(urlmod.dedup_urls(links))
            frontier.extend(
                (link, depth + 1) for link in links if link not in visited)

    return DetectionEvidence(
        article_id=record.id, verdict=Verdict.NOA,
        reason=NotFoundReason.EXHAUSTED.value, depth=max_depth_seen,
        timestamp=clock.now(), low_confidence=low_confidence)


# ---------------------------------------------------------------------------
# Live implementations (not used by the offline test harness)
# ---------------------------------------------------------------------------

class LiveFetcher:
    """urllib-based fetcher with timeout and robots.txt compliance (on by
    default)."""

    def __init__(self, timeout: float = 10.0, respect_robots: bool = True,
                 user_agent: str = "oafinder/0.1"):
        self.timeout = timeout
        self.respect_robots = respect_robots
        self.user_agent = user_agent
        self._robots: dict[str, urllib.robotparser.RobotFileParser] = {}

    def _allowed(self, url: str) -> bool:
        if not self.respect_robots:
            return True
        host = urlmod.host_of(url)
        rp = self._robots.get(host)
        if rp is None:
            rp = urllib.robotparser.RobotFileParser()
            rp.set_url(f"http://{host}/robots.txt")
            try:
                rp.read()
            except OSError:
                rp.allow_all = True
            self._robots[host] = rp
        return rp.can_fetch(self.user_agent, url)

    def fetch(self, url: str) -> FetchResult:
        if not self._allowed(url):
            return FetchResult(url, 403, "text", b"")
        req = urllib.request.Request(url, headers={"User-Agent": self.user_agent})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                data = resp.read()
                ctype = resp.headers.get("Content-Type")
                return FetchResult(url, resp.status, format_for(ctype, url), data)
        except urllib.error.HTTPError as exc:
            return FetchResult(url, exc.code, "text", b"")
        except OSError:
            return FetchResult(url, 0, "text", b"")


class LiveSearchProvider:
    """HTTP search provider from a URL template and a URL-extracting regex.

    url_template gets the percent-encoded query substituted for {query};
    result_pattern's first group captures each result URL.
    """

    def __init__(self, name: str, url_template: str, result_pattern: str,
                 blocklist: tuple[str, ...] = (), fetcher: Optional[LiveFetcher] = None):
        import re

        self.name = name
        self.url_template = url_template
        self.result_re = re.compile(result_pattern)
        self.blocklist = blocklist
        self.fetcher = fetcher or LiveFetcher()

    def query(self, author: str, title: str) -> list[str]:
        from urllib.parse import quote_plus

        q = format_query(author, title)
        result = self.fetcher.fetch(self.url_template.format(query=quote_plus(q)))
        if not result.ok:
            raise DetectionError(f"provider {self.name} returned {result.status}")
        body = result.data.decode("utf-8", errors="replace")
        return [m.group(1) for m in self.result_re.finditer(body)]
