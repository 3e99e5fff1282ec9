"""RSS feed parsing and corpus scoping filters.

Feeds are consumed from disk (optionally gzip-compressed); there is no
network client here. A manifest CSV maps podcast ids to feed files, which
keeps runs reproducible. Scoping retains episodes inside an inclusive UTC
calendar-date window whose language tag matches a prefix (case-insensitive);
episodes without a parseable publication date are quarantined, not silently
dropped.
"""

from __future__ import annotations

import csv
import gzip
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from email.utils import parsedate_to_datetime
from pathlib import Path
from typing import Iterable
from urllib.parse import urlparse

from .models import CATEGORY_REGISTRY, EpisodeMeta, PodcastMeta

ITUNES_NS = "http://www.itunes.com/dtds/podcast-1.0.dtd"

FLAG_NO_DATE = "pubdate unparsed"
FLAG_NO_DURATION = "duration unparsed"


class FeedParseError(ValueError):
    """Structured feed parsing failure with document position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 offset: int | None = None):
        self.line = line
        self.column = column
        self.offset = offset
        where = ""
        if line is not None:
            where = f" at line {line}, column {column}"
            if offset is not None:
                where += f" (byte offset {offset})"
        super().__init__(message + where)


@dataclass(frozen=True)
class FeedDocument:
    raw_xml: str
    fetched_at: datetime | None = None


@dataclass(frozen=True)
class ParsedFeed:
    podcast: PodcastMeta
    episodes: tuple[EpisodeMeta, ...]
    # episode_id -> flags raised while parsing that item
    flags: dict[str, tuple[str, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class ScopeResult:
    retained: tuple[EpisodeMeta, ...]
    dropped_date: tuple[EpisodeMeta, ...]
    dropped_language: tuple[EpisodeMeta, ...]
    missing_date: tuple[EpisodeMeta, ...]

    @property
    def dropped_count(self) -> int:
        return len(self.dropped_date) + len(self.dropped_language) + len(self.missing_date)


def load_feed(path: str | Path) -> FeedDocument:
    path = Path(path)
    if path.suffix == ".gz":
        raw = gzip.open(path, "rt", encoding="utf-8").read()
    else:
        raw = path.read_text(encoding="utf-8")
    fetched = datetime.fromtimestamp(path.stat().st_mtime, tz=timezone.utc)
    return FeedDocument(raw_xml=raw, fetched_at=fetched)


def _text(element: ET.Element | None) -> str:
    if element is None or element.text is None:
        return ""
    return element.text.strip()


def _byte_offset(raw: str, line: int, column: int) -> int:
    lines = raw.split("\n")
    prefix = "\n".join(lines[: line - 1])
    if line > 1:
        prefix += "\n"
    return len(prefix.encode("utf-8")) + column


def parse_pub_date(raw: str) -> date | None:
    """Parse an RSS pubDate into a UTC calendar date, or None."""
    raw = raw.strip()
    if not raw:
        return None
    try:
        dt = parsedate_to_datetime(raw)
    except (TypeError, ValueError):
        dt = None
    if dt is None:
        try:
            dt = datetime.fromisoformat(raw)
        except ValueError:
            return None
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc)
    return dt.date()


def parse_duration(raw: str | None) -> int | None:
    """Parse "SS", "MM:SS", or "HH:MM:SS" into whole seconds.

    Negative or non-numeric components make the whole value absent; there is
    no partial parse.
    """
    if raw is None:
        return None
    parts = raw.strip().split(":")
    if not 1 <= len(parts) <= 3:
        return None
    total = 0
    for part in parts:
        part = part.strip()
        if not part.isdigit():
            return None
        total = total * 60 + int(part)
    return total


def _normalize_category(raw: str) -> str:
    cat = raw.strip().lower()
    return cat if cat in CATEGORY_REGISTRY else "unknown"


def _host_of(url: str) -> str:
    host = urlparse(url).netloc.lower()
    if host.startswith("www."):
        host = host[4:]
    return host or "unknown"


def parse_feed(doc: FeedDocument, podcast_id: str, feed_url: str = "") -> ParsedFeed:
    """Parse an RSS 2.0 document into podcast metadata plus one EpisodeMeta per item.

    Items with an unparseable publication date are still emitted, with the
    date absent and a flag recorded against the episode id.
    """
    if not doc.raw_xml.strip():
        raise FeedParseError("empty feed document")
    try:
        root = ET.fromstring(doc.raw_xml)
    except ET.ParseError as exc:
        line, column = exc.position
        raise FeedParseError(
            f"malformed XML: {exc.msg.split(':')[0]}",
            line=line, column=column,
            offset=_byte_offset(doc.raw_xml, line, column),
        ) from exc

    channel = root.find("channel")
    if channel is None:
        raise FeedParseError("missing <channel> element")

    category = _text(channel.find("category"))
    itunes_cat = channel.find(f"{{{ITUNES_NS}}}category")
    if itunes_cat is not None and itunes_cat.get("text"):
        category = itunes_cat.get("text", "")

    language = _text(channel.find("language"))

    platform = "unknown"
    first_enclosure = channel.find("item/enclosure")
    if first_enclosure is not None and first_enclosure.get("url"):
        platform = _host_of(first_enclosure.get("url", ""))
    elif _text(channel.find("link")):
        platform = _host_of(_text(channel.find("link")))

    podcast = PodcastMeta(
        podcast_id=podcast_id,
        title=_text(channel.find("title")),
        category=_normalize_category(category),
        hosting_platform=platform,
        feed_url=feed_url,
        description=_text(channel.find("description")),
    )

    episodes: list[EpisodeMeta] = []
    flags: dict[str, tuple[str, ...]] = {}
    for index, item in enumerate(channel.findall("item")):
        item_flags: list[str] = []
        guid = _text(item.find("guid"))
        enclosure = item.find("enclosure")
        enclosure_url = enclosure.get("url", "") if enclosure is not None else ""
        episode_id = guid or enclosure_url or f"{podcast_id}:item{index}"

        raw_date = _text(item.find("pubDate"))
        pub = parse_pub_date(raw_date)
        if pub is None:
            item_flags.append(FLAG_NO_DATE)

        raw_duration = _text(item.find(f"{{{ITUNES_NS}}}duration"))
        duration = parse_duration(raw_duration) if raw_duration else None
        if raw_duration and duration is None:
            item_flags.append(FLAG_NO_DURATION)

        episodes.append(EpisodeMeta(
            episode_id=episode_id,
            podcast_id=podcast_id,
            title=_text(item.find("title")),
            description=_text(item.find("description")),
            publication_date=pub,
            duration_s=duration,
            language=language,
        ))
        if item_flags:
            flags[episode_id] = tuple(item_flags)

    return ParsedFeed(podcast=podcast, episodes=tuple(episodes), flags=flags)


def filter_scope(
    episodes: Iterable[EpisodeMeta],
    date_from: date,
    date_to: date,
    language_prefix: str,
) -> ScopeResult:
    """Retain episodes inside the inclusive date window with a matching language prefix."""
    if date_from > date_to:
        raise ValueError(f"date range start {date_from} is after end {date_to}")
    prefix = language_prefix.lower()
    retained: list[EpisodeMeta] = []
    dropped_date: list[EpisodeMeta] = []
    dropped_language: list[EpisodeMeta] = []
    missing: list[EpisodeMeta] = []
    for ep in episodes:
        if ep.publication_date is None:
            missing.append(ep)
        elif not ep.language.lower().startswith(prefix):
            dropped_language.append(ep)
        elif not date_from <= ep.publication_date <= date_to:
            dropped_date.append(ep)
        else:
            retained.append(ep)
    return ScopeResult(
        retained=tuple(retained),
        dropped_date=tuple(dropped_date),
        dropped_language=tuple(dropped_language),
        missing_date=tuple(missing),
    )


def read_manifest(path: str | Path) -> list[tuple[str, Path]]:
    """Read the podcast_id -> feed file manifest CSV."""
    path = Path(path)
    rows: list[tuple[str, Path]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "podcast_id" not in reader.fieldnames \
                or "feed_path" not in reader.fieldnames:
            raise ValueError(f"{path}: manifest must have podcast_id and feed_path columns")
        for row in reader:
            feed_path = Path(row["feed_path"])
            if not feed_path.is_absolute():
                feed_path = path.parent / feed_path
            rows.append((row["podcast_id"], feed_path))
    return rows
