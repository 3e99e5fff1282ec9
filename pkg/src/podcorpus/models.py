"""Shared domain types and the on-disk JSONL schemas for every pipeline stage.

All types are immutable values: once constructed they can be shared freely
between workers. Times are stored as decimal seconds quantized to millisecond
precision at construction, so that serialization is bit-stable and
cross-language parsing is unambiguous. Missing values are explicit ``None``,
never sentinels.

Two release formats are defined: episode-level JSONL (metadata, the full
word-level transcript, quality flags, and role assignments) and turn-level
JSONL (speaker turns keyed back to the episode). Every file starts with a
single header line carrying the schema version.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import date
from typing import Iterable, Mapping, Sequence

SCHEMA_VERSION = 1

HOST = "Host"
GUEST = "Guest"
NEITHER = "Neither"
UNKNOWN = "Unknown"

ROLE_LABELS = frozenset({HOST, GUEST, NEITHER})
TURN_ROLES = frozenset({HOST, GUEST, UNKNOWN})

# Canonical podcast category tags. Feeds carrying anything else are mapped to
# "unknown" at ingest time.
CATEGORY_REGISTRY = frozenset({
    "arts", "business", "comedy", "education", "fiction", "government",
    "health", "history", "kids", "leisure", "music", "news", "religion",
    "science", "society", "sports", "technology", "crime", "tv", "unknown",
})

THETA_TOL = 1e-9


class SchemaError(ValueError):
    """Raised when a persisted file does not match the expected schema."""


def _ms(value: float | None) -> float | None:
    """Quantize a time value to millisecond precision."""
    if value is None:
        return None
    return round(float(value), 3)


@dataclass(frozen=True)
class PodcastMeta:
    podcast_id: str
    title: str = ""
    category: str = "unknown"
    hosting_platform: str = "unknown"
    feed_url: str = ""
    description: str = ""


@dataclass(frozen=True)
class EpisodeMeta:
    episode_id: str
    podcast_id: str
    title: str = ""
    description: str = ""
    publication_date: date | None = None
    duration_s: int | None = None
    language: str = ""


@dataclass(frozen=True)
class WordRecord:
    """One transcribed token with timing, optional prosody, and speaker label.

    Per-word prosodic values are means over the acoustic frames assigned to
    the word; they are either all present or all absent.
    """

    token: str
    start_s: float
    end_s: float
    f0_mean: float | None = None
    f1_mean: float | None = None
    mfcc_mean: tuple[float, float, float, float] | None = None
    speaker: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "start_s", _ms(self.start_s))
        object.__setattr__(self, "end_s", _ms(self.end_s))
        if self.mfcc_mean is not None:
            object.__setattr__(self, "mfcc_mean", tuple(float(x) for x in self.mfcc_mean))

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    def has_prosody(self) -> bool:
        return self.f0_mean is not None


@dataclass(frozen=True)
class Turn:
    """A maximal run of words attributed to one speaker."""

    turn_id: int
    speaker: str
    text: str
    start_s: float
    end_s: float
    role: str = UNKNOWN
    speaker_name: str | None = None
    f0_mean: float | None = None
    f1_mean: float | None = None
    mfcc_mean: tuple[float, float, float, float] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "start_s", _ms(self.start_s))
        object.__setattr__(self, "end_s", _ms(self.end_s))
        if self.mfcc_mean is not None:
            object.__setattr__(self, "mfcc_mean", tuple(float(x) for x in self.mfcc_mean))


@dataclass(frozen=True)
class RoleAssignment:
    """A person name resolved to Host/Guest/Neither for one episode."""

    name: str
    label: str
    confidence: float
    source_episode: str


@dataclass(frozen=True)
class EpisodeTopics:
    episode_id: str
    theta: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", tuple(float(x) for x in self.theta))


@dataclass(frozen=True)
class EpisodeRecord:
    """One episode's metadata, transcript, quality flags, and derived artifacts.

    This is the unit of pipeline parallelism: per-episode stages consume and
    produce EpisodeRecords with no shared state.
    """

    podcast: PodcastMeta
    episode: EpisodeMeta
    words: tuple[WordRecord, ...] = ()
    flags: tuple[str, ...] = ()
    roles: tuple[RoleAssignment, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "flags", tuple(self.flags))
        object.__setattr__(self, "roles", tuple(self.roles))

    @property
    def episode_id(self) -> str:
        return self.episode.episode_id

    def transcript_tokens(self) -> list[str]:
        return [w.token for w in self.words]

    def with_words(self, words: Iterable[WordRecord]) -> "EpisodeRecord":
        return replace(self, words=tuple(words))

    def with_flag(self, flag: str) -> "EpisodeRecord":
        if flag in self.flags:
            return self
        return replace(self, flags=self.flags + (flag,))

    def with_roles(self, roles: Iterable[RoleAssignment]) -> "EpisodeRecord":
        return replace(self, roles=tuple(roles))


# ---------------------------------------------------------------------------
# Validation


def validate_episode(
    record: EpisodeRecord,
    turns: Sequence[Turn] | None = None,
    theta: Sequence[float] | None = None,
) -> list[str]:
    """Report every violated type invariant on a parsed record.

    Violations are data, not failures: this never raises on structurally
    well-formed input. An empty report means all invariants hold.
    """
    report: list[str] = []
    if not record.podcast.podcast_id:
        report.append("podcast id empty")
    if record.podcast.category not in CATEGORY_REGISTRY:
        report.append("category registry")
    if not record.episode.episode_id:
        report.append("episode id empty")
    if record.episode.duration_s is not None and record.episode.duration_s < 0:
        report.append("duration negative")

    prev_start = None
    for w in record.words:
        if w.end_s < w.start_s:
            report.append(f"word time order: {w.token!r} ends before it starts")
        if prev_start is not None and w.start_s < prev_start:
            report.append(f"word start order: {w.token!r} starts before its predecessor")
        prev_start = w.start_s
        present = (w.f0_mean is not None, w.f1_mean is not None, w.mfcc_mean is not None)
        if any(present) and not all(present):
            report.append(f"prosody completeness: {w.token!r}")

    for r in record.roles:
        if len(r.name.split()) != 2:
            report.append(f"name token count: {r.name!r}")
        if r.label not in ROLE_LABELS:
            report.append(f"role label: {r.label!r}")
        if not 0.0 <= r.confidence <= 1.0:
            report.append(f"confidence range: {r.confidence!r}")

    if turns is not None:
        prev: Turn | None = None
        for t in turns:
            if not t.text:
                report.append(f"turn text empty: turn {t.turn_id}")
            if t.role not in TURN_ROLES:
                report.append(f"turn role: {t.role!r}")
            if prev is not None:
                if t.start_s < prev.start_s:
                    report.append(f"turn order: turn {t.turn_id}")
                if t.speaker == prev.speaker:
                    report.append(f"turn speaker adjacency: turn {t.turn_id}")
            prev = t

    if theta is not None:
        if any(x < 0 for x in theta):
            report.append("topic range: negative entry")
        if theta and abs(sum(theta) - 1.0) > THETA_TOL:
            report.append(f"topic normalization: sum {sum(theta)!r}")

    return report


# ---------------------------------------------------------------------------
# JSON (de)serialization

def _word_to_dict(w: WordRecord) -> dict:
    return {
        "token": w.token,
        "start_s": w.start_s,
        "end_s": w.end_s,
        "f0_mean": w.f0_mean,
        "f1_mean": w.f1_mean,
        "mfcc_mean": list(w.mfcc_mean) if w.mfcc_mean is not None else None,
        "speaker": w.speaker,
    }


def _word_from_dict(d: Mapping) -> WordRecord:
    mfcc = d.get("mfcc_mean")
    return WordRecord(
        token=d["token"],
        start_s=d["start_s"],
        end_s=d["end_s"],
        f0_mean=d.get("f0_mean"),
        f1_mean=d.get("f1_mean"),
        mfcc_mean=tuple(mfcc) if mfcc is not None else None,
        speaker=d.get("speaker"),
    )


def episode_to_dict(record: EpisodeRecord) -> dict:
    e = record.episode
    p = record.podcast
    return {
        "podcast": {
            "podcast_id": p.podcast_id,
            "title": p.title,
            "category": p.category,
            "hosting_platform": p.hosting_platform,
            "feed_url": p.feed_url,
            "description": p.description,
        },
        "episode": {
            "episode_id": e.episode_id,
            "podcast_id": e.podcast_id,
            "title": e.title,
            "description": e.description,
            "publication_date": e.publication_date.isoformat() if e.publication_date else None,
            "duration_s": e.duration_s,
            "language": e.language,
        },
        "words": [_word_to_dict(w) for w in record.words],
        "flags": list(record.flags),
        "roles": [
            {
                "name": r.name,
                "label": r.label,
                "confidence": r.confidence,
                "source_episode": r.source_episode,
            }
            for r in record.roles
        ],
    }


def episode_from_dict(d: Mapping) -> EpisodeRecord:
    p = d["podcast"]
    e = d["episode"]
    pub = e.get("publication_date")
    return EpisodeRecord(
        podcast=PodcastMeta(
            podcast_id=p["podcast_id"],
            title=p.get("title", ""),
            category=p.get("category", "unknown"),
            hosting_platform=p.get("hosting_platform", "unknown"),
            feed_url=p.get("feed_url", ""),
            description=p.get("description", ""),
        ),
        episode=EpisodeMeta(
            episode_id=e["episode_id"],
            podcast_id=e["podcast_id"],
            title=e.get("title", ""),
            description=e.get("description", ""),
            publication_date=date.fromisoformat(pub) if pub else None,
            duration_s=e.get("duration_s"),
            language=e.get("language", ""),
        ),
        words=tuple(_word_from_dict(w) for w in d.get("words", [])),
        flags=tuple(d.get("flags", [])),
        roles=tuple(
            RoleAssignment(r["name"], r["label"], r["confidence"], r["source_episode"])
            for r in d.get("roles", [])
        ),
    )


def turn_to_dict(episode_id: str, t: Turn) -> dict:
    return {
        "episode_id": episode_id,
        "turn_id": t.turn_id,
        "speaker": t.speaker,
        "role": t.role,
        "speaker_name": t.speaker_name,
        "text": t.text,
        "start_s": t.start_s,
        "end_s": t.end_s,
        "f0_mean": t.f0_mean,
        "f1_mean": t.f1_mean,
        "mfcc_mean": list(t.mfcc_mean) if t.mfcc_mean is not None else None,
    }


def turn_from_dict(d: Mapping) -> tuple[str, Turn]:
    mfcc = d.get("mfcc_mean")
    return d["episode_id"], Turn(
        turn_id=d["turn_id"],
        speaker=d["speaker"],
        text=d["text"],
        start_s=d["start_s"],
        end_s=d["end_s"],
        role=d.get("role", UNKNOWN),
        speaker_name=d.get("speaker_name"),
        f0_mean=d.get("f0_mean"),
        f1_mean=d.get("f1_mean"),
        mfcc_mean=tuple(mfcc) if mfcc is not None else None,
    )


# ---------------------------------------------------------------------------
# JSONL files

def _dump(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def _write_jsonl(path, record_type: str, dicts: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dump({"schema_version": SCHEMA_VERSION, "record_type": record_type}) + "\n")
        for d in dicts:
            fh.write(_dump(d) + "\n")


def _read_jsonl(path, record_type: str) -> list[dict]:
    out: list[dict] = []
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise SchemaError(f"{path}: missing schema header")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: line 1: malformed header: {exc.msg}") from exc
        version = header.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaError(
                f"{path}: schema version mismatch: file has {version!r}, expected {SCHEMA_VERSION}"
            )
        if header.get("record_type") != record_type:
            raise SchemaError(
                f"{path}: record type mismatch: file has {header.get('record_type')!r}, "
                f"expected {record_type!r}"
            )
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{path}: line {lineno}: malformed record: {exc.msg}") from exc
    return out


def write_episode_jsonl(path, records: Iterable[EpisodeRecord]) -> None:
    _write_jsonl(path, "episode", (episode_to_dict(r) for r in records))


def read_episode_jsonl(path) -> list[EpisodeRecord]:
    return [episode_from_dict(d) for d in _read_jsonl(path, "episode")]


def write_turn_jsonl(path, turns_by_episode: Mapping[str, Sequence[Turn]]) -> None:
    def rows():
        for episode_id in turns_by_episode:
            for t in turns_by_episode[episode_id]:
                yield turn_to_dict(episode_id, t)

    _write_jsonl(path, "turn", rows())


def read_turn_jsonl(path) -> dict[str, list[Turn]]:
    out: dict[str, list[Turn]] = {}
    for d in _read_jsonl(path, "turn"):
        episode_id, turn = turn_from_dict(d)
        out.setdefault(episode_id, []).append(turn)
    return out


def write_word_jsonl(path, words: Iterable[WordRecord]) -> None:
    _write_jsonl(path, "word", (_word_to_dict(w) for w in words))


def read_word_jsonl(path) -> list[WordRecord]:
    return [_word_from_dict(d) for d in _read_jsonl(path, "word")]
