"""Host/Guest/Neither inference for person names mentioned in episodes.

Candidate names are two-token capitalized spans found in the podcast
description, the episode description, and the first 350 words of the
transcript. Each mention is classified by a pluggable classifier; the
shipped baseline matches configurable cue phrases in a 50-token context
window ("I'm your host ...", "my guest today is ..."). Predictions for the
same name within an episode are aggregated by maximum confidence.

A file-backed classifier replays precomputed predictions, so an externally
trained model can be dropped in without this package depending on it.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

from .models import GUEST, HOST, NEITHER, ROLE_LABELS, EpisodeRecord, RoleAssignment
from .textnorm import tokenize

TRANSCRIPT = "transcript"
EPISODE_DESCRIPTION = "episode_description"
PODCAST_DESCRIPTION = "podcast_description"

TRANSCRIPT_WORD_LIMIT = 350
CONTEXT_WINDOW_TOKENS = 50

HONORIFICS = frozenset({
    "dr", "mr", "mrs", "ms", "miss", "prof", "professor", "rev", "reverend",
    "sir", "dame", "lord", "lady", "president", "senator", "pastor", "coach",
})

# Capitalized tokens that are not part of person names: function words at
# sentence starts, calendar terms, places, platforms, and show vocabulary.
NON_PERSON_TOKENS = frozenset({
    "a", "an", "the", "this", "that", "these", "those", "i", "we", "you",
    "he", "she", "it", "they", "my", "our", "your", "his", "her", "their",
    "and", "but", "or", "so", "if", "as", "at", "by", "in", "on", "of", "to",
    "is", "was", "are", "be", "been", "am", "do", "does", "did", "not", "no",
    "yes", "all", "also", "after", "before", "now", "then", "there", "here",
    "what", "when", "where", "which", "who", "why", "how", "with", "without",
    "welcome", "thanks", "thank", "hello", "hey", "okay", "ok", "well", "oh",
    "today", "tonight", "everyone", "everybody", "folks", "listen",
    "monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
    "sunday", "january", "february", "march", "april", "may", "june", "july",
    "august", "september", "october", "november", "december",
    "new", "york", "los", "angeles", "san", "francisco", "las", "vegas",
    "united", "states", "america", "american", "north", "south", "east",
    "west", "city", "county", "street", "avenue",
    "youtube", "spotify", "apple", "google", "facebook", "twitter",
    "instagram", "amazon", "netflix", "patreon", "itunes",
    "podcast", "podcasts", "show", "shows", "episode", "episodes", "radio",
    "news", "daily", "weekly", "morning", "evening", "report", "live",
    "studio", "network", "media", "club", "god", "lord", "jesus", "christ",
    "bible", "church", "covid",
})

_TOKEN_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class CandidateMention:
    episode_id: str
    name: str
    source: str
    char_offset: int
    context: str


class RoleClassifier(Protocol):
    def classify(self, mention: CandidateMention) -> tuple[str, float]:
        """Return (label, confidence) for one mention; deterministic per mention."""


# ---------------------------------------------------------------------------
# Candidate extraction

def _clean(raw: str) -> str:
    tok = raw.strip("\"'“”‘’.,;:!?()[]{}")
    for suffix in ("'s", "’s"):
        if tok.endswith(suffix):
            tok = tok[: -len(suffix)]
    return tok


def _name_like(tok: str) -> bool:
    if len(tok) < 2 or not tok[0].isupper():
        return False
    if not all(ch.isalpha() or ch in "'-" for ch in tok):
        return False
    return tok.lower() not in NON_PERSON_TOKENS


def _scan_source(episode_id: str, text: str, source: str,
                 word_limit: int | None = None) -> list[CandidateMention]:
    matches = list(_TOKEN_RE.finditer(text))
    if word_limit is not None:
        matches = matches[:word_limit]
    cleaned = [_clean(m.group()) for m in matches]

    mentions: list[CandidateMention] = []
    i = 0
    n = len(matches)
    while i < n:
        if not _name_like(cleaned[i]):
            i += 1
            continue
        run_start = i
        while i < n and _name_like(cleaned[i]):
            i += 1
        run = list(range(run_start, i))
        while run and cleaned[run[0]].lower() in HONORIFICS:
            run = run[1:]
        if len(run) != 2:
            continue
        first, last = run
        lo = max(0, first - CONTEXT_WINDOW_TOKENS)
        hi = min(n, last + 1 + CONTEXT_WINDOW_TOKENS)
        mentions.append(CandidateMention(
            episode_id=episode_id,
            name=f"{cleaned[first]} {cleaned[last]}",
            source=source,
            char_offset=matches[first].start(),
            context=" ".join(m.group() for m in matches[lo:hi]),
        ))
    return mentions


def extract_candidates(record: EpisodeRecord) -> list[CandidateMention]:
    """Two-token capitalized person-name mentions with 50-token context windows.

    Scans the podcast description, episode description, and the first 350
    transcript words, in that order. Duplicates are preserved per occurrence;
    runs of three or more capitalized tokens are not person candidates.
    """
    episode_id = record.episode_id
    out: list[CandidateMention] = []
    out.extend(_scan_source(episode_id, record.podcast.description, PODCAST_DESCRIPTION))
    out.extend(_scan_source(episode_id, record.episode.description, EPISODE_DESCRIPTION))
    transcript = " ".join(record.transcript_tokens())
    out.extend(_scan_source(episode_id, transcript, TRANSCRIPT,
                            word_limit=TRANSCRIPT_WORD_LIMIT))
    return out


def candidates_from_spans(
    record: EpisodeRecord,
    spans: Iterable[tuple[str, str, int]],
) -> list[CandidateMention]:
    """Build mentions from externally computed (name, source, char_offset) spans.

    This is the entry point for NER systems run outside the pipeline; only
    two-token names are kept, and context windows are derived from the named
    source text.
    """
    texts = {
        PODCAST_DESCRIPTION: record.podcast.description,
        EPISODE_DESCRIPTION: record.episode.description,
        TRANSCRIPT: " ".join(record.transcript_tokens()),
    }
    out: list[CandidateMention] = []
    for name, source, char_offset in spans:
        if len(name.split()) != 2:
            continue
        text = texts[source]
        window_lo = " ".join(text[:char_offset].split()[-CONTEXT_WINDOW_TOKENS:])
        window_hi = " ".join(text[char_offset:].split()[: 2 + CONTEXT_WINDOW_TOKENS])
        out.append(CandidateMention(
            episode_id=record.episode_id,
            name=name,
            source=source,
            char_offset=char_offset,
            context=(window_lo + " " + window_hi).strip(),
        ))
    return out


# ---------------------------------------------------------------------------
# Classifiers

@dataclass(frozen=True)
class CueRule:
    label: str
    confidence: float
    patterns: tuple[str, ...]


@dataclass(frozen=True)
class CueConfig:
    """Ordered cue rules; the first matching pattern decides the label.

    Patterns are normalized token phrases. ``{name}`` expands to the
    mention's two name tokens, anchoring the cue to the name; patterns
    without the placeholder match anywhere in the context window.
    """

    rules: tuple[CueRule, ...]
    default_label: str = NEITHER
    default_confidence: float = 0.5


DEFAULT_CUES = CueConfig(rules=(
    CueRule(HOST, 0.9, (
        "your host {name}",
        "your hosts {name}",
        "i'm your host {name}",
        "i am your host {name}",
        "i'm {name} and this is",
        "i am {name} and this is",
        "this is {name} and you're listening",
        "hosted by {name}",
    )),
    CueRule(GUEST, 0.9, (
        "my guest {name}",
        "our guest {name}",
        "guest today is {name}",
        "guest is {name}",
        "joined by {name}",
        "joined today by {name}",
        "joining us is {name}",
        "joining me is {name}",
        "{name} joins us",
        "{name} joins me",
        "welcome to the show {name}",
        "welcome {name} to the show",
        "please welcome {name}",
        "interview with {name}",
        "interviewing {name}",
        "talking with {name}",
        "talking to {name}",
        "speaking with {name}",
        "sitting down with {name}",
        "here with {name}",
    )),
    CueRule(HOST, 0.6, (
        "your host",
        "your hosts",
    )),
    CueRule(GUEST, 0.6, (
        "my guest",
        "our guest",
        "joins us",
        "joins me",
        "joined by",
        "joining us",
        "joining me",
        "interview with",
        "welcome to the show",
        "on the show today",
    )),
))


def _subsequence_at(haystack: list[str], needle: list[str]) -> bool:
    n = len(needle)
    if n == 0 or n > len(haystack):
        return False
    for i in range(len(haystack) - n + 1):
        if haystack[i:i + n] == needle:
            return True
    return False


def classify_role_baseline(
    mention: CandidateMention, cues: CueConfig = DEFAULT_CUES
) -> tuple[str, float]:
    """Cue-phrase classification of one mention; total and deterministic."""
    context = tokenize(mention.context)
    name = " ".join(tokenize(mention.name))
    for rule in cues.rules:
        for pattern in rule.patterns:
            needle = pattern.replace("{name}", name).split()
            if _subsequence_at(context, needle):
                return rule.label, rule.confidence
    return cues.default_label, cues.default_confidence


class CuePhraseClassifier:
    def __init__(self, cues: CueConfig = DEFAULT_CUES):
        self.cues = cues

    def classify(self, mention: CandidateMention) -> tuple[str, float]:
        return classify_role_baseline(mention, self.cues)


class FileBackedClassifier:
    """Replays precomputed predictions from a CSV of (episode_id, name, label, confidence).

    The table is loaded once, immutably, before any workers start. Mentions
    without a table entry fall back to the default label.
    """

    def __init__(self, path: str | Path,
                 default: tuple[str, float] = (NEITHER, 0.5)):
        self.default = default
        self._table: dict[tuple[str, str], tuple[str, float]] = {}
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                label = row["label"]
                if label not in ROLE_LABELS:
                    raise ValueError(f"{path}: unknown role label {label!r}")
                confidence = float(row["confidence"])
                if not 0.0 <= confidence <= 1.0:
                    raise ValueError(f"{path}: confidence out of range: {confidence}")
                key = (row["episode_id"], row["name"].lower())
                self._table[key] = (label, confidence)

    def classify(self, mention: CandidateMention) -> tuple[str, float]:
        key = (mention.episode_id, mention.name.lower())
        return self._table.get(key, self.default)


# ---------------------------------------------------------------------------
# Aggregation

def aggregate_mentions(
    predictions: Sequence[tuple[CandidateMention, str, float]],
) -> RoleAssignment:
    """Collapse per-mention predictions for one name into one assignment.

    The maximum-confidence prediction wins; on ties the earliest mention (in
    the given order) is kept.
    """
    if not predictions:
        raise ValueError("aggregate_mentions requires at least one prediction")
    best_mention, best_label, best_conf = predictions[0]
    for mention, label, conf in predictions[1:]:
        if conf > best_conf:
            best_mention, best_label, best_conf = mention, label, conf
    return RoleAssignment(
        name=best_mention.name,
        label=best_label,
        confidence=best_conf,
        source_episode=best_mention.episode_id,
    )


def infer_roles(record: EpisodeRecord, classifier: RoleClassifier) -> list[RoleAssignment]:
    """Extract, classify, and aggregate all candidate names for one episode."""
    groups: dict[str, list[tuple[CandidateMention, str, float]]] = {}
    for mention in extract_candidates(record):
        label, conf = classifier.classify(mention)
        groups.setdefault(mention.name.lower(), []).append((mention, label, conf))
    return [aggregate_mentions(preds) for _, preds in sorted(groups.items())]


# ---------------------------------------------------------------------------
# Corpus summaries

@dataclass(frozen=True)
class RoleCounts:
    category: str
    episodes: int
    host_hist: dict[int, int]
    guest_hist: dict[int, int]
    host_mean: float | None
    guest_mean: float


def role_count_summary(
    assignments_by_episode: Mapping[str, Sequence[RoleAssignment]],
    categories: Mapping[str, str],
) -> list[RoleCounts]:
    """Per-category host/guest count histograms and means.

    Episodes with zero inferred hosts land in histogram bucket 0 but are
    excluded from the host mean (a host presumably exists and simply was not
    identified); guest means include zero-guest episodes.
    """
    per_cat: dict[str, list[tuple[int, int]]] = {}
    for episode_id, assignments in assignments_by_episode.items():
        hosts = sum(1 for a in assignments if a.label == HOST)
        guests = sum(1 for a in assignments if a.label == GUEST)
        cat = categories.get(episode_id, "unknown")
        per_cat.setdefault(cat, []).append((hosts, guests))

    out: list[RoleCounts] = []
    for cat in sorted(per_cat):
        counts = per_cat[cat]
        host_hist: dict[int, int] = {}
        guest_hist: dict[int, int] = {}
        for h, g in counts:
            host_hist[h] = host_hist.get(h, 0) + 1
            guest_hist[g] = guest_hist.get(g, 0) + 1
        with_hosts = [h for h, _ in counts if h > 0]
        out.append(RoleCounts(
            category=cat,
            episodes=len(counts),
            host_hist=host_hist,
            guest_hist=guest_hist,
            host_mean=(sum(with_hosts) / len(with_hosts)) if with_hosts else None,
            guest_mean=sum(g for _, g in counts) / len(counts),
        ))
    return out
