"""Transcript quality filters.

Two failure modes of automatic transcription are handled: long runs of
repeated text (detected by the share of the most frequent 4-gram) and
fabricated trailing words whose timestamps run past the end of the audio.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .models import EpisodeRecord, WordRecord
from .textnorm import tokenize

DEFAULT_FOURGRAM_THRESHOLD = 0.05

FLAG_REPETITIVE = "repetitive transcript"
FLAG_TAIL_TRIMMED = "hallucinated tail trimmed"


@dataclass(frozen=True)
class RepetitionScore:
    max_fourgram_count: int
    total_fourgrams: int

    @property
    def ratio(self) -> float:
        if self.total_fourgrams == 0:
            return 0.0
        return self.max_fourgram_count / self.total_fourgrams


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    score: RepetitionScore
    threshold: float


def fourgram_repetition_score(tokens: Sequence[str]) -> RepetitionScore:
    """Score how much a token sequence is dominated by a single 4-gram."""
    total = max(0, len(tokens) - 3)
    if total == 0:
        return RepetitionScore(max_fourgram_count=0, total_fourgrams=0)
    counts: Counter[tuple[str, ...]] = Counter(
        tuple(tokens[i:i + 4]) for i in range(total)
    )
    return RepetitionScore(max_fourgram_count=max(counts.values()), total_fourgrams=total)


def repetition_decision(score: RepetitionScore,
                        threshold: float = DEFAULT_FOURGRAM_THRESHOLD) -> FilterDecision:
    # Removal requires the top 4-gram share to strictly exceed the threshold.
    return FilterDecision(keep=score.ratio <= threshold, score=score, threshold=threshold)


def filter_repetitive(record: EpisodeRecord,
                      threshold: float = DEFAULT_FOURGRAM_THRESHOLD) -> FilterDecision:
    """Keep/remove decision for one episode based on its normalized transcript."""
    tokens = tokenize(" ".join(record.transcript_tokens()))
    return repetition_decision(fourgram_repetition_score(tokens), threshold)


def trim_hallucinated_tail(
    words: Sequence[WordRecord], audio_duration_s: float
) -> tuple[list[WordRecord], int]:
    """Drop words that start after the audio ends; returns (kept, dropped count)."""
    if audio_duration_s <= 0:
        raise ValueError(f"audio duration must be positive, got {audio_duration_s}")
    kept = [w for w in words if w.start_s <= audio_duration_s]
    return kept, len(words) - len(kept)
