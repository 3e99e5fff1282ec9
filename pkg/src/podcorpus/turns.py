"""Speaker turn assembly.

Merges three per-episode streams into speaker-attributed words and turns:

  1. ``align_prosody`` assigns each tenth-of-a-second acoustic frame to the
     word with maximal temporal overlap and stores per-word feature means.
  2. ``assign_speakers`` labels each word with the diarization segment of
     maximal overlap; words covered by concurrently speaking segments go to
     the speaker whose segment started earlier (the one already speaking).
  3. ``filter_minor_speakers`` unlabels speakers holding less than a minimum
     share of total speaking time (spurious labels, ads, short intros).
  4. ``segment_turns`` groups the labeled word subsequence into maximal
     same-speaker runs; unlabeled words attach to no turn.
  5. ``map_host_voice`` finds the first voice to say the host's name.

All tie-breaks are deterministic: earlier start wins, then the
lexicographically smaller speaker label. Overlap comparisons use a 1e-9
tolerance so float noise on millisecond-quantized times cannot flip a tie.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .models import Turn, WordRecord
from .textnorm import tokenize

FRAME_LEN_S = 0.1
OVERLAP_EPS = 1e-9

DEFAULT_MIN_SPEAKER_SHARE = 0.05


@dataclass(frozen=True)
class ProsodicFrame:
    """A fixed 0.1 s analysis window of acoustic features."""

    window_start_s: float
    window_end_s: float
    f0: float
    f1: float
    mfcc: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "mfcc", tuple(float(x) for x in self.mfcc))


@dataclass(frozen=True)
class DiarizationSegment:
    speaker: str
    start_s: float
    end_s: float


@dataclass(frozen=True)
class SpeakerFilterResult:
    words: tuple[WordRecord, ...]
    speaking_time: dict[str, float]
    shares: dict[str, float]
    retained: tuple[str, ...]
    removed: tuple[str, ...]


def _overlap(a_start: float, a_end: float, b_start: float, b_end: float) -> float:
    return min(a_end, b_end) - max(a_start, b_start)


def align_prosody(
    words: Sequence[WordRecord], frames: Sequence[ProsodicFrame]
) -> list[WordRecord]:
    """Assign each frame to the maximally overlapping word and average per word.

    Every frame overlapping at least one word contributes to exactly one
    word's means; ties go to the earlier-starting word. Words with no
    assigned frames keep absent prosody.
    """
    n = len(words)
    sums_f0 = [0.0] * n
    sums_f1 = [0.0] * n
    sums_mfcc = [[0.0, 0.0, 0.0, 0.0] for _ in range(n)]
    counts = [0] * n

    active: list[int] = []
    next_word = 0
    for frame in frames:
        while next_word < n and words[next_word].start_s < frame.window_end_s:
            active.append(next_word)
            next_word += 1
        # Words ending at or before this frame can never overlap later frames.
        active = [j for j in active if words[j].end_s > frame.window_start_s]

        best = -1
        best_ov = 0.0
        for j in active:
            ov = _overlap(frame.window_start_s, frame.window_end_s,
                          words[j].start_s, words[j].end_s)
            if ov > best_ov + OVERLAP_EPS:
                best = j
                best_ov = ov
        if best >= 0:
            counts[best] += 1
            sums_f0[best] += frame.f0
            sums_f1[best] += frame.f1
            for i in range(4):
                sums_mfcc[best][i] += frame.mfcc[i]

    out: list[WordRecord] = []
    for j, w in enumerate(words):
        if counts[j] == 0:
            out.append(replace(w, f0_mean=None, f1_mean=None, mfcc_mean=None))
        else:
            c = counts[j]
            out.append(replace(
                w,
                f0_mean=sums_f0[j] / c,
                f1_mean=sums_f1[j] / c,
                mfcc_mean=tuple(s / c for s in sums_mfcc[j]),
            ))
    return out


def _any_concurrent(segments: list[DiarizationSegment]) -> bool:
    ordered = sorted(segments, key=lambda s: s.start_s)
    max_end = ordered[0].end_s
    for seg in ordered[1:]:
        if seg.start_s < max_end - OVERLAP_EPS:
            return True
        max_end = max(max_end, seg.end_s)
    return False


def assign_speakers(
    words: Sequence[WordRecord], segments: Sequence[DiarizationSegment]
) -> list[WordRecord]:
    """Label each word with a diarization speaker.

    The maximally overlapping segment wins. When the overlapping segments
    themselves overlap each other (concurrent speech), the word goes to the
    segment that started earliest, i.e. the speaker already talking when the
    overlap began. Words overlapping no segment stay unlabeled.
    """
    segs = sorted(segments, key=lambda s: (s.start_s, s.speaker))
    out: list[WordRecord] = []
    active: list[DiarizationSegment] = []
    next_seg = 0
    for w in words:
        while next_seg < len(segs) and segs[next_seg].start_s < w.end_s:
            active.append(segs[next_seg])
            next_seg += 1
        # Later words start no earlier, so finished segments can be dropped.
        active = [s for s in active if s.end_s > w.start_s]

        overlapping = [
            s for s in active
            if _overlap(w.start_s, w.end_s, s.start_s, s.end_s) > OVERLAP_EPS
        ]
        if not overlapping:
            out.append(replace(w, speaker=None))
            continue

        if len(overlapping) > 1 and _any_concurrent(overlapping):
            chosen = min(overlapping, key=lambda s: (s.start_s, s.speaker))
        else:
            chosen = overlapping[0]
            best_ov = _overlap(w.start_s, w.end_s, chosen.start_s, chosen.end_s)
            for s in overlapping[1:]:
                ov = _overlap(w.start_s, w.end_s, s.start_s, s.end_s)
                if ov > best_ov + OVERLAP_EPS:
                    chosen, best_ov = s, ov
        out.append(replace(w, speaker=chosen.speaker))
    return out


def filter_minor_speakers(
    words: Sequence[WordRecord],
    min_share: float = DEFAULT_MIN_SPEAKER_SHARE,
) -> SpeakerFilterResult:
    """Unlabel speakers holding less than ``min_share`` of total speaking time.

    Speaking time is the summed duration of a speaker's labeled words; the
    share is computed against the pre-filter total. A speaker at exactly the
    threshold is retained. Labels are only ever removed, never reassigned.
    """
    speaking_time: dict[str, float] = {}
    for w in words:
        if w.speaker is not None:
            speaking_time[w.speaker] = speaking_time.get(w.speaker, 0.0) + w.duration_s
    total = sum(speaking_time.values())
    shares = {s: (t / total if total > 0 else 0.0) for s, t in speaking_time.items()}
    removed = {s for s, share in shares.items() if share < min_share}
    new_words = tuple(
        replace(w, speaker=None) if w.speaker in removed else w for w in words
    )
    return SpeakerFilterResult(
        words=new_words,
        speaking_time=speaking_time,
        shares=shares,
        retained=tuple(sorted(set(speaking_time) - removed)),
        removed=tuple(sorted(removed)),
    )


def segment_turns(words: Sequence[WordRecord]) -> list[Turn]:
    """Group the labeled word subsequence into maximal same-speaker runs.

    Unlabeled words attach to no turn and do not split a run, so adjacent
    turns always carry different speaker labels. Turn prosody is the mean of
    member-word means where present.
    """
    turns: list[Turn] = []
    members: list[WordRecord] = []
    current: str | None = None

    def flush() -> None:
        if not members:
            return
        with_prosody = [w for w in members if w.has_prosody()]
        f0 = f1 = None
        mfcc = None
        if with_prosody:
            c = len(with_prosody)
            f0 = sum(w.f0_mean for w in with_prosody) / c
            f1 = sum(w.f1_mean for w in with_prosody) / c
            mfcc = tuple(
                sum(w.mfcc_mean[i] for w in with_prosody) / c for i in range(4)
            )
        turns.append(Turn(
            turn_id=len(turns),
            speaker=current,
            text=" ".join(w.token for w in members),
            start_s=members[0].start_s,
            end_s=max(w.end_s for w in members),
            f0_mean=f0,
            f1_mean=f1,
            mfcc_mean=mfcc,
        ))

    for w in words:
        if w.speaker is None:
            continue
        if current is not None and w.speaker != current:
            flush()
            members = []
        current = w.speaker
        members.append(w)
    flush()
    return turns


def map_host_voice(turns: Sequence[Turn], host_name: str) -> str | None:
    """Speaker label of the earliest turn that says the host's full name."""
    name_tokens = tokenize(host_name)
    if len(name_tokens) != 2:
        raise ValueError(f"host name must have exactly two tokens: {host_name!r}")
    for turn in sorted(turns, key=lambda t: t.start_s):
        toks = tokenize(turn.text)
        n = len(name_tokens)
        for i in range(len(toks) - n + 1):
            if toks[i:i + n] == name_tokens:
                return turn.speaker
    return None


# ---------------------------------------------------------------------------
# On-disk formats

FRAME_FIELDS = ["window_start_s", "f0", "f1", "mfcc1", "mfcc2", "mfcc3", "mfcc4"]
DIAR_FIELDS = ["speaker", "start_s", "end_s"]


def read_frames_csv(path: str | Path) -> list[ProsodicFrame]:
    frames: list[ProsodicFrame] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            start = float(row["window_start_s"])
            frames.append(ProsodicFrame(
                window_start_s=start,
                window_end_s=start + FRAME_LEN_S,
                f0=float(row["f0"]),
                f1=float(row["f1"]),
                mfcc=(float(row["mfcc1"]), float(row["mfcc2"]),
                      float(row["mfcc3"]), float(row["mfcc4"])),
            ))
    return frames


def write_frames_csv(path: str | Path, frames: Sequence[ProsodicFrame]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FRAME_FIELDS)
        for f in frames:
            writer.writerow([f.window_start_s, f.f0, f.f1, *f.mfcc])


def read_diar_csv(path: str | Path) -> list[DiarizationSegment]:
    segments: list[DiarizationSegment] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            segments.append(DiarizationSegment(
                speaker=row["speaker"],
                start_s=float(row["start_s"]),
                end_s=float(row["end_s"]),
            ))
    return segments


def write_diar_csv(path: str | Path, segments: Sequence[DiarizationSegment]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DIAR_FIELDS)
        for s in segments:
            writer.writerow([s.speaker, s.start_s, s.end_s])
