"""Jump-procedure annotation model.

A sequence annotation is an ordered list of labeled segments over the
frame range; background is implicit in the gaps and becomes NONE when
expanded to per-frame labels. Validation distinguishes a strict mode
(every jump must land) from a lenient one that admits combination jumps
and bare jump segments.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .core import FrameLabels, Segment
from .errors import DataFormatError, UnknownLabelError
from .taxonomy import Category, LabelTaxonomy, Level, parse_label


@dataclass(frozen=True)
class SequenceAnnotation:
    """Ordered labeled intervals over one sequence, with an edit version."""

    sequence_id: str
    level: Level
    total_frames: int
    segments: tuple[Segment, ...] = ()
    version: int = 0
    mode: str = "lenient"  # validation mode this annotation was saved under

    def __post_init__(self):
        if self.total_frames < 1:
            raise ValueError("total_frames must be >= 1")
        if self.mode not in ("strict", "lenient"):
            raise ValueError("mode must be 'strict' or 'lenient'")
        object.__setattr__(self, "segments", tuple(self.segments))

    def with_version(self, version: int) -> "SequenceAnnotation":
        return replace(self, version=version)

    def to_dict(self) -> dict:
        return {
            "sequence_id": self.sequence_id,
            "level": self.level.value,
            "total_frames": self.total_frames,
            "version": self.version,
            "mode": self.mode,
            "segments": [
                {"label": seg.label.name, "start": seg.start, "end": seg.end}
                for seg in self.segments
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SequenceAnnotation":
        try:
            level = Level(d["level"])
            segments = tuple(
                Segment(label=parse_label(s["label"], level),
                        start=int(s["start"]), end=int(s["end"]))
                for s in d["segments"]
            )
            return cls(
                sequence_id=str(d["sequence_id"]),
                level=level,
                total_frames=int(d["total_frames"]),
                segments=segments,
                version=int(d.get("version", 0)),
                mode=d.get("mode", "lenient"),
            )
        except UnknownLabelError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"bad annotation: {exc}") from exc


def load_annotation(path) -> SequenceAnnotation:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: {exc}") from exc
    return SequenceAnnotation.from_dict(d)


def save_annotation(annotation: SequenceAnnotation, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(annotation.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class JumpInstance:
    """One jump procedure: optional entry, the jump, optional landing.

    Adjacent phases must touch exactly (entry ends where the jump takes
    off; the landing starts where the jump lands) and the entry's jump
    type must match the jump's.
    """

    jump: Segment
    entry: Segment | None = None
    landing: Segment | None = None

    def __post_init__(self):
        if self.jump.label.category is not Category.JUMP:
            raise ValueError("jump segment must carry a jump label")
        if self.entry is not None:
            if self.entry.label.category is not Category.ENTRY:
                raise ValueError("entry segment must carry an entry label")
            if self.entry.end != self.jump.start:
                raise ValueError("entry must end exactly at takeoff")
            if self.entry.label.jump_type is not self.jump.label.jump_type:
                raise ValueError("entry and jump types differ")
        if self.landing is not None:
            if self.landing.label.category is not Category.LANDING:
                raise ValueError("landing segment must carry the landing label")
            if self.jump.end != self.landing.start:
                raise ValueError("landing must start exactly where the jump ends")

    @property
    def start(self) -> int:
        return self.entry.start if self.entry is not None else self.jump.start

    @property
    def end(self) -> int:
        return self.landing.end if self.landing is not None else self.jump.end


def jump_instances(annotation: SequenceAnnotation) -> list[JumpInstance]:
    """Group a valid annotation's segments into jump instances.

    In combination jumps the shared landing belongs to the last jump of
    the chain; earlier jumps in the chain come back without a landing.
    """
    _require_valid(annotation)
    out: list[JumpInstance] = []
    segs = annotation.segments
    i = 0
    while i < len(segs):
        entry = None
        if segs[i].label.category is Category.ENTRY:
            entry = segs[i]
            i += 1
        jump = segs[i]
        i += 1
        landing = None
        if (i < len(segs) and segs[i].label.category is Category.LANDING
                and segs[i].start == jump.end):
            landing = segs[i]
            i += 1
        out.append(JumpInstance(jump=jump, entry=entry, landing=landing))
    return out


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    segment_index: int | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message,
                "segment_index": self.segment_index}


def validate(annotation: SequenceAnnotation, mode: str = "strict") -> list[Violation]:
    """Check structural and jump-procedure rules; violations are data.

    Both modes check interval structure, that every entry runs directly
    into a jump of the same type, and that no landing appears without a
    jump immediately before it. Strict mode additionally demands a
    landing directly after every jump; lenient mode lets jumps chain
    (combination jumps) or stand alone.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError("mode must be 'strict' or 'lenient'")
    out: list[Violation] = []
    segs = annotation.segments
    for i, seg in enumerate(segs):
        if seg.label.level is not annotation.level:
            out.append(Violation("level-mismatch",
                                 f"segment {i} label level != annotation level", i))
        if seg.label.category is Category.NONE:
            out.append(Violation("none-label",
                                 f"segment {i} carries NONE; background lives in gaps", i))
        if seg.end > annotation.total_frames:
            out.append(Violation("out-of-bounds",
                                 f"segment {i} [{seg.start},{seg.end}) exceeds "
                                 f"T={annotation.total_frames}", i))
        if i > 0:
            prev = segs[i - 1]
            if seg.start < prev.start:
                out.append(Violation("unsorted",
                                     f"segment {i} starts before segment {i-1}", i))
            elif seg.start < prev.end:
                out.append(Violation("overlap",
                                     f"segment {i} overlaps segment {i-1}", i))
    if out:
        # procedure rules assume a structurally sound list
        return out

    for i, seg in enumerate(segs):
        nxt = segs[i + 1] if i + 1 < len(segs) else None
        prev = segs[i - 1] if i > 0 else None
        cat = seg.label.category
        if cat is Category.ENTRY:
            if nxt is None or nxt.start != seg.end or nxt.label.category is not Category.JUMP:
                out.append(Violation("entry-without-jump",
                                     f"entry segment {i} is not immediately followed "
                                     "by a jump", i))
            elif nxt.label.jump_type is not seg.label.jump_type:
                out.append(Violation("entry-type-mismatch",
                                     f"entry segment {i} ({seg.label.jump_type.value}) "
                                     f"followed by a {nxt.label.jump_type.value} jump", i))
        elif cat is Category.JUMP and mode == "strict":
            if nxt is None or nxt.start != seg.end or nxt.label.category is not Category.LANDING:
                out.append(Violation("missing-landing",
                                     f"jump segment {i} is not immediately followed "
                                     "by a landing", i))
        elif cat is Category.LANDING:
            if prev is None or prev.end != seg.start or prev.label.category is not Category.JUMP:
                out.append(Violation("orphan-landing",
                                     f"landing segment {i} has no jump immediately "
                                     "before it", i))
    return out


def _require_valid(annotation: SequenceAnnotation, mode: str = "lenient") -> None:
    violations = validate(annotation, mode=mode)
    if violations:
        raise ValueError("invalid annotation: "
                         + "; ".join(v.message for v in violations))


def expand_to_frames(annotation: SequenceAnnotation,
                     taxonomy: LabelTaxonomy) -> FrameLabels:
    """Per-frame label ids over [0, T); gaps become NONE (id 0)."""
    _require_valid(annotation)
    if taxonomy.level is not annotation.level:
        raise ValueError("taxonomy level != annotation level")
    ids = np.zeros(annotation.total_frames, dtype=np.int64)
    for seg in annotation.segments:
        ids[seg.start:seg.end] = taxonomy.id_for_label(seg.label)
    return FrameLabels(level=annotation.level, ids=ids)


def segments_from_frames(frames: FrameLabels,
                         taxonomy: LabelTaxonomy) -> list[Segment]:
    """Maximal runs of identical non-NONE ids, as sorted segments."""
    ids = frames.ids
    out: list[Segment] = []
    t = 0
    n = len(ids)
    while t < n:
        run_id = int(ids[t])
        start = t
        while t < n and ids[t] == run_id:
            t += 1
        if run_id != 0:
            out.append(Segment(label=taxonomy.label_for_id(run_id),
                               start=start, end=t))
    return out


def to_coarse(annotation: SequenceAnnotation) -> SequenceAnnotation:
    """Drop entry and landing segments, keeping jumps bit-exactly.

    Simulates coarse annotation schemes that mark only the airborne
    phase; the result is always valid in lenient mode.
    """
    _require_valid(annotation)
    jumps = tuple(s for s in annotation.segments
                  if s.label.category is Category.JUMP)
    return replace(annotation, segments=jumps, mode="lenient")


@dataclass(frozen=True)
class CorpusStats:
    n_videos: int
    mean_total_frames: float
    mean_action_frames: float
    action_frame_ratio: float  # percent, reported to 2 decimals
    occurrences: dict = field(default_factory=dict)  # jump label name -> count
    mean_jump_duration_frames: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.action_frame_ratio <= 100.0):
            raise ValueError("action_frame_ratio must lie in [0, 100]")

    def to_dict(self) -> dict:
        return {
            "n_videos": self.n_videos,
            "mean_total_frames": self.mean_total_frames,
            "mean_action_frames": self.mean_action_frames,
            "action_frame_ratio": self.action_frame_ratio,
            "occurrences": dict(self.occurrences),
            "mean_jump_duration_frames": self.mean_jump_duration_frames,
        }


def corpus_stats(annotations: list[SequenceAnnotation],
                 frame_counts: dict[str, int] | None = None) -> CorpusStats:
    """Aggregate action-frame ratio, jump occurrences and durations.

    ``frame_counts`` maps sequence id to total frames and overrides the
    annotations' own counts when supplied; every annotation id must then
    be present.
    """
    if not annotations:
        raise ValueError("need at least one annotation")
    totals = []
    for ann in annotations:
        if frame_counts is not None:
            if ann.sequence_id not in frame_counts:
                raise ValueError(f"no frame count for sequence {ann.sequence_id!r}")
            totals.append(int(frame_counts[ann.sequence_id]))
        else:
            totals.append(ann.total_frames)
    action = [sum(s.length for s in ann.segments) for ann in annotations]
    occurrences: dict[str, int] = {}
    durations: list[int] = []
    for ann in annotations:
        for seg in ann.segments:
            if seg.label.category is Category.JUMP:
                name = seg.label.name
                occurrences[name] = occurrences.get(name, 0) + 1
                durations.append(seg.length)
    ratio = 100.0 * sum(action) / sum(totals)
    return CorpusStats(
        n_videos=len(annotations),
        mean_total_frames=float(np.mean(totals)),
        mean_action_frames=float(np.mean(action)),
        action_frame_ratio=round(ratio, 2),
        occurrences=occurrences,
        mean_jump_duration_frames=float(np.mean(durations)) if durations else 0.0,
    )
