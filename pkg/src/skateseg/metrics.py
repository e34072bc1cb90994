"""Segmentation and pose evaluation.

Frame accuracy counts every frame, background included. F1@k scores
action segments only: a prediction is a true positive when its IoU with
a same-label, not-yet-matched ground-truth segment reaches k percent.
Matching is greedy in temporal order with the highest-IoU unmatched
candidate, the de-facto convention for segmental F1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .annotation import SequenceAnnotation, expand_to_frames, segments_from_frames
from .core import FrameLabels, PoseSequence, Segment
from .taxonomy import LabelTaxonomy

DEFAULT_KS = (10, 25, 50, 75, 90)


def frame_accuracy(pred: FrameLabels, gt: FrameLabels) -> float:
    """Percent of frames where pred equals gt; NONE frames included."""
    if pred.level is not gt.level:
        raise ValueError("prediction and ground truth levels differ")
    if len(pred) != len(gt):
        raise ValueError(f"length mismatch: {len(pred)} vs {len(gt)}")
    return 100.0 * float(np.count_nonzero(pred.ids == gt.ids)) / len(gt)


def iou(a: Segment, b: Segment) -> float:
    """Intersection over union of two half-open frame intervals."""
    inter = min(a.end, b.end) - max(a.start, b.start)
    if inter <= 0:
        return 0.0
    union = max(a.end, b.end) - min(a.start, b.start)
    return inter / union


@dataclass(frozen=True)
class MatchCounts:
    tp: int
    fp: int
    fn: int

    def __add__(self, other: "MatchCounts") -> "MatchCounts":
        return MatchCounts(self.tp + other.tp, self.fp + other.fp,
                           self.fn + other.fn)


def match_segments(pred_segments: list[Segment], gt_segments: list[Segment],
                   k: float) -> MatchCounts:
    """Greedy TP/FP/FN counts at overlap threshold k percent.

    Predictions are visited in temporal order; each one claims the
    unmatched same-label ground-truth segment of maximal IoU (ties go to
    the earlier ground-truth start) and counts as TP when that IoU is at
    least k/100. Unclaimed ground truths are FN.
    """
    preds = sorted(pred_segments, key=lambda s: (s.start, s.end))
    gts = sorted(gt_segments, key=lambda s: (s.start, s.end))
    matched = [False] * len(gts)
    tp = fp = 0
    for p in preds:
        best_iou = 0.0
        best_j = -1
        for j, g in enumerate(gts):
            if matched[j] or g.label != p.label:
                continue
            ov = iou(p, g)
            if ov > best_iou:
                best_iou, best_j = ov, j
        if best_j >= 0 and best_iou >= k / 100.0:
            matched[best_j] = True
            tp += 1
        else:
            fp += 1
    fn = matched.count(False)
    return MatchCounts(tp=tp, fp=fp, fn=fn)


@dataclass(frozen=True)
class F1Score:
    precision: float
    recall: float
    f1: float


def _prf(counts: MatchCounts, n_pred: int, n_gt: int) -> F1Score:
    if n_pred == 0 and n_gt == 0:
        # perfect prediction of "no actions"
        return F1Score(100.0, 100.0, 100.0)
    precision = 100.0 * counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    recall = 100.0 * counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    if precision + recall == 0.0:
        return F1Score(precision, recall, 0.0)
    return F1Score(precision, recall, 2 * precision * recall / (precision + recall))


def f1_at_k(pred_segments: list[Segment], gt_segments: list[Segment],
            k: float) -> F1Score:
    """Segmental F1 at overlap threshold k percent (values in percent)."""
    if pred_segments and gt_segments:
        if pred_segments[0].label.level is not gt_segments[0].label.level:
            raise ValueError("prediction and ground truth levels differ")
    counts = match_segments(pred_segments, gt_segments, k)
    return _prf(counts, len(pred_segments), len(gt_segments))


def mpjpe(pred: PoseSequence, gt: PoseSequence,
          valid_mask: np.ndarray | None = None) -> float:
    """Mean per-joint position error in the sequences' length units.

    Mean Euclidean distance over valid (frame, joint) pairs; masked
    joints are excluded from both numerator and denominator. The default
    mask is the AND of the two sequences' own masks.
    """
    if pred.frames.shape != gt.frames.shape:
        raise ValueError(f"shape mismatch: {pred.frames.shape} vs {gt.frames.shape}")
    if valid_mask is None:
        valid = pred.valid_mask() & gt.valid_mask()
    else:
        valid = np.asarray(valid_mask, dtype=bool)
        if valid.shape != pred.frames.shape[:2]:
            raise ValueError("valid_mask must have shape (T, J)")
    if not valid.any():
        raise ValueError("no valid joints to evaluate")
    dist = np.linalg.norm(pred.frames - gt.frames, axis=-1)
    return float(dist[valid].mean())


@dataclass(frozen=True)
class EvalReport:
    """Frame accuracy plus F1@k, with per-label match counts."""

    accuracy: float
    ks: tuple[float, ...]
    scores: dict  # k -> {"precision","recall","f1","tp","fp","fn"}
    per_label: dict  # label name -> {"occurrences", "counts": {k: {tp,fp,fn}}}
    n_sequences: int
    n_frames: int = 0

    def __post_init__(self):
        if not (0.0 <= self.accuracy <= 100.0):
            raise ValueError("accuracy must lie in [0, 100]")

    def f1(self, k: float) -> float:
        return self.scores[k]["f1"]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "ks": list(self.ks),
            "scores": {str(k): dict(v) for k, v in self.scores.items()},
            "per_label": {name: {"occurrences": d["occurrences"],
                                 "counts": {str(k): dict(c) for k, c in d["counts"].items()}}
                          for name, d in self.per_label.items()},
            "n_sequences": self.n_sequences,
            "n_frames": self.n_frames,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        ks = tuple(d["ks"])
        scores = {k: dict(d["scores"][str(k)]) for k in ks}
        per_label = {
            name: {"occurrences": entry["occurrences"],
                   "counts": {k: dict(entry["counts"][str(k)]) for k in ks}}
            for name, entry in d["per_label"].items()
        }
        return cls(accuracy=d["accuracy"], ks=ks, scores=scores,
                   per_label=per_label, n_sequences=d["n_sequences"],
                   n_frames=d.get("n_frames", 0))

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls.from_dict(json.loads(text))

    def table(self) -> str:
        """Aligned text table with the Acc / F1@k column layout."""
        headers = ["Acc"] + [f"F1@{int(k) if float(k).is_integer() else k}"
                             for k in self.ks]
        values = [f"{self.accuracy:.2f}"] + [f"{self.scores[k]['f1']:.2f}"
                                             for k in self.ks]
        widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
        head = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
        row = "  ".join(v.rjust(w) for v, w in zip(values, widths))
        return head + "\n" + row + "\n"


def evaluate_corpus(pairs: list[tuple[FrameLabels, SequenceAnnotation]],
                    taxonomy: LabelTaxonomy,
                    ks: tuple[float, ...] = DEFAULT_KS,
                    macro: bool = False) -> EvalReport:
    """Score predicted frame labels against ground-truth annotations.

    By default accuracy is micro-averaged over all frames and TP/FP/FN
    are pooled over the corpus before precision/recall/F1 are computed.
    With ``macro`` the scores are computed per sequence and averaged
    (the pooled counts are still reported).
    """
    if not pairs:
        raise ValueError("need at least one (prediction, ground truth) pair")
    total_frames = 0
    correct = 0
    pooled = {k: MatchCounts(0, 0, 0) for k in ks}
    per_label: dict[str, dict] = {}
    per_sequence: list[dict] = []

    def label_entry(name: str) -> dict:
        if name not in per_label:
            per_label[name] = {"occurrences": 0,
                               "counts": {k: {"tp": 0, "fp": 0, "fn": 0} for k in ks}}
        return per_label[name]

    for pred, ann in pairs:
        gt_frames = expand_to_frames(ann, taxonomy)
        if len(pred) != len(gt_frames):
            raise ValueError(f"sequence {ann.sequence_id!r}: prediction length "
                             f"{len(pred)} != {len(gt_frames)} frames")
        total_frames += len(gt_frames)
        seq_correct = int(np.count_nonzero(pred.ids == gt_frames.ids))
        correct += seq_correct
        pred_segments = segments_from_frames(pred, taxonomy)
        gt_segments = list(ann.segments)
        for seg in gt_segments:
            label_entry(seg.label.name)["occurrences"] += 1
        labels_here = {s.label for s in pred_segments} | {s.label for s in gt_segments}
        seq_scores = {"accuracy": 100.0 * seq_correct / len(gt_frames)}
        for k in ks:
            counts = match_segments(pred_segments, gt_segments, k)
            pooled[k] = pooled[k] + counts
            seq_scores[k] = _prf(counts, len(pred_segments), len(gt_segments))
            for lab in labels_here:
                sub = match_segments([s for s in pred_segments if s.label == lab],
                                     [s for s in gt_segments if s.label == lab], k)
                entry = label_entry(lab.name)["counts"][k]
                entry["tp"] += sub.tp
                entry["fp"] += sub.fp
                entry["fn"] += sub.fn
        per_sequence.append(seq_scores)

    scores = {}
    # tp+fp equals the total prediction count at every k, tp+fn the gt count
    n_pred_total = pooled[ks[0]].tp + pooled[ks[0]].fp
    n_gt_total = pooled[ks[0]].tp + pooled[ks[0]].fn
    for k in ks:
        c = pooled[k]
        if macro:
            scores[k] = {
                "precision": float(np.mean([s[k].precision for s in per_sequence])),
                "recall": float(np.mean([s[k].recall for s in per_sequence])),
                "f1": float(np.mean([s[k].f1 for s in per_sequence])),
                "tp": c.tp, "fp": c.fp, "fn": c.fn,
            }
        else:
            s = _prf(c, n_pred_total, n_gt_total)
            scores[k] = {"precision": s.precision, "recall": s.recall, "f1": s.f1,
                         "tp": c.tp, "fp": c.fp, "fn": c.fn}
    if macro:
        accuracy = float(np.mean([s["accuracy"] for s in per_sequence]))
    else:
        accuracy = 100.0 * correct / total_frames
    return EvalReport(accuracy=accuracy, ks=tuple(ks), scores=scores,
                      per_label=per_label, n_sequences=len(pairs),
                      n_frames=total_frames)
