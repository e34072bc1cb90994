"""Annotation model and evaluation metrics on hand-built examples.

Run: python3 demos/annotation_and_metrics.py
"""
import numpy as np

from skateseg import (build_taxonomy, corpus_stats, expand_to_frames, f1_at_k,
                      frame_accuracy, iou, to_coarse, validate)
from skateseg.annotation import SequenceAnnotation
from skateseg.core import FrameLabels, Segment
from skateseg.taxonomy import Level, parse_label

tax = build_taxonomy(Level.SET)
print(f"set-level taxonomy: {tax.n_action_labels} action labels + NONE")


def seg(name, start, end):
    return Segment(label=parse_label(name, Level.SET), start=start, end=end)


solo = SequenceAnnotation(
    sequence_id="demo", level=Level.SET, total_frames=120,
    segments=(seg("Axel entry", 20, 34), seg("Axel jump", 34, 50),
              seg("landing", 50, 62)))
print("solo jump, strict validation:", validate(solo, "strict") or "clean")

combo = SequenceAnnotation(
    sequence_id="combo", level=Level.SET, total_frames=120,
    segments=(seg("Axel jump", 30, 46), seg("Toe Loop jump", 46, 60),
              seg("landing", 60, 72)))
print("combination, lenient:", validate(combo, "lenient") or "clean")
print("combination, strict:",
      [v.kind for v in validate(combo, "strict")])

coarse = to_coarse(solo)
print("coarse keeps only:", [s.label.name for s in coarse.segments])

stats = corpus_stats([solo, combo])
print(f"action-frame ratio: {stats.action_frame_ratio}%  "
      f"mean jump duration: {stats.mean_jump_duration_frames} frames")

# metrics: shift the prediction by one frame and watch F1@90 collapse
gt = [seg("Axel jump", 0, 16)]
pred = [seg("Axel jump", 1, 17)]
print(f"\nIoU of a one-frame shift on a 16-frame jump: {iou(pred[0], gt[0]):.4f}")
for k in (10, 25, 50, 75, 90):
    print(f"  F1@{k}: {f1_at_k(pred, gt, k).f1:.1f}")

gt_frames = expand_to_frames(solo, tax)
pred_frames = FrameLabels(level=Level.SET, ids=np.zeros(120, dtype=int))
print(f"\nall-NONE frame accuracy on the solo sequence: "
      f"{frame_accuracy(pred_frames, gt_frames):.2f}%")
