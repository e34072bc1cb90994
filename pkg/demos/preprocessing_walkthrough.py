"""Walk one synthetic sequence through the full feature-preparation chain
and print what each stage guarantees.

Run: python3 demos/preprocessing_walkthrough.py
"""
import numpy as np

from skateseg import (align_pose_sequence, build_features, center_root,
                      mask_low_confidence, normalize_maxabs)
from skateseg.core import H36M17
from skateseg.synthetic import synth_sequence

rng = np.random.default_rng(0)
item = synth_sequence(rng, n_jumps=2, dropout=0.01)
seq = item.pose
print(f"sequence: {seq.n_frames} frames @ {seq.fps} fps, units={seq.units}")

masked = mask_low_confidence(seq, threshold=0.3)
n_dropped = int((~masked.mask).sum())
print(f"confidence masking: {n_dropped} joint observations zeroed "
      f"(confidence < 0.3)")

centered = center_root(masked)
lh, rh = H36M17.left_hip_index, H36M17.right_hip_index
mid = 0.5 * (centered.frames[:, lh] + centered.frames[:, rh])
print(f"root centering: max |hip midpoint| = {np.abs(mid).max():.2e}")

normalized = normalize_maxabs(centered)
print(f"max-abs normalization: scale = {normalized.scale:.1f} mm, "
      f"max |coordinate| = {np.abs(normalized.sequence.frames).max()}")

result = align_pose_sequence(normalized.sequence)
spin = np.degrees(np.diff(result.unwrapped_yaw))
print(f"facing alignment: yaw rate ranges {spin.min():.1f}..{spin.max():.1f} "
      f"deg/frame (the spike is the jump spin)")

features = build_features(result.aligned, result, include_euler=True)
print(f"feature rows: {features.values.shape} "
      f"(17 joints x 3 dims + 3 rotation angles = {features.width})")
