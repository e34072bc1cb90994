"""Feature preparation chain for pose sequences.

The intended order is: confidence masking, root centering, per-sequence
max-abs normalization, facing alignment, feature assembly. Normalizing
before aligning keeps the scale free of camera translation and the
alignment free of unit effects.

Facing convention: the body's forward direction is the cross product of
the hip vector (left minus right) with the rig's up axis. The canonical
forward is the coordinate axis that follows the up axis (up=+Z faces +X,
up=+Y faces +Z, up=+X faces +Y); yaw is the signed horizontal angle from
that axis, in (-pi, pi].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import JointRig, PoseSequence
from .errors import DegenerateHipsError

_AXIS_INDEX = {"X": 0, "Y": 1, "Z": 2}


def _up_axis_frame(rig: JointRig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(up, forward, leftward) orthonormal triple for the rig's up axis."""
    sign = 1.0 if rig.up_axis[0] == "+" else -1.0
    up_idx = _AXIS_INDEX[rig.up_axis[1]]
    up = np.zeros(3)
    up[up_idx] = sign
    fwd = np.zeros(3)
    fwd[(up_idx + 1) % 3] = 1.0
    left = np.cross(up, fwd)
    return up, fwd, left


def _rotation_about(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit axis."""
    c, s = np.cos(angle), np.sin(angle)
    x, y, z = axis
    cross = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return c * np.eye(3) + s * cross + (1 - c) * np.outer(axis, axis)


def mask_low_confidence(seq: PoseSequence, threshold: float = 0.3) -> PoseSequence:
    """Zero out joints whose confidence falls strictly below the threshold.

    Masked joints get coordinates exactly 0 and mask=False; the
    comparison is strict, so a confidence equal to the threshold keeps
    the joint. Idempotent.
    """
    if seq.confidence is None:
        raise ValueError("sequence has no confidence channel")
    keep = seq.confidence >= threshold
    frames = seq.frames.copy()
    frames[~keep] = 0.0
    mask = keep if seq.mask is None else (seq.mask & keep)
    return seq.replace(frames=frames, mask=mask)


def center_root(seq: PoseSequence) -> PoseSequence:
    """Translate every frame so the hip midpoint sits at the origin.

    The translation is applied uniformly to all joints, then masked
    joints are re-zeroed so the masking convention survives.
    """
    lh, rh = seq.rig.left_hip_index, seq.rig.right_hip_index
    frames = seq.frames.copy()
    # second pass removes the rounding residue of the first subtraction
    for _ in range(2):
        mid = 0.5 * (frames[:, lh, :] + frames[:, rh, :])
        frames = frames - mid[:, None, :]
    if seq.mask is not None:
        frames[~seq.mask] = 0.0
    return seq.replace(frames=frames)


@dataclass(frozen=True)
class NormalizeResult:
    sequence: PoseSequence
    scale: float
    degenerate: bool = False


def normalize_maxabs(seq: PoseSequence) -> NormalizeResult:
    """Divide all coordinates by the sequence's max absolute value.

    The scale is taken over unmasked joints only. A degenerate (all-zero)
    sequence comes back as all zeros with scale 0 and the degenerate flag
    set instead of raising.
    """
    valid = seq.valid_mask()
    if valid.any():
        scale = float(np.abs(seq.frames[valid]).max())
    else:
        scale = 0.0
    if scale == 0.0:
        frames = np.zeros_like(seq.frames)
        return NormalizeResult(seq.replace(frames=frames, units="normalized"),
                               scale=0.0, degenerate=True)
    return NormalizeResult(seq.replace(frames=seq.frames / scale,
                                       units="normalized"), scale=scale)


def facing_angle(frame: np.ndarray, rig: JointRig,
                 joint_mask: np.ndarray | None = None) -> float:
    """Horizontal facing angle of one 3D pose frame, in (-pi, pi].

    The facing vector is (left hip - right hip) x up. Raises
    DegenerateHipsError when either hip is masked or their horizontal
    separation is below 1e-6 of the frame's coordinate scale.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2 or frame.shape[1] != 3:
        raise ValueError("facing angle needs a (J, 3) frame")
    lh, rh = rig.left_hip_index, rig.right_hip_index
    if joint_mask is not None and not (joint_mask[lh] and joint_mask[rh]):
        raise DegenerateHipsError("hip joints are masked")
    up, fwd, left = _up_axis_frame(rig)
    hip_vec = frame[lh] - frame[rh]
    facing = np.cross(hip_vec, up)
    scale = float(np.abs(frame).max())
    if scale == 0.0:
        scale = 1.0
    if np.linalg.norm(facing) <= 1e-6 * scale:
        raise DegenerateHipsError("hips coincide along the horizontal plane")
    angle = float(np.arctan2(np.dot(facing, left), np.dot(facing, fwd)))
    if angle <= -np.pi:
        angle = np.pi
    return angle


@dataclass(frozen=True)
class AlignmentResult:
    """Per-frame facing-aligned poses plus the removed rotation angles.

    ``euler[t]`` holds (yaw, pitch, roll) of the rotation that was
    removed from frame t; pitch and roll are always 0 since only the
    facing yaw is corrected. Applying a rotation of -euler[t,0] about the
    rig's up axis to the original frame reproduces the aligned frame.
    ``unwrapped_yaw`` is the yaw made continuous across frames (adjacent
    values never differ by more than pi). ``degenerate[t]`` flags frames
    whose own facing was undefined and which reuse the previous rotation.
    """

    aligned: PoseSequence
    euler: np.ndarray          # (T, 3) radians
    unwrapped_yaw: np.ndarray  # (T,)
    degenerate: np.ndarray     # (T,) bool

    def rotation_for_frame(self, t: int) -> np.ndarray:
        up, _, _ = _up_axis_frame(self.aligned.rig)
        return _rotation_about(up, -float(self.euler[t, 0]))


def align_pose_sequence(seq: PoseSequence, per_frame: bool = True) -> AlignmentResult:
    """Rotate every frame about the up axis onto the canonical facing.

    With ``per_frame`` (the default) each frame is aligned independently
    and the rotation dynamics move into the yaw channel. With
    ``per_frame=False`` a single rotation, taken from the first
    non-degenerate frame, is applied to the whole sequence. Frames with
    degenerate hips reuse the previous frame's rotation (identity for a
    leading run) and are flagged.
    """
    if seq.dims != 3:
        raise ValueError("alignment needs 3D poses")
    t_total = seq.n_frames
    mask = seq.mask
    yaw = np.zeros(t_total)
    degenerate = np.zeros(t_total, dtype=bool)
    prev = 0.0
    for t in range(t_total):
        try:
            prev = facing_angle(seq.frames[t], seq.rig,
                                None if mask is None else mask[t])
        except DegenerateHipsError:
            degenerate[t] = True
        yaw[t] = prev
    if not per_frame:
        valid = np.nonzero(~degenerate)[0]
        yaw[:] = yaw[valid[0]] if valid.size else 0.0

    up, _, _ = _up_axis_frame(seq.rig)
    aligned = np.empty_like(seq.frames)
    for t in range(t_total):
        rot = _rotation_about(up, -yaw[t])
        aligned[t] = seq.frames[t] @ rot.T
    if mask is not None:
        aligned[~mask] = 0.0

    euler = np.zeros((t_total, 3))
    euler[:, 0] = yaw
    unwrapped = np.unwrap(yaw)
    return AlignmentResult(
        aligned=seq.replace(frames=aligned),
        euler=euler,
        unwrapped_yaw=unwrapped,
        degenerate=degenerate,
    )


@dataclass(frozen=True)
class FeatureSequence:
    """Flat (T, D) feature rows assembled from a pose sequence."""

    values: np.ndarray
    n_joints: int
    dims: int
    has_euler: bool
    has_mask_channel: bool

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("features must be a (T, D) matrix")
        if not np.isfinite(values).all():
            raise ValueError("features must be finite")
        object.__setattr__(self, "values", values)

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def build_features(seq: PoseSequence, alignment: AlignmentResult | None = None,
                   include_euler: bool = True,
                   include_conf_mask: bool = False) -> FeatureSequence:
    """Flatten joint coordinates into per-frame feature rows.

    Layout per frame: J*dims coordinates in rig order, then J validity
    flags when ``include_conf_mask``, then 3 rotation angles (unwrapped
    yaw, 0, 0) when ``include_euler``. Masked joints contribute zeros.
    """
    if include_euler and alignment is None:
        raise ValueError("include_euler requires an alignment result")
    frames = seq.frames
    if seq.mask is not None:
        frames = frames.copy()
        frames[~seq.mask] = 0.0
    t_total = seq.n_frames
    blocks = [frames.reshape(t_total, -1)]
    if include_conf_mask:
        blocks.append(seq.valid_mask().astype(np.float64))
    if include_euler:
        if alignment.unwrapped_yaw.shape[0] != t_total:
            raise ValueError("alignment length != sequence length")
        euler = np.zeros((t_total, 3))
        euler[:, 0] = alignment.unwrapped_yaw
        blocks.append(euler)
    return FeatureSequence(
        values=np.concatenate(blocks, axis=1),
        n_joints=seq.n_joints,
        dims=seq.dims,
        has_euler=include_euler,
        has_mask_channel=include_conf_mask,
    )


def preprocess_sequence(seq: PoseSequence, conf_threshold: float = 0.3,
                        align: bool = True,
                        include_euler: bool = True) -> FeatureSequence:
    """Run the full chain: mask, center, normalize, align, assemble."""
    if seq.confidence is not None:
        seq = mask_low_confidence(seq, conf_threshold)
    seq = center_root(seq)
    seq = normalize_maxabs(seq).sequence
    if align and seq.dims == 3:
        result = align_pose_sequence(seq)
        return build_features(result.aligned, result,
                              include_euler=include_euler)
    return build_features(seq, None, include_euler=False)
