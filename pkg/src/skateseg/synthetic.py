"""Seeded synthetic jump corpus for exercising the full pipeline.

Sequences are built from a canonical standing skeleton that drifts and
slowly turns across the rink. Jump instances stamp phase templates onto
the body-frame pose (type-specific entry posture, a tucked airborne
posture with a fast spin, a common landing glide) before the global
rotation and translation are applied, so the phases stay recognizable
after root-centering and facing alignment. Everything is driven by a
numpy Generator, so a fixed seed reproduces the corpus exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import H36M17, PoseSequence, Segment
from .annotation import SequenceAnnotation
from .io import RigMapping
from .taxonomy import (Category, DEFAULT_ROTATION_TABLE, JUMP_TYPE_ORDER,
                       Label, Level)

# canonical standing pose, millimeters, Z-up, facing +X
BASE_POSE = np.array([
    [0.0, 0.0, 1000.0],      # pelvis
    [0.0, -130.0, 1000.0],   # right_hip
    [0.0, -140.0, 550.0],    # right_knee
    [0.0, -150.0, 100.0],    # right_ankle
    [0.0, 130.0, 1000.0],    # left_hip
    [0.0, 140.0, 550.0],     # left_knee
    [0.0, 150.0, 100.0],     # left_ankle
    [0.0, 0.0, 1200.0],      # spine
    [0.0, 0.0, 1430.0],      # thorax
    [0.0, 0.0, 1520.0],      # neck
    [0.0, 0.0, 1650.0],      # head
    [0.0, 200.0, 1430.0],    # left_shoulder
    [0.0, 330.0, 1200.0],    # left_elbow
    [0.0, 420.0, 980.0],     # left_wrist
    [0.0, -200.0, 1430.0],   # right_shoulder
    [0.0, -330.0, 1200.0],   # right_elbow
    [0.0, -420.0, 980.0],    # right_wrist
])

_J = {name: i for i, name in enumerate(H36M17.joint_names)}


# Orthogonal +-1 signature per jump type (Hadamard rows), spread over
# eight (joint, axis) channels. Distinct types differ in exactly four
# channels, so every pair of types is equally far apart.
_SIGNATURES = np.array([
    [+1, -1, +1, -1, +1, -1, +1, -1],
    [+1, +1, -1, -1, +1, +1, -1, -1],
    [+1, -1, -1, +1, +1, -1, -1, +1],
    [+1, +1, +1, +1, -1, -1, -1, -1],
    [+1, -1, +1, -1, -1, +1, -1, +1],
    [+1, +1, -1, -1, -1, -1, +1, +1],
], dtype=np.float64)

_SIGNATURE_CHANNELS = (
    ("left_wrist", 0), ("left_wrist", 1), ("left_wrist", 2),
    ("right_wrist", 0), ("right_wrist", 1), ("right_wrist", 2),
    ("left_elbow", 2), ("head", 0),
)


def _apply_signature(off: np.ndarray, type_idx: int, amplitude: float) -> None:
    for (joint, axis), sign in zip(_SIGNATURE_CHANNELS, _SIGNATURES[type_idx]):
        off[_J[joint], axis] += amplitude * sign


def _entry_template(type_idx: int) -> np.ndarray:
    """Approach posture: common crouch plus the type signature."""
    off = np.zeros_like(BASE_POSE)
    off[_J["left_wrist"]] = (200.0, -80.0, 260.0)
    off[_J["right_wrist"]] = (-150.0, 110.0, 150.0)
    off[_J["left_elbow"]] = (90.0, -40.0, 140.0)
    off[_J["left_ankle"]] = (110.0, 0.0, 50.0)
    off[_J["spine"]] = (40.0, 0.0, -40.0)
    _apply_signature(off, type_idx, 170.0)
    return off


def _jump_template(type_idx: int) -> np.ndarray:
    """Tucked airborne posture plus a weaker type signature."""
    off = np.zeros_like(BASE_POSE)
    off[_J["left_wrist"]] = (60.0, -340.0, 420.0)
    off[_J["right_wrist"]] = (60.0, 340.0, 420.0)
    off[_J["left_elbow"]] = (40.0, -180.0, 200.0)
    off[_J["right_elbow"]] = (40.0, 180.0, 200.0)
    off[_J["left_ankle"]] = (0.0, -110.0, 90.0)
    off[_J["right_ankle"]] = (0.0, 110.0, 90.0)
    off[_J["head"]] = (0.0, 0.0, 40.0)
    _apply_signature(off, type_idx, 120.0)
    return off


_LANDING_TEMPLATE = np.zeros_like(BASE_POSE)
_LANDING_TEMPLATE[_J["left_wrist"]] = (0.0, 380.0, 260.0)
_LANDING_TEMPLATE[_J["right_wrist"]] = (0.0, -380.0, 260.0)
_LANDING_TEMPLATE[_J["right_ankle"]] = (-380.0, -30.0, 130.0)
_LANDING_TEMPLATE[_J["right_knee"]] = (-190.0, -15.0, 70.0)


def _yaw_matrix(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class SynthSequence:
    pose: PoseSequence
    annotation: SequenceAnnotation


def synth_sequence(rng: np.random.Generator, level: Level = Level.SET,
                   n_jumps: int = 3, sequence_id: str = "synth",
                   competition_id: str = "synth-cup", fps: float = 30.0,
                   noise_mm: float = 10.0, dropout: float = 0.0,
                   jump_types: list[int] | None = None) -> SynthSequence:
    """One performance: background skating with ``n_jumps`` solo jumps.

    ``jump_types`` fixes the type index (0..5) per instance; otherwise
    types are drawn uniformly. ``dropout`` is the per-joint chance of a
    low-confidence frame (hips are spared so facing stays defined).
    """
    plan = []  # (category or None, type_idx, rotations, length)
    for i in range(n_jumps):
        type_idx = (jump_types[i] if jump_types is not None
                    else int(rng.integers(0, len(JUMP_TYPE_ORDER))))
        jt = JUMP_TYPE_ORDER[type_idx]
        allowed = DEFAULT_ROTATION_TABLE[jt]
        rotations = int(rng.choice(allowed))
        plan.append((None, 0, 0, int(rng.integers(40, 90))))
        plan.append((Category.ENTRY, type_idx, rotations, int(rng.integers(14, 25))))
        jump_len = int(np.clip(round(rng.normal(16.25, 1.5)), 13, 20))
        plan.append((Category.JUMP, type_idx, rotations, jump_len))
        plan.append((Category.LANDING, type_idx, rotations, int(rng.integers(10, 19))))
    plan.append((None, 0, 0, int(rng.integers(40, 90))))

    total = sum(p[3] for p in plan)
    frames = np.empty((total, 17, 3))
    confidence = np.ones((total, 17))
    segments: list[Segment] = []

    yaw = float(rng.uniform(-np.pi, np.pi))
    drift_rate = float(rng.normal(0.0, 0.015))
    position = np.array([rng.uniform(-8000, 8000), rng.uniform(-4000, 4000), 0.0])
    velocity = np.array([rng.normal(0, 60), rng.normal(0, 60), 0.0])

    t = 0
    for category, type_idx, rotations, length in plan:
        if category is not None and category is not Category.NONE:
            jt = JUMP_TYPE_ORDER[type_idx]
            if category is Category.ENTRY:
                label = Label(level=level, category=category, jump_type=jt)
            elif category is Category.JUMP:
                label = Label(level=level, category=category, jump_type=jt,
                              rotations=rotations if level is Level.ELEMENT else None)
            else:
                label = Label(level=level, category=category)
            segments.append(Segment(label=label, start=t, end=t + length))
        for i in range(length):
            if category is Category.ENTRY:
                body = BASE_POSE + _entry_template(type_idx)
                yaw_rate = drift_rate
            elif category is Category.JUMP:
                body = BASE_POSE + _jump_template(type_idx)
                yaw_rate = drift_rate + 2.0 * np.pi * rotations / length
            elif category is Category.LANDING:
                body = BASE_POSE + _LANDING_TEMPLATE
                yaw_rate = drift_rate
            else:
                sway = 40.0 * np.sin(2.0 * np.pi * (t + i) / 37.0)
                body = BASE_POSE.copy()
                body[_J["left_wrist"], 2] += sway
                body[_J["right_wrist"], 2] -= sway
                yaw_rate = drift_rate
            body = body + rng.normal(0.0, noise_mm, size=body.shape)
            frames[t + i] = body @ _yaw_matrix(yaw).T + position
            yaw += yaw_rate
            position = position + velocity
            if dropout > 0.0:
                drop = rng.random(17) < dropout
                drop[[H36M17.left_hip_index, H36M17.right_hip_index,
                      H36M17.root_index]] = False
                confidence[t + i, drop] = rng.uniform(0.0, 0.25, size=int(drop.sum()))
        t += length

    pose = PoseSequence(
        rig=H36M17, frames=frames, fps=fps, units="mm",
        confidence=confidence,
        meta={"sequence_id": sequence_id, "competition_id": competition_id},
    )
    annotation = SequenceAnnotation(
        sequence_id=sequence_id, level=level, total_frames=total,
        segments=tuple(segments), mode="strict",
    )
    return SynthSequence(pose=pose, annotation=annotation)


def synth_corpus(seed: int, n_sequences: int, level: Level = Level.SET,
                 jumps_per_sequence: int = 3, competitions: int = 3,
                 dropout: float = 0.0) -> list[SynthSequence]:
    """Deterministic corpus; jump types cycle so every type appears."""
    rng = np.random.default_rng(seed)
    out = []
    type_cursor = 0
    for i in range(n_sequences):
        types = [(type_cursor + j) % len(JUMP_TYPE_ORDER)
                 for j in range(jumps_per_sequence)]
        type_cursor = (type_cursor + jumps_per_sequence) % len(JUMP_TYPE_ORDER)
        out.append(synth_sequence(
            rng, level=level, n_jumps=jumps_per_sequence,
            sequence_id=f"seq{i:03d}",
            competition_id=f"comp{i % competitions}",
            dropout=dropout, jump_types=types,
        ))
    return out


def default_mapping86() -> RigMapping:
    """Example 86-keypoint mapping: joint j reads source 5*j, the pelvis
    averages the two hip sources. Placeholder ordering; edit the data
    file for real capture exports."""
    rules = {name: (5 * i,) for i, name in enumerate(H36M17.joint_names)}
    rules["pelvis"] = (5 * H36M17.right_hip_index, 5 * H36M17.left_hip_index)
    return RigMapping(source_keypoint_count=86, rules=rules)


def to_mocap86(pose: PoseSequence, rng: np.random.Generator) -> dict:
    """Blow a 17-joint sequence up to a raw 86-keypoint mocap document.

    The mapped source slots carry the joint coordinates (the two hip
    sources also stand in for the pelvis); the remaining keypoints are
    nearby filler markers that any correct mapping must ignore.
    """
    mapping = default_mapping86()
    t_total = pose.n_frames
    raw = np.zeros((t_total, 86, 3))
    used = set()
    for j, name in enumerate(H36M17.joint_names):
        if name == "pelvis":
            continue
        src = mapping.rules[name][0]
        raw[:, src, :] = pose.frames[:, j, :]
        used.add(src)
    # pelvis is reconstructed as the hip-source average; every unused slot
    # becomes a filler marker hanging off a random real joint
    for src in range(86):
        if src in used:
            continue
        anchor = int(rng.integers(0, 17))
        offset = rng.normal(0.0, 60.0, size=3)
        raw[:, src, :] = pose.frames[:, anchor, :] + offset
    return {
        "keypoint_count": 86,
        "fps": pose.fps,
        "units": "mm",
        "frames": raw.tolist(),
        "meta": dict(pose.meta),
    }
