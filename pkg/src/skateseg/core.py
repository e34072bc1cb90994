"""Core value types: joint rigs, pose sequences, segments, frame labels.

Everything here is immutable after construction (arrays are marked
read-only), so instances can be shared freely across threads.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError

UP_AXES = ("+X", "-X", "+Y", "-Y", "+Z", "-Z")

_AXIS_VECTORS = {
    "+X": np.array([1.0, 0.0, 0.0]),
    "-X": np.array([-1.0, 0.0, 0.0]),
    "+Y": np.array([0.0, 1.0, 0.0]),
    "-Y": np.array([0.0, -1.0, 0.0]),
    "+Z": np.array([0.0, 0.0, 1.0]),
    "-Z": np.array([0.0, 0.0, -1.0]),
}


@dataclass(frozen=True)
class JointRig:
    """Named-joint skeleton: joint order, parent tree, root and hip indices."""

    name: str
    joint_names: tuple[str, ...]
    parents: tuple[int, ...]  # parent index per joint, -1 for the root
    root_index: int
    left_hip_index: int
    right_hip_index: int
    up_axis: str = "+Z"

    def __post_init__(self):
        n = len(self.joint_names)
        if len(set(self.joint_names)) != n:
            raise ValueError("joint names must be unique")
        if len(self.parents) != n:
            raise ValueError("parents length must match joint count")
        if not (0 <= self.root_index < n):
            raise ValueError("root_index out of range")
        if self.parents[self.root_index] != -1:
            raise ValueError("root joint must have parent -1")
        for j, p in enumerate(self.parents):
            if j == self.root_index:
                continue
            if not (0 <= p < n):
                raise ValueError(f"joint {j} has invalid parent {p}")
        # the parent pointers must form a tree rooted at root_index
        for j in range(n):
            seen = set()
            while j != self.root_index:
                if j in seen:
                    raise ValueError("parent indices contain a cycle")
                seen.add(j)
                j = self.parents[j]
        for idx, what in ((self.left_hip_index, "left_hip_index"),
                          (self.right_hip_index, "right_hip_index")):
            if not (0 <= idx < n):
                raise ValueError(f"{what} out of range")
        if self.left_hip_index == self.right_hip_index:
            raise ValueError("left and right hip indices must differ")
        if self.up_axis not in UP_AXES:
            raise ValueError(f"up_axis must be one of {UP_AXES}")

    @property
    def n_joints(self) -> int:
        return len(self.joint_names)

    @property
    def up_vector(self) -> np.ndarray:
        return _AXIS_VECTORS[self.up_axis].copy()

    def joint_index(self, name: str) -> int:
        return self.joint_names.index(name)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "joint_names": list(self.joint_names),
            "parents": list(self.parents),
            "root_index": self.root_index,
            "left_hip_index": self.left_hip_index,
            "right_hip_index": self.right_hip_index,
            "up_axis": self.up_axis,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "JointRig":
        try:
            return cls(
                name=d["name"],
                joint_names=tuple(d["joint_names"]),
                parents=tuple(int(p) for p in d["parents"]),
                root_index=int(d["root_index"]),
                left_hip_index=int(d["left_hip_index"]),
                right_hip_index=int(d["right_hip_index"]),
                up_axis=d.get("up_axis", "+Z"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"bad rig definition: {exc}") from exc


# Default 17-joint rig, Human3.6M joint ordering.
H36M17 = JointRig(
    name="h36m17",
    joint_names=(
        "pelvis",
        "right_hip", "right_knee", "right_ankle",
        "left_hip", "left_knee", "left_ankle",
        "spine", "thorax", "neck", "head",
        "left_shoulder", "left_elbow", "left_wrist",
        "right_shoulder", "right_elbow", "right_wrist",
    ),
    parents=(-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 8, 11, 12, 8, 14, 15),
    root_index=0,
    left_hip_index=4,
    right_hip_index=1,
    up_axis="+Z",
)

BUILTIN_RIGS = {H36M17.name: H36M17}


def load_rig(path) -> JointRig:
    """Read a rig definition from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: {exc}") from exc
    return JointRig.from_dict(d)


def save_rig(rig: JointRig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rig.to_dict(), fh, indent=2)
        fh.write("\n")


def resolve_rig(name: str, rig: JointRig | None = None) -> JointRig:
    """Look a rig up by name, preferring an explicitly supplied one."""
    if rig is not None:
        return rig
    if name in BUILTIN_RIGS:
        return BUILTIN_RIGS[name]
    raise DataFormatError(f"unknown rig {name!r}; pass a rig definition")


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PoseSequence:
    """Time series of per-frame joint coordinates (2D or 3D).

    frames has shape (T, J, dims). Coordinates are millimeters for
    mocap-derived data and dimensionless after max-abs normalization
    (see ``units``). ``mask`` marks valid joints (True = valid).
    """

    rig: JointRig
    frames: np.ndarray
    fps: float
    units: str = "mm"
    confidence: np.ndarray | None = None
    mask: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 3:
            raise ValueError("frames must have shape (T, J, dims)")
        t, j, dims = frames.shape
        if t < 1:
            raise ValueError("sequence must contain at least one frame")
        if dims not in (2, 3):
            raise ValueError("dims must be 2 or 3")
        if j != self.rig.n_joints:
            raise ValueError(
                f"frame joint count {j} != rig joint count {self.rig.n_joints}")
        if not np.isfinite(frames).all():
            raise ValueError("coordinates must be finite")
        if not (np.isfinite(self.fps) and self.fps > 0):
            raise ValueError("fps must be positive")
        if self.units not in ("mm", "normalized"):
            raise ValueError("units must be 'mm' or 'normalized'")
        object.__setattr__(self, "frames", _readonly(frames))
        if self.confidence is not None:
            conf = np.asarray(self.confidence, dtype=np.float64)
            if conf.shape != (t, j):
                raise ValueError("confidence must have shape (T, J)")
            if not np.isfinite(conf).all() or conf.min() < 0 or conf.max() > 1:
                raise ValueError("confidence values must lie in [0, 1]")
            object.__setattr__(self, "confidence", _readonly(conf))
        if self.mask is not None:
            mask = np.asarray(self.mask, dtype=bool)
            if mask.shape != (t, j):
                raise ValueError("mask must have shape (T, J)")
            object.__setattr__(self, "mask", _readonly(mask))

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_joints(self) -> int:
        return self.frames.shape[1]

    @property
    def dims(self) -> int:
        return self.frames.shape[2]

    def valid_mask(self) -> np.ndarray:
        """Effective (T, J) validity mask; all-valid when none stored."""
        if self.mask is None:
            return np.ones(self.frames.shape[:2], dtype=bool)
        return self.mask.copy()

    def replace(self, **kwargs) -> "PoseSequence":
        """Return a copy with the given fields swapped out."""
        current = dict(
            rig=self.rig, frames=self.frames, fps=self.fps, units=self.units,
            confidence=self.confidence, mask=self.mask, meta=dict(self.meta),
        )
        current.update(kwargs)
        return PoseSequence(**current)


@dataclass(frozen=True)
class Segment:
    """Labeled half-open frame interval [start, end)."""

    label: "Label"  # noqa: F821 - defined in taxonomy module
    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"need 0 <= start < end, got [{self.start},{self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True, eq=False)
class FrameLabels:
    """Per-frame label ids for one sequence at one taxonomy level."""

    level: "Level"  # noqa: F821
    ids: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64)
        if ids.ndim != 1:
            raise ValueError("ids must be one-dimensional")
        if ids.size and ids.min() < 0:
            raise ValueError("label ids must be non-negative")
        object.__setattr__(self, "ids", _readonly(ids))

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    def __eq__(self, other) -> bool:
        return (isinstance(other, FrameLabels)
                and self.level == other.level
                and np.array_equal(self.ids, other.ids))
