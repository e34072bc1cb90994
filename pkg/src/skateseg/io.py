"""Pose/annotation file I/O, mocap ingestion, resampling and splits.

Pose files come in two self-describing flavors sharing one header
schema: JSON for readability and a binary container (magic "FSPS") whose
coordinate payload is float32 little-endian and round-trips bit-exactly.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import FrameLabels, H36M17, JointRig, PoseSequence, resolve_rig
from .errors import DataFormatError
from .taxonomy import LabelTaxonomy

BINARY_MAGIC = b"FSPS"
BINARY_VERSION = 1


def _pose_header(seq: PoseSequence) -> dict:
    return {
        "rig": seq.rig.name,
        "dims": seq.dims,
        "fps": seq.fps,
        "units": seq.units,
        "T": seq.n_frames,
        "J": seq.n_joints,
        "confidence": seq.confidence is not None,
        "mask": seq.mask is not None,
        "meta": dict(seq.meta),
    }


def _build_sequence(header: dict, frames: np.ndarray,
                    confidence: np.ndarray | None, mask: np.ndarray | None,
                    rig: JointRig | None, path) -> PoseSequence:
    rig = resolve_rig(header.get("rig", H36M17.name), rig)
    if frames.ndim != 3:
        raise DataFormatError(f"{path}: frames must be T x J x dims")
    t, j, dims = frames.shape
    if j != rig.n_joints:
        raise DataFormatError(
            f"{path}: file has J={j} joints but rig {rig.name!r} defines "
            f"{rig.n_joints}")
    if int(header.get("dims", dims)) != dims:
        raise DataFormatError(f"{path}: declared dims {header['dims']} != data dims {dims}")
    if not np.isfinite(frames).all():
        raise DataFormatError(f"{path}: non-finite coordinate value")
    if confidence is not None:
        if confidence.shape != (t, j):
            raise DataFormatError(f"{path}: confidence shape mismatch")
        if not np.isfinite(confidence).all() or confidence.min() < 0 or confidence.max() > 1:
            raise DataFormatError(f"{path}: confidence values outside [0, 1]")
    try:
        return PoseSequence(
            rig=rig, frames=frames, fps=float(header.get("fps", 0)),
            units=header.get("units", "mm"), confidence=confidence,
            mask=mask, meta=dict(header.get("meta", {})),
        )
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def load_pose_sequence(path, rig: JointRig | None = None) -> PoseSequence:
    """Load a pose sequence from either container, sniffing the magic."""
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == BINARY_MAGIC:
        return _load_pose_binary(path, rig)
    return _load_pose_json(path, rig)


def _load_pose_json(path, rig: JointRig | None) -> PoseSequence:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(
                f"{path}: parse error at line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(doc, dict) or "frames" not in doc:
        raise DataFormatError(f"{path}: missing 'frames'")
    try:
        frames = np.asarray(doc["frames"], dtype=np.float64)
    except ValueError as exc:
        raise DataFormatError(f"{path}: ragged frames array ({exc})") from exc
    confidence = None
    if doc.get("confidence") is not None:
        confidence = np.asarray(doc["confidence"], dtype=np.float64)
    mask = None
    if doc.get("mask") is not None:
        mask = np.asarray(doc["mask"], dtype=bool)
    return _build_sequence(doc, frames, confidence, mask, rig, path)


def _load_pose_binary(path, rig: JointRig | None) -> PoseSequence:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 10 or blob[:4] != BINARY_MAGIC:
        raise DataFormatError(f"{path}: not an FSPS file")
    version, header_len = struct.unpack_from("<HI", blob, 4)
    if version != BINARY_VERSION:
        raise DataFormatError(f"{path}: unsupported FSPS version {version}")
    offset = 10
    try:
        header = json.loads(blob[offset:offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: corrupt header ({exc})") from exc
    offset += header_len
    try:
        t, j, dims = int(header["T"]), int(header["J"]), int(header["dims"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: header missing T/J/dims") from exc
    n_coord = t * j * dims
    need = n_coord * 4
    if len(blob) < offset + need:
        raise DataFormatError(f"{path}: truncated coordinate block at offset {offset}")
    frames = np.frombuffer(blob, dtype="<f4", count=n_coord, offset=offset)
    frames = frames.astype(np.float64).reshape(t, j, dims)
    offset += need
    confidence = None
    if header.get("confidence"):
        if len(blob) < offset + t * j * 4:
            raise DataFormatError(f"{path}: truncated confidence block")
        confidence = np.frombuffer(blob, dtype="<f4", count=t * j,
                                   offset=offset).astype(np.float64).reshape(t, j)
        offset += t * j * 4
    mask = None
    if header.get("mask"):
        if len(blob) < offset + t * j:
            raise DataFormatError(f"{path}: truncated mask block")
        mask = np.frombuffer(blob, dtype=np.uint8, count=t * j,
                             offset=offset).astype(bool).reshape(t, j)
    return _build_sequence(header, frames, confidence, mask, rig, path)


def save_pose_sequence(seq: PoseSequence, path, format: str = "json") -> None:
    """Write a pose sequence; 'json' or 'binary'.

    JSON keeps full float precision via repr round-tripping; the binary
    payload is float32, so loading it back reproduces the stored bytes
    exactly.
    """
    path = Path(path)
    if format == "json":
        doc = _pose_header(seq)
        del doc["T"], doc["J"]
        doc["frames"] = seq.frames.tolist()
        doc["confidence"] = seq.confidence.tolist() if seq.confidence is not None else None
        doc["mask"] = seq.mask.tolist() if seq.mask is not None else None
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh)
            fh.write("\n")
    elif format == "binary":
        header = json.dumps(_pose_header(seq), sort_keys=True).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(BINARY_MAGIC)
            fh.write(struct.pack("<HI", BINARY_VERSION, len(header)))
            fh.write(header)
            fh.write(np.ascontiguousarray(seq.frames, dtype="<f4").tobytes())
            if seq.confidence is not None:
                fh.write(np.ascontiguousarray(seq.confidence, dtype="<f4").tobytes())
            if seq.mask is not None:
                fh.write(np.ascontiguousarray(seq.mask, dtype=np.uint8).tobytes())
    else:
        raise ValueError("format must be 'json' or 'binary'")


@dataclass(frozen=True)
class RigMapping:
    """Source-keypoint to target-joint rules: an index or an average."""

    source_keypoint_count: int
    rules: dict  # target joint name -> tuple of source indices (averaged)

    def __post_init__(self):
        clean = {}
        for name, rule in self.rules.items():
            idxs = (rule,) if isinstance(rule, int) else tuple(int(i) for i in rule)
            if not idxs:
                raise ValueError(f"empty rule for joint {name!r}")
            for i in idxs:
                if not (0 <= i < self.source_keypoint_count):
                    raise ValueError(
                        f"rule for {name!r} references source index {i} outside "
                        f"[0, {self.source_keypoint_count})")
            clean[name] = idxs
        object.__setattr__(self, "rules", clean)

    def check_covers(self, rig: JointRig) -> None:
        missing = [n for n in rig.joint_names if n not in self.rules]
        extra = [n for n in self.rules if n not in rig.joint_names]
        if missing or extra:
            raise DataFormatError(
                f"mapping does not cover rig {rig.name!r}: missing={missing}, "
                f"unknown={extra}")


def load_rig_mapping(path) -> RigMapping:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: {exc}") from exc
    try:
        return RigMapping(source_keypoint_count=int(d["source_keypoint_count"]),
                          rules=d["rules"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: bad mapping ({exc})") from exc


def save_rig_mapping(mapping: RigMapping, path) -> None:
    doc = {"source_keypoint_count": mapping.source_keypoint_count,
           "rules": {k: list(v) for k, v in mapping.rules.items()}}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def ingest_fsjump3d(mocap_path, mapping: RigMapping,
                    rig: JointRig = H36M17) -> PoseSequence:
    """Map a raw 86-keypoint mocap dump onto the 17-joint rig.

    The source file is JSON with keypoint_count, fps, units and a
    T x K x 3 frames array (millimeters). Averaged rules are computed in
    double precision.
    """
    with open(mocap_path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{mocap_path}: {exc}") from exc
    frames = np.asarray(doc.get("frames"), dtype=np.float64)
    if frames.ndim != 3 or frames.shape[2] != 3:
        raise DataFormatError(f"{mocap_path}: frames must be T x K x 3")
    k = frames.shape[1]
    declared = int(doc.get("keypoint_count", k))
    if declared != k:
        raise DataFormatError(
            f"{mocap_path}: declared keypoint_count {declared} != data {k}")
    if k != mapping.source_keypoint_count:
        raise DataFormatError(
            f"{mocap_path}: source has {k} keypoints, mapping expects "
            f"{mapping.source_keypoint_count}")
    mapping.check_covers(rig)
    t = frames.shape[0]
    out = np.empty((t, rig.n_joints, 3), dtype=np.float64)
    for j, name in enumerate(rig.joint_names):
        idxs = mapping.rules[name]
        out[:, j, :] = frames[:, idxs, :].mean(axis=1)
    meta = dict(doc.get("meta", {}))
    return PoseSequence(rig=rig, frames=out, fps=float(doc.get("fps", 60.0)),
                        units=doc.get("units", "mm"), meta=meta)


def resample(seq: PoseSequence, target_fps: float) -> PoseSequence:
    """Change the frame rate.

    Integer-ratio downsampling keeps every k-th frame exactly; other
    ratios interpolate coordinates linearly per joint. Confidence takes
    the minimum of the bracketing frames and masks their AND, keeping
    the masking conservative. Output length is round(T * target/source),
    at least 1.
    """
    if not (np.isfinite(target_fps) and target_fps > 0):
        raise ValueError("target_fps must be positive")
    if target_fps == seq.fps:
        return seq
    t_in = seq.n_frames
    t_out = max(1, round(t_in * target_fps / seq.fps))
    ratio = seq.fps / target_fps
    if float(ratio).is_integer():
        step = int(ratio)
        idx = np.arange(t_out) * step
        idx = idx[idx < t_in]
        frames = seq.frames[idx]
        confidence = seq.confidence[idx] if seq.confidence is not None else None
        mask = seq.mask[idx] if seq.mask is not None else None
    else:
        pos = np.minimum(np.arange(t_out) * ratio, t_in - 1)
        lo = np.floor(pos).astype(int)
        # an exact integer position is bracketed by itself
        hi = np.ceil(pos).astype(int)
        w = (pos - lo)[:, None, None]
        frames = (1 - w) * seq.frames[lo] + w * seq.frames[hi]
        confidence = None
        if seq.confidence is not None:
            confidence = np.minimum(seq.confidence[lo], seq.confidence[hi])
        mask = None
        if seq.mask is not None:
            mask = seq.mask[lo] & seq.mask[hi]
    return seq.replace(frames=frames, fps=float(target_fps),
                       confidence=confidence, mask=mask)


@dataclass(frozen=True)
class ManifestEntry:
    sequence_id: str
    pose_path: Path
    competition_id: str
    annotation_path: Path | None = None
    split_hint: str | None = None


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        ids = [e.sequence_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("sequence ids must be unique")
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, sequence_id: str) -> ManifestEntry:
        for e in self.entries:
            if e.sequence_id == sequence_id:
                return e
        raise KeyError(sequence_id)

    def competition_ids(self) -> list[str]:
        seen = []
        for e in self.entries:
            if e.competition_id not in seen:
                seen.append(e.competition_id)
        return seen


def load_manifest(path, check_files: bool = True) -> CorpusManifest:
    """Read a corpus manifest; relative paths resolve against its directory.

    Pose files must exist. Annotation paths name where annotations are
    (or will be) stored, so they may not exist yet.
    """
    path = Path(path)
    base = path.parent
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: {exc}") from exc
    if not isinstance(doc, list):
        raise DataFormatError(f"{path}: manifest must be a JSON list")
    entries = []
    for i, row in enumerate(doc):
        try:
            pose = base / row["pose"]
            anno = (base / row["annotation"]) if row.get("annotation") else None
            entries.append(ManifestEntry(
                sequence_id=str(row["sequence_id"]),
                pose_path=pose,
                competition_id=str(row["competition_id"]),
                annotation_path=anno,
                split_hint=row.get("split"),
            ))
        except (KeyError, TypeError) as exc:
            raise DataFormatError(f"{path}: bad entry {i} ({exc})") from exc
    manifest = CorpusManifest(entries=tuple(entries))
    if check_files:
        for e in manifest.entries:
            if not e.pose_path.exists():
                raise DataFormatError(
                    f"{path}: pose file for {e.sequence_id!r} not found: {e.pose_path}")
    return manifest


def save_manifest(manifest: CorpusManifest, path) -> None:
    path = Path(path)
    base = path.parent

    def rel(p):
        try:
            return str(Path(p).relative_to(base))
        except ValueError:
            return str(p)

    rows = []
    for e in manifest.entries:
        row = {"sequence_id": e.sequence_id, "pose": rel(e.pose_path),
               "competition_id": e.competition_id}
        if e.annotation_path is not None:
            row["annotation"] = rel(e.annotation_path)
        if e.split_hint is not None:
            row["split"] = e.split_hint
        rows.append(row)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class SplitResult:
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"train": list(self.train), "val": list(self.val),
                "test": list(self.test)}


def split_by_competition(manifest: CorpusManifest,
                         test_competition_ids: list[str],
                         val_fraction: float = 0.1) -> SplitResult:
    """Partition sequence ids so no competition straddles two sides.

    All sequences of the named test competitions go to test; the rest
    are divided into train and val, whole competitions at a time, until
    val holds roughly ``val_fraction`` of the non-test sequences.
    """
    known = set(manifest.competition_ids())
    for cid in test_competition_ids:
        if cid not in known:
            raise ValueError(f"unknown competition id {cid!r}")
    test_set = set(test_competition_ids)
    by_comp: dict[str, list[str]] = {}
    for e in manifest.entries:
        by_comp.setdefault(e.competition_id, []).append(e.sequence_id)
    test = [sid for cid in sorted(test_set) for sid in by_comp[cid]]
    rest = [cid for cid in sorted(by_comp) if cid not in test_set]
    n_rest = sum(len(by_comp[c]) for c in rest)
    target = round(val_fraction * n_rest)
    # fill val with the smallest competitions first to keep the overshoot
    # above the target fraction as small as whole competitions allow
    order = sorted(rest, key=lambda c: (len(by_comp[c]), c))
    val: list[str] = []
    train: list[str] = []
    taken = 0
    for i, cid in enumerate(order):
        last_unassigned = i == len(order) - 1 and not train
        if taken < target and not last_unassigned:
            val.extend(by_comp[cid])
            taken += len(by_comp[cid])
        else:
            train.extend(by_comp[cid])
    return SplitResult(train=tuple(train), val=tuple(val), test=tuple(test))


def import_external_predictions(path, taxonomy: LabelTaxonomy) -> FrameLabels:
    """Read one canonical label name per line into frame labels."""
    ids = []
    with open(path, "r", encoding="utf-8") as fh:
        for row, line in enumerate(fh, start=1):
            name = line.strip()
            if not name:
                continue
            ids.append(taxonomy.id_for_name(name, row=row))
    return FrameLabels(level=taxonomy.level, ids=np.asarray(ids, dtype=np.int64))


def save_frame_labels(frames: FrameLabels, taxonomy: LabelTaxonomy, path) -> None:
    """Write frame labels as one canonical label name per line."""
    if frames.level is not taxonomy.level:
        raise ValueError("frame labels level != taxonomy level")
    names = taxonomy.names()
    with open(path, "w", encoding="utf-8") as fh:
        for idx in frames.ids:
            fh.write(names[int(idx)] + "\n")
