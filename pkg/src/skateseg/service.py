"""HTTP/JSON annotation service consumed by the labeling UI.

Writes use optimistic concurrency: every PUT names the version it read,
the server bumps the version on success and answers 409 when the
expectation is stale. Per-sequence locks serialize writers; files are
written temp-then-rename so a crash never leaves a torn annotation.
"""
from __future__ import annotations

import json
import os
import tempfile
import threading
from collections import OrderedDict
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import preprocess
from .annotation import SequenceAnnotation, corpus_stats, validate
from .core import PoseSequence
from .errors import DataFormatError, UnknownLabelError
from .io import CorpusManifest, load_manifest, load_pose_sequence
from .taxonomy import Level, build_taxonomy

POSE_CACHE_SIZE = 16


class ServiceState:
    """Manifest-backed store of poses and versioned annotations."""

    def __init__(self, manifest: CorpusManifest, manifest_dir: Path,
                 readonly: bool = False):
        self.manifest = manifest
        self.manifest_dir = Path(manifest_dir)
        self.readonly = readonly
        self._poses: OrderedDict[str, PoseSequence] = OrderedDict()
        self._aligned: OrderedDict[str, PoseSequence] = OrderedDict()
        self._annotations: dict[str, SequenceAnnotation] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        for entry in manifest.entries:
            path = self.annotation_path(entry.sequence_id)
            if path.exists():
                with open(path, "r", encoding="utf-8") as fh:
                    self._annotations[entry.sequence_id] = (
                        SequenceAnnotation.from_dict(json.load(fh)))

    def lock_for(self, sequence_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(sequence_id, threading.Lock())

    def annotation_path(self, sequence_id: str) -> Path:
        entry = self.manifest.entry(sequence_id)
        if entry.annotation_path is not None:
            return entry.annotation_path
        return self.manifest_dir / "annotations" / f"{sequence_id}.json"

    def pose(self, sequence_id: str, aligned: bool = False) -> PoseSequence:
        cache = self._aligned if aligned else self._poses
        with self._registry_lock:
            if sequence_id in cache:
                cache.move_to_end(sequence_id)
                return cache[sequence_id]
        seq = load_pose_sequence(self.manifest.entry(sequence_id).pose_path)
        if aligned and seq.dims == 3:
            seq = preprocess.align_pose_sequence(seq).aligned
        with self._registry_lock:
            cache[sequence_id] = seq
            while len(cache) > POSE_CACHE_SIZE:
                cache.popitem(last=False)
        return seq

    def annotation(self, sequence_id: str) -> SequenceAnnotation | None:
        return self._annotations.get(sequence_id)

    def current_version(self, sequence_id: str) -> int:
        ann = self._annotations.get(sequence_id)
        return ann.version if ann is not None else 0

    def commit(self, annotation: SequenceAnnotation) -> None:
        """Persist atomically, then publish in memory."""
        path = self.annotation_path(annotation.sequence_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(annotation.to_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self._annotations[annotation.sequence_id] = annotation


def _error(status: int, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message, **extra})


def create_app(manifest_path, ui_dir=None, readonly: bool = False) -> FastAPI:
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path)
    state = ServiceState(manifest, manifest_path.parent, readonly=readonly)
    app = FastAPI(title="skateseg annotation service")
    app.state.store = state

    def known(sequence_id: str) -> bool:
        try:
            manifest.entry(sequence_id)
            return True
        except KeyError:
            return False

    @app.get("/api/sequences")
    def list_sequences():
        rows = []
        for entry in manifest.entries:
            seq = state.pose(entry.sequence_id)
            ann = state.annotation(entry.sequence_id)
            rows.append({
                "sequence_id": entry.sequence_id,
                "total_frames": seq.n_frames,
                "fps": seq.fps,
                "competition_id": entry.competition_id,
                "annotated": ann is not None,
                "version": ann.version if ann is not None else 0,
                "level": ann.level.value if ann is not None else None,
            })
        return rows

    @app.get("/api/sequences/{sequence_id}/poses")
    def get_poses(sequence_id: str,
                  from_: int | None = Query(default=None, alias="from"),
                  to: int | None = None,
                  aligned: bool = False):
        if not known(sequence_id):
            return _error(404, f"unknown sequence {sequence_id!r}")
        seq = state.pose(sequence_id, aligned=aligned)
        t_total = seq.n_frames
        lo = 0 if from_ is None else from_
        hi = t_total if to is None else to
        if lo > hi or lo < 0 or hi > t_total:
            return _error(422, f"bad frame range [{lo}, {hi}) for T={t_total}")
        rig = seq.rig
        return {
            "sequence_id": sequence_id,
            "from": lo,
            "to": hi,
            "fps": seq.fps,
            "dims": seq.dims,
            "units": seq.units,
            "aligned": aligned and seq.dims == 3,
            "joint_names": list(rig.joint_names),
            "parents": list(rig.parents),
            "left_hip_index": rig.left_hip_index,
            "right_hip_index": rig.right_hip_index,
            "up_axis": rig.up_axis,
            "frames": seq.frames[lo:hi].tolist(),
            "mask": seq.mask[lo:hi].tolist() if seq.mask is not None else None,
        }

    @app.get("/api/sequences/{sequence_id}/annotation")
    def get_annotation(sequence_id: str):
        if not known(sequence_id):
            return _error(404, f"unknown sequence {sequence_id!r}")
        ann = state.annotation(sequence_id)
        if ann is None:
            seq = state.pose(sequence_id)
            ann = SequenceAnnotation(sequence_id=sequence_id, level=Level.SET,
                                     total_frames=seq.n_frames, version=0)
        return ann.to_dict()

    @app.put("/api/sequences/{sequence_id}/annotation")
    async def put_annotation(sequence_id: str, request: Request):
        if state.readonly:
            return _error(403, "service is read-only")
        if not known(sequence_id):
            return _error(404, f"unknown sequence {sequence_id!r}")
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(422, f"bad JSON body: {exc}")
        if not isinstance(body, dict) or "annotation" not in body:
            return _error(422, "body must carry 'expected_version' and 'annotation'")
        mode = body.get("mode", "lenient")
        if mode not in ("strict", "lenient"):
            return _error(422, "mode must be 'strict' or 'lenient'")
        try:
            expected = int(body["expected_version"])
        except (KeyError, TypeError, ValueError):
            return _error(422, "missing or bad 'expected_version'")
        try:
            ann = SequenceAnnotation.from_dict(dict(body["annotation"],
                                                    mode=mode))
        except (DataFormatError, UnknownLabelError, ValueError) as exc:
            return _error(422, f"bad annotation: {exc}", violations=[])
        if ann.sequence_id != sequence_id:
            return _error(422, "annotation sequence_id does not match the URL")
        seq = state.pose(sequence_id)
        if ann.total_frames != seq.n_frames:
            return _error(422, f"annotation covers {ann.total_frames} frames, "
                               f"sequence has {seq.n_frames}", violations=[])
        violations = validate(ann, mode=mode)
        if violations:
            return _error(422, "annotation failed validation",
                          violations=[v.to_dict() for v in violations])
        lock = state.lock_for(sequence_id)
        with lock:
            current = state.current_version(sequence_id)
            if expected != current:
                return _error(409, "version conflict",
                              current_version=current)
            committed = ann.with_version(current + 1)
            state.commit(committed)
            return {"version": committed.version}

    @app.post("/api/validate")
    async def validate_annotation(request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return _error(422, f"bad JSON body: {exc}")
        mode = body.get("mode", "strict")
        if mode not in ("strict", "lenient"):
            return _error(422, "mode must be 'strict' or 'lenient'")
        try:
            ann = SequenceAnnotation.from_dict(body["annotation"])
        except (KeyError, DataFormatError, UnknownLabelError, ValueError) as exc:
            return _error(422, f"bad annotation: {exc}")
        return {"violations": [v.to_dict() for v in validate(ann, mode=mode)]}

    @app.get("/api/taxonomy")
    def get_taxonomy(level: str = "set"):
        try:
            tax = build_taxonomy(Level(level))
        except ValueError:
            return _error(422, f"unknown level {level!r}")
        rows = []
        for idx, name in enumerate(tax.names()):
            lab = tax.label_for_id(idx)
            rows.append({
                "id": idx,
                "name": name,
                "category": lab.category.value,
                "jump_type": lab.jump_type.value if lab.jump_type else None,
                "rotations": lab.rotations,
            })
        return {"level": level, "labels": rows}

    @app.get("/api/stats")
    def get_stats():
        annotations = [state.annotation(e.sequence_id)
                       for e in manifest.entries
                       if state.annotation(e.sequence_id) is not None]
        if not annotations:
            return {"n_videos": 0, "message": "no annotations yet"}
        return corpus_stats(annotations).to_dict()

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True),
                  name="ui")
    return app
