"""Command-line entry point.

Exit codes: 0 on success, 1 on usage errors, 2 on data errors (bad
files, failed validation, shape mismatches).
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import annotation as anno
from . import baseline, io, metrics, preprocess
from .errors import SkatesegError
from .taxonomy import Level, build_taxonomy


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="skateseg",
                     description="Jump-procedure-aware temporal action "
                                 "segmentation toolkit")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("ingest", help="map raw mocap keypoints onto the 17-joint rig")
    p.add_argument("--mocap", required=True, help="raw keypoint JSON file")
    p.add_argument("--mapping", required=True, help="rig mapping JSON file")
    p.add_argument("--out", required=True, help="output pose file")
    p.add_argument("--format", choices=["json", "binary"], default="json")

    p = sub.add_parser("preprocess", help="pose file to feature matrix")
    p.add_argument("--in", dest="infile", required=True, help="pose file")
    p.add_argument("--out", required=True, help="output features (.npy)")
    p.add_argument("--no-align", action="store_true",
                   help="skip facing alignment")
    p.add_argument("--no-euler", action="store_true",
                   help="drop the rotation-angle channel")
    p.add_argument("--conf-threshold", type=float, default=0.3)

    p = sub.add_parser("annotate-serve", help="run the annotation service")
    p.add_argument("--manifest", required=True)
    p.add_argument("--bind", default="127.0.0.1:8601", help="host:port")
    p.add_argument("--ui-dir", default=None, help="static files for the UI")
    p.add_argument("--readonly", action="store_true")

    p = sub.add_parser("validate", help="check an annotation file")
    p.add_argument("--annotation", required=True)
    p.add_argument("--mode", choices=["strict", "lenient"], default="strict")

    p = sub.add_parser("to-coarse", help="strip entry/landing segments")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("stats", help="corpus annotation statistics")
    p.add_argument("--manifest", required=True)
    p.add_argument("--json", dest="json_out", default=None,
                   help="also write the stats as JSON")

    p = sub.add_parser("split", help="competition-wise train/val/test split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--test-competitions", nargs="+", required=True)
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.add_argument("--out", default=None, help="write the split as JSON")

    p = sub.add_parser("train-baseline", help="train the linear segmenter")
    p.add_argument("--data", required=True,
                   help="JSON list of {features, annotation} pairs")
    p.add_argument("--level", choices=["set", "element"], default="set")
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--window", type=int, default=15)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("predict", help="frame labels from a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True, help="feature matrix (.npy)")
    p.add_argument("--out", required=True, help="one label name per line")
    p.add_argument("--no-smooth", action="store_true",
                   help="skip temporal smoothing")
    p.add_argument("--mode-window", type=int, default=9)
    p.add_argument("--min-segment", type=int, default=5)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("--pred", action="append", required=True,
                   help="prediction file (one label name per frame); repeatable")
    p.add_argument("--gt", action="append", required=True,
                   help="ground-truth annotation file; repeatable")
    p.add_argument("--level", choices=["set", "element"], default="set")
    p.add_argument("--ks", type=float, nargs="+",
                   default=list(metrics.DEFAULT_KS))
    p.add_argument("--out-json", default=None, help="write the report as JSON")
    return parser


def _cmd_ingest(args) -> int:
    mapping = io.load_rig_mapping(args.mapping)
    seq = io.ingest_fsjump3d(args.mocap, mapping)
    io.save_pose_sequence(seq, args.out, format=args.format)
    print(f"wrote {seq.n_frames} frames x {seq.n_joints} joints to {args.out}")
    return 0


def _cmd_preprocess(args) -> int:
    seq = io.load_pose_sequence(args.infile)
    features = preprocess.preprocess_sequence(
        seq, conf_threshold=args.conf_threshold,
        align=not args.no_align,
        include_euler=not (args.no_euler or args.no_align),
    )
    np.save(args.out, features.values)
    print(f"wrote features {features.values.shape} to {args.out}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.rpartition(":")
    app = create_app(args.manifest, ui_dir=args.ui_dir, readonly=args.readonly)
    config = uvicorn.Config(app, host=host or "127.0.0.1", port=int(port),
                            log_level="warning")
    server = uvicorn.Server(config)
    orig_startup = server.startup

    async def startup(**kwargs):
        # announce the bound address (port 0 picks a free one)
        await orig_startup(**kwargs)
        for srv in server.servers:
            for sock in srv.sockets:
                addr = sock.getsockname()
                print(f"serving on http://{addr[0]}:{addr[1]}", flush=True)

    server.startup = startup
    server.run()
    return 0


def _cmd_validate(args) -> int:
    ann = anno.load_annotation(args.annotation)
    violations = anno.validate(ann, mode=args.mode)
    if not violations:
        print(f"{args.annotation}: no violations ({args.mode} mode)")
        return 0
    for v in violations:
        print(f"{v.kind}: {v.message}")
    return 2


def _cmd_to_coarse(args) -> int:
    ann = anno.load_annotation(args.infile)
    anno.save_annotation(anno.to_coarse(ann), args.out)
    print(f"wrote coarse annotation to {args.out}")
    return 0


def _load_corpus_annotations(manifest):
    annotations = []
    for entry in manifest.entries:
        if entry.annotation_path is not None and entry.annotation_path.exists():
            annotations.append(anno.load_annotation(entry.annotation_path))
    return annotations


def _cmd_stats(args) -> int:
    manifest = io.load_manifest(args.manifest)
    annotations = _load_corpus_annotations(manifest)
    if not annotations:
        print("no annotations found in manifest", file=sys.stderr)
        return 2
    stats = anno.corpus_stats(annotations)
    print(f"videos:                {stats.n_videos}")
    print(f"mean total frames:     {stats.mean_total_frames:.1f}")
    print(f"mean action frames:    {stats.mean_action_frames:.1f}")
    print(f"action-frame ratio:    {stats.action_frame_ratio:.2f}%")
    print(f"mean jump duration:    {stats.mean_jump_duration_frames:.2f} frames")
    print("occurrences per jump label:")
    for name in sorted(stats.occurrences):
        print(f"  {name}: {stats.occurrences[name]}")
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(stats.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _cmd_split(args) -> int:
    manifest = io.load_manifest(args.manifest)
    result = io.split_by_competition(manifest, args.test_competitions,
                                     val_fraction=args.val_fraction)
    print(f"train: {len(result.train)}  val: {len(result.val)}  "
          f"test: {len(result.test)}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(result.to_dict(), fh, indent=2)
            fh.write("\n")
    return 0


def _cmd_train(args) -> int:
    with open(args.data, "r", encoding="utf-8") as fh:
        pairs = json.load(fh)
    level = Level(args.level)
    taxonomy = build_taxonomy(level)
    window_rows = []
    label_rows = []
    feature_dim = None
    for pair in pairs:
        values = np.load(pair["features"])
        ann = anno.load_annotation(pair["annotation"])
        if ann.level is not level:
            raise SkatesegError(
                f"{pair['annotation']}: annotation level {ann.level.value!r} "
                f"!= requested {level.value!r}")
        if len(values) != ann.total_frames:
            raise SkatesegError(
                f"{pair['features']}: {len(values)} feature rows but "
                f"annotation covers {ann.total_frames} frames")
        if feature_dim is None:
            feature_dim = values.shape[1]
        elif values.shape[1] != feature_dim:
            raise SkatesegError("feature widths differ across sequences")
        window_rows.append(baseline.window_features(values, args.window))
        label_rows.append(anno.expand_to_frames(ann, taxonomy).ids)
    windows = np.concatenate(window_rows, axis=0)
    labels = np.concatenate(label_rows, axis=0)
    config = baseline.TrainConfig(
        learning_rate=args.learning_rate, epochs=args.epochs,
        batch_size=args.batch_size, l2=args.l2, seed=args.seed,
    )
    from .core import FrameLabels

    model = baseline.train(windows, FrameLabels(level=level, ids=labels),
                           taxonomy, config,
                           window=args.window, feature_dim=feature_dim)
    baseline.save_model(model, args.out)
    print(f"trained on {len(labels)} frames; final loss "
          f"{model.final_loss:.6f}; wrote {args.out}")
    return 0


def _cmd_predict(args) -> int:
    model = baseline.load_model(args.model)
    values = np.load(args.features)
    windows = baseline.window_features(values, model.window)
    frames, _ = baseline.predict_frames(model, windows)
    if not args.no_smooth:
        frames = baseline.smooth_labels(frames, mode_window=args.mode_window,
                                        min_segment=args.min_segment)
    io.save_frame_labels(frames, model.taxonomy, args.out)
    print(f"wrote {len(frames)} frame labels to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    if len(args.pred) != len(args.gt):
        raise _UsageError("--pred and --gt must be given the same number of times")
    level = Level(args.level)
    taxonomy = build_taxonomy(level)
    pairs = []
    for pred_path, gt_path in zip(args.pred, args.gt):
        pred = io.import_external_predictions(pred_path, taxonomy)
        gt = anno.load_annotation(gt_path)
        pairs.append((pred, gt))
    report = metrics.evaluate_corpus(pairs, taxonomy, ks=tuple(args.ks))
    print(report.table(), end="")
    if args.out_json:
        with open(args.out_json, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "preprocess": _cmd_preprocess,
    "annotate-serve": _cmd_serve,
    "validate": _cmd_validate,
    "to-coarse": _cmd_to_coarse,
    "stats": _cmd_stats,
    "split": _cmd_split,
    "train-baseline": _cmd_train,
    "predict": _cmd_predict,
    "eval": _cmd_eval,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SkatesegError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
