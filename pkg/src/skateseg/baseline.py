"""Desk-scale frame-wise segmenter: windowed features into a multinomial
logistic regression trained by mini-batch gradient descent, plus temporal
smoothing of the predicted labels.

The model is a single affine map per class over a window of W frames;
feature standardization is folded into the weights after training, so a
saved model is nothing but the weight matrix and its header.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .core import FrameLabels
from .errors import DataFormatError
from .preprocess import FeatureSequence
from .taxonomy import LabelTaxonomy

MODEL_MAGIC = b"FSLM"
MODEL_VERSION = 1


def window_features(features, window: int) -> np.ndarray:
    """Stack each frame with its W-1 neighbors, clamping at the edges.

    Row t is the concatenation of frames t-(W-1)/2 .. t+(W-1)/2, each D
    wide; out-of-range neighbors replicate the first/last frame.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be odd and >= 1")
    values = features.values if isinstance(features, FeatureSequence) else np.asarray(features)
    if values.ndim != 2:
        raise ValueError("features must be a (T, D) matrix")
    t_total = values.shape[0]
    half = (window - 1) // 2
    offsets = np.arange(-half, half + 1)
    idx = np.clip(np.arange(t_total)[:, None] + offsets[None, :], 0, t_total - 1)
    return values[idx].reshape(t_total, window * values.shape[1])


@dataclass(frozen=True)
class Standardizer:
    """Per-dimension mean/std fitted on training frames; epsilon-floored."""

    mean: np.ndarray
    std: np.ndarray
    epsilon: float = 1e-8

    @classmethod
    def fit(cls, x: np.ndarray, epsilon: float = 1e-8) -> "Standardizer":
        x = np.asarray(x, dtype=np.float64)
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        return cls(mean=mean, std=np.maximum(std, epsilon), epsilon=epsilon)

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.5
    epochs: int = 30
    batch_size: int = 256
    l2: float = 1e-4
    seed: int = 0
    class_weights: dict | None = None  # label id -> weight; None = balanced


@dataclass(frozen=True)
class LinearSegmenterModel:
    """Affine per-class scores over a window of frames, bias folded in."""

    weights: np.ndarray  # (C, W*D + 1), last column is the bias
    taxonomy: LabelTaxonomy
    window: int
    feature_dim: int  # D, per frame
    class_weights: np.ndarray  # (C,)
    config: TrainConfig
    final_loss: float = float("nan")
    loss_history: tuple = ()

    def __post_init__(self):
        if not np.isfinite(self.weights).all():
            raise ValueError("model weights must be finite")
        c = self.taxonomy.n_labels
        if self.weights.shape != (c, self.window * self.feature_dim + 1):
            raise ValueError(
                f"weights shape {self.weights.shape} inconsistent with "
                f"C={c}, W={self.window}, D={self.feature_dim}")

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def input_width(self) -> int:
        return self.weights.shape[1] - 1


def _log_softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def loss_and_gradient(weights: np.ndarray, x1: np.ndarray, y: np.ndarray,
                      sample_weights: np.ndarray, l2: float) -> tuple[float, np.ndarray]:
    """Class-weighted cross-entropy with L2 penalty, and its gradient.

    ``x1`` already carries the bias column. The data term is normalized
    by the total sample-weight mass, so with unit weights it is the mean
    per-frame cross entropy; the L2 term is (l2/2)*||W||^2 over
    everything but the bias column.
    """
    wsum = sample_weights.sum()
    logp = _log_softmax(x1 @ weights.T)
    data = -(sample_weights * logp[np.arange(len(y)), y]).sum() / wsum
    penalty = 0.5 * l2 * float((weights[:, :-1] ** 2).sum())
    probs = np.exp(logp)
    delta = probs
    delta[np.arange(len(y)), y] -= 1.0
    delta *= sample_weights[:, None]
    grad = (delta.T @ x1) / wsum
    grad[:, :-1] += l2 * weights[:, :-1]
    return float(data + penalty), grad


def balanced_class_weights(y: np.ndarray, n_classes: int) -> np.ndarray:
    """w_c = T / (C * count_c); zero for absent classes."""
    counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    weights = np.zeros(n_classes)
    present = counts > 0
    weights[present] = len(y) / (n_classes * counts[present])
    return weights


def train(windows: np.ndarray, gt: FrameLabels, taxonomy: LabelTaxonomy,
          config: TrainConfig = TrainConfig(),
          window: int = 1, feature_dim: int | None = None) -> LinearSegmenterModel:
    """Fit the segmenter by seeded mini-batch gradient descent.

    Deterministic for a fixed seed. The learning rate halves whenever an
    epoch fails to improve the full-data loss (the step is rolled back),
    so the recorded epoch losses are non-increasing. Class weights
    default to T/(C*count_c) to counter the dominance of background
    frames. ``window``/``feature_dim`` record how the rows factor into
    frames; they default to one frame of the full row width.
    """
    windows = np.asarray(windows, dtype=np.float64)
    y = np.asarray(gt.ids, dtype=np.int64)
    if windows.ndim != 2 or windows.shape[0] != len(y):
        raise ValueError("windows and labels length mismatch")
    if len(np.unique(y)) < 2:
        raise ValueError("training labels are degenerate (need >= 2 classes)")
    c = taxonomy.n_labels
    if y.max() >= c:
        raise ValueError("label id outside taxonomy")
    d_total = windows.shape[1]
    if feature_dim is None:
        feature_dim = d_total // window
    if window * feature_dim != d_total:
        raise ValueError(f"window {window} x feature_dim {feature_dim} != "
                         f"row width {d_total}")

    if config.class_weights is not None:
        class_w = np.zeros(c)
        for idx, w in config.class_weights.items():
            class_w[int(idx)] = float(w)
    else:
        class_w = balanced_class_weights(y, c)
    sample_w = class_w[y]
    if sample_w.sum() <= 0:
        raise ValueError("class weights wipe out every training frame")

    standardizer = Standardizer.fit(windows)
    x = standardizer.transform(windows)
    x1 = np.concatenate([x, np.ones((len(y), 1))], axis=1)

    weights = np.zeros((c, d_total + 1))
    rng = np.random.default_rng(config.seed)
    lr = config.learning_rate
    prev_loss, _ = loss_and_gradient(weights, x1, y, sample_w, config.l2)
    history = [prev_loss]
    for _ in range(config.epochs):
        order = rng.permutation(len(y))
        proposal = weights.copy()
        for start in range(0, len(y), config.batch_size):
            batch = order[start:start + config.batch_size]
            _, grad = loss_and_gradient(proposal, x1[batch], y[batch],
                                        sample_w[batch], config.l2)
            proposal -= lr * grad
        loss, _ = loss_and_gradient(proposal, x1, y, sample_w, config.l2)
        if not np.isfinite(loss):
            raise FloatingPointError(
                f"training diverged: loss={loss} at lr={lr}; "
                "lower the learning rate")
        if loss <= prev_loss:
            weights = proposal
            prev_loss = loss
        else:
            lr *= 0.5  # roll the epoch back and retry more cautiously
        history.append(prev_loss)

    folded = _fold_standardizer(weights, standardizer)
    return LinearSegmenterModel(
        weights=folded, taxonomy=taxonomy, window=window, feature_dim=feature_dim,
        class_weights=class_w, config=config, final_loss=prev_loss,
        loss_history=tuple(history),
    )


def _fold_standardizer(weights: np.ndarray, st: Standardizer) -> np.ndarray:
    """Absorb (x - mean)/std into the affine map so predict is plain."""
    coef = weights[:, :-1] / st.std[None, :]
    bias = weights[:, -1] - coef @ st.mean
    return np.concatenate([coef, bias[:, None]], axis=1)


def predict_frames(model: LinearSegmenterModel,
                   windows: np.ndarray) -> tuple[FrameLabels, np.ndarray]:
    """Argmax of the affine class scores per frame; ties pick the lower id."""
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 2 or windows.shape[1] != model.input_width:
        raise ValueError(
            f"window width {windows.shape[1] if windows.ndim == 2 else '?'} "
            f"!= model width {model.input_width}")
    scores = windows @ model.weights[:, :-1].T + model.weights[:, -1]
    ids = np.argmax(scores, axis=1)
    return FrameLabels(level=model.taxonomy.level, ids=ids), scores


def smooth_labels(frames: FrameLabels, mode_window: int = 9,
                  min_segment: int = 5) -> FrameLabels:
    """Two-pass temporal cleanup of frame labels.

    Pass 1 is a sliding mode filter (window clamped at the edges, ties
    keep the center frame's label). Pass 2 absorbs runs shorter than
    ``min_segment`` into the longer adjacent run, preferring the
    preceding run on ties; NONE counts as a run. With the defaults
    (min_segment >= (mode_window+1)/2) the result is a fixed point, so
    smoothing is idempotent.
    """
    if mode_window < 1 or mode_window % 2 == 0:
        raise ValueError("mode_window must be odd and >= 1")
    if min_segment < 1:
        raise ValueError("min_segment must be >= 1")
    ids = np.asarray(frames.ids, dtype=np.int64)
    t_total = len(ids)
    half = (mode_window - 1) // 2
    out = ids.copy()
    for t in range(t_total):
        lo, hi = max(0, t - half), min(t_total, t + half + 1)
        counts = np.bincount(ids[lo:hi])
        winners = np.flatnonzero(counts == counts.max())
        if len(winners) == 1:
            out[t] = winners[0]
        elif ids[t] in winners:
            out[t] = ids[t]  # tie keeps the center frame's label
        else:
            out[t] = winners[0]
    # absorb short runs until every run is long enough (or one run remains)
    runs = _runs(out)
    while len(runs) > 1:
        short = [i for i, r in enumerate(runs) if r[2] - r[1] < min_segment]
        if not short:
            break
        lengths = [runs[i][2] - runs[i][1] for i in short]
        i = short[int(np.argmin(lengths))]
        label, start, end = runs[i]
        left = runs[i - 1] if i > 0 else None
        right = runs[i + 1] if i + 1 < len(runs) else None
        if left is None:
            take = right
        elif right is None:
            take = left
        else:
            llen = left[2] - left[1]
            rlen = right[2] - right[1]
            take = left if llen >= rlen else right
        out[start:end] = take[0]
        runs = _runs(out)
    return FrameLabels(level=frames.level, ids=out)


def _runs(ids: np.ndarray) -> list[tuple[int, int, int]]:
    """(label, start, end) for each maximal run."""
    runs = []
    t = 0
    n = len(ids)
    while t < n:
        lab = int(ids[t])
        start = t
        while t < n and ids[t] == lab:
            t += 1
        runs.append((lab, start, t))
    return runs


def save_model(model: LinearSegmenterModel, path) -> None:
    """JSON header + float64 little-endian weight block."""
    header = {
        "level": model.taxonomy.level.value,
        "taxonomy": model.taxonomy.to_dict(),
        "window": model.window,
        "feature_dim": model.feature_dim,
        "n_classes": model.n_classes,
        "class_weights": model.class_weights.tolist(),
        "config": {
            "learning_rate": model.config.learning_rate,
            "epochs": model.config.epochs,
            "batch_size": model.config.batch_size,
            "l2": model.config.l2,
            "seed": model.config.seed,
        },
        "final_loss": model.final_loss,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<HI", MODEL_VERSION, len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(model.weights, dtype="<f8").tobytes())


def load_model(path) -> LinearSegmenterModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MODEL_MAGIC:
        raise DataFormatError(f"{path}: not a segmenter model file")
    version, header_len = struct.unpack_from("<HI", blob, 4)
    if version != MODEL_VERSION:
        raise DataFormatError(f"{path}: unsupported model version {version}")
    offset = 10
    try:
        header = json.loads(blob[offset:offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: corrupt model header ({exc})") from exc
    offset += header_len
    taxonomy = LabelTaxonomy.from_dict(header["taxonomy"])
    c = int(header["n_classes"])
    width = int(header["window"]) * int(header["feature_dim"]) + 1
    weights = np.frombuffer(blob, dtype="<f8", count=c * width,
                            offset=offset).reshape(c, width).copy()
    cfg = header.get("config", {})
    config = TrainConfig(
        learning_rate=cfg.get("learning_rate", 0.5),
        epochs=cfg.get("epochs", 30),
        batch_size=cfg.get("batch_size", 256),
        l2=cfg.get("l2", 1e-4),
        seed=cfg.get("seed", 0),
    )
    return LinearSegmenterModel(
        weights=weights, taxonomy=taxonomy, window=int(header["window"]),
        feature_dim=int(header["feature_dim"]),
        class_weights=np.asarray(header["class_weights"], dtype=np.float64),
        config=config, final_loss=header.get("final_loss", float("nan")),
    )
