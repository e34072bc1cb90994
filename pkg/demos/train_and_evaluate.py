"""Train the linear baseline on a synthetic corpus and print the report.

Run: python3 demos/train_and_evaluate.py
"""
import numpy as np

from skateseg import (FrameLabels, build_taxonomy, evaluate_corpus,
                      expand_to_frames, predict_frames, preprocess_sequence,
                      smooth_labels, train, window_features)
from skateseg.baseline import TrainConfig
from skateseg.synthetic import synth_corpus
from skateseg.taxonomy import Level

WINDOW = 15
level = Level.SET
tax = build_taxonomy(level)

corpus = synth_corpus(seed=20240, n_sequences=16, level=level,
                      jumps_per_sequence=3, dropout=0.004)
train_set, test_set = corpus[:12], corpus[12:]
print(f"corpus: {len(train_set)} train / {len(test_set)} test sequences, "
      f"{sum(s.pose.n_frames for s in corpus)} frames total")


def features(item):
    return window_features(preprocess_sequence(item.pose), WINDOW)


x = np.concatenate([features(s) for s in train_set])
y = np.concatenate([expand_to_frames(s.annotation, tax).ids for s in train_set])
model = train(x, FrameLabels(level=level, ids=y), tax, TrainConfig(seed=0),
              window=WINDOW, feature_dim=x.shape[1] // WINDOW)
print(f"trained: final loss {model.final_loss:.4f} over "
      f"{len(model.loss_history) - 1} epochs")

pairs = []
for item in test_set:
    frames, _ = predict_frames(model, features(item))
    pairs.append((smooth_labels(frames), item.annotation))
report = evaluate_corpus(pairs, tax)
print()
print(report.table())
print("per-label ground-truth occurrences on the test split:")
for name, entry in sorted(report.per_label.items()):
    print(f"  {name}: {entry['occurrences']}")
