"""Group classifier: preprocessing chain plus a softmax layer, and export.

Per tick: static clutter reduction over the point clouds, a bearing-binned
cloud descriptor, pooled concatenated radar maps, PCA down to l features.
Per (tick, UE) sample: the tick's PCA features joined with that UE's GPS.
A multinomial logistic layer maps samples to the 8 group scores, written in
the simulator's prediction-stream format.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.linear_model import LogisticRegression

from .errors import ConfigurationError, DataError
from .features import angular_histogram, pca_reduce, pool_map, radar_concat
from .frames import Frame
from .scr import scr_filter

N_GROUPS = 8
PREDICTION_HEADER = ["tick", "ue_id"] + [f"g{g}" for g in range(N_GROUPS)]
GPS_SCALE = 400.0


@dataclass(frozen=True)
class TrainReport:
    val_accuracy: float
    csv_path: str
    captured_variance: float
    n_train: int
    n_val: int


def scene_feature_matrix(frames: list[Frame], scr_eps: float = 0.1,
                         scr_min_recurrence: int = 3) -> np.ndarray:
    """One descriptor row per tick from the filtered clouds and radar maps."""
    filtered = scr_filter([f.points for f in frames], eps=scr_eps,
                          min_recurrence=scr_min_recurrence)
    rows = []
    for frame, cloud in zip(frames, filtered):
        cloud_desc = angular_histogram(cloud)
        radar = pool_map(radar_concat(frame.range_angle, frame.range_velocity))
        rows.append(np.concatenate([cloud_desc, radar]))
    return np.asarray(rows)


def train_and_export(frames: list[Frame], out_csv: str, *, split: float = 0.9,
                     l: int = 14, seed: int = 0, scr_eps: float = 0.1,
                     scr_min_recurrence: int = 3) -> TrainReport:
    if len(frames) < 50:
        raise DataError(f"need at least 50 labeled frames, got {len(frames)}")
    if not 0.5 <= split < 1.0:
        raise ConfigurationError("train fraction must lie in [0.5, 1)")
    labels_all = np.concatenate([f.labels for f in frames])
    if len(np.unique(labels_all)) < 2:
        raise DataError("labels are degenerate (single class)")

    scene = scene_feature_matrix(frames, scr_eps, scr_min_recurrence)
    pca = pca_reduce(scene, l=l)

    xs, ys, ticks, ues = [], [], [], []
    for i, frame in enumerate(frames):
        for k in range(frame.gps.shape[0]):
            gx, gy = frame.gps[k]
            r = float(np.hypot(gx, gy)) or 1.0
            # calibrated GPS block: position, bearing unit vector, range
            gps_feats = np.array([gx / GPS_SCALE, gy / GPS_SCALE,
                                  gx / r, gy / r, r / GPS_SCALE])
            xs.append(np.concatenate([pca.projected[i], gps_feats]))
            ys.append(int(frame.labels[k]))
            ticks.append(frame.tick)
            ues.append(k)
    x = np.asarray(xs)
    y = np.asarray(ys)

    # disjoint, exhaustive split by tick so validation ticks are unseen wholes
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(frames))
    n_train_ticks = int(round(split * len(frames)))
    train_ticks = {frames[i].tick for i in order[:n_train_ticks]}
    in_train = np.array([t in train_ticks for t in ticks])

    clf = LogisticRegression(max_iter=2000, C=50.0)
    clf.fit(x[in_train], y[in_train])
    val_mask = ~in_train
    val_acc = float((clf.predict(x[val_mask]) == y[val_mask]).mean()) if val_mask.any() else 1.0

    proba = clf.predict_proba(x)
    scores = np.zeros((len(x), N_GROUPS))
    for j, cls in enumerate(clf.classes_):
        scores[:, int(cls)] = proba[:, j]
    row_sums = scores.sum(axis=1, keepdims=True)
    scores = scores / row_sums

    out = Path(out_csv)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PREDICTION_HEADER)
        for i in np.lexsort((ues, ticks)):
            writer.writerow([ticks[i], ues[i]] + [f"{s:.9f}" for s in scores[i]])
    return TrainReport(
        val_accuracy=val_acc,
        csv_path=str(out),
        captured_variance=pca.captured_variance,
        n_train=int(in_train.sum()),
        n_val=int(val_mask.sum()),
    )
