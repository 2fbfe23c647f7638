"""Synthetic multi-modal frames around exported UE traces, plus directory IO.

The generator plants a learnable bearing-to-group relationship: each UE drags
a small point cluster (a vehicle) at its GPS position and lights up blobs in
the radar maps at its range/bearing/velocity, on top of static street
furniture and background noise.  Frame files live one-per-tick in a
directory next to the copied labels and GPS tables.
"""

from __future__ import annotations

import csv
import math
import shutil
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

RA_SHAPE = (32, 24)    # range bins x angle bins
RV_SHAPE = (32, 16)    # range bins x velocity bins
MAX_RANGE = 400.0
MAX_SPEED = 15.0


@dataclass
class Frame:
    tick: int
    gps: np.ndarray             # n_ue x 2, meters
    points: np.ndarray          # n x 3
    range_angle: np.ndarray
    range_velocity: np.ndarray
    labels: np.ndarray          # n_ue, group indices


def _read_table(path: Path, columns: list[str]) -> dict[int, dict[int, list[float]]]:
    out: dict[int, dict[int, list[float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(columns).issubset(reader.fieldnames):
            raise DataError(f"{path} must have columns {columns}")
        for rec in reader:
            tick = int(rec["tick"])
            ue = int(rec["ue_id"])
            out.setdefault(tick, {})[ue] = [float(rec[c]) for c in columns[2:]]
    if not out:
        raise DataError(f"{path} is empty")
    return out


def _blob(grid: np.ndarray, row: float, col: float, amp: float, width: float) -> None:
    rr, cc = np.meshgrid(np.arange(grid.shape[0]), np.arange(grid.shape[1]),
                         indexing="ij")
    grid += amp * np.exp(-((rr - row) ** 2 + (cc - col) ** 2) / (2 * width ** 2))


def generate_frames(labels_csv: str, gps_csv: str, out_dir: str, seed: int = 0,
                    n_static: int = 120, n_noise: int = 15,
                    points_per_vehicle: int = 12) -> list[Frame]:
    """Synthesize one frame per exported tick and write the frames directory."""
    labels = _read_table(Path(labels_csv), ["tick", "ue_id", "group"])
    gps = _read_table(Path(gps_csv), ["tick", "ue_id", "x_m", "y_m"])
    if set(labels) != set(gps):
        raise DataError("labels and GPS exports cover different ticks")
    rng = np.random.default_rng(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    # street furniture: fixed positions, re-observed each tick with sensor jitter
    static_r = np.sqrt(rng.uniform(30.0**2, 380.0**2, n_static))
    static_th = rng.uniform(0.05, math.pi - 0.05, n_static)
    static_xy = np.stack([static_r * np.cos(static_th), static_r * np.sin(static_th)], axis=1)
    static_z = rng.uniform(0.0, 4.0, n_static)

    frames: list[Frame] = []
    prev_pos: dict[int, np.ndarray] = {}
    for tick in sorted(labels):
        per_ue = gps[tick]
        ue_ids = sorted(per_ue)
        if sorted(labels[tick]) != ue_ids:
            raise DataError(f"tick {tick}: labels and GPS disagree on UE ids")
        pos = np.array([per_ue[u] for u in ue_ids])
        lab = np.array([int(labels[tick][u][0]) for u in ue_ids])
        if np.any(lab < 0) or np.any(lab >= 8):
            raise DataError("group labels must lie in [0, 8)")

        pts = [np.column_stack([
            static_xy + rng.normal(0.0, 0.02, static_xy.shape),
            static_z + rng.normal(0.0, 0.01, n_static),
        ])]
        speeds = np.zeros(len(ue_ids))
        for k, u in enumerate(ue_ids):
            prev = prev_pos.get(u)
            speeds[k] = (np.linalg.norm(pos[k] - prev) / 0.1 if prev is not None
                         else rng.uniform(2.0, MAX_SPEED))
            prev_pos[u] = pos[k]
            cluster = pos[k] + rng.normal(0.0, 0.8, (points_per_vehicle, 2))
            z = rng.uniform(0.2, 1.8, points_per_vehicle)
            pts.append(np.column_stack([cluster, z]))
        noise_r = np.sqrt(rng.uniform(20.0**2, 390.0**2, n_noise))
        noise_th = rng.uniform(0.05, math.pi - 0.05, n_noise)
        pts.append(np.column_stack([
            noise_r * np.cos(noise_th), noise_r * np.sin(noise_th),
            rng.uniform(0.0, 5.0, n_noise),
        ]))
        points = np.concatenate(pts)

        ra = np.zeros(RA_SHAPE)
        rv = np.zeros(RV_SHAPE)
        for k in range(len(ue_ids)):
            r = float(np.hypot(pos[k, 0], pos[k, 1]))
            th = float(math.atan2(pos[k, 1], pos[k, 0]))
            row = min(r / MAX_RANGE, 0.999) * RA_SHAPE[0]
            col_a = min(max(th / math.pi, 0.0), 0.999) * RA_SHAPE[1]
            col_v = min(speeds[k] / MAX_SPEED, 0.999) * RV_SHAPE[1]
            _blob(ra, row, col_a, amp=1.0, width=1.2)
            _blob(rv, row, col_v, amp=1.0, width=1.2)
        ra += rng.normal(0.0, 0.02, RA_SHAPE)
        rv += rng.normal(0.0, 0.02, RV_SHAPE)

        frames.append(Frame(tick=tick, gps=pos, points=points,
                            range_angle=ra, range_velocity=rv, labels=lab))
        np.savetxt(out / f"points_{tick:04d}.csv", points, delimiter=",",
                   header="x,y,z", comments="")
        np.savetxt(out / f"range_angle_{tick:04d}.csv", ra, delimiter=",")
        np.savetxt(out / f"range_velocity_{tick:04d}.csv", rv, delimiter=",")

    shutil.copyfile(labels_csv, out / "labels.csv")
    shutil.copyfile(gps_csv, out / "gps.csv")
    return frames


def load_frames(frames_dir: str) -> list[Frame]:
    root = Path(frames_dir)
    labels = _read_table(root / "labels.csv", ["tick", "ue_id", "group"])
    gps = _read_table(root / "gps.csv", ["tick", "ue_id", "x_m", "y_m"])
    frames = []
    for tick in sorted(labels):
        points_path = root / f"points_{tick:04d}.csv"
        ra_path = root / f"range_angle_{tick:04d}.csv"
        rv_path = root / f"range_velocity_{tick:04d}.csv"
        for p in (points_path, ra_path, rv_path):
            if not p.exists():
                raise DataError(f"missing frame file {p}")
        ue_ids = sorted(gps[tick])
        frames.append(Frame(
            tick=tick,
            gps=np.array([gps[tick][u] for u in ue_ids]),
            points=np.loadtxt(points_path, delimiter=",", skiprows=1, ndmin=2),
            range_angle=np.loadtxt(ra_path, delimiter=",", ndmin=2),
            range_velocity=np.loadtxt(rv_path, delimiter=",", ndmin=2),
            labels=np.array([int(labels[tick][u][0]) for u in ue_ids]),
        ))
    if not frames:
        raise DataError(f"no frames found under {frames_dir}")
    return frames
