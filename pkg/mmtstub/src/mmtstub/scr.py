"""Static clutter reduction across a sequence of point-cloud frames.

A point is clutter when it recurs (has a neighbor within ``eps``) in at
least ``min_recurrence`` other frames: street furniture sits still while
vehicles drift between frames.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .errors import DataError


def scr_filter(frames: list[np.ndarray], eps: float = 0.1,
               min_recurrence: int = 3) -> list[np.ndarray]:
    """Drop recurring points; returns one filtered cloud per input frame."""
    if len(frames) < min_recurrence:
        raise DataError(
            f"need at least min_recurrence={min_recurrence} frames, got {len(frames)}")
    clouds = [np.asarray(f, dtype=float) for f in frames]
    for i, c in enumerate(clouds):
        if c.ndim != 2 or c.shape[1] != 3:
            raise DataError(f"frame {i} is not an (n, 3) point cloud")
    trees = [cKDTree(c) if len(c) else None for c in clouds]
    filtered = []
    for i, cloud in enumerate(clouds):
        if len(cloud) == 0:
            filtered.append(cloud)
            continue
        recurrence = np.zeros(len(cloud), dtype=int)
        for j, tree in enumerate(trees):
            if j == i or tree is None:
                continue
            dists, _ = tree.query(cloud, k=1, distance_upper_bound=eps)
            recurrence += (dists <= eps).astype(int)
        filtered.append(cloud[recurrence < min_recurrence])
    return filtered
