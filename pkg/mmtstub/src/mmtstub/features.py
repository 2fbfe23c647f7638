"""Feature extraction: PCA reduction, radar map concatenation, descriptors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataError


@dataclass(frozen=True)
class PcaResult:
    projected: np.ndarray        # samples x l
    basis: np.ndarray            # d x l, orthonormal columns
    mean: np.ndarray             # d
    captured_variance: float     # fraction of total variance retained

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.mean) @ self.basis

    def reconstruct(self, projected: np.ndarray) -> np.ndarray:
        return projected @ self.basis.T + self.mean


def pca_reduce(features: np.ndarray, l: int = 14) -> PcaResult:
    """Mean-centered projection onto the top-l principal components."""
    x = np.asarray(features, dtype=float)
    if x.ndim != 2:
        raise DataError("feature matrix must be 2-D (samples x dims)")
    n, d = x.shape
    if not 1 <= l <= d:
        raise ConfigurationError(f"component count l={l} outside [1, {d}]")
    if n < 2:
        raise DataError("need at least two samples")
    mean = x.mean(axis=0)
    centered = x - mean
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    basis = vt[:l].T
    # deterministic sign: largest-magnitude entry of each component positive
    for j in range(basis.shape[1]):
        k = int(np.argmax(np.abs(basis[:, j])))
        if basis[k, j] < 0:
            basis[:, j] = -basis[:, j]
    var_total = float((svals ** 2).sum())
    captured = float((svals[:l] ** 2).sum() / var_total) if var_total > 0 else 1.0
    return PcaResult(projected=centered @ basis, basis=basis, mean=mean,
                     captured_variance=captured)


def radar_concat(range_angle: np.ndarray, range_velocity: np.ndarray) -> np.ndarray:
    """Join the two maps along the non-range axis; both stay recoverable."""
    ra = np.asarray(range_angle, dtype=float)
    rv = np.asarray(range_velocity, dtype=float)
    if ra.ndim != 2 or rv.ndim != 2:
        raise DataError("radar maps must be 2-D grids")
    if ra.shape[0] != rv.shape[0]:
        raise DataError(
            f"range axes differ: {ra.shape[0]} vs {rv.shape[0]}")
    return np.concatenate([ra, rv], axis=1)


def angular_histogram(points: np.ndarray, n_bins: int = 16,
                      max_range: float = 400.0) -> np.ndarray:
    """Bearing-binned summary of a cloud: point share and mean range per bin."""
    pts = np.asarray(points, dtype=float)
    counts = np.zeros(n_bins)
    ranges = np.zeros(n_bins)
    if len(pts):
        bearing = np.arctan2(pts[:, 1], pts[:, 0])
        rng = np.hypot(pts[:, 0], pts[:, 1])
        keep = (bearing > 0) & (bearing < math.pi)
        bearing, rng = bearing[keep], rng[keep]
        idx = np.minimum((bearing / math.pi * n_bins).astype(int), n_bins - 1)
        for b in range(n_bins):
            sel = idx == b
            counts[b] = sel.sum()
            ranges[b] = rng[sel].mean() / max_range if sel.any() else 0.0
        if counts.sum() > 0:
            counts = counts / counts.sum()
    return np.concatenate([counts, ranges])


def pool_map(grid: np.ndarray, out_shape: tuple[int, int] = (4, 6)) -> np.ndarray:
    """Mean-pool a dense map onto a coarse grid and flatten."""
    g = np.asarray(grid, dtype=float)
    rows = np.array_split(np.arange(g.shape[0]), out_shape[0])
    cols = np.array_split(np.arange(g.shape[1]), out_shape[1])
    pooled = np.array([[g[np.ix_(r, c)].mean() for c in cols] for r in rows])
    return pooled.ravel()
