"""Beam codebook: steering angles, their grouping, and index lookups.

The base station transmits on one of ``n_beams`` narrow beams whose steering
angles are placed uniformly over a configurable angular span with a half-step
offset (so no beam sits exactly at endfire).  Beams are partitioned into
``n_groups`` contiguous-in-angle groups; group g holds beams
[g*w, (g+1)*w) with w = n_beams // n_groups.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataError


@dataclass(frozen=True)
class BeamCodebook:
    n_beams: int
    n_groups: int
    angles: np.ndarray          # steering angles in radians, strictly increasing
    group_of: np.ndarray        # beam index -> group index
    d_a: float = 0.5            # element spacing in wavelengths
    n_antennas: int = 64

    @property
    def beams_per_group(self) -> int:
        return self.n_beams // self.n_groups

    def angle_of(self, beam: int) -> float:
        """Steering angle of a beam; pure lookup, raises IndexError out of range."""
        if not 0 <= beam < self.n_beams:
            raise IndexError(f"beam index {beam} out of range [0, {self.n_beams})")
        return float(self.angles[beam])

    def beams_in_group(self, group: int) -> list[int]:
        """Sorted beam indices belonging to a group."""
        if not 0 <= group < self.n_groups:
            raise IndexError(f"group index {group} out of range [0, {self.n_groups})")
        w = self.beams_per_group
        return list(range(group * w, (group + 1) * w))

    def group_base(self, group: int) -> int:
        """First beam index of a group."""
        if not 0 <= group < self.n_groups:
            raise IndexError(f"group index {group} out of range [0, {self.n_groups})")
        return group * self.beams_per_group


def build_codebook(
    n_beams: int = 64,
    n_groups: int = 8,
    angle_span: tuple[float, float] = (0.0, math.pi),
    d_a: float = 0.5,
    n_antennas: int = 64,
) -> BeamCodebook:
    """Uniformly placed codebook: beam i steers at min + (i + 0.5) * span / n_beams."""
    lo, hi = angle_span
    if n_beams <= 0 or n_groups <= 0 or n_beams % n_groups != 0:
        raise ConfigurationError(
            f"n_beams ({n_beams}) must be a positive multiple of n_groups ({n_groups})"
        )
    if not (0.0 <= lo < hi <= math.pi):
        raise ConfigurationError(f"degenerate angle span [{lo}, {hi}]")
    step = (hi - lo) / n_beams
    angles = lo + (np.arange(n_beams) + 0.5) * step
    group_of = np.arange(n_beams) // (n_beams // n_groups)
    return BeamCodebook(
        n_beams=n_beams,
        n_groups=n_groups,
        angles=angles,
        group_of=group_of,
        d_a=d_a,
        n_antennas=n_antennas,
    )


def load_codebook_csv(
    path: str,
    d_a: float = 0.5,
    n_antennas: int = 64,
) -> BeamCodebook:
    """Explicit-angles mode: CSV with columns beam_index,angle_rad,group_index."""
    rows: list[tuple[int, float, int]] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"beam_index", "angle_rad", "group_index"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise DataError(f"codebook CSV must have columns {sorted(expected)}")
        for rec in reader:
            rows.append(
                (int(rec["beam_index"]), float(rec["angle_rad"]), int(rec["group_index"]))
            )
    if not rows:
        raise DataError("codebook CSV is empty")
    rows.sort()
    n_beams = len(rows)
    if [r[0] for r in rows] != list(range(n_beams)):
        raise DataError("beam_index column must enumerate 0..n_beams-1")
    angles = np.array([r[1] for r in rows])
    group_of = np.array([r[2] for r in rows])
    n_groups = int(group_of.max()) + 1
    if n_beams % n_groups != 0:
        raise ConfigurationError("beam count must be a multiple of the group count")
    if np.any(np.diff(angles) <= 0):
        raise DataError("angles must be strictly increasing in beam order")
    if np.any(angles <= 0) or np.any(angles >= math.pi):
        raise DataError("angles must lie in the open interval (0, pi)")
    w = n_beams // n_groups
    if not np.array_equal(group_of, np.arange(n_beams) // w):
        raise DataError("groups must be contiguous blocks of equal size in angle order")
    return BeamCodebook(
        n_beams=n_beams,
        n_groups=n_groups,
        angles=angles,
        group_of=group_of,
        d_a=d_a,
        n_antennas=n_antennas,
    )
