import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamsim.codebook import build_codebook, load_codebook_csv
from beamsim.errors import ConfigurationError, DataError


def test_uniform_placement_first_beam():
    cb = build_codebook(64, 8, (0.0, math.pi))
    assert cb.angle_of(0) == pytest.approx(math.pi / 128, abs=1e-15)
    assert cb.group_of[0] == 0


def test_contiguous_grouping():
    cb = build_codebook(64, 8, (0.0, math.pi))
    assert cb.group_of[63] == 7
    assert cb.group_of[8] == 1


def test_non_divisible_counts_rejected():
    with pytest.raises(ConfigurationError):
        build_codebook(6, 8, (0.0, math.pi))


def test_degenerate_span_rejected():
    with pytest.raises(ConfigurationError):
        build_codebook(64, 8, (1.0, 1.0))
    with pytest.raises(ConfigurationError):
        build_codebook(64, 8, (2.0, 1.0))


def test_angle_of_formula_and_errors():
    cb = build_codebook(64, 8, (0.0, math.pi))
    assert cb.angle_of(31) == pytest.approx(31.5 * math.pi / 64)
    with pytest.raises(IndexError):
        cb.angle_of(64)
    with pytest.raises(IndexError):
        cb.angle_of(-1)


def test_beams_in_group_contents():
    cb = build_codebook(64, 8, (0.0, math.pi))
    assert cb.beams_in_group(0) == list(range(8))
    assert cb.beams_in_group(7) == list(range(56, 64))
    with pytest.raises(IndexError):
        cb.beams_in_group(8)


@settings(max_examples=50, deadline=None)
@given(
    n_groups=st.integers(1, 16),
    per_group=st.integers(1, 8),
    lo=st.floats(0.0, 1.0),
    width=st.floats(0.1, 2.0),
)
def test_partition_roundtrip_monotone(n_groups, per_group, lo, width):
    hi = min(lo + width, math.pi)
    n_beams = n_groups * per_group
    cb = build_codebook(n_beams, n_groups, (lo, hi))
    seen = []
    for g in range(n_groups):
        beams = cb.beams_in_group(g)
        assert len(beams) == per_group
        assert all(cb.group_of[b] == g for b in beams)
        seen.extend(beams)
    assert sorted(seen) == list(range(n_beams))
    for b in range(n_beams):
        assert b in cb.beams_in_group(int(cb.group_of[b]))
    assert np.all(np.diff(cb.angles) > 0)
    assert cb.angles[0] > lo and cb.angles[-1] < hi


def test_csv_roundtrip(tmp_path):
    cb = build_codebook(16, 4, (0.2, 2.8))
    path = tmp_path / "cb.csv"
    with open(path, "w") as fh:
        fh.write("beam_index,angle_rad,group_index\n")
        for b in range(cb.n_beams):
            fh.write(f"{b},{cb.angle_of(b)!r},{cb.group_of[b]}\n")
    loaded = load_codebook_csv(str(path))
    assert loaded.n_beams == 16
    assert loaded.n_groups == 4
    np.testing.assert_allclose(loaded.angles, cb.angles)


def test_csv_rejects_non_contiguous_groups(tmp_path):
    path = tmp_path / "bad.csv"
    with open(path, "w") as fh:
        fh.write("beam_index,angle_rad,group_index\n")
        fh.write("0,0.1,0\n1,0.2,1\n2,0.3,0\n3,0.4,1\n")
    with pytest.raises(DataError):
        load_codebook_csv(str(path))
