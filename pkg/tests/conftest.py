import math

import numpy as np
import pytest

from beamsim.channel import ChannelParams
from beamsim.codebook import build_codebook
from beamsim.environment import Scene


@pytest.fixture
def default_codebook():
    return build_codebook()


@pytest.fixture
def default_params():
    return ChannelParams()


def scene_at(angles_rad, distances_m, bs=(0.0, 0.0), n_loc=1):
    """Scene with one UE per (angle, distance), candidates cloned from loc 0."""
    n_ue = len(angles_rad)
    table = np.zeros((n_ue, n_loc, 2))
    for u, (th, d) in enumerate(zip(angles_rad, distances_m)):
        xy = np.array([d * math.cos(th), d * math.sin(th)]) + np.asarray(bs)
        for k in range(n_loc):
            table[u, k] = xy
    return Scene(
        bs_position=np.asarray(bs, dtype=float),
        location_table=table,
        location_index=np.zeros(n_ue, dtype=int),
        tick_index=0,
    )
