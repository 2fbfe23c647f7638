"""Scene state, the two-timescale clock, and throughput-oracle search.

A Scene pins the base station and, for every UE, a small table of candidate
locations plus the index of the one currently occupied.  Scenes only change
at group-prediction tick boundaries (``advance_mmt_tick``); all learner
steps inside a tick see a frozen scene, which is what makes the per-tick
received-power cache valid.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelParams, StepOutcome, path_gain_linear, _validate_assignment
from .codebook import BeamCodebook
from .errors import ConfigurationError, DataError


@dataclass(frozen=True)
class SceneConfig:
    n_ue: int = 5
    n_loc: int = 5
    annulus_m: tuple[float, float] = (50.0, 500.0)
    angle_margin_rad: float = 0.05          # keep bearings inside (0, pi)
    bs_position: tuple[float, float] = (0.0, 0.0)
    mobility_prob: float = 0.3
    # snap candidate bearings to a set of beam-center angles; used by the
    # calibrated-emulation presets to remove between-beam ambiguity
    align_angles: tuple[float, ...] | None = None


@dataclass(frozen=True)
class Clock:
    mmt_period_ms: float = 100.0
    rl_step_ms: float = 0.5716

    @property
    def k_d(self) -> int:
        """Learner steps per prediction tick."""
        return int(math.floor(self.mmt_period_ms / self.rl_step_ms))


@dataclass(frozen=True)
class Scene:
    bs_position: np.ndarray          # shape (2,), meters
    location_table: np.ndarray       # shape (n_ue, n_loc, 2), meters
    location_index: np.ndarray       # shape (n_ue,), ints in [0, n_loc)
    tick_index: int = 0

    @property
    def n_ue(self) -> int:
        return self.location_table.shape[0]

    @property
    def n_loc(self) -> int:
        return self.location_table.shape[1]

    def coords(self, u: int) -> np.ndarray:
        return self.location_table[u, self.location_index[u]]

    def all_coords(self) -> np.ndarray:
        return self.location_table[np.arange(self.n_ue), self.location_index]

    def distance_km(self, u: int) -> float:
        d_m = float(np.hypot(*(self.coords(u) - self.bs_position)))
        return d_m / 1000.0

    def angle_to_bs(self, u: int) -> float:
        dx, dy = self.coords(u) - self.bs_position
        return float(math.atan2(dy, dx))


def new_scene(config: SceneConfig, rng: np.random.Generator) -> Scene:
    """Sample candidate locations uniformly over a half-annulus around the BS."""
    r_min, r_max = config.annulus_m
    if config.n_ue < 1 or config.n_loc < 1:
        raise ConfigurationError("need at least one UE and one candidate location")
    if not 0 < r_min < r_max:
        raise ConfigurationError(f"invalid annulus radii ({r_min}, {r_max})")
    if not 0 <= config.angle_margin_rad < math.pi / 2:
        raise ConfigurationError("angle margin must be in [0, pi/2)")
    n = config.n_ue * config.n_loc
    # uniform over the annulus area; bearings restricted to the open (0, pi) arc
    radii = np.sqrt(rng.uniform(r_min**2, r_max**2, size=n))
    angles = rng.uniform(config.angle_margin_rad, math.pi - config.angle_margin_rad, size=n)
    if config.align_angles is not None:
        grid = np.asarray(config.align_angles, dtype=float)
        angles = grid[np.argmin(np.abs(angles[:, None] - grid[None, :]), axis=1)]
    pts = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
    table = pts.reshape(config.n_ue, config.n_loc, 2) + np.asarray(config.bs_position)
    init = rng.integers(0, config.n_loc, size=config.n_ue)
    return Scene(
        bs_position=np.asarray(config.bs_position, dtype=float),
        location_table=table,
        location_index=init,
        tick_index=0,
    )


def advance_mmt_tick(scene: Scene, rng: np.random.Generator, mobility_prob: float = 0.3) -> Scene:
    """Each UE independently jumps to a uniformly chosen candidate location.

    Jump decisions and targets are always drawn (even when the move is a
    no-op) so the random stream advances identically for any mobility
    probability, which keeps matched-seed comparisons aligned.
    """
    moves = rng.random(scene.n_ue) < mobility_prob
    targets = rng.integers(0, scene.n_loc, size=scene.n_ue)
    new_index = np.where(moves, targets, scene.location_index)
    return replace(scene, location_index=new_index, tick_index=scene.tick_index + 1)


class LinkCache:
    """Received-power matrix for one frozen scene instant.

    ``power[u, b]`` is the power in watts that UE u receives when the station
    transmits on beam b, evaluated at u's own bearing and distance.  Both the
    desired-signal and the interference terms of the SINR are reads from this
    matrix, so the per-step cost of a measurement is O(n_ue).
    """

    def __init__(self, scene: Scene, params: ChannelParams, cb: BeamCodebook):
        self.scene = scene
        self.params = params
        self.cb = cb
        self.noise_w = params.noise_watts
        coords = scene.all_coords() - scene.bs_position
        d_km = np.hypot(coords[:, 0], coords[:, 1]) / 1000.0
        theta = np.arctan2(coords[:, 1], coords[:, 0])
        if np.any(d_km <= 0) or np.any(theta <= 0) or np.any(theta >= math.pi):
            raise ConfigurationError("UE positions must be at positive range with bearing in (0, pi)")
        dcos = np.cos(theta)[:, None] - np.cos(cb.angles)[None, :]
        u_pattern = np.sinc(params.n_antennas * params.d_a * dcos) ** 2
        path = np.array([path_gain_linear(params, d) for d in d_km])
        self.power = params.p_t_watts * params.peak_gain * params.g_r * u_pattern * path[:, None]

    @property
    def n_ue(self) -> int:
        return self.power.shape[0]

    def outcome(self, assignment) -> StepOutcome:
        a = _validate_assignment(assignment, self.n_ue, self.cb.n_beams)
        own = self.power[np.arange(self.n_ue), a]
        total_rx = self.power[:, a].sum(axis=1)
        sinr = own / (self.noise_w + total_rx - own)
        se = np.log2(1.0 + sinr)
        rates = self.params.bandwidth_hz * se
        return StepOutcome(sinr=sinr, rate_bps=rates, total_bps=float(rates.sum()),
                           se_total=float(se.sum()))

    def se_total(self, assignment) -> float:
        return self.outcome(assignment).se_total


def apply_and_measure(scene: Scene, params: ChannelParams, cb: BeamCodebook, assignment) -> StepOutcome:
    """Pure measurement of a complete one-beam-per-UE assignment."""
    if scene.n_ue == 0:
        return StepOutcome(sinr=np.array([]), rate_bps=np.array([]), total_bps=0.0, se_total=0.0)
    return LinkCache(scene, params, cb).outcome(assignment)


@dataclass(frozen=True)
class OracleBeam:
    beam: int
    total_bps: float
    ue_rate_bps: float


def _best_beam_from_cache(cache: LinkCache, u: int, assignment: np.ndarray) -> OracleBeam:
    """Exhaustive best-response for UE u with every other beam held fixed."""
    n_ue, n_beams = cache.power.shape
    noise = cache.noise_w
    # interference at each UE from the held beams (u's own contribution excluded)
    held = cache.power[:, assignment].sum(axis=1) - cache.power[:, assignment[u]]
    sinr_u = cache.power[u, :] / (noise + held[u])
    totals = np.log2(1.0 + sinr_u)
    if n_ue > 1:
        others = np.arange(n_ue) != u
        own_v = cache.power[others, assignment[others]]
        # candidate beams change every other UE's interference term
        denom = (noise + held[others] - own_v)[:, None] + cache.power[others, :]
        totals = totals + np.log2(1.0 + own_v[:, None] / denom).sum(axis=0)
    best = int(np.argmax(totals))  # argmax takes the lowest index on ties
    rate_u = cache.params.bandwidth_hz * math.log2(1.0 + float(sinr_u[best]))
    return OracleBeam(
        beam=best,
        total_bps=float(totals[best]) * cache.params.bandwidth_hz,
        ue_rate_bps=rate_u,
    )


def oracle_best_beam(scene: Scene, params: ChannelParams, cb: BeamCodebook,
                     u: int, others_assignment: dict[int, int]) -> OracleBeam:
    """Best beam for UE u by exhaustive search, other UEs pinned as given."""
    cache = LinkCache(scene, params, cb)
    assignment = np.zeros(scene.n_ue, dtype=int)
    for v, b in others_assignment.items():
        assignment[v] = b
    missing = set(range(scene.n_ue)) - {u} - set(others_assignment)
    if missing:
        raise DataError(f"others_assignment must pin every UE except {u}; missing {sorted(missing)}")
    return _best_beam_from_cache(cache, u, assignment)


@dataclass(frozen=True)
class JointOracle:
    assignment: np.ndarray     # per-UE beam index at the fixed point
    outcome: StepOutcome
    sweeps: int


def joint_oracle(cache: LinkCache, max_sweeps: int = 12) -> JointOracle:
    """Coordinate-ascent throughput maximization to a fixed point.

    Starts from each UE's individually strongest beam and cycles exhaustive
    per-UE best responses; ties break toward the lowest beam index.  Exact
    for small instances (verified against brute force in tests) and a
    monotone-improvement heuristic in general.
    """
    assignment = np.argmax(cache.power, axis=1).astype(int)
    sweeps = 0
    for _ in range(max_sweeps):
        changed = False
        for u in range(cache.n_ue):
            best = _best_beam_from_cache(cache, u, assignment)
            if best.beam != assignment[u]:
                assignment[u] = best.beam
                changed = True
        sweeps += 1
        if not changed:
            break
    return JointOracle(assignment=assignment, outcome=cache.outcome(assignment), sweeps=sweeps)


def export_scene_csv(scene: Scene, path: str) -> None:
    """Write the per-UE candidate-location tables as ue_id,loc_index,x_m,y_m."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ue_id", "loc_index", "x_m", "y_m"])
        for u in range(scene.n_ue):
            for k in range(scene.n_loc):
                x, y = scene.location_table[u, k]
                writer.writerow([u, k, f"{x:.6f}", f"{y:.6f}"])


def load_scene_csv(path: str, bs_position: tuple[float, float] = (0.0, 0.0)) -> Scene:
    """Pin geometry from a ue_id,loc_index,x_m,y_m table; all UEs start at loc 0."""
    entries: dict[tuple[int, int], tuple[float, float]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"ue_id", "loc_index", "x_m", "y_m"}
        if reader.fieldnames is None or not expected.issubset(reader.fieldnames):
            raise DataError(f"scene CSV must have columns {sorted(expected)}")
        for rec in reader:
            entries[(int(rec["ue_id"]), int(rec["loc_index"]))] = (
                float(rec["x_m"]), float(rec["y_m"]),
            )
    if not entries:
        raise DataError("scene CSV is empty")
    ue_ids = sorted({k[0] for k in entries})
    loc_ids = sorted({k[1] for k in entries})
    n_ue, n_loc = len(ue_ids), len(loc_ids)
    if ue_ids != list(range(n_ue)) or loc_ids != list(range(n_loc)):
        raise DataError("ue_id and loc_index must enumerate dense ranges from 0")
    table = np.zeros((n_ue, n_loc, 2))
    for (u, k), xy in entries.items():
        table[u, k] = xy
    if len(entries) != n_ue * n_loc:
        raise DataError("scene CSV must give every (ue_id, loc_index) pair exactly once")
    return Scene(
        bs_position=np.asarray(bs_position, dtype=float),
        location_table=table,
        location_index=np.zeros(n_ue, dtype=int),
        tick_index=0,
    )
