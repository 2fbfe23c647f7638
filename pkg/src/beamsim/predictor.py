"""Beam-group predictors: the step-1 interface in front of the learner.

A predictor maps the current scene to per-UE score vectors over the beam
groups.  The trained multi-modal model this stands in for is external to the
simulator; what matters here is the contract: scores are a probability
vector per UE, the argmax is the predicted group, and downstream the learner
only ever searches within that group.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams
from .codebook import BeamCodebook
from .environment import JointOracle, LinkCache, Scene, joint_oracle
from .errors import ConfigurationError, DataError

PREDICTION_HEADER = ["tick", "ue_id", "g0", "g1", "g2", "g3", "g4", "g5", "g6", "g7"]


@dataclass(frozen=True)
class OracleContext:
    """Per-tick oracle artifacts shared by predictors, rewards and metrics."""
    cache: LinkCache
    oracle: JointOracle
    group_floor_total_bps: float = 0.0   # expected total when guessing uniformly
                                         # inside each UE's oracle group

    @property
    def oracle_beams(self) -> np.ndarray:
        return self.oracle.assignment

    def oracle_groups(self, cb: BeamCodebook) -> np.ndarray:
        return cb.group_of[self.oracle.assignment]

    @property
    def anchor_norm(self) -> float:
        total = self.oracle.outcome.total_bps
        return self.group_floor_total_bps / total if total > 0 else 0.0


def make_oracle_context(scene: Scene, params: ChannelParams, cb: BeamCodebook) -> OracleContext:
    cache = LinkCache(scene, params, cb)
    oracle = joint_oracle(cache)
    # noise-only floor: mean received power over each UE's oracle group
    w = cb.beams_per_group
    n_ue = cache.n_ue
    per_group_mean = cache.power.reshape(n_ue, cb.n_groups, w).mean(axis=2)
    groups = cb.group_of[oracle.assignment]
    floor_power = per_group_mean[np.arange(n_ue), groups]
    floor_total = float(params.bandwidth_hz * np.log2(1.0 + floor_power / cache.noise_w).sum())
    return OracleContext(cache=cache, oracle=oracle, group_floor_total_bps=floor_total)


@dataclass(frozen=True)
class GroupPrediction:
    tick_index: int
    scores: np.ndarray      # shape (n_ue, n_groups), rows sum to 1
    argmax: np.ndarray      # shape (n_ue,), lowest index wins ties

    def __post_init__(self) -> None:
        if np.any(self.scores < 0):
            raise DataError("group scores must be non-negative")
        if not np.allclose(self.scores.sum(axis=1), 1.0, atol=1e-9):
            raise DataError("group scores must sum to 1 per UE")
        if not np.array_equal(self.argmax, np.argmax(self.scores, axis=1)):
            raise DataError("argmax groups inconsistent with scores")


def _blend_scores(chosen: np.ndarray, base: np.ndarray) -> np.ndarray:
    """Half the mass on the chosen group, half spread by relative strength.

    Guarantees the chosen group is the strict argmax while keeping the
    remaining groups ordered informatively.
    """
    n_ue, n_groups = base.shape
    norm = base / base.sum(axis=1, keepdims=True)
    scores = 0.5 * norm
    scores[np.arange(n_ue), chosen] += 0.5
    return scores


def _group_power_profile(ctx: OracleContext, cb: BeamCodebook) -> np.ndarray:
    """Per-UE best received power within each group, a natural score basis."""
    n_ue = ctx.cache.n_ue
    per_beam = ctx.cache.power
    w = cb.beams_per_group
    return per_beam.reshape(n_ue, cb.n_groups, w).max(axis=2)


class OracleGroupPredictor:
    """Emits the group containing each UE's joint-oracle beam."""

    kind = "oracle"

    def predict(self, scene: Scene, ctx: OracleContext, cb: BeamCodebook) -> GroupPrediction:
        chosen = ctx.oracle_groups(cb)
        scores = _blend_scores(chosen, _group_power_profile(ctx, cb))
        return GroupPrediction(tick_index=scene.tick_index, scores=scores,
                               argmax=np.argmax(scores, axis=1))


class NoisyOraclePredictor:
    """Oracle group with probability p, otherwise a uniform wrong group."""

    kind = "noisy"

    def __init__(self, p: float, rng: np.random.Generator):
        if not 0.0 <= p <= 1.0:
            raise ConfigurationError(f"accuracy p must lie in [0, 1], got {p}")
        self.p = p
        self.rng = rng

    def predict(self, scene: Scene, ctx: OracleContext, cb: BeamCodebook) -> GroupPrediction:
        truth = ctx.oracle_groups(cb)
        n_ue = truth.shape[0]
        # always draw both variates so the stream stays aligned across p values
        correct = self.rng.random(n_ue) < self.p
        offsets = self.rng.integers(1, cb.n_groups, size=n_ue)
        chosen = np.where(correct, truth, (truth + offsets) % cb.n_groups)
        scores = _blend_scores(chosen, _group_power_profile(ctx, cb))
        return GroupPrediction(tick_index=scene.tick_index, scores=scores,
                               argmax=np.argmax(scores, axis=1))


class GpsTablePredictor:
    """Nearest-candidate lookup built from a per-location calibration pass.

    Calibration records, for every UE and every candidate location, the group
    of that UE's strongest beam when observed alone.  Prediction looks up the
    entry for the UE's current location.
    """

    kind = "gps_table"

    def __init__(self, table: np.ndarray):
        if table.size == 0:
            raise ConfigurationError("calibration table is empty")
        self.table = table      # shape (n_ue, n_loc)

    @classmethod
    def calibrate(cls, scene: Scene, params: ChannelParams, cb: BeamCodebook) -> "GpsTablePredictor":
        table = np.zeros((scene.n_ue, scene.n_loc), dtype=int)
        for u in range(scene.n_ue):
            for k in range(scene.n_loc):
                probe = Scene(
                    bs_position=scene.bs_position,
                    location_table=scene.location_table[u:u + 1],
                    location_index=np.array([k]),
                )
                cache = LinkCache(probe, params, cb)
                table[u, k] = cb.group_of[int(np.argmax(cache.power[0]))]
        return cls(table)

    def predict(self, scene: Scene, ctx: OracleContext, cb: BeamCodebook) -> GroupPrediction:
        chosen = self.table[np.arange(scene.n_ue), scene.location_index]
        scores = np.full((scene.n_ue, cb.n_groups), 0.5 / cb.n_groups)
        scores[np.arange(scene.n_ue), chosen] += 0.5
        return GroupPrediction(tick_index=scene.tick_index, scores=scores,
                               argmax=np.argmax(scores, axis=1))


class FilePredictor:
    """Replays an externally produced prediction stream, tick by tick."""

    kind = "file"

    def __init__(self, path: str):
        self.path = path
        self._by_tick: dict[int, np.ndarray] = {}
        self._load()

    def _load(self) -> None:
        with open(self.path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != PREDICTION_HEADER:
                raise DataError(
                    f"prediction stream must have header {','.join(PREDICTION_HEADER)}"
                )
            rows: dict[int, dict[int, np.ndarray]] = {}
            for rec in reader:
                tick = int(rec["tick"])
                ue = int(rec["ue_id"])
                scores = np.array([float(rec[f"g{g}"]) for g in range(8)])
                if abs(scores.sum() - 1.0) > 1e-6 or np.any(scores < 0):
                    raise DataError(f"scores for tick {tick} ue {ue} are not a probability vector")
                rows.setdefault(tick, {})[ue] = scores
        if not rows:
            raise DataError(f"prediction stream {self.path} is empty")
        ticks = sorted(rows)
        if ticks != list(range(ticks[0], ticks[0] + len(ticks))):
            raise DataError("prediction stream ticks must be consecutive and strictly increasing")
        n_ue = len(rows[ticks[0]])
        for tick, per_ue in rows.items():
            if sorted(per_ue) != list(range(n_ue)):
                raise DataError(f"tick {tick} must cover ue_id 0..{n_ue - 1}")
            self._by_tick[tick] = np.stack([per_ue[u] for u in range(n_ue)])

    def predict(self, scene: Scene, ctx: OracleContext, cb: BeamCodebook) -> GroupPrediction:
        scores = self._by_tick.get(scene.tick_index)
        if scores is None:
            raise DataError(f"prediction stream has no tick {scene.tick_index}")
        if scores.shape[0] != scene.n_ue:
            raise DataError("prediction stream UE count does not match the scene")
        return GroupPrediction(tick_index=scene.tick_index, scores=scores,
                               argmax=np.argmax(scores, axis=1))


def make_predictor(kind: str, *, p: float | None = None, path: str | None = None,
                   table: np.ndarray | None = None,
                   rng: np.random.Generator | None = None):
    if kind == "oracle":
        return OracleGroupPredictor()
    if kind == "noisy":
        if p is None:
            raise ConfigurationError("noisy predictor needs an accuracy p")
        return NoisyOraclePredictor(p, rng if rng is not None else np.random.default_rng())
    if kind == "gps_table":
        if table is None:
            raise ConfigurationError("gps_table predictor needs a calibration table")
        return GpsTablePredictor(table)
    if kind == "file":
        if path is None:
            raise ConfigurationError("file predictor needs a stream path")
        return FilePredictor(path)
    raise ConfigurationError(f"unknown predictor kind {kind!r}")


def write_prediction_stream(path: str, rows: list[tuple[int, int, np.ndarray]]) -> None:
    """Write (tick, ue_id, scores) rows in the wire format, LF line endings."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PREDICTION_HEADER)
        for tick, ue, scores in rows:
            if len(scores) != 8:
                raise DataError("prediction stream carries exactly 8 group scores")
            writer.writerow([tick, ue] + [f"{s:.9f}" for s in scores])
