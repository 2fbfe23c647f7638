"""Comparison systems: flat 64-action Q-learning and prediction-only control.

The flat learner shares every episode mechanic with the group-constrained
agent but selects among all beams directly with state (ue, location).  The
prediction-only baseline assigns each UE its predictor-argmax beam for the
whole tick and never updates anything.
"""

from __future__ import annotations

import numpy as np

from .agent import (
    AdaptiveThreshold,
    EpisodeLog,
    EpsilonSchedule,
    QTable,
    RewardSpec,
    epsilon_at,
    resolve_threshold,
    simulate_tick,
)
from .channel import ChannelParams
from .codebook import BeamCodebook
from .environment import Clock, Scene
from .errors import ConfigurationError
from .predictor import OracleContext, make_oracle_context


def run_rl_only(
    scene: Scene,
    q64: QTable,
    spec: RewardSpec,
    schedule: EpsilonSchedule,
    params: ChannelParams,
    cb: BeamCodebook,
    rng: np.random.Generator,
    *,
    episode: int = 0,
    clock: Clock | None = None,
    ctx: OracleContext | None = None,
    adaptive: AdaptiveThreshold | None = None,
    learn: bool = True,
    eps_override: float | None = None,
    keep_sinr: bool = True,
) -> EpisodeLog:
    """One tick of flat Q-learning over the whole codebook, no predictor."""
    clock = clock or Clock()
    if ctx is None:
        ctx = make_oracle_context(scene, params, cb)
    if q64.n_actions != cb.n_beams:
        raise ConfigurationError(
            f"flat learner needs {cb.n_beams} actions, table has {q64.n_actions}"
        )
    states = [(u, int(scene.location_index[u])) for u in range(scene.n_ue)]
    beam_base = np.zeros(scene.n_ue, dtype=int)
    eps = epsilon_at(schedule, episode) if eps_override is None else eps_override
    oracle_total = ctx.oracle.outcome.total_bps
    resolved = resolve_threshold(spec, adaptive, oracle_total, episode=episode,
                                 anchor_norm=ctx.anchor_norm)
    records, _ = simulate_tick(
        ctx.cache,
        k_d=clock.k_d,
        tick_index=scene.tick_index,
        resolved=resolved,
        adaptive=adaptive,
        oracle_total_bps=oracle_total,
        q=q64,
        states=states,
        beam_base=beam_base,
        eps=eps,
        rng=rng,
        learn=learn,
        keep_sinr=keep_sinr,
    )
    return EpisodeLog(episode=episode, records=records)


class OracleBeamPredictor64:
    """Emits the joint-oracle beam for every UE (perfect 64-way prediction)."""

    kind = "oracle64"

    def predict_beams(self, scene: Scene, ctx: OracleContext, cb: BeamCodebook) -> np.ndarray:
        return ctx.oracle.assignment.copy()

    def scores(self, scene: Scene, ctx: OracleContext, cb: BeamCodebook) -> np.ndarray:
        power = ctx.cache.power
        base = power / power.sum(axis=1, keepdims=True)
        out = 0.5 * base
        out[np.arange(scene.n_ue), self.predict_beams(scene, ctx, cb)] += 0.5
        return out


class NoisyBeamPredictor64:
    """Oracle beam with probability p, otherwise a uniform wrong beam."""

    kind = "noisy64"

    def __init__(self, p: float, rng: np.random.Generator):
        if not 0.0 <= p <= 1.0:
            raise ConfigurationError(f"accuracy p must lie in [0, 1], got {p}")
        self.p = p
        self.rng = rng

    def predict_beams(self, scene: Scene, ctx: OracleContext, cb: BeamCodebook) -> np.ndarray:
        truth = ctx.oracle.assignment
        n_ue = truth.shape[0]
        correct = self.rng.random(n_ue) < self.p
        offsets = self.rng.integers(1, cb.n_beams, size=n_ue)
        chosen = np.where(correct, truth, (truth + offsets) % cb.n_beams)
        self._last = chosen
        return chosen

    def scores(self, scene: Scene, ctx: OracleContext, cb: BeamCodebook) -> np.ndarray:
        # non-chosen mass is uninformative: the emulated accuracy knob applies
        # to the argmax only, so runner-up ranks must not leak the oracle
        out = np.full((scene.n_ue, cb.n_beams), 0.5 / cb.n_beams)
        out[np.arange(scene.n_ue), self._last] += 0.5
        return out


def run_mmt_only(
    scene: Scene,
    beam_predictor_64,
    params: ChannelParams,
    cb: BeamCodebook,
    *,
    clock: Clock | None = None,
    ctx: OracleContext | None = None,
    spec: RewardSpec | None = None,
    adaptive: AdaptiveThreshold | None = None,
    episode: int = 0,
    keep_sinr: bool = True,
) -> EpisodeLog:
    """Hold the predicted beams for a whole tick; measure only, learn nothing.

    Rewards are still logged against the same threshold so reward curves stay
    comparable across methods, but no table exists to update.
    """
    clock = clock or Clock()
    if ctx is None:
        ctx = make_oracle_context(scene, params, cb)
    assignment = np.asarray(beam_predictor_64.predict_beams(scene, ctx, cb), dtype=int)
    oracle_total = ctx.oracle.outcome.total_bps
    spec = spec or RewardSpec(mode="auto")
    resolved = resolve_threshold(spec, adaptive, oracle_total, episode=episode,
                                 anchor_norm=ctx.anchor_norm)
    records, _ = simulate_tick(
        ctx.cache,
        k_d=clock.k_d,
        tick_index=scene.tick_index,
        resolved=resolved,
        adaptive=adaptive,
        oracle_total_bps=oracle_total,
        assignment=assignment,
        keep_sinr=keep_sinr,
    )
    return EpisodeLog(episode=episode, records=records)
