"""Monte Carlo experiment harness: runs, user sweeps, accuracy curves.

Seeding: a root seed spawns one stream bundle per round, and each bundle
splits into scene, agent, and predictor streams.  The scene stream is
consumed identically by every method, so matched seeds mean matched UE
trajectories.  After training, policies are scored in a greedy evaluation
phase (epsilon 0, learning off) on fresh ticks; reported spectral
efficiency and top-k accuracy come from that phase.
"""

from __future__ import annotations

import dataclasses
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .agent import (
    AdaptiveThreshold,
    QTable,
    greedy_assignment,
    run_episode,
)
from .baselines import (
    NoisyBeamPredictor64,
    OracleBeamPredictor64,
    run_mmt_only,
    run_rl_only,
)
from .codebook import BeamCodebook
from .config import ExperimentConfig
from .environment import advance_mmt_tick, new_scene
from .errors import ConfigurationError
from .metrics import (
    aggregate_runs,
    beam_score_ranking,
    cumulative_reward,
    mmt_rl_ranking,
    rl_only_ranking,
    write_csv,
)
from .predictor import GpsTablePredictor, make_oracle_context, make_predictor


@dataclass
class RoundResult:
    cum_rewards: np.ndarray          # discounted reward per training episode
    train_se: np.ndarray             # mean per-step SE per training episode
    eval_se: float                   # mean SE over greedy evaluation ticks
    rank_positions: np.ndarray       # oracle-beam rank per (eval tick, UE) sample
    step_time_ms: float              # mean wall-clock per learner step


@dataclass
class MethodResult:
    method: str
    cum_rewards: np.ndarray          # rounds x episodes
    reward_mean: np.ndarray
    reward_std: np.ndarray
    train_se: np.ndarray             # rounds x episodes
    eval_se: np.ndarray              # per round
    rank_positions: np.ndarray       # pooled over rounds
    step_time_ms: float

    def topk(self, k: int) -> float:
        if self.rank_positions.size == 0:
            raise ConfigurationError("no evaluation samples were collected")
        return float(np.mean(self.rank_positions < k))


def _make_group_predictor(cfg: ExperimentConfig, scene, params, cb: BeamCodebook,
                          rng: np.random.Generator, kind: str | None = None):
    p = cfg.predictor
    kind = kind or p.kind
    if kind == "gps_table":
        return GpsTablePredictor.calibrate(scene, params, cb)
    return make_predictor(kind, p=p.p, path=p.path, rng=rng)


def _make_beam_predictor(cfg: ExperimentConfig, rng: np.random.Generator):
    if cfg.mmt_only.kind == "oracle64":
        return OracleBeamPredictor64()
    return NoisyBeamPredictor64(cfg.mmt_only.p, rng)


def run_round(cfg: ExperimentConfig, method: str, round_ss: np.random.SeedSequence,
              *, episodes: int | None = None, skip_mmt_only_training: bool = False,
              ) -> RoundResult:
    params = cfg.channel_params()
    cb = cfg.build_codebook()
    clock = cfg.make_clock()
    spec = cfg.reward_spec()
    episodes = episodes if episodes is not None else cfg.run.episodes
    schedule = cfg.schedule(episodes)
    scene_rng, agent_rng, pred_rng = (np.random.default_rng(s) for s in round_ss.spawn(3))
    scene = new_scene(cfg.scene_config(), scene_rng)
    mobility = cfg.scene.mobility_prob

    q: QTable | None = None
    group_predictor = None
    train_predictor = None
    beam_predictor = None
    if method == "mmt-rl":
        q = cfg.grouped_qtable(cb)
        group_predictor = _make_group_predictor(cfg, scene, params, cb, pred_rng)
        train_predictor = (
            group_predictor if cfg.predictor.train_kind is None
            else _make_group_predictor(cfg, scene, params, cb, pred_rng,
                                       kind=cfg.predictor.train_kind))
    elif method == "rl-only":
        q = cfg.flat_qtable(cb)
    elif method == "mmt-only":
        beam_predictor = _make_beam_predictor(cfg, pred_rng)
    else:
        raise ConfigurationError(f"unknown method {method!r}")

    adaptive = AdaptiveThreshold(spec, clock.k_d) if spec.mode == "adaptive" else None
    cum = np.zeros(episodes)
    train_se = np.zeros(episodes)
    elapsed = 0.0
    timed_steps = 0
    for episode in range(episodes):
        if method == "mmt-only" and skip_mmt_only_training:
            scene = advance_mmt_tick(scene, scene_rng, mobility)
            continue
        ctx = make_oracle_context(scene, params, cb)
        t0 = time.perf_counter()
        if method == "mmt-rl":
            log = run_episode(scene, train_predictor, q, spec, schedule, params, cb,
                              agent_rng, episode=episode, clock=clock, ctx=ctx,
                              adaptive=adaptive, keep_sinr=False)
        elif method == "rl-only":
            log = run_rl_only(scene, q, spec, schedule, params, cb, agent_rng,
                              episode=episode, clock=clock, ctx=ctx,
                              adaptive=adaptive, keep_sinr=False)
        else:
            log = run_mmt_only(scene, beam_predictor, params, cb, clock=clock,
                               ctx=ctx, spec=spec, adaptive=adaptive,
                               episode=episode, keep_sinr=False)
        elapsed += time.perf_counter() - t0
        timed_steps += clock.k_d
        cum[episode] = cumulative_reward(log, cfg.agent.gamma)
        train_se[episode] = float(log.se_series.mean())
        scene = advance_mmt_tick(scene, scene_rng, mobility)

    eval_se = np.zeros(cfg.run.eval_ticks)
    positions: list[int] = []
    for t in range(cfg.run.eval_ticks):
        ctx = make_oracle_context(scene, params, cb)
        oracle_beams = ctx.oracle.assignment
        if method == "mmt-rl":
            prediction = group_predictor.predict(scene, ctx, cb)
            states = [(u, int(scene.location_index[u]), int(prediction.argmax[u]))
                      for u in range(scene.n_ue)]
            beam_base = np.array([cb.group_base(int(g)) for g in prediction.argmax])
            assignment = greedy_assignment(q, states, beam_base)
            rankings = [mmt_rl_ranking(q, states[u], prediction.scores[u], cb)
                        for u in range(scene.n_ue)]
        elif method == "rl-only":
            states = [(u, int(scene.location_index[u])) for u in range(scene.n_ue)]
            assignment = greedy_assignment(q, states, np.zeros(scene.n_ue, dtype=int))
            rankings = [rl_only_ranking(q, states[u]) for u in range(scene.n_ue)]
        else:
            assignment = np.asarray(beam_predictor.predict_beams(scene, ctx, cb), dtype=int)
            scores = beam_predictor.scores(scene, ctx, cb)
            rankings = [beam_score_ranking(scores[u]) for u in range(scene.n_ue)]
        eval_se[t] = ctx.cache.outcome(assignment).se_total
        positions.extend(r.index(int(b)) for r, b in zip(rankings, oracle_beams))
        scene = advance_mmt_tick(scene, scene_rng, mobility)

    return RoundResult(
        cum_rewards=cum,
        train_se=train_se,
        eval_se=float(eval_se.mean()) if eval_se.size else 0.0,
        rank_positions=np.array(positions, dtype=int),
        step_time_ms=(elapsed / timed_steps * 1000.0) if timed_steps else 0.0,
    )


def _round_task(args) -> RoundResult:
    cfg, method, ss, episodes, skip = args
    return run_round(cfg, method, ss, episodes=episodes, skip_mmt_only_training=skip)


def workers_from_env() -> int:
    raw = os.environ.get("BEAMSIM_WORKERS", "1")
    try:
        return max(int(raw), 1)
    except ValueError:
        return 1


def run_method(cfg: ExperimentConfig, method: str, seed: int, *,
               episodes: int | None = None, skip_mmt_only_training: bool = False,
               workers: int | None = None) -> MethodResult:
    rounds = cfg.run.rounds
    round_seeds = np.random.SeedSequence(seed).spawn(rounds)
    tasks = [(cfg, method, ss, episodes, skip_mmt_only_training) for ss in round_seeds]
    workers = workers_from_env() if workers is None else workers
    if workers > 1 and rounds > 1:
        with ProcessPoolExecutor(max_workers=min(workers, rounds)) as pool:
            results = list(pool.map(_round_task, tasks))
    else:
        results = [_round_task(t) for t in tasks]
    cum = np.stack([r.cum_rewards for r in results])
    mean, std = aggregate_runs(cum)
    return MethodResult(
        method=method,
        cum_rewards=cum,
        reward_mean=mean,
        reward_std=std,
        train_se=np.stack([r.train_se for r in results]),
        eval_se=np.array([r.eval_se for r in results]),
        rank_positions=np.concatenate([r.rank_positions for r in results]),
        step_time_ms=float(np.mean([r.step_time_ms for r in results if r.step_time_ms > 0] or [0.0])),
    )


def sweep_episodes(cfg: ExperimentConfig, n_ue: int) -> int:
    """Episode budget for a sweep point; grows with the state space."""
    explicit = cfg.run.sweep_episodes_by_n
    if explicit is not None:
        key = n_ue if n_ue in explicit else str(n_ue)
        if key in explicit:
            return max(int(explicit[key]), 1)
    base_n = cfg.scene.n_ue
    scale = (n_ue / base_n) ** cfg.run.sweep_episode_exponent
    return max(int(round(cfg.run.episodes * scale)), 1)


def sweep_point_config(cfg: ExperimentConfig, n_ue: int) -> ExperimentConfig:
    """Per-user-count config: user count plus the coalition-scaled threshold."""
    cfg_n = cfg.with_users(n_ue)
    base = cfg.run.sweep_threshold_base
    coalition = cfg.run.sweep_threshold_coalition
    if base is not None and coalition is not None:
        factor = min(base + coalition / n_ue, cfg.reward.auto_factor)
        cfg_n = dataclasses.replace(
            cfg_n, reward=dataclasses.replace(cfg_n.reward, auto_factor=factor))
    return cfg_n


def run_sweep(cfg: ExperimentConfig, users: list[int], seed: int,
              *, workers: int | None = None) -> dict[int, dict[str, MethodResult]]:
    if any(n < 1 for n in users):
        raise ConfigurationError("user counts must be positive")
    out: dict[int, dict[str, MethodResult]] = {}
    for n_ue in users:
        cfg_n = sweep_point_config(cfg, n_ue)
        episodes = sweep_episodes(cfg, n_ue)
        out[n_ue] = {
            "mmt-rl": run_method(cfg_n, "mmt-rl", seed, episodes=episodes, workers=workers),
            "mmt-only": run_method(cfg_n, "mmt-only", seed, episodes=episodes,
                                   skip_mmt_only_training=True, workers=workers),
            "rl-only": run_method(cfg_n, "rl-only", seed, episodes=episodes, workers=workers),
        }
    return out


# ---------------------------------------------------------------------------
# output files


def write_manifest(out_dir: Path, command: str, cfg: ExperimentConfig, seed: int,
                   extras: dict | None = None) -> Path:
    manifest = {
        "command": command,
        "config": cfg.to_dict(),
        "seed": seed,
        "versions": {"beamsim": __version__, "numpy": np.__version__},
    }
    if extras:
        manifest.update(extras)
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def cmd_run(cfg: ExperimentConfig, out_dir: Path, seed: int,
            *, workers: int | None = None) -> MethodResult:
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_method(cfg, cfg.run.method, seed, workers=workers)
    write_csv(str(out_dir / "reward_curve.csv"),
              ["episode", "mean_cum_reward", "std"],
              [[e, float(result.reward_mean[e]), float(result.reward_std[e])]
               for e in range(result.reward_mean.size)])
    logs_dir = out_dir / "episode_logs"
    logs_dir.mkdir(exist_ok=True)
    for r in range(result.cum_rewards.shape[0]):
        write_csv(str(logs_dir / f"round_{r:02d}.csv"),
                  ["episode", "cum_reward", "se_mean"],
                  [[e, float(result.cum_rewards[r, e]), float(result.train_se[r, e])]
                   for e in range(result.cum_rewards.shape[1])])
    write_manifest(out_dir, "run", cfg, seed,
                   {"step_time_ms": result.step_time_ms,
                    "eval_se_per_round": result.eval_se.tolist()})
    return result


def cmd_sweep_users(cfg: ExperimentConfig, users: list[int], out_dir: Path, seed: int,
                    *, workers: int | None = None) -> dict[int, dict[str, MethodResult]]:
    out_dir.mkdir(parents=True, exist_ok=True)
    results = run_sweep(cfg, users, seed, workers=workers)
    rows = []
    for n_ue in users:
        r = results[n_ue]
        rows.append([n_ue,
                     float(r["mmt-rl"].eval_se.mean()),
                     float(r["mmt-only"].eval_se.mean()),
                     float(r["rl-only"].eval_se.mean())])
    write_csv(str(out_dir / "se_vs_users.csv"),
              ["n_ue", "se_mmt_rl", "se_mmt", "se_rl"], rows)
    write_manifest(out_dir, "sweep-users", cfg, seed, {"users": users})
    return results


def cmd_accuracy(cfg: ExperimentConfig, k_max: int, out_dir: Path, seed: int,
                 *, workers: int | None = None) -> dict[str, MethodResult]:
    if not 1 <= k_max <= cfg.codebook.n_beams:
        raise ConfigurationError(f"k_max must lie in [1, {cfg.codebook.n_beams}]")
    out_dir.mkdir(parents=True, exist_ok=True)
    results = {
        "mmt-rl": run_method(cfg, "mmt-rl", seed, workers=workers),
        "mmt-only": run_method(cfg, "mmt-only", seed, skip_mmt_only_training=True,
                               workers=workers),
        "rl-only": run_method(cfg, "rl-only", seed, workers=workers),
    }
    rows = [[k, results["mmt-rl"].topk(k), results["mmt-only"].topk(k),
             results["rl-only"].topk(k)] for k in range(1, k_max + 1)]
    write_csv(str(out_dir / "topk.csv"), ["k", "acc_mmt_rl", "acc_mmt", "acc_rl"], rows)
    write_manifest(out_dir, "accuracy", cfg, seed,
                   {"k_max": k_max,
                    "step_time_ms": {m: results[m].step_time_ms for m in results}})
    return results


def cmd_calibrate(cfg: ExperimentConfig, out_dir: Path, seed: int) -> tuple[Path, Path]:
    """Export oracle group labels and GPS traces for an external group model.

    Covers training plus evaluation ticks so a prediction stream fitted on
    this export can drive a full matched-seed run.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    params = cfg.channel_params()
    cb = cfg.build_codebook()
    ticks = cfg.run.episodes + cfg.run.eval_ticks
    round_ss = np.random.SeedSequence(seed).spawn(cfg.run.rounds)[0]
    scene_rng, _, _ = (np.random.default_rng(s) for s in round_ss.spawn(3))
    scene = new_scene(cfg.scene_config(), scene_rng)
    label_rows = []
    gps_rows = []
    for _ in range(ticks):
        ctx = make_oracle_context(scene, params, cb)
        groups = ctx.oracle_groups(cb)
        coords = scene.all_coords()
        for u in range(scene.n_ue):
            label_rows.append([scene.tick_index, u, int(groups[u])])
            gps_rows.append([scene.tick_index, u,
                             float(coords[u, 0]), float(coords[u, 1])])
        scene = advance_mmt_tick(scene, scene_rng, cfg.scene.mobility_prob)
    labels_path = out_dir / "labels.csv"
    gps_path = out_dir / "gps.csv"
    write_csv(str(labels_path), ["tick", "ue_id", "group"], label_rows)
    write_csv(str(gps_path), ["tick", "ue_id", "x_m", "y_m"], gps_rows)
    write_manifest(out_dir, "calibrate", cfg, seed, {"ticks": ticks})
    return labels_path, gps_path
