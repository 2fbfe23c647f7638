"""Tabular Q-learning over beams within a predicted group.

One episode is one prediction tick: the group prediction is obtained once,
then ``k_d`` learner steps run round-robin over UEs.  The acting UE reselects
its beam (epsilon-greedy within its predicted group), every other UE holds
its standing beam, the full assignment is measured, and the acting UE's
Q-cell is updated.  States are (ue, location, predicted group); the scene is
frozen within a tick so the successor state equals the current one.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams
from .codebook import BeamCodebook
from .environment import Clock, LinkCache, Scene
from .errors import ConfigurationError, StateError
from .predictor import GroupPrediction, OracleContext, make_oracle_context


@dataclass
class QTable:
    values: np.ndarray          # state dims + trailing action dim, zeros at start
    alpha: float = 0.001
    gamma: float = 0.9

    @classmethod
    def grouped(cls, n_ue: int, n_loc: int, n_groups: int, n_actions: int,
                alpha: float = 0.001, gamma: float = 0.9) -> "QTable":
        return cls(np.zeros((n_ue, n_loc, n_groups, n_actions)), alpha=alpha, gamma=gamma)

    @classmethod
    def flat(cls, n_ue: int, n_loc: int, n_actions: int,
             alpha: float = 0.001, gamma: float = 0.9) -> "QTable":
        return cls(np.zeros((n_ue, n_loc, n_actions)), alpha=alpha, gamma=gamma)

    @property
    def n_actions(self) -> int:
        return self.values.shape[-1]


def _check_state(q: QTable, state: tuple[int, ...]) -> None:
    dims = q.values.shape[:-1]
    if len(state) != len(dims):
        raise IndexError(f"state {state} does not match table dims {dims}")
    for s, d in zip(state, dims):
        if not 0 <= s < d:
            raise IndexError(f"state {state} out of range for dims {dims}")


def select_action(q: QTable, state: tuple[int, ...], eps: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy over the state's Q-row; greedy ties go to the lowest action."""
    _check_state(q, state)
    if rng.random() < eps:
        return int(rng.integers(q.n_actions))
    return int(np.argmax(q.values[state]))


def q_update(q: QTable, s: tuple[int, ...], a: int, r: float, s_next: tuple[int, ...]) -> None:
    """Q(s,a) += alpha * (r + gamma * max_a' Q(s_next, a') - Q(s,a))."""
    _check_state(q, s)
    _check_state(q, s_next)
    if not 0 <= a < q.n_actions:
        raise IndexError(f"action {a} out of range [0, {q.n_actions})")
    if not math.isfinite(r):
        raise ValueError(f"reward must be finite, got {r}")
    cell = s + (a,)
    target = r + q.gamma * float(np.max(q.values[s_next]))
    q.values[cell] += q.alpha * (target - q.values[cell])


def save_q_csv(q: QTable, path: str) -> None:
    """Snapshot as ue,loc,group,action,value rows; group is -1 for flat tables."""
    grouped = q.values.ndim == 4
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["ue", "loc", "group", "action", "value"])
        it = np.ndindex(q.values.shape)
        for idx in it:
            if grouped:
                ue, loc, g, a = idx
            else:
                ue, loc, a = idx
                g = -1
            writer.writerow([ue, loc, g, a, repr(float(q.values[idx]))])


def load_q_csv(path: str, alpha: float = 0.001, gamma: float = 0.9) -> QTable:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append((int(rec["ue"]), int(rec["loc"]), int(rec["group"]),
                         int(rec["action"]), float(rec["value"])))
    if not rows:
        raise ConfigurationError(f"empty Q snapshot {path}")
    grouped = rows[0][2] >= 0
    n_ue = max(r[0] for r in rows) + 1
    n_loc = max(r[1] for r in rows) + 1
    n_act = max(r[3] for r in rows) + 1
    if grouped:
        n_g = max(r[2] for r in rows) + 1
        values = np.zeros((n_ue, n_loc, n_g, n_act))
        for ue, loc, g, a, v in rows:
            values[ue, loc, g, a] = v
    else:
        values = np.zeros((n_ue, n_loc, n_act))
        for ue, loc, _, a, v in rows:
            values[ue, loc, a] = v
    return QTable(values, alpha=alpha, gamma=gamma)


@dataclass(frozen=True)
class RewardSpec:
    """Threshold reward: hit when total throughput strictly exceeds r_th.

    Modes resolve the threshold differently:
      fixed     explicit r_th in bits/s
      auto      factor times the coordinate-ascent oracle total of the tick
      adaptive  a quantile of recent oracle-normalized totals

    Auto mode optionally ramps the factor over episodes, from either an
    explicit start value or the tick's know-the-group-guess-the-beam floor
    (anchor).  A bar that starts at that floor and rises is reachable by
    within-group exploration at any user count, while staying above what
    uninformed 64-beam exploration produces; the bundled sweep preset relies
    on this.  Without a ramp the factor is constant (the default 0.8).
    """
    mode: str = "auto"
    r_th_bps: float | None = None
    auto_factor: float = 0.8
    auto_factor_start: float | None = None
    auto_anchor_margin: float | None = None   # start = margin * anchor level
    auto_factor_horizon: int = 100
    adaptive_quantile: float = 0.885
    adaptive_window_ticks: int = 5
    reward_hit: float = 1.0
    reward_miss: float = -1.0

    def __post_init__(self) -> None:
        if self.mode not in ("fixed", "auto", "adaptive"):
            raise ConfigurationError(f"unknown reward mode {self.mode!r}")
        if self.reward_hit <= self.reward_miss:
            raise ConfigurationError("reward_hit must exceed reward_miss")
        if self.mode == "fixed" and self.r_th_bps is None:
            raise ConfigurationError("fixed reward mode needs r_th_bps")
        if self.auto_factor_start is not None and self.auto_anchor_margin is not None:
            raise ConfigurationError("give either auto_factor_start or auto_anchor_margin")
        if self.auto_factor_horizon < 1:
            raise ConfigurationError("auto_factor_horizon must be positive")

    def _factor(self, episode: int, anchor_norm: float | None) -> float:
        start = self.auto_factor_start
        if self.auto_anchor_margin is not None:
            if anchor_norm is None:
                raise StateError("anchor-started ramp needs the tick's anchor level")
            start = self.auto_anchor_margin * anchor_norm
        if start is None:
            return self.auto_factor
        frac = min(episode / self.auto_factor_horizon, 1.0)
        return start + frac * (self.auto_factor - start)

    def resolve(self, oracle_total_bps: float | None = None, *, episode: int = 0,
                anchor_norm: float | None = None) -> "ResolvedReward":
        if self.mode == "fixed":
            return ResolvedReward(self.r_th_bps, self.reward_hit, self.reward_miss)
        if self.mode == "auto":
            if oracle_total_bps is None:
                raise StateError("auto reward threshold requires the tick's oracle throughput")
            factor = self._factor(episode, anchor_norm)
            return ResolvedReward(factor * oracle_total_bps,
                                  self.reward_hit, self.reward_miss)
        raise StateError("adaptive reward mode resolves through an AdaptiveThreshold")


@dataclass(frozen=True)
class ResolvedReward:
    r_th_bps: float
    reward_hit: float
    reward_miss: float


def reward_of(outcome, resolved: ResolvedReward) -> float:
    """Constant reward when total throughput strictly exceeds the threshold."""
    if resolved is None or resolved.r_th_bps is None:
        raise StateError("reward threshold not resolved")
    return resolved.reward_hit if outcome.total_bps > resolved.r_th_bps else resolved.reward_miss


class AdaptiveThreshold:
    """Rolling quantile of oracle-normalized step totals, one owner per run.

    The threshold is refreshed at tick start (so it is constant within a
    tick) and every measured step feeds the window.  Early in a run the
    window holds unlearned-policy totals, so the bar starts low and rises as
    the policy improves; the quantile keeps the hit rate roughly constant
    regardless of user count.
    """

    def __init__(self, spec: RewardSpec, k_d: int):
        if spec.mode != "adaptive":
            raise ConfigurationError("AdaptiveThreshold requires an adaptive-mode RewardSpec")
        self.spec = spec
        self.window: deque[float] = deque(maxlen=spec.adaptive_window_ticks * k_d)

    def resolve(self, oracle_total_bps: float) -> ResolvedReward:
        if not self.window:
            r_th = math.inf
        else:
            r_th = float(np.quantile(np.fromiter(self.window, dtype=float),
                                     self.spec.adaptive_quantile)) * oracle_total_bps
        return ResolvedReward(r_th, self.spec.reward_hit, self.spec.reward_miss)

    def observe(self, total_bps: float, oracle_total_bps: float) -> None:
        self.window.append(total_bps / oracle_total_bps if oracle_total_bps > 0 else 0.0)


@dataclass(frozen=True)
class EpsilonSchedule:
    eps_start: float = 0.9
    eps_end: float = 0.6
    decay_horizon: int = 100

    def __post_init__(self) -> None:
        if not 0.0 <= self.eps_end <= self.eps_start <= 1.0:
            raise ConfigurationError("need 0 <= eps_end <= eps_start <= 1")
        if self.decay_horizon < 1:
            raise ConfigurationError("decay horizon must be at least one episode")


def epsilon_at(schedule: EpsilonSchedule, episode: int) -> float:
    """Linear interpolation start->end over the horizon, clamped afterward."""
    if episode < 0:
        raise ValueError("episode index must be non-negative")
    frac = min(episode / schedule.decay_horizon, 1.0)
    return schedule.eps_start + frac * (schedule.eps_end - schedule.eps_start)


@dataclass(frozen=True)
class StepRecord:
    tick: int
    step: int
    ue: int
    state: tuple[int, ...]
    action: int
    beam: int
    reward: float
    sinr: np.ndarray | None     # per-UE SINR; omitted in lean sweep logs
    total_bps: float
    se_total: float


@dataclass
class EpisodeLog:
    episode: int
    records: list[StepRecord] = field(default_factory=list)
    seed: int | None = None

    @property
    def rewards(self) -> np.ndarray:
        return np.array([r.reward for r in self.records])

    @property
    def se_series(self) -> np.ndarray:
        return np.array([r.se_total for r in self.records])


def greedy_assignment(q: QTable, states: list[tuple[int, ...]], beam_base: np.ndarray) -> np.ndarray:
    """Standing beams at tick start: per-UE greedy action, ties to lowest."""
    actions = [int(np.argmax(q.values[s])) for s in states]
    return beam_base + np.array(actions, dtype=int)


def simulate_tick(
    cache: LinkCache,
    *,
    k_d: int,
    tick_index: int,
    resolved: ResolvedReward,
    adaptive: AdaptiveThreshold | None = None,
    oracle_total_bps: float = 0.0,
    q: QTable | None = None,
    states: list[tuple[int, ...]] | None = None,
    beam_base: np.ndarray | None = None,
    eps: float = 0.0,
    rng: np.random.Generator | None = None,
    learn: bool = True,
    assignment: np.ndarray | None = None,
    keep_sinr: bool = True,
) -> tuple[list[StepRecord], np.ndarray]:
    """Run k_d round-robin steps on a frozen scene; returns records and beams.

    With a Q-table the acting UE reselects each turn; without one (pure
    predictor baseline) the given assignment is held and only measured.  The
    received-power sum at each UE is maintained incrementally, so one step
    costs O(n_ue).
    """
    power = cache.power
    n_ue = cache.n_ue
    noise = cache.noise_w
    bw = cache.params.bandwidth_hz
    if q is not None:
        assignment = greedy_assignment(q, states, beam_base)
    elif assignment is None:
        raise ConfigurationError("need either a Q-table or a fixed assignment")
    assignment = assignment.copy()
    idx = np.arange(n_ue)
    totals_rx = power[:, assignment].sum(axis=1)    # per-UE sum over all serving beams
    records: list[StepRecord] = []
    for step in range(k_d):
        u = step % n_ue
        if q is not None:
            action = select_action(q, states[u], eps, rng)
            new_beam = int(beam_base[u] + action)
            old_beam = int(assignment[u])
            if new_beam != old_beam:
                totals_rx += power[:, new_beam] - power[:, old_beam]
                assignment[u] = new_beam
        else:
            new_beam = int(assignment[u])
            action = new_beam
        own = power[idx, assignment]
        sinr = own / (noise + totals_rx - own)
        se = np.log2(1.0 + sinr)
        total_bps = float(bw * se.sum())
        reward = (resolved.reward_hit if total_bps > resolved.r_th_bps
                  else resolved.reward_miss)
        if adaptive is not None:
            adaptive.observe(total_bps, oracle_total_bps)
        if q is not None and learn:
            q_update(q, states[u], action, reward, states[u])
        records.append(StepRecord(
            tick=tick_index,
            step=step,
            ue=u,
            state=states[u] if states is not None else (u,),
            action=action,
            beam=new_beam,
            reward=reward,
            sinr=sinr.copy() if keep_sinr else None,
            total_bps=total_bps,
            se_total=float(se.sum()),
        ))
    return records, assignment


def resolve_threshold(spec: RewardSpec, adaptive: AdaptiveThreshold | None,
                      oracle_total_bps: float, *, episode: int = 0,
                      anchor_norm: float | None = None) -> ResolvedReward:
    if spec.mode == "adaptive":
        if adaptive is None:
            raise StateError("adaptive reward mode needs a persistent AdaptiveThreshold")
        return adaptive.resolve(oracle_total_bps)
    return spec.resolve(oracle_total_bps, episode=episode, anchor_norm=anchor_norm)


def run_episode(
    scene: Scene,
    predictor,
    q: QTable,
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
    """One prediction tick of group-constrained learning; returns the full log."""
    clock = clock or Clock()
    if ctx is None:
        ctx = make_oracle_context(scene, params, cb)
    prediction: GroupPrediction = predictor.predict(scene, ctx, cb)
    groups = prediction.argmax
    states = [(u, int(scene.location_index[u]), int(groups[u])) for u in range(scene.n_ue)]
    beam_base = np.array([cb.group_base(int(g)) for g in groups], dtype=int)
    if q.n_actions != cb.beams_per_group:
        raise ConfigurationError(
            f"Q-table has {q.n_actions} actions but groups hold {cb.beams_per_group} beams"
        )
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
        q=q,
        states=states,
        beam_base=beam_base,
        eps=eps,
        rng=rng,
        learn=learn,
        keep_sinr=keep_sinr,
    )
    return EpisodeLog(episode=episode, records=records)
