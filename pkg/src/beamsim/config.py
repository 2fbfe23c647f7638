"""Experiment configuration: JSON sections mirroring the simulator's types.

An empty config file reproduces the reference setup: 40 dBm transmit power,
-10 dBm noise, 64 antennas, 64 beams in 8 groups, 5 UEs with 5 candidate
locations each, epsilon 0.9 -> 0.6, discount 0.9, learning rate 0.001,
100 ms prediction ticks of 174 learner steps, 200 episodes, 10 rounds.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any

from .agent import EpsilonSchedule, QTable, RewardSpec
from .channel import ChannelParams
from .codebook import BeamCodebook, build_codebook, load_codebook_csv
from .environment import Clock, SceneConfig
from .errors import ConfigurationError

METHODS = ("mmt-rl", "rl-only", "mmt-only")


@dataclass(frozen=True)
class ChannelSection:
    p_t_dbm: float = 40.0
    noise_dbm: float = -10.0
    wavelength_m: float = 0.005
    n_antennas: int = 64
    d_a: float = 0.5
    g_r: float = 1.0
    g_max: float | None = None
    bandwidth_hz: float = 20e6
    path_loss_mode: str = "los_model"


@dataclass(frozen=True)
class CodebookSection:
    n_beams: int = 64
    n_groups: int = 8
    angle_span: tuple[float, float] = (0.0, math.pi)
    csv_path: str | None = None


@dataclass(frozen=True)
class SceneSection:
    n_ue: int = 5
    n_loc: int = 5
    annulus_m: tuple[float, float] = (50.0, 500.0)
    angle_margin_rad: float = 0.05
    bs_position: tuple[float, float] = (0.0, 0.0)
    mobility_prob: float = 0.3
    align_to_beams: bool = False    # snap bearings to beam centers (emulation presets)
    csv_path: str | None = None


@dataclass(frozen=True)
class ClockSection:
    mmt_period_ms: float = 100.0
    rl_step_ms: float = 0.5716


@dataclass(frozen=True)
class AgentSection:
    alpha: float = 0.001
    gamma: float = 0.9
    eps_start: float = 0.9
    eps_end: float = 0.6
    decay_horizon: int | None = None    # None -> half the episode budget


@dataclass(frozen=True)
class RewardSection:
    mode: str = "auto"
    r_th_bps: float | None = None
    auto_factor: float = 0.8
    auto_factor_start: float | None = None
    auto_anchor_margin: float | None = None
    auto_factor_horizon: int = 100
    adaptive_quantile: float = 0.885
    adaptive_window_ticks: int = 5
    reward_hit: float = 1.0
    reward_miss: float = -1.0


@dataclass(frozen=True)
class PredictorSection:
    kind: str = "oracle"            # oracle | noisy | gps_table | file
    p: float = 0.595
    path: str | None = None
    # optional distinct predictor for the training phase; the accuracy
    # emulation trains under clean group labels and deploys the noisy ones
    train_kind: str | None = None


@dataclass(frozen=True)
class MmtOnlySection:
    kind: str = "noisy64"           # oracle64 | noisy64
    p: float = 0.715


@dataclass(frozen=True)
class RunSection:
    method: str = "mmt-rl"
    episodes: int = 200
    rounds: int = 10
    eval_ticks: int = 40
    sweep_episode_exponent: float = 1.0   # episode budget grows as (n_ue/base)^exp in sweeps
    # explicit per-user-count episode budgets (keys are user counts); points
    # whose threshold is sparser need proportionally more training
    sweep_episodes_by_n: dict | None = None
    # optional per-user-count threshold factor for sweeps: factor(n) =
    # min(base + coalition / n, reward.auto_factor).  Keeps the number of
    # simultaneously-correct beams a hit demands roughly constant in n.
    sweep_threshold_base: float | None = None
    sweep_threshold_coalition: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    channel: ChannelSection = field(default_factory=ChannelSection)
    codebook: CodebookSection = field(default_factory=CodebookSection)
    scene: SceneSection = field(default_factory=SceneSection)
    clock: ClockSection = field(default_factory=ClockSection)
    agent: AgentSection = field(default_factory=AgentSection)
    reward: RewardSection = field(default_factory=RewardSection)
    predictor: PredictorSection = field(default_factory=PredictorSection)
    mmt_only: MmtOnlySection = field(default_factory=MmtOnlySection)
    run: RunSection = field(default_factory=RunSection)

    # ---- factories for the runtime objects -------------------------------

    def channel_params(self) -> ChannelParams:
        c = self.channel
        return ChannelParams(
            p_t_dbm=c.p_t_dbm, noise_dbm=c.noise_dbm, wavelength_m=c.wavelength_m,
            n_antennas=c.n_antennas, d_a=c.d_a, g_r=c.g_r, g_max=c.g_max,
            bandwidth_hz=c.bandwidth_hz, path_loss_mode=c.path_loss_mode,
        )

    def build_codebook(self) -> BeamCodebook:
        cbs = self.codebook
        if cbs.csv_path:
            return load_codebook_csv(cbs.csv_path, d_a=self.channel.d_a,
                                     n_antennas=self.channel.n_antennas)
        return build_codebook(cbs.n_beams, cbs.n_groups, tuple(cbs.angle_span),
                              d_a=self.channel.d_a, n_antennas=self.channel.n_antennas)

    def scene_config(self) -> SceneConfig:
        s = self.scene
        align = tuple(self.build_codebook().angles) if s.align_to_beams else None
        return SceneConfig(
            n_ue=s.n_ue, n_loc=s.n_loc, annulus_m=tuple(s.annulus_m),
            angle_margin_rad=s.angle_margin_rad, bs_position=tuple(s.bs_position),
            mobility_prob=s.mobility_prob, align_angles=align,
        )

    def make_clock(self) -> Clock:
        return Clock(self.clock.mmt_period_ms, self.clock.rl_step_ms)

    def reward_spec(self) -> RewardSpec:
        r = self.reward
        return RewardSpec(
            mode=r.mode, r_th_bps=r.r_th_bps, auto_factor=r.auto_factor,
            auto_factor_start=r.auto_factor_start,
            auto_anchor_margin=r.auto_anchor_margin,
            auto_factor_horizon=r.auto_factor_horizon,
            adaptive_quantile=r.adaptive_quantile,
            adaptive_window_ticks=r.adaptive_window_ticks,
            reward_hit=r.reward_hit, reward_miss=r.reward_miss,
        )

    def schedule(self, episodes: int | None = None) -> EpsilonSchedule:
        a = self.agent
        horizon = a.decay_horizon
        if horizon is None:
            horizon = max((episodes if episodes is not None else self.run.episodes) // 2, 1)
        return EpsilonSchedule(a.eps_start, a.eps_end, horizon)

    def grouped_qtable(self, cb: BeamCodebook) -> QTable:
        return QTable.grouped(self.scene.n_ue, self.scene.n_loc, cb.n_groups,
                              cb.beams_per_group, alpha=self.agent.alpha,
                              gamma=self.agent.gamma)

    def flat_qtable(self, cb: BeamCodebook) -> QTable:
        return QTable.flat(self.scene.n_ue, self.scene.n_loc, cb.n_beams,
                           alpha=self.agent.alpha, gamma=self.agent.gamma)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def with_users(self, n_ue: int) -> "ExperimentConfig":
        return dataclasses.replace(self, scene=dataclasses.replace(self.scene, n_ue=n_ue))

    def with_method(self, method: str) -> "ExperimentConfig":
        if method not in METHODS:
            raise ConfigurationError(f"unknown method {method!r}; expected one of {METHODS}")
        return dataclasses.replace(self, run=dataclasses.replace(self.run, method=method))


_SECTION_TYPES = {
    "channel": ChannelSection,
    "codebook": CodebookSection,
    "scene": SceneSection,
    "clock": ClockSection,
    "agent": AgentSection,
    "reward": RewardSection,
    "predictor": PredictorSection,
    "mmt_only": MmtOnlySection,
    "run": RunSection,
}


def _build_section(cls, data: dict, name: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(fields)
    if unknown:
        raise ConfigurationError(f"unknown keys in section {name!r}: {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    return cls(**kwargs)


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigurationError("config root must be a JSON object")
    unknown = set(data) - set(_SECTION_TYPES)
    if unknown:
        raise ConfigurationError(f"unknown config sections: {sorted(unknown)}")
    sections = {}
    for name, cls in _SECTION_TYPES.items():
        raw = data.get(name, {})
        if not isinstance(raw, dict):
            raise ConfigurationError(f"section {name!r} must be an object")
        sections[name] = _build_section(cls, raw, name)
    cfg = ExperimentConfig(**sections)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.run.method not in METHODS:
        raise ConfigurationError(f"unknown method {cfg.run.method!r}")
    if cfg.run.episodes < 1 or cfg.run.rounds < 1:
        raise ConfigurationError("episodes and rounds must be positive")
    if cfg.scene.n_ue < 1 or cfg.scene.n_loc < 1:
        raise ConfigurationError("n_ue and n_loc must be positive")
    if cfg.predictor.kind not in ("oracle", "noisy", "gps_table", "file"):
        raise ConfigurationError(f"unknown predictor kind {cfg.predictor.kind!r}")
    if cfg.predictor.kind == "noisy" and not 0.0 <= cfg.predictor.p <= 1.0:
        raise ConfigurationError("predictor accuracy p must lie in [0, 1]")
    if cfg.mmt_only.kind not in ("oracle64", "noisy64"):
        raise ConfigurationError(f"unknown 64-way predictor kind {cfg.mmt_only.kind!r}")
    if cfg.mmt_only.kind == "noisy64" and not 0.0 <= cfg.mmt_only.p <= 1.0:
        raise ConfigurationError("64-way predictor accuracy must lie in [0, 1]")
    # construction raises on the remaining invariants
    cfg.channel_params()
    if cfg.codebook.csv_path is None:
        cfg.build_codebook()
    cfg.reward_spec()


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)
