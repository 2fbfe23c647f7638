"""Reported quantities: discounted episode reward, top-k accuracy, run averages."""

from __future__ import annotations

import csv
from typing import Sequence

import numpy as np

from .agent import EpisodeLog, QTable
from .codebook import BeamCodebook
from .errors import DataError


def cumulative_reward(log: EpisodeLog, gamma: float) -> float:
    """Discounted sum of the episode's rewards over its finite horizon."""
    rewards = log.rewards
    if rewards.size == 0:
        raise DataError("cannot score an empty episode log")
    discounts = gamma ** np.arange(rewards.size)
    return float(np.dot(discounts, rewards))


def top_k_accuracy(predicted_rankings: Sequence[Sequence[int]],
                   oracle_beams: Sequence[int], k: int) -> float:
    """Fraction of samples whose oracle beam appears in the first k entries."""
    if len(predicted_rankings) != len(oracle_beams):
        raise DataError("ranking and oracle sample counts differ")
    if len(predicted_rankings) == 0:
        raise DataError("no samples")
    if not 1 <= k <= len(predicted_rankings[0]):
        raise DataError(f"k={k} outside [1, {len(predicted_rankings[0])}]")
    hits = sum(1 for ranking, beam in zip(predicted_rankings, oracle_beams)
               if beam in ranking[:k])
    return hits / len(predicted_rankings)


def aggregate_runs(series: Sequence[Sequence[float]]) -> tuple[np.ndarray, np.ndarray]:
    """Element-wise mean and sample standard deviation across runs."""
    lengths = {len(s) for s in series}
    if len(lengths) != 1:
        raise DataError(f"ragged series lengths {sorted(lengths)}")
    arr = np.asarray(series, dtype=float)
    mean = arr.mean(axis=0)
    std = arr.std(axis=0, ddof=1) if arr.shape[0] > 1 else np.zeros(arr.shape[1])
    return mean, std


def mmt_rl_ranking(q: QTable, state: tuple[int, ...], group_scores: np.ndarray,
                   cb: BeamCodebook) -> list[int]:
    """Total beam order for the two-step system.

    The predicted group's beams come first, ordered by Q-value (ties to the
    lower action); remaining groups follow by descending predictor score
    (ties to the lower group), their beams in angle order.
    """
    group = state[-1]
    row = q.values[state]
    order_in_group = np.argsort(-row, kind="stable")
    base = cb.group_base(group)
    ranking = [int(base + a) for a in order_in_group]
    rest = [g for g in range(cb.n_groups) if g != group]
    rest.sort(key=lambda g: (-group_scores[g], g))
    for g in rest:
        ranking.extend(cb.beams_in_group(g))
    return ranking


def rl_only_ranking(q64: QTable, state: tuple[int, ...]) -> list[int]:
    """Beams ordered by flat Q-value, ties to the lower index."""
    row = q64.values[state]
    return [int(b) for b in np.argsort(-row, kind="stable")]


def beam_score_ranking(scores64: np.ndarray) -> list[int]:
    """Beams ordered by a 64-way predictor's scores, ties to the lower index."""
    return [int(b) for b in np.argsort(-scores64, kind="stable")]


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    """Write a metrics table with stable number formatting (12 significant digits)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
