"""Upper-confidence-bound baselines.

``UCB-N`` folds every observed reward into its statistics; round 1 plays
arm 1, which observes all arms, so every count is positive from round 2 on.
``UCB1`` is the classical bandit-feedback version, initialized round-robin.
Both use the exploration bonus ``sqrt(2 ln t / n_i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from osfib.core import ObservationSlice


def _bonus(t: int, counts: np.ndarray) -> np.ndarray:
    # math.log keeps the scalar identical across the single-run and batch paths
    log_t = math.log(t)
    with np.errstate(divide="ignore"):
        return np.where(counts > 0, np.sqrt(2 * log_t / np.maximum(counts, 1)), np.inf)


@dataclass
class UcbNState:
    counts: np.ndarray
    emp_means: np.ndarray
    round: int = 0

    @classmethod
    def initial(cls, k: int) -> "UcbNState":
        return cls(counts=np.zeros(k, dtype=np.int64), emp_means=np.zeros(k))


def ucbn_select(state: UcbNState, t: int) -> int:
    if t == 1:
        return 1
    index = state.emp_means + _bonus(t, state.counts)
    return int(np.argmax(index)) + 1


def ucbn_update(state: UcbNState, obs: ObservationSlice) -> None:
    for arm, x in zip(obs.arms, obs.values):
        i = arm - 1
        state.counts[i] += 1
        state.emp_means[i] = state.emp_means[i] + (x - state.emp_means[i]) / state.counts[i]
    state.round += 1


def ucbn_step(state: UcbNState, t: int, obs: Optional[ObservationSlice]) -> int:
    """Fold the previous round's slice (if any), then choose the arm for round ``t``."""
    if obs is not None:
        ucbn_update(state, obs)
    return ucbn_select(state, t)


@dataclass
class Ucb1State:
    counts: np.ndarray
    emp_means: np.ndarray
    round: int = 0

    @classmethod
    def initial(cls, k: int) -> "Ucb1State":
        return cls(counts=np.zeros(k, dtype=np.int64), emp_means=np.zeros(k))


def ucb1_select(state: Ucb1State, t: int) -> int:
    k = len(state.counts)
    if t <= k:
        return t
    index = state.emp_means + _bonus(t, state.counts)
    return int(np.argmax(index)) + 1


def ucb1_update(state: Ucb1State, arm: int, reward: float) -> None:
    i = arm - 1
    state.counts[i] += 1
    state.emp_means[i] = state.emp_means[i] + (reward - state.emp_means[i]) / state.counts[i]
    state.round += 1


def ucb1_step(state: Ucb1State, t: int, last: Optional[tuple] = None) -> int:
    """``last`` is the previous round's ``(arm, reward)`` pair, or ``None``."""
    if last is not None:
        ucb1_update(state, *last)
    return ucb1_select(state, t)


class UcbNAgent:
    def __init__(self, k: int, horizon: int = 0):
        self.state = UcbNState.initial(k)

    def select(self, t: int) -> int:
        return ucbn_select(self.state, t)

    def update(self, t: int, arm: int, obs: ObservationSlice) -> None:
        ucbn_update(self.state, obs)


class Ucb1Agent:
    def __init__(self, k: int, horizon: int = 0):
        self.state = Ucb1State.initial(k)

    def select(self, t: int) -> int:
        return ucb1_select(self.state, t)

    def update(self, t: int, arm: int, obs: ObservationSlice) -> None:
        ucb1_update(self.state, arm, obs.value(arm))


class UcbNBatch:
    def __init__(self, k: int, horizon: int, runs: int, streams=None):
        self.counts = np.zeros((runs, k), dtype=np.int64)
        self.means = np.zeros((runs, k))

    def select(self, t: int) -> np.ndarray:
        if t == 1:
            return np.zeros(len(self.counts), dtype=np.int64)
        return np.argmax(self.means + _bonus(t, self.counts), axis=1)

    def update(self, t: int, arms: np.ndarray, obs: np.ndarray) -> None:
        seen = ~np.isnan(obs)
        self.counts += seen
        step = (obs - self.means) / np.maximum(self.counts, 1)
        self.means = np.where(seen, self.means + step, self.means)


class Ucb1Batch:
    def __init__(self, k: int, horizon: int, runs: int, streams=None):
        self.k = k
        self.counts = np.zeros((runs, k), dtype=np.int64)
        self.means = np.zeros((runs, k))
        self._rows = np.arange(runs)

    def select(self, t: int) -> np.ndarray:
        if t <= self.k:
            return np.full(len(self.counts), t - 1, dtype=np.int64)
        return np.argmax(self.means + _bonus(t, self.counts), axis=1)

    def update(self, t: int, arms: np.ndarray, obs: np.ndarray) -> None:
        rows = self._rows
        self.counts[rows, arms] += 1
        m = self.means[rows, arms]
        self.means[rows, arms] = m + (obs[rows, arms] - m) / self.counts[rows, arms]
