"""Elimination policy with known horizon, and its doubling-trick wrapper.

The surviving set always holds the arms whose empirical mean is within
``2 * rho`` of the best empirical mean among survivors. The policy plays the
smallest surviving index, which reveals every survivor's reward, so all
survivors share the same sample count ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from osfib.core import FeedbackContractError, ObservationSlice, OsfibError


def confidence_radius(t: int, k: int, horizon: int) -> float:
    """``sqrt(ln(K T^2) / (2 (t - 1)))``; ``math.inf`` at ``t = 1``."""
    if t < 1 or k < 1 or horizon < 1:
        raise ValueError(f"need t, K, T >= 1, got t={t}, K={k}, T={horizon}")
    if t == 1:
        return math.inf
    return math.sqrt(math.log(k * horizon * horizon) / (2 * (t - 1)))


@dataclass(frozen=True)
class ElimState:
    """State after ``round`` completed rounds.

    ``active`` is the set the next arm is chosen from; ``emp_means`` holds an
    entry for every arm, frozen at its last value once the arm is eliminated.
    """

    active: Tuple[int, ...]
    emp_means: Dict[int, float]
    round: int
    horizon: int
    k: int
    rho_next: float = field(default=math.inf)

    @classmethod
    def initial(cls, k: int, horizon: int) -> "ElimState":
        return cls(
            active=tuple(range(1, k + 1)),
            emp_means={i: 0.0 for i in range(1, k + 1)},
            round=0,
            horizon=horizon,
            k=k,
        )


def elim_select(state: ElimState) -> int:
    if not state.active:
        raise OsfibError("elimination state has an empty active set")
    return min(state.active)


def elim_filter(active: Tuple[int, ...], means: Dict[int, float], rho: float) -> Tuple[int, ...]:
    """Keep the arms within ``2 * rho`` of the best empirical mean in ``active``."""
    leader = max(means[i] for i in active)
    return tuple(i for i in active if leader - means[i] <= 2 * rho)


def elim_update(state: ElimState, t: int, obs: ObservationSlice) -> ElimState:
    """Fold round ``t``'s feedback into the means, then filter the active set.

    The filter for the next round uses ``rho_{t+1}``, which is finite for
    every ``t >= 1``; the infinite radius of round 1 only means nothing is
    filtered before the first play.
    """
    if obs.first > min(state.active):
        raise FeedbackContractError(
            f"slice starts at arm {obs.first} but arm {min(state.active)} is still active"
        )
    means = dict(state.emp_means)
    for i in state.active:
        means[i] = means[i] * (t - 1) / t + obs.value(i) / t

    rho = confidence_radius(t + 1, state.k, state.horizon)
    survivors = elim_filter(state.active, means, rho)
    return ElimState(
        active=survivors,
        emp_means=means,
        round=t,
        horizon=state.horizon,
        k=state.k,
        rho_next=rho,
    )


def doubling_wrap(t: int) -> Tuple[int, int, int]:
    """Map global round ``t`` to ``(segment, inner horizon, inner round)``.

    Segment ``i`` covers rounds ``2^i .. 2^(i+1) - 1`` and runs a fresh
    elimination instance with horizon ``2^i``.
    """
    if t < 1:
        raise ValueError("rounds start at 1")
    segment = t.bit_length() - 1
    start = 1 << segment
    return segment, start, t - start + 1


class ElimAgent:
    """Single-run adaptor exposing ``select``/``update`` over :class:`ElimState`."""

    def __init__(self, k: int, horizon: int):
        self.state = ElimState.initial(k, horizon)

    def select(self, t: int) -> int:
        return elim_select(self.state)

    def update(self, t: int, arm: int, obs: ObservationSlice) -> None:
        self.state = elim_update(self.state, t, obs)


class ElimDoublingAgent:
    """Restarts a fresh :class:`ElimAgent` at the start of every segment."""

    def __init__(self, k: int, horizon: int = 0):
        self.k = k
        self.inner = None

    def select(self, t: int) -> int:
        _, inner_horizon, inner_t = doubling_wrap(t)
        if inner_t == 1:
            self.inner = ElimAgent(self.k, inner_horizon)
        return self.inner.select(inner_t)

    def update(self, t: int, arm: int, obs: ObservationSlice) -> None:
        self.inner.update(doubling_wrap(t)[2], arm, obs)


class ElimBatch:
    """The elimination policy run on ``runs`` independent replications at once.

    Arms are 0-indexed here. ``prev_active`` keeps the set before the most
    recent filter so event monitors can inspect both ends of a round.
    """

    def __init__(self, k: int, horizon: int, runs: int, streams=None):
        self.k, self.horizon = k, horizon
        self.active = np.ones((runs, k), dtype=bool)
        self.prev_active = self.active.copy()
        self.means = np.zeros((runs, k))
        self.rho_next = math.inf

    def select(self, t: int) -> np.ndarray:
        return self.active.argmax(axis=1)

    def update(self, t: int, arms: np.ndarray, obs: np.ndarray) -> None:
        self.means = np.where(self.active, self.means * (t - 1) / t + obs / t, self.means)
        rho = confidence_radius(t + 1, self.k, self.horizon)
        leader = np.max(np.where(self.active, self.means, -np.inf), axis=1, keepdims=True)
        self.prev_active = self.active
        self.active = self.active & (leader - self.means <= 2 * rho)
        self.rho_next = rho


class ElimDoublingBatch:
    def __init__(self, k: int, horizon: int, runs: int, streams=None):
        self.k, self.runs = k, runs
        self.inner = None

    def select(self, t: int) -> np.ndarray:
        _, inner_horizon, inner_t = doubling_wrap(t)
        if inner_t == 1:
            self.inner = ElimBatch(self.k, inner_horizon, self.runs)
        return self.inner.select(inner_t)

    def update(self, t: int, arms: np.ndarray, obs: np.ndarray) -> None:
        self.inner.update(doubling_wrap(t)[2], arms, obs)
