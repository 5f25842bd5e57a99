"""Exponential-weights baseline with one-sided importance weighting.

This is a stand-in for the EXP3-RTB algorithm, not a reproduction of it:
the arm is sampled from ``p = (1 - gamma) w / sum(w) + gamma / K`` and every
observed arm ``i`` receives the estimate ``x_i / q_i``, where
``q_i = p_1 + ... + p_i`` is the probability that arm ``i`` is observed.
Unobserved arms get 0, which keeps the estimates unbiased.

Weights are stored as logs; ``weights`` rescales them so the largest is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from osfib.core import ObservationSlice

BASELINE_NOTE = (
    "exp3rtb is a documented exponential-weights stand-in with one-sided importance "
    "weighting (q_i = P(arm i observed)); eta = gamma = sqrt(ln K / T) capped at 1"
)


def default_rates(k: int, horizon: int) -> Tuple[float, float]:
    """``(eta, gamma)`` for a known horizon: both ``sqrt(ln K / T)``, gamma capped at 1."""
    rate = math.sqrt(math.log(k) / horizon) if k > 1 else 0.0
    return rate, min(1.0, rate)


def exp3_probs(log_weights: np.ndarray, gamma: float) -> np.ndarray:
    """Sampling distribution over the last axis of ``log_weights``."""
    k = log_weights.shape[-1]
    w = np.exp(log_weights - log_weights.max(axis=-1, keepdims=True))
    return (1 - gamma) * w / w.sum(axis=-1, keepdims=True) + gamma / k


def observation_probs(probs: np.ndarray) -> np.ndarray:
    """``q_i = P(I <= i)``, with the last entry pinned to exactly 1."""
    q = np.cumsum(probs, axis=-1)
    q[..., -1] = 1.0
    return q


def importance_estimates(q: np.ndarray, played: int, rewards: np.ndarray) -> np.ndarray:
    """One-sided estimates for a 1-indexed ``played`` arm and a full reward vector."""
    est = np.zeros_like(q)
    est[played - 1 :] = rewards[played - 1 :] / q[played - 1 :]
    return est


@dataclass
class Exp3RtbState:
    log_weights: np.ndarray
    eta: float
    gamma: float
    last_probs: Optional[np.ndarray] = None

    @classmethod
    def initial(cls, k: int, horizon: int, eta: Optional[float] = None, gamma: Optional[float] = None):
        d_eta, d_gamma = default_rates(k, horizon)
        return cls(
            log_weights=np.zeros(k),
            eta=d_eta if eta is None else eta,
            gamma=d_gamma if gamma is None else gamma,
        )

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights - self.log_weights.max())


def exp3rtb_select(state: Exp3RtbState, stream: np.random.Generator) -> int:
    """Sample an arm; consumes exactly one uniform draw."""
    state.last_probs = exp3_probs(state.log_weights, state.gamma)
    q = observation_probs(state.last_probs)
    u = stream.random()
    return int(np.argmax(u < q)) + 1


def exp3rtb_update(state: Exp3RtbState, obs: ObservationSlice) -> None:
    q = observation_probs(state.last_probs)
    first = obs.first - 1
    est = np.zeros_like(state.log_weights)
    est[first:] = np.asarray(obs.values) / q[first:]
    state.log_weights = state.log_weights + state.eta * est


def exp3rtb_step(
    state: Exp3RtbState, t: int, obs: Optional[ObservationSlice], stream: np.random.Generator
) -> int:
    if obs is not None:
        exp3rtb_update(state, obs)
    return exp3rtb_select(state, stream)


class Exp3RtbAgent:
    def __init__(self, k: int, horizon: int, stream: np.random.Generator):
        self.state = Exp3RtbState.initial(k, horizon)
        self.stream = stream

    def select(self, t: int) -> int:
        return exp3rtb_select(self.state, self.stream)

    def update(self, t: int, arm: int, obs: ObservationSlice) -> None:
        exp3rtb_update(self.state, obs)


class Exp3RtbBatch:
    """Batch form; ``streams[r]`` supplies replication ``r``'s sampling draws."""

    def __init__(self, k: int, horizon: int, runs: int, streams=None, block: int = 1024):
        self.eta, self.gamma = default_rates(k, horizon)
        self.log_weights = np.zeros((runs, k))
        self.streams = list(streams)
        self.block = block
        self._u = None
        self._pos = block
        self._q = None

    def _draw(self) -> np.ndarray:
        if self._pos == self.block:
            self._u = np.stack([g.random(self.block) for g in self.streams])
            self._pos = 0
        u = self._u[:, self._pos]
        self._pos += 1
        return u

    def select(self, t: int) -> np.ndarray:
        self._q = observation_probs(exp3_probs(self.log_weights, self.gamma))
        u = self._draw()
        return np.argmax(u[:, None] < self._q, axis=1)

    def update(self, t: int, arms: np.ndarray, obs: np.ndarray) -> None:
        est = np.where(np.isnan(obs), 0.0, obs / self._q)
        self.log_weights = self.log_weights + self.eta * est
