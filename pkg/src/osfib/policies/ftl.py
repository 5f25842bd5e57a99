"""Follow-the-Leader: pick the arm with the largest cumulative reward.

As an online policy under one-sided feedback it plays the arm with the
highest empirical mean over what it has observed (unobserved arms count as
0), which reduces to the cumulative-reward rule under full information.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from osfib.core import InvalidInstanceError, ObservationSlice


def ftl_predict(cumulative: Sequence[float]) -> int:
    """1-indexed argmax of ``cumulative``; ties go to the smallest index."""
    values = np.asarray(cumulative, dtype=float)
    if values.size == 0:
        raise InvalidInstanceError("cannot predict from an empty reward vector")
    return int(np.argmax(values)) + 1


class FtlAgent:
    def __init__(self, k: int, horizon: int = 0):
        self.sums = np.zeros(k)
        self.counts = np.zeros(k, dtype=np.int64)

    def select(self, t: int) -> int:
        return ftl_predict(self.sums / np.maximum(self.counts, 1))

    def update(self, t: int, arm: int, obs: ObservationSlice) -> None:
        first = obs.first - 1
        self.sums[first:] += obs.values
        self.counts[first:] += 1


class FtlBatch:
    def __init__(self, k: int, horizon: int, runs: int, streams=None):
        self.sums = np.zeros((runs, k))
        self.counts = np.zeros((runs, k), dtype=np.int64)

    def select(self, t: int) -> np.ndarray:
        return np.argmax(self.sums / np.maximum(self.counts, 1), axis=1)

    def update(self, t: int, arms: np.ndarray, obs: np.ndarray) -> None:
        seen = ~np.isnan(obs)
        self.sums = self.sums + np.where(seen, obs, 0.0)
        self.counts += seen
