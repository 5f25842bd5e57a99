"""Shared domain types for the one-sided full-information bandit.

Arms are 1-indexed at every public interface. Playing arm ``i`` reveals the
rewards of arms ``i, i+1, ..., K`` for that round.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np


class OsfibError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInstanceError(OsfibError, ValueError):
    pass


class InvalidArmError(OsfibError, ValueError):
    pass


class FeedbackContractError(OsfibError, RuntimeError):
    """A policy received a slice that does not cover the arms it must observe."""


class Family(str, enum.Enum):
    BERNOULLI = "bernoulli"
    AUCTION = "auction"
    CUSTOM_CORRELATED = "custom-correlated"


def best_arm(means: Sequence[float]) -> int:
    """Return the 1-indexed arm with the largest mean, smallest index on ties."""
    values = np.asarray(means, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise InvalidInstanceError("means must be a nonempty vector")
    if np.any(~np.isfinite(values)) or np.any(values < 0.0) or np.any(values > 1.0):
        raise InvalidInstanceError(f"means must lie in [0, 1], got {values.tolist()}")
    # np.argmax returns the first occurrence of the maximum.
    return int(np.argmax(values)) + 1


@dataclass(frozen=True)
class InstanceSpec:
    """A stochastic instance: K arms, their means and the reward family.

    ``aux`` carries family-specific parameters (the auction description for
    auction-backed families) and is ignored for Bernoulli instances.
    """

    means: Tuple[float, ...]
    family: Family = Family.BERNOULLI
    label: str = ""
    aux: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        object.__setattr__(self, "family", Family(self.family))
        best_arm(self.means)  # validates range and nonemptiness

    @property
    def K(self) -> int:
        return len(self.means)

    @property
    def best(self) -> int:
        return best_arm(self.means)

    def means_array(self) -> np.ndarray:
        return np.asarray(self.means, dtype=float)

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "means": list(self.means),
            "family": self.family.value,
            "best": self.best,
            "label": self.label,
        }


@dataclass(frozen=True)
class GapProfile:
    """Gaps to the best arm, plus the descending sort of the gaps left of it.

    ``sorted_prefix`` is the sequence used by the gap-dependent regret bound;
    its last entry is always 0 (the best arm itself).
    """

    gaps: Tuple[float, ...]
    sorted_prefix: Tuple[float, ...]
    best: int


def gap_profile(inst: InstanceSpec) -> GapProfile:
    means = inst.means_array()
    best = inst.best
    gaps = means[best - 1] - means
    gaps[best - 1] = 0.0
    prefix = sorted(gaps[:best].tolist(), reverse=True)
    return GapProfile(gaps=tuple(gaps.tolist()), sorted_prefix=tuple(prefix), best=best)


@dataclass(frozen=True)
class ObservationSlice:
    """Rewards revealed in one round: arms ``first..K`` in order."""

    first: int
    values: Tuple[float, ...]

    @property
    def arms(self) -> range:
        return range(self.first, self.first + len(self.values))

    def value(self, arm: int) -> float:
        if arm < self.first or arm >= self.first + len(self.values):
            raise FeedbackContractError(f"arm {arm} was not observed (slice starts at {self.first})")
        return self.values[arm - self.first]

    def as_dict(self) -> dict:
        return dict(zip(self.arms, self.values))


def observation_slice(k: int, played: int, rewards: Sequence[float]) -> ObservationSlice:
    """Cut the full reward vector down to what playing ``played`` reveals."""
    if len(rewards) != k:
        raise InvalidArmError(f"reward vector has length {len(rewards)}, expected {k}")
    if not 1 <= played <= k:
        raise InvalidArmError(f"arm {played} outside 1..{k}")
    values = tuple(float(x) for x in rewards[played - 1 :])
    for x in values:
        if not 0.0 <= x <= 1.0:
            raise InvalidInstanceError(f"reward {x} outside [0, 1]")
    return ObservationSlice(first=played, values=values)


@dataclass
class RegretTrace:
    """Append-only record of one run: rows of (t, arm, increment, cumulative)."""

    run_id: int = 0
    rows: List[Tuple[int, int, float, float]] = field(default_factory=list)

    @property
    def cumulative(self) -> float:
        return self.rows[-1][3] if self.rows else 0.0

    def cumulative_series(self) -> np.ndarray:
        return np.array([row[3] for row in self.rows], dtype=float)


def accumulate_regret(trace: RegretTrace, gaps: GapProfile, t: int, arm: int) -> RegretTrace:
    """Append the pseudo-regret increment of playing ``arm`` at round ``t``."""
    if not 1 <= arm <= len(gaps.gaps):
        raise InvalidArmError(f"arm {arm} outside 1..{len(gaps.gaps)}")
    increment = gaps.gaps[arm - 1]
    trace.rows.append((t, arm, increment, trace.cumulative + increment))
    return trace
