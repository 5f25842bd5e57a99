"""Reward environments: Bernoulli instances and the reserve-price auction.

Randomness contract: every replication owns the streams returned by
:func:`run_streams`, derived from ``SeedSequence([master_seed, run_index])``.
The environment stream is consumed one double per arm per round (arms 1..K)
for Bernoulli instances, or one double per bidder per round (bidders 1..n)
for auction instances. Drawing a block of rounds at once consumes exactly
the same doubles in the same order as drawing the rounds one at a time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from osfib.core import Family, InstanceSpec, InvalidInstanceError, OsfibError


class InvalidBidError(OsfibError, ValueError):
    pass


def run_streams(seed: int, run: int) -> Tuple[np.random.Generator, np.random.Generator]:
    """Return the (environment, policy) generators of one replication.

    Both depend only on ``(seed, run)``, so replications can be simulated in
    any order or split across processes without changing their draws.
    """
    env_seq, policy_seq = np.random.SeedSequence([int(seed), int(run)]).spawn(2)
    return np.random.Generator(np.random.PCG64(env_seq)), np.random.Generator(np.random.PCG64(policy_seq))


def make_uniform_gap_instance(K: int, best: int, base: float, delta: float) -> InstanceSpec:
    """All suboptimal arms share mean ``base``; arm ``best`` has ``base + delta``."""
    if K < 1:
        raise InvalidInstanceError("K must be positive")
    if not 1 <= best <= K:
        raise InvalidInstanceError(f"best arm {best} outside 1..{K}")
    if delta < 0:
        raise InvalidInstanceError("delta must be nonnegative")
    if base < 0 or base + delta > 1:
        raise InvalidInstanceError(f"means must lie in [0, 1]: base={base}, delta={delta}")
    means = [base] * K
    means[best - 1] = base + delta
    return InstanceSpec(
        means=means,
        family=Family.BERNOULLI,
        label=f"uniform-gap K={K} best={best} base={base} delta={delta}",
    )


def make_random_mean_instance(
    K: int, best: int, lam: float, lo: float = 0.2, hi: float = 0.6, seed: int = 0
) -> InstanceSpec:
    """Suboptimal means i.i.d. uniform on ``(lo, hi)``; arm ``best`` gets ``0.6 + lam``."""
    if K < 1:
        raise InvalidInstanceError("K must be positive")
    if not 1 <= best <= K:
        raise InvalidInstanceError(f"best arm {best} outside 1..{K}")
    if not (0 <= lo < hi <= 0.6):
        raise InvalidInstanceError(f"need 0 <= lo < hi <= 0.6, got lo={lo}, hi={hi}")
    if lam < 0 or 0.6 + lam > 1:
        raise InvalidInstanceError(f"need 0 <= lambda <= 0.4, got {lam}")
    rng = np.random.default_rng(seed)
    others = rng.uniform(lo, hi, size=K - 1)
    means = np.insert(others, best - 1, 0.6 + lam)
    return InstanceSpec(
        means=means.tolist(),
        family=Family.BERNOULLI,
        label=f"random-mean K={K} best={best} lambda={lam} range=({lo},{hi}) seed={seed}",
    )


@dataclass(frozen=True)
class AuctionSpec:
    """Second-price auction with one arm per reserve price.

    Arms are ordered by ascending reserve, so playing reserve ``r_i`` reveals
    every bid at or above ``r_i`` and therefore the revenue of every reserve
    ``r_j >= r_i``.

    ``value_dist`` is a frozen ``scipy.stats`` distribution supported on
    [0, 1]; ``None`` means i.i.d. uniform values.
    """

    reserves: Tuple[float, ...]
    bidders: int = 2
    value_dist: Optional[object] = None

    def __post_init__(self):
        reserves = tuple(float(r) for r in self.reserves)
        object.__setattr__(self, "reserves", reserves)
        if len(reserves) < 1:
            raise InvalidInstanceError("need at least one reserve price")
        if self.bidders < 1:
            raise InvalidInstanceError("need at least one bidder")
        if any(not 0.0 <= r <= 1.0 for r in reserves):
            raise InvalidInstanceError("reserves must lie in [0, 1]")
        if any(b <= a for a, b in zip(reserves, reserves[1:])):
            raise InvalidInstanceError("reserves must be strictly increasing")

    @property
    def K(self) -> int:
        return len(self.reserves)

    def bids_from_uniforms(self, u: np.ndarray) -> np.ndarray:
        if self.value_dist is None:
            return u
        return np.clip(self.value_dist.ppf(u), 0.0, 1.0)

    def _cdf(self, x: float) -> float:
        if self.value_dist is None:
            return min(max(x, 0.0), 1.0)
        return float(self.value_dist.cdf(x))

    def expected_revenue(self, reserve: float) -> float:
        """Mean revenue at one reserve: ``r P(max >= r) + int_r^1 P(second > x) dx``."""
        n, r = self.bidders, reserve
        if self.value_dist is None:
            # closed form of the same integral for uniform values
            tail = 1.0 - r ** (n + 1)
            second = (1.0 - r) - (1.0 - r**n) - tail / (n + 1) + n * tail / (n + 1)
            return r * (1.0 - r**n) + second

        def second_above(x):
            F = self._cdf(x)
            return 1.0 - F**n - n * F ** (n - 1) * (1.0 - F)

        area, _ = integrate.quad(second_above, r, 1.0)
        return r * (1.0 - self._cdf(r) ** n) + area


def make_auction_instance(spec: AuctionSpec, family: Family = Family.AUCTION) -> InstanceSpec:
    if Family(family) is Family.BERNOULLI:
        raise InvalidInstanceError("auction instances use the auction or custom-correlated family")
    means = [min(max(spec.expected_revenue(r), 0.0), 1.0) for r in spec.reserves]
    return InstanceSpec(
        means=means,
        family=family,
        label=f"auction reserves={list(spec.reserves)} bidders={spec.bidders}",
        aux=spec,
    )


def _check_bids(bids) -> np.ndarray:
    bids = np.asarray(bids, dtype=float)
    if np.any(~np.isfinite(bids)) or np.any(bids < 0.0) or np.any(bids > 1.0):
        raise InvalidBidError(f"bids must lie in [0, 1], got {bids.tolist()}")
    return bids


def auction_round(spec: AuctionSpec, bids: Sequence[float]) -> np.ndarray:
    """Seller revenue at every reserve for one set of bids.

    With two or more qualifying bids the winner pays the second-highest of
    them; a lone qualifying bidder pays the reserve; no qualifier pays 0.
    """
    bids = _check_bids(bids)
    out = np.zeros(spec.K)
    for i, r in enumerate(spec.reserves):
        qualified = np.sort(bids[bids >= r])[::-1]
        if qualified.size >= 2:
            out[i] = qualified[1]
        elif qualified.size == 1:
            out[i] = r
    return out


def censored_revenue(spec: AuctionSpec, played: int, bids_at_or_above: Sequence[float]) -> np.ndarray:
    """Revenues for reserves ``played..K`` computed from the visible bids only."""
    if not 1 <= played <= spec.K:
        raise InvalidInstanceError(f"reserve index {played} outside 1..{spec.K}")
    visible = _check_bids(bids_at_or_above)
    floor = spec.reserves[played - 1]
    if np.any(visible < floor):
        raise InvalidBidError(f"bid below the played reserve {floor} cannot be visible")
    return auction_round(spec, visible if visible.size else np.zeros(0))[played - 1 :]


def auction_rewards(reserves: np.ndarray, bids: np.ndarray) -> np.ndarray:
    """Vectorized :func:`auction_round` over any leading axes of ``bids``.

    Only the two highest bids matter: at least two bids clear ``r`` iff the
    second-highest does.
    """
    reserves = np.asarray(reserves, dtype=float)
    if bids.shape[-1] >= 2:
        top2 = np.partition(bids, -2, axis=-1)[..., -2:]
        second, first = top2[..., 0:1], top2[..., 1:2]
    else:
        first = bids[..., -1:]
        second = np.full_like(first, -np.inf)
    return np.where(second >= reserves, second, np.where(first >= reserves, reserves, 0.0))


@dataclass
class RoundSample:
    rewards: np.ndarray
    aux: Optional[np.ndarray] = None


def _auction_spec(inst: InstanceSpec) -> AuctionSpec:
    if not isinstance(inst.aux, AuctionSpec):
        raise InvalidInstanceError(f"{inst.family.value} instance carries no auction description")
    return inst.aux


def sample_round(inst: InstanceSpec, stream: np.random.Generator) -> RoundSample:
    """Draw one reward vector from the instance's joint distribution."""
    if inst.family is Family.BERNOULLI:
        u = stream.random(inst.K)
        return RoundSample(rewards=(u < inst.means_array()).astype(float))
    spec = _auction_spec(inst)
    bids = spec.bids_from_uniforms(stream.random(spec.bidders))
    return RoundSample(rewards=auction_round(spec, bids), aux=bids)


class BlockSampler:
    """Pre-draws blocks of rounds for many replications at once.

    ``streams[r]`` is the environment generator of replication ``r``;
    ``means`` may be a single vector or one row per replication (only used
    by Bernoulli instances).
    """

    def __init__(self, inst: InstanceSpec, streams, means: Optional[np.ndarray] = None, block: int = 1024):
        self.inst = inst
        self.streams = list(streams)
        self.block = block
        m = inst.means_array() if means is None else np.asarray(means, dtype=float)
        self.means = np.broadcast_to(m, (len(self.streams), inst.K))[:, None, :]
        self._buf = None
        self._pos = 0

    def _refill(self):
        if self.inst.family is Family.BERNOULLI:
            u = np.stack([g.random((self.block, self.inst.K)) for g in self.streams])
            self._buf = (u < self.means).astype(float)
        else:
            spec = _auction_spec(self.inst)
            u = np.stack([g.random((self.block, spec.bidders)) for g in self.streams])
            self._buf = auction_rewards(np.asarray(spec.reserves), spec.bids_from_uniforms(u))
        self._pos = 0

    def next(self) -> np.ndarray:
        """Rewards of the next round, shape ``(runs, K)``."""
        if self._buf is None or self._pos == self.block:
            self._refill()
        out = self._buf[:, self._pos, :]
        self._pos += 1
        return out
