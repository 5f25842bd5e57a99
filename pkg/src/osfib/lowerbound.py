"""Exact tail checks and Monte Carlo experiments for the lower-bound family.

Binomial tails of a fair coin are computed as exact rationals with
``math.comb``; only the exponential bounds they are compared against are
evaluated in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from osfib.core import Family, InstanceSpec, OsfibError
from osfib.policies.ftl import ftl_predict

MAX_EXACT_N = 2000

Number = Union[int, float, Fraction]


class GuardError(OsfibError, ValueError):
    pass


def _exact(x: Number) -> Fraction:
    # floats are read as the decimal literal they print as, so 0.15 means 3/20
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class InstanceFamily:
    """``K`` instances; in member ``j`` arm ``j`` has mean ``(1 + eps) / 2``, the rest 1/2."""

    K: int
    eps: float

    def __post_init__(self):
        if self.K < 2:
            raise GuardError("the family needs at least two arms")
        if not 0 < self.eps <= 1:
            raise GuardError(f"eps must lie in (0, 1], got {self.eps}")

    def member_means(self, j: int) -> np.ndarray:
        means = np.full(self.K, 0.5)
        means[j - 1] = (1 + self.eps) / 2
        return means

    def member(self, j: int) -> InstanceSpec:
        if not 1 <= j <= self.K:
            raise GuardError(f"member {j} outside 1..{self.K}")
        return InstanceSpec(
            means=self.member_means(j).tolist(),
            family=Family.BERNOULLI,
            label=f"family K={self.K} eps={self.eps} member={j}",
        )

    @property
    def members(self) -> List[InstanceSpec]:
        return [self.member(j) for j in range(1, self.K + 1)]


def make_family(K: int, eps: float) -> InstanceFamily:
    return InstanceFamily(K, eps)


def binom_lower_tail_exact(n: int, m: int) -> Fraction:
    """``P(Bin(n, 1/2) <= m)`` as an exact fraction."""
    if n > MAX_EXACT_N:
        raise GuardError(f"n={n} exceeds the exact-arithmetic limit {MAX_EXACT_N}")
    if not 0 <= m <= n:
        raise GuardError(f"need 0 <= m <= n, got m={m}, n={n}")
    return Fraction(sum(math.comb(n, l) for l in range(m + 1)), 2**n)


def binom_upper_tail_exact(n: int, m: int) -> Fraction:
    """``P(Bin(n, 1/2) >= m)`` as an exact fraction."""
    if n > MAX_EXACT_N:
        raise GuardError(f"n={n} exceeds the exact-arithmetic limit {MAX_EXACT_N}")
    if not 0 <= m <= n:
        raise GuardError(f"need 0 <= m <= n, got m={m}, n={n}")
    return Fraction(sum(math.comb(n, l) for l in range(m, n + 1)), 2**n)


@dataclass(frozen=True)
class TailCheckResult:
    n: int
    delta: float
    exact_tail: Fraction
    bound: float
    holds: bool
    precondition_met: bool


def lower_threshold(n: int, delta: Number) -> int:
    """Largest count ``l`` with ``l / n < (1 - delta) / 2``."""
    x = Fraction(n, 2) * (1 - _exact(delta))
    return math.ceil(x) - 1


def check_reverse_chernoff(n: int, delta: Number) -> TailCheckResult:
    """Compare ``P(mean < (1 - delta)/2)`` with ``exp(-(9/2) n delta^2)``.

    The bound is claimed for ``0 < delta <= 1/2`` and ``delta^2 n > 6``;
    ``precondition_met`` reports whether the point is in that range.
    """
    d = _exact(delta)
    m = lower_threshold(n, d)
    tail = binom_lower_tail_exact(n, m) if m >= 0 else Fraction(0)
    bound = math.exp(-4.5 * n * float(d) ** 2)
    return TailCheckResult(
        n=n,
        delta=float(delta),
        exact_tail=tail,
        bound=bound,
        holds=tail >= Fraction(bound),
        precondition_met=0 < d <= Fraction(1, 2) and d * d * n > 6,
    )


def check_reverse_chernoff_upper(n: int, eps: Number) -> TailCheckResult:
    """Upper-tail restatement: ``P(mean > 1/2 + eps) >= exp(-18 n eps^2)``.

    Substituting ``delta = 2 eps`` into the lower-tail form; valid for
    ``eps <= 1/4`` and ``eps^2 n > 3/2``. By symmetry the exact tail equals
    the lower tail at ``delta = 2 eps``.
    """
    e = _exact(eps)
    # smallest count strictly above n (1/2 + eps)
    m = math.floor(n * (Fraction(1, 2) + e)) + 1
    tail = binom_upper_tail_exact(n, m) if m <= n else Fraction(0)
    bound = math.exp(-18 * n * float(e) ** 2)
    return TailCheckResult(
        n=n,
        delta=float(eps),
        exact_tail=tail,
        bound=bound,
        holds=tail >= Fraction(bound),
        precondition_met=0 < e <= Fraction(1, 4) and e * e * n > Fraction(3, 2),
    )


def chernoff_grid(
    ns: Sequence[int] = tuple(range(25, 501, 25)),
    deltas: Sequence[float] = tuple(round(0.15 + 0.05 * i, 2) for i in range(8)),
) -> List[TailCheckResult]:
    return [check_reverse_chernoff(n, d) for n in ns for d in deltas]


def check_stirling_corollary(n: int, l: int) -> Tuple[int, float, bool]:
    """``C(n, l) >= (n/l)^l (n/(n-l))^(n-l) / (e sqrt(2 pi l))`` for ``1 <= l <= n-1``."""
    if not 1 <= l <= n - 1:
        raise GuardError(f"need 1 <= l <= n - 1, got l={l}, n={n}")
    lhs = math.comb(n, l)
    log_rhs = -1 - 0.5 * math.log(2 * math.pi * l) + l * math.log(n / l) + (n - l) * math.log(n / (n - l))
    rhs = math.exp(log_rhs)
    return lhs, rhs, lhs >= rhs


# bandit-with-prediction ---------------------------------------------------


@dataclass
class BwpResult:
    K: int
    T: int
    runs: int
    success: np.ndarray
    stderr: np.ndarray

    @property
    def aggregate(self) -> float:
        return float(self.success.mean())

    @property
    def aggregate_stderr(self) -> float:
        return float(math.sqrt(np.sum(self.stderr**2)) / self.K)


def bwp_accuracy(
    family: InstanceFamily,
    T: int,
    runs: int,
    predictor: Optional[Callable[[np.ndarray], int]] = None,
    seed: int = 0,
) -> BwpResult:
    """Estimate ``P(y_T = j | member j)`` for every member.

    The predictor sees the cumulative reward of every arm after ``T`` fully
    observed rounds. Independent Bernoulli arms make those totals independent
    ``Binomial(T, mu_k)`` draws, which is what gets sampled.
    """
    if runs < 1:
        raise GuardError("runs must be positive")
    predictor = predictor or ftl_predict
    success = np.zeros(family.K)
    for j in range(1, family.K + 1):
        mu = family.member_means(j)
        hits = 0
        for r in range(runs):
            rng = np.random.default_rng(np.random.SeedSequence([seed, j, r]))
            totals = rng.binomial(T, mu)
            hits += predictor(totals) == j
        success[j - 1] = hits / runs
    stderr = np.sqrt(success * (1 - success) / runs)
    return BwpResult(family.K, T, runs, success, stderr)


def bwp_sweep(family: InstanceFamily, horizons: Sequence[int], runs: int, seed: int = 0) -> List[BwpResult]:
    """Accuracy of Follow-the-Leader across horizons; reported, not asserted."""
    return [bwp_accuracy(family, T, runs, seed=seed) for T in horizons]


@dataclass
class ScalingRow:
    K: int
    T: int
    eps: float
    runs: int
    mean: float
    ci_low: float
    ci_high: float


def regret_scaling_probe(
    ks: Sequence[int], T: int, runs: int, policy: str = "elim", seed: int = 0, c: float = 1.0
) -> List[ScalingRow]:
    """Mean pseudo-regret on a uniformly drawn family member for each ``K``.

    ``eps = sqrt(c ln K / T)`` (capped at 1); the policy observes every arm.
    """
    from osfib.runner import mean_ci
    from osfib.simulate import simulate_batch

    rows = []
    for k in ks:
        if k == 1:
            rows.append(ScalingRow(1, T, 0.0, runs, 0.0, 0.0, 0.0))
            continue
        eps = min(1.0, math.sqrt(c * math.log(k) / T))
        family = make_family(k, eps)
        pick = np.random.default_rng(np.random.SeedSequence([seed, k])).integers(1, k + 1, size=runs)
        means = np.stack([family.member_means(j) for j in pick])
        res = simulate_batch(
            family.member(1), policy, T, seed, range(runs), checkpoints=[T], means=means, full_information=True
        )
        mean, lo, hi = mean_ci(res.final)
        rows.append(ScalingRow(k, T, eps, runs, mean, lo, hi))
    return rows
