"""Closed-form regret bounds, the allocation-program oracle, and event monitors.

Bound evaluators take ``c`` as an optional override for the constant
``8 ln(K T^2)`` so tests can use small values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from osfib.core import GapProfile, InstanceSpec, OsfibError, gap_profile
from osfib.policies.elim import ElimBatch, ElimState, confidence_radius


class DegenerateGapError(OsfibError, ValueError):
    """A zero gap left of the best arm, where the bounds divide by it."""


class OracleTooLargeError(OsfibError, ValueError):
    pass


class MonitorError(OsfibError, ValueError):
    pass


def log_term(k: int, horizon: int) -> float:
    """``ln(K T^2)``."""
    return math.log(k * horizon * horizon)


def c_constant(k: int, horizon: int) -> float:
    return 8 * log_term(k, horizon)


@dataclass(frozen=True)
class BoundReport:
    name: str
    k: int
    horizon: int
    gaps: Tuple[float, ...]
    value: float


def bound_indep(horizon: int, k: int) -> float:
    """Gap-free bound for the known-horizon policy: ``4 sqrt(2T ln(KT^2)) + 3``."""
    return 4 * math.sqrt(2 * horizon * log_term(k, horizon)) + 3


def bound_doubling(horizon: int, k: int) -> float:
    """Bound for the doubling wrapper: ``20 sqrt(T ln(KT^2)) + 3 log2 T + 3``."""
    return 20 * math.sqrt(horizon * log_term(k, horizon)) + 3 * math.log2(horizon) + 3


def _sorted_prefix(gaps) -> Tuple[float, ...]:
    if isinstance(gaps, GapProfile):
        return gaps.sorted_prefix
    return tuple(sorted((float(g) for g in gaps), reverse=True))


def _closed_form(prefix: Sequence[float], c: float) -> float:
    """``D1 + C/D1 + C sum_{i=2}^{n-1} (1/Di^2 - 1/D(i-1)^2) Di`` over a descending prefix."""
    n = len(prefix)
    if n <= 1:
        return 0.0
    if any(g <= 0 for g in prefix[:-1]):
        raise DegenerateGapError(f"zero gap before the best arm in {list(prefix)}")
    total = prefix[0] + c / prefix[0]
    for i in range(1, n - 1):
        total += c * (1 / prefix[i] ** 2 - 1 / prefix[i - 1] ** 2) * prefix[i]
    return total


def bound_dep(gaps, horizon: int, k: int, c: Optional[float] = None) -> float:
    """Gap-dependent bound over the descending sort of the gaps left of the best arm.

    ``gaps`` is a :class:`GapProfile` or the gaps of arms ``1..i*`` (the last
    being 0). With the best arm first only the constant 2 remains.
    """
    c = c_constant(k, horizon) if c is None else c
    return _closed_form(_sorted_prefix(gaps), c) + 2


def bound_corollary(gaps, horizon: int, k: int, c: Optional[float] = None) -> float:
    """``(C / D(i*-1)^2 + 1) D1 + 2``."""
    prefix = _sorted_prefix(gaps)
    if len(prefix) <= 1:
        return 2.0
    smallest = prefix[-2]
    if smallest <= 0:
        raise DegenerateGapError(f"zero gap before the best arm in {list(prefix)}")
    c = c_constant(k, horizon) if c is None else c
    return (c / smallest**2 + 1) * prefix[0] + 2


def bound_report(name: str, inst: InstanceSpec, horizon: int) -> BoundReport:
    prof = gap_profile(inst)
    fns = {
        "thm1": lambda: bound_indep(horizon, inst.K),
        "eq1": lambda: bound_dep(prof, horizon, inst.K),
        "thm3": lambda: bound_doubling(horizon, inst.K),
        "cor1": lambda: bound_corollary(prof, horizon, inst.K),
    }
    return BoundReport(name, inst.K, horizon, prof.gaps, fns[name]())


# allocation program -----------------------------------------------------

ENUM_MAX_ARMS = 8
ENUM_MAX_CAP = 10_000


@dataclass(frozen=True)
class LpInstance:
    """Gaps ``D_1..D_{i*}`` in arm order (last one 0) and the constant ``C``."""

    gaps: Tuple[float, ...]
    c: float

    def __post_init__(self):
        gaps = tuple(float(g) for g in self.gaps)
        object.__setattr__(self, "gaps", gaps)
        if not gaps or gaps[-1] != 0.0:
            raise ValueError("the last gap (the best arm) must be 0")
        if any(g < 0 for g in gaps):
            raise ValueError("gaps must be nonnegative")
        if self.c <= 0:
            raise ValueError("C must be positive")

    def caps(self) -> List[int]:
        """Largest feasible prefix sum for each arm left of the best one.

        ``None`` marks a zero gap, whose variable does not affect the value
        and is fixed to 0.
        """
        out = []
        for g in self.gaps[:-1]:
            out.append(None if g == 0 else math.floor(self.c / g**2 + 1 + 1e-9))
        return out


@dataclass(frozen=True)
class OracleResult:
    value: float
    allocation: Tuple[int, ...]


def _guard(inst: LpInstance) -> List[Optional[int]]:
    caps = inst.caps()
    if len(inst.gaps) > ENUM_MAX_ARMS:
        raise OracleTooLargeError(f"{len(inst.gaps)} arms exceeds the oracle limit of {ENUM_MAX_ARMS}")
    if any(cap is not None and cap > ENUM_MAX_CAP for cap in caps):
        raise OracleTooLargeError(f"a prefix cap exceeds {ENUM_MAX_CAP}")
    return caps


def lp_bruteforce(inst: LpInstance) -> OracleResult:
    """Exact optimum of the allocation program.

    Maximize ``sum_j a_j D_j`` over nonnegative integers, where every arm
    with ``a_j > 0`` requires ``a_1 + ... + a_j <= C / D_j^2 + 1``.

    The search runs over the prefix sum ``s``: after arm ``j`` the best value
    reachable with prefix sum exactly ``s`` is kept for every ``s`` up to the
    largest cap. Playing arm ``j`` moves ``s`` to any ``s' <= cap_j`` and earns
    ``(s' - s) D_j``; a running maximum of ``best[s] - s D_j`` makes each
    stage linear in the number of prefix sums. Every feasible allocation is
    covered, so the result is the exact optimum.
    """
    caps = _guard(inst)
    live = [c for c in caps if c is not None]
    if not live:
        return OracleResult(0.0, (0,) * len(inst.gaps))
    size = max(live) + 1
    neg = -math.inf
    best = [neg] * size
    best[0] = 0.0
    choice: List[List[int]] = []  # choice[j][s] = prefix sum before arm j that led to s
    for gap, cap in zip(inst.gaps, caps):
        prev = list(range(size))
        if cap is None:
            choice.append(prev)
            continue
        new = best[:]
        run_val, run_arg = neg, -1
        for s in range(1, min(cap, size - 1) + 1):
            cand = best[s - 1] - (s - 1) * gap
            if cand > run_val:
                run_val, run_arg = cand, s - 1
            if run_val > neg:
                v = run_val + s * gap
                if v > new[s]:
                    new[s] = v
                    prev[s] = run_arg
        best = new
        choice.append(prev)

    end = max(range(size), key=lambda s: (best[s], -s))
    alloc = []
    s = end
    for prev in reversed(choice):
        alloc.append(s - prev[s])
        s = prev[s]
    alloc.reverse()
    return OracleResult(best[end], tuple(alloc) + (0,))


def lp_enumerate(inst: LpInstance) -> OracleResult:
    """Literal enumeration of every allocation vector; only for tiny programs."""
    caps = _guard(inst)
    ranges = [range(0, 1) if cap is None else range(0, cap + 1) for cap in caps]
    best_val, best_alloc = 0.0, (0,) * len(caps)
    for alloc in itertools.product(*ranges):
        s, ok = 0, True
        for a, cap in zip(alloc, caps):
            s += a
            if a > 0 and s > cap:
                ok = False
                break
        if ok:
            val = sum(a * g for a, g in zip(alloc, inst.gaps))
            if val > best_val:
                best_val, best_alloc = val, alloc
    return OracleResult(best_val, tuple(best_alloc) + (0,))


def lp_closed_form(inst: LpInstance) -> float:
    return _closed_form(sorted(inst.gaps, reverse=True), inst.c)


# event monitors --------------------------------------------------------


@dataclass
class EventLog:
    """Per-round flags for nice sampling and nice procedure.

    ``nice_procedure_all`` is the running conjunction of ``nice_procedure``.
    """

    nice_sampling: np.ndarray
    nice_procedure: np.ndarray

    @property
    def nice_procedure_all(self) -> np.ndarray:
        return np.logical_and.accumulate(self.nice_procedure, axis=-1)

    @property
    def all_rounds_nice(self):
        return self.nice_procedure_all[..., -1]

    def transitions_explained(self) -> np.ndarray:
        """Whether every nice-to-not-nice procedure transition coincides with bad sampling."""
        p, s = self.nice_procedure, self.nice_sampling
        broke = p[..., :-1] & ~p[..., 1:]
        return ~np.any(broke & s[..., 1:], axis=-1)


def _round_flags(mu, best, active_before, active, means_before, rho):
    """Flags for one round from arrays of shape ``(..., K)``."""
    if math.isinf(rho):
        sampling = np.ones(active.shape[:-1], dtype=bool)
    else:
        close = np.abs(means_before - mu) < rho
        sampling = np.all(close | ~active_before, axis=-1)
    gaps = mu[..., best - 1 : best] - mu
    procedure = active[..., best - 1] & np.all((gaps <= 4 * rho) | ~active, axis=-1)
    return sampling, procedure


def monitor_run(inst: InstanceSpec, states: Sequence[ElimState]) -> EventLog:
    """Event flags along one elimination run.

    ``states[j]`` is the state after ``j`` completed rounds (``states[0]`` is
    the initial one), so it holds the set played from in round ``j + 1`` and
    the means after round ``j``. Round ``t`` is judged on the set it plays
    from (``states[t-1].active``), the set before that and the means after
    round ``t - 1``.
    """
    mu = inst.means_array()
    k = inst.K
    if any(s.k != k for s in states):
        raise MonitorError("trace and instance disagree on the number of arms")
    horizon = states[0].horizon

    def mask(state):
        m = np.zeros(k, dtype=bool)
        m[[i - 1 for i in state.active]] = True
        return m

    sampling, procedure = [], []
    for t in range(1, len(states)):
        cur = states[t - 1]
        before = states[t - 2] if t >= 2 else cur
        means = np.array([cur.emp_means[i] for i in range(1, k + 1)])
        s, p = _round_flags(mu, inst.best, mask(before), mask(cur), means, confidence_radius(t, k, horizon))
        sampling.append(bool(s))
        procedure.append(bool(p))
    return EventLog(np.array(sampling), np.array(procedure))


def monitor_batch(inst: InstanceSpec, horizon: int, runs: int, seed: int, start_run: int = 0) -> EventLog:
    """Run the elimination policy on ``runs`` replications and flag every round."""
    from osfib.simulate import simulate_batch

    mu = inst.means_array()
    sampling = np.ones((runs, horizon), dtype=bool)
    procedure = np.ones((runs, horizon), dtype=bool)

    def observe(t, agent: ElimBatch, arms):
        # after round t the agent holds S_t (prev_active), S_{t+1} and the
        # means after round t: everything round t + 1 is judged on
        if t < horizon:
            rho = confidence_radius(t + 1, inst.K, horizon)
            s, p = _round_flags(mu, inst.best, agent.prev_active, agent.active, agent.means, rho)
            sampling[:, t] = s
            procedure[:, t] = p

    # round 1 plays from [K] with an infinite radius, so both events hold
    simulate_batch(
        inst, "elim", horizon, seed, range(start_run, start_run + runs), checkpoints=[horizon], observer=observe
    )
    return EventLog(sampling, procedure)
