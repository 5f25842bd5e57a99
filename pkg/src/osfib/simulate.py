"""Environment/policy interaction loops.

:func:`simulate_batch` advances many replications in lockstep and is what
the experiment runner uses. :func:`simulate_run` is the literal single-run
loop built from the per-round operations; for the same ``(seed, run)`` both
produce identical arm sequences and regret.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from osfib.core import InstanceSpec, RegretTrace, accumulate_regret, gap_profile, observation_slice
from osfib.environments import BlockSampler, run_streams, sample_round
from osfib.policies import make_agent, make_batch_policy


@dataclass
class BatchResult:
    """Checkpointed outcome of a batch of replications.

    ``arms[r, c]`` is the 1-indexed arm played at round ``checkpoints[c]``
    and ``cum_regret[r, c]`` the pseudo-regret accumulated up to it.
    """

    run_ids: np.ndarray
    checkpoints: np.ndarray
    arms: np.ndarray
    cum_regret: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.cum_regret[:, -1]


def simulate_batch(
    inst: InstanceSpec,
    policy: str,
    horizon: int,
    seed: int,
    run_ids: Sequence[int],
    checkpoints: Optional[Sequence[int]] = None,
    means: Optional[np.ndarray] = None,
    full_information: bool = False,
    policy_horizon: Optional[int] = None,
    observer=None,
) -> BatchResult:
    """Simulate ``horizon`` rounds for every replication in ``run_ids``.

    Args:
        inst: instance shared by all replications.
        policy: registered policy name.
        horizon: number of rounds to play.
        seed: master seed; replication ``r`` uses ``run_streams(seed, r)``.
        run_ids: replication indices.
        checkpoints: increasing rounds in ``1..horizon`` to record; defaults
            to every round.
        means: optional ``(runs, K)`` per-replication means overriding
            ``inst.means`` (Bernoulli only).
        full_information: reveal every arm each round instead of the
            one-sided slice.
        policy_horizon: horizon the policy is tuned for, defaults to
            ``horizon``.
        observer: optional callable ``observer(t, policy, arms)`` invoked
            after each update.
    """
    run_ids = np.asarray(run_ids, dtype=np.int64)
    runs, k = len(run_ids), inst.K
    cps = np.arange(1, horizon + 1) if checkpoints is None else np.asarray(checkpoints, dtype=np.int64)
    streams = [run_streams(seed, int(r)) for r in run_ids]
    sampler = BlockSampler(inst, [s[0] for s in streams], means=means)
    agent = make_batch_policy(policy, k, policy_horizon or horizon, runs, [s[1] for s in streams])

    mu = np.broadcast_to(inst.means_array() if means is None else np.asarray(means, float), (runs, k))
    gaps = mu.max(axis=1, keepdims=True) - mu
    arm_index = np.arange(k)
    rows = np.arange(runs)

    cum = np.zeros(runs)
    out_arms = np.zeros((runs, len(cps)), dtype=np.int64)
    out_cum = np.zeros((runs, len(cps)))
    c = 0
    for t in range(1, horizon + 1):
        arms = agent.select(t)
        x = sampler.next()
        obs = x if full_information else np.where(arm_index >= arms[:, None], x, np.nan)
        agent.update(t, arms, obs)
        cum = cum + gaps[rows, arms]
        if observer is not None:
            observer(t, agent, arms)
        if c < len(cps) and t == cps[c]:
            out_arms[:, c] = arms + 1
            out_cum[:, c] = cum
            c += 1
    return BatchResult(run_ids=run_ids, checkpoints=cps, arms=out_arms, cum_regret=out_cum)


def simulate_run(
    inst: InstanceSpec, policy: str, horizon: int, seed: int, run: int, full_information: bool = False
) -> RegretTrace:
    """One replication, round by round, through :class:`ObservationSlice` feedback."""
    env_stream, policy_stream = run_streams(seed, run)
    agent = make_agent(policy, inst.K, horizon, policy_stream)
    gaps = gap_profile(inst)
    trace = RegretTrace(run_id=run)
    for t in range(1, horizon + 1):
        arm = agent.select(t)
        rewards = sample_round(inst, env_stream).rewards
        obs = observation_slice(inst.K, 1 if full_information else arm, rewards)
        agent.update(t, arm, obs)
        accumulate_regret(trace, gaps, t, arm)
    return trace
