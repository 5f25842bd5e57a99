"""Randomized structural invariants.

Each property records how many cases it ran in ``CASES`` so the acceptance
suite can report the total.
"""

from collections import Counter

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from osfib.core import InstanceSpec, observation_slice
from osfib.environments import AuctionSpec, auction_round, auction_rewards, censored_revenue, run_streams, sample_round
from osfib.policies import POLICY_NAMES, make_agent
from osfib.policies.exp3 import exp3_probs, importance_estimates, observation_probs
from osfib.simulate import simulate_run

CASES = Counter()

# 6 properties x 1700 = 10200 cases
EXAMPLES = 1700

fast = settings(
    max_examples=EXAMPLES,
    deadline=None,
    derandomize=True,
    database=None,
    suppress_health_check=[HealthCheck.too_slow],
)

means_st = st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=8)


@fast
@given(means=means_st, horizon=st.integers(1, 60), seed=st.integers(0, 2**32 - 1))
def test_elim_active_sets_nested_and_play_nondecreasing(means, horizon, seed):
    CASES["elim_nested"] += 1
    inst = InstanceSpec(means)
    gen, _ = run_streams(seed, 0)
    agent = make_agent("elim", inst.K, horizon)
    prev_active, prev_arm = set(agent.state.active), 0
    for t in range(1, horizon + 1):
        arm = agent.select(t)
        assert arm in agent.state.active
        assert arm >= prev_arm
        agent.update(t, arm, observation_slice(inst.K, arm, sample_round(inst, gen).rewards))
        active = set(agent.state.active)
        assert active and active <= prev_active
        prev_active, prev_arm = active, arm


@fast
@given(
    means=means_st,
    horizon=st.integers(1, 40),
    seed=st.integers(0, 2**32 - 1),
    policy=st.sampled_from(POLICY_NAMES),
)
def test_cumulative_regret_nondecreasing(means, horizon, seed, policy):
    CASES["regret_monotone"] += 1
    inst = InstanceSpec(means)
    series = simulate_run(inst, policy, horizon, seed, 0).cumulative_series()
    assert len(series) == horizon
    assert np.all(np.diff(series) >= 0)
    assert series[0] >= 0
    assert np.all(series <= np.arange(1, horizon + 1) * (max(means) - min(means)) + 1e-12)


@fast
@given(
    log_weights=st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=12),
    gamma=st.floats(0.0, 1.0),
)
def test_exp3_probabilities_normalized(log_weights, gamma):
    CASES["exp3_normalized"] += 1
    lw = np.array(log_weights)
    p = exp3_probs(lw, gamma)
    k = len(lw)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(p >= gamma / k - 1e-15)
    q = observation_probs(p)
    assert q[-1] == 1.0
    assert np.all(np.diff(q) >= -1e-15)


@fast
@given(
    weights=st.lists(st.integers(1, 1000), min_size=1, max_size=10),
    rewards=st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=10, max_size=10),
)
def test_importance_estimates_unbiased(weights, rewards):
    CASES["exp3_unbiased"] += 1
    k = len(weights)
    p = np.array(weights, dtype=float) / sum(weights)
    x = np.array(rewards[:k])
    q = observation_probs(p)
    # exact expectation over the played arm, enumerating all K outcomes
    expected = sum(p[i] * importance_estimates(q, i + 1, x) for i in range(k))
    assert expected == pytest.approx(x, rel=1e-12, abs=1e-12)


@fast
@given(
    reserves=st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=6, unique=True),
    bids=st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=5),
    data=st.data(),
)
def test_censored_revenue_matches_full(reserves, bids, data):
    CASES["auction_censored"] += 1
    spec = AuctionSpec(tuple(sorted(reserves)), bidders=len(bids))
    played = data.draw(st.integers(1, spec.K))
    full = auction_round(spec, bids)
    visible = [b for b in bids if b >= spec.reserves[played - 1]]
    assert np.array_equal(censored_revenue(spec, played, visible), full[played - 1 :])
    assert np.array_equal(auction_rewards(np.array(spec.reserves), np.array([bids]))[0], full)


@fast
@given(
    means=means_st,
    horizon=st.integers(1, 60),
    seed=st.integers(0, 2**32 - 1),
)
def test_elim_keeps_best_arm_when_sampling_is_exact(means, horizon, seed):
    CASES["elim_deterministic"] += 1
    # deterministic 0/1 means give exact empirical means, so the best arm
    # is never eliminated and play never passes it
    inst = InstanceSpec([float(m >= 0.5) for m in means])
    gen, _ = run_streams(seed, 0)
    agent = make_agent("elim", inst.K, horizon)
    for t in range(1, horizon + 1):
        arm = agent.select(t)
        assert arm <= inst.best
        agent.update(t, arm, observation_slice(inst.K, arm, sample_round(inst, gen).rewards))
        assert inst.best in agent.state.active
