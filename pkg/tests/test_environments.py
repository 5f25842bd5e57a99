import numpy as np
import pytest
from scipy import stats

from osfib.core import Family, InvalidInstanceError
from osfib.environments import (
    AuctionSpec,
    BlockSampler,
    InvalidBidError,
    auction_round,
    auction_rewards,
    censored_revenue,
    make_auction_instance,
    make_random_mean_instance,
    make_uniform_gap_instance,
    run_streams,
    sample_round,
)


class TestInstances:
    def test_reference_uniform_gap(self):
        inst = make_uniform_gap_instance(20, 17, 0.6, 0.1)
        assert inst.K == 20 and inst.best == 17
        assert inst.means[16] == pytest.approx(0.7)
        assert set(inst.means[:16] + inst.means[17:]) == {0.6}
        assert inst.family is Family.BERNOULLI

    def test_zero_gap(self):
        inst = make_uniform_gap_instance(2, 1, 0.6, 0.0)
        assert inst.means == (0.6, 0.6) and inst.best == 1

    def test_best_three(self):
        assert make_uniform_gap_instance(20, 3, 0.6, 0.1).best == 3

    def test_mean_above_one(self):
        with pytest.raises(InvalidInstanceError):
            make_uniform_gap_instance(5, 1, 0.95, 0.1)

    def test_random_mean(self):
        inst = make_random_mean_instance(20, 17, 0.1, 0.2, 0.6, seed=1)
        means = np.array(inst.means)
        assert means[16] == pytest.approx(0.7)
        others = np.delete(means, 16)
        assert np.all((others >= 0.2) & (others < 0.6))
        assert inst.best == 17

    def test_random_mean_deterministic(self):
        a = make_random_mean_instance(20, 17, 0.1, 0.2, 0.6, seed=1)
        b = make_random_mean_instance(20, 17, 0.1, 0.2, 0.6, seed=1)
        assert a.means == b.means

    def test_random_mean_zero_lambda(self):
        inst = make_random_mean_instance(20, 5, 0.0, 0.2, 0.6, seed=3)
        assert inst.means[4] == 0.6 and inst.best == 5

    @pytest.mark.parametrize("kwargs", [dict(lo=0.3, hi=0.2), dict(hi=0.7), dict(lam=0.5)])
    def test_random_mean_invalid(self, kwargs):
        args = dict(K=5, best=1, lam=0.1, lo=0.2, hi=0.6, seed=0) | kwargs
        with pytest.raises(InvalidInstanceError):
            make_random_mean_instance(**args)


class TestSampleRound:
    def test_degenerate_means(self):
        inst = make_uniform_gap_instance(3, 1, 0.0, 1.0)
        gen = np.random.default_rng(0)
        for _ in range(100):
            assert sample_round(inst, gen).rewards.tolist() == [1.0, 0.0, 0.0]

    def test_sample_mean(self):
        # binomial sd at 1e5 draws is sqrt(0.24 / 1e5) ~ 0.00155; 0.005 is > 3 sd
        inst = make_uniform_gap_instance(1, 1, 0.6, 0.0)
        gen, _ = run_streams(11, 0)
        draws = [sample_round(inst, gen).rewards[0] for _ in range(100_000)]
        assert abs(np.mean(draws) - 0.6) < 0.005

    def test_same_stream_same_rounds(self):
        inst = make_uniform_gap_instance(6, 2, 0.4, 0.2)
        a, _ = run_streams(5, 3)
        b, _ = run_streams(5, 3)
        for _ in range(50):
            assert np.array_equal(sample_round(inst, a).rewards, sample_round(inst, b).rewards)

    def test_distinct_runs_differ(self):
        inst = make_uniform_gap_instance(20, 2, 0.4, 0.2)
        a, _ = run_streams(5, 0)
        b, _ = run_streams(5, 1)
        ra = np.stack([sample_round(inst, a).rewards for _ in range(20)])
        rb = np.stack([sample_round(inst, b).rewards for _ in range(20)])
        assert not np.array_equal(ra, rb)

    def test_block_sampler_matches_round_by_round(self):
        inst = make_random_mean_instance(7, 3, 0.1, seed=2)
        streams = [run_streams(9, r)[0] for r in range(3)]
        sampler = BlockSampler(inst, streams, block=16)
        blocked = np.stack([sampler.next() for _ in range(40)], axis=1)
        for r in range(3):
            gen = run_streams(9, r)[0]
            single = np.stack([sample_round(inst, gen).rewards for _ in range(40)])
            assert np.array_equal(blocked[r], single)


class TestAuction:
    spec = AuctionSpec((0.2, 0.5, 0.8, 0.95), bidders=3)

    def test_worked_example(self):
        assert auction_round(self.spec, [0.9, 0.7, 0.3]).tolist() == [0.7, 0.7, 0.8, 0.0]

    def test_no_qualifying_bids(self):
        assert auction_round(self.spec, [0.0, 0.0, 0.0]).tolist() == [0.0] * 4

    def test_single_bidder(self):
        spec = AuctionSpec((0.4, 0.6), bidders=1)
        assert auction_round(spec, [0.5]).tolist() == [0.4, 0.0]

    def test_bid_out_of_range(self):
        with pytest.raises(InvalidBidError):
            auction_round(self.spec, [1.2, 0.1, 0.1])

    def test_reserves_must_increase(self):
        with pytest.raises(InvalidInstanceError):
            AuctionSpec((0.5, 0.5))

    def test_censored_worked_example(self):
        assert censored_revenue(self.spec, 2, [0.9, 0.7]).tolist() == [0.7, 0.8, 0.0]

    def test_censored_smallest_reserve_is_full(self):
        bids = [0.9, 0.7, 0.3]
        assert censored_revenue(self.spec, 1, bids).tolist() == auction_round(self.spec, bids).tolist()

    def test_censored_largest_reserve_nothing_visible(self):
        assert censored_revenue(self.spec, 4, []).tolist() == [0.0]

    def test_censored_rejects_invisible_bid(self):
        with pytest.raises(InvalidBidError):
            censored_revenue(self.spec, 3, [0.9, 0.7])

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(4)
        reserves = np.array(self.spec.reserves)
        bids = rng.random((500, 3))
        fast = auction_rewards(reserves, bids)
        slow = np.stack([auction_round(self.spec, b) for b in bids])
        assert np.array_equal(fast, slow)

    def test_vectorized_single_bidder(self):
        spec = AuctionSpec((0.4, 0.6), bidders=1)
        bids = np.array([[0.5], [0.7], [0.1]])
        assert auction_rewards(np.array(spec.reserves), bids).tolist() == [[0.4, 0.0], [0.4, 0.6], [0.0, 0.0]]

    @pytest.mark.parametrize("bidders", [1, 2, 5])
    def test_expected_revenue_uniform_against_quadrature(self, bidders):
        spec = AuctionSpec((0.1, 0.3, 0.5, 0.7), bidders=bidders)
        quad = AuctionSpec(spec.reserves, bidders, value_dist=stats.uniform(0, 1))
        for r in spec.reserves:
            assert spec.expected_revenue(r) == pytest.approx(quad.expected_revenue(r), abs=1e-9)

    def test_expected_revenue_against_simulation(self):
        spec = AuctionSpec((0.1, 0.3, 0.5, 0.7), bidders=3)
        inst = make_auction_instance(spec)
        gen = np.random.default_rng(8)
        draws = np.stack([sample_round(inst, gen).rewards for _ in range(40_000)])
        # revenue sd <= 0.5; 4 sd / sqrt(40000) = 0.01
        assert np.all(np.abs(draws.mean(axis=0) - inst.means_array()) < 0.01)

    def test_auction_instance_is_correlated_family(self):
        inst = make_auction_instance(AuctionSpec((0.2, 0.4), 2), Family.CUSTOM_CORRELATED)
        sample = sample_round(inst, np.random.default_rng(0))
        assert sample.aux is not None and sample.rewards.shape == (2,)
        with pytest.raises(InvalidInstanceError):
            make_auction_instance(AuctionSpec((0.2, 0.4), 2), Family.BERNOULLI)

    def test_beta_values(self):
        spec = AuctionSpec((0.2, 0.5), bidders=2, value_dist=stats.beta(2, 2))
        inst = make_auction_instance(spec)
        gen = np.random.default_rng(1)
        draws = np.stack([sample_round(inst, gen).rewards for _ in range(20_000)])
        assert np.all(np.abs(draws.mean(axis=0) - inst.means_array()) < 0.015)
