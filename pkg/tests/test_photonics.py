"""Pulse sampling statistics, threshold test, and concentration bounds."""

import math

import numpy as np
import pytest

from veriphoton import photonics


class TestSampleBatch:
    def test_vacuum_probability_matches_poisson(self):
        rng = np.random.default_rng(0)
        batch = photonics.sample_batch(100_000, 1.0, rng)
        p0 = np.mean(batch.counts == 0)
        stderr = math.sqrt(math.exp(-1) * (1 - math.exp(-1)) / batch.m)
        assert abs(p0 - math.exp(-1)) < 3 * stderr

    def test_at_most_one_photon_probability(self):
        # per pulse P(n <= 1) = e^{-alpha^2} (1 + alpha^2) = 2/e at alpha = 1
        rng = np.random.default_rng(1)
        batch = photonics.sample_batch(100_000, 1.0, rng)
        p01 = np.mean(batch.counts <= 1)
        expected = 2 * math.exp(-1)
        stderr = math.sqrt(expected * (1 - expected) / batch.m)
        assert abs(p01 - expected) < 3 * stderr

    def test_angles_are_uniform(self):
        rng = np.random.default_rng(2)
        batch = photonics.sample_batch(100_000, 1.0, rng)
        for angle in range(4):
            freq = np.mean(batch.angles == angle)
            assert abs(freq - 0.25) < 3 * math.sqrt(0.25 * 0.75 / batch.m)

    def test_mean_photon_number(self):
        rng = np.random.default_rng(3)
        for alpha in (0.8, 1.0):
            batch = photonics.sample_batch(100_000, alpha, rng)
            stderr = alpha / math.sqrt(batch.m)  # Poisson variance = mean
            assert abs(batch.counts.mean() - alpha**2) < 3 * stderr

    def test_truncation_cap(self):
        rng = np.random.default_rng(4)
        batch = photonics.sample_batch(50_000, 1.0, rng)
        assert batch.counts.max() <= photonics.POISSON_TRUNCATION

    @pytest.mark.parametrize("m,alpha", [(7, 1.0), (8, 0.5), (8, 1.1), (100, 0.2)])
    def test_invalid_parameters(self, m, alpha):
        rng = np.random.default_rng(5)
        with pytest.raises(ValueError):
            photonics.sample_batch(m, alpha, rng)


class TestQndReport:
    def test_all_vacuum_batch(self):
        batch = photonics.PulseBatch(np.zeros(8, dtype=int), np.zeros(8, dtype=int), 1.0)
        rep = photonics.qnd_report(batch)
        assert rep.survivor_angles == ()
        assert rep.stats.m0 == 8

    def test_survivors_keep_one_photon_each(self):
        counts = np.array([0, 2, 1, 0, 0, 0, 0, 3])
        angles = np.array([0, 1, 2, 3, 0, 1, 2, 3])
        rep = photonics.qnd_report(photonics.PulseBatch(angles, counts, 1.0))
        assert rep.survivor_indices == (1, 2, 7)
        assert rep.survivor_angles == (1, 2, 3)
        assert rep.stats == photonics.PhotonStats(m0=5, m1=1)

    def test_report_equals_sampled_counts(self):
        rng = np.random.default_rng(6)
        batch = photonics.sample_batch(64, 1.0, rng)
        rep = photonics.qnd_report(batch)
        assert rep.counts == tuple(batch.counts)


class TestThreshold:
    def test_threshold_value_at_small_batch(self):
        # m = 8, alpha = 1: 12/e
        assert photonics.threshold_value(8, 1.0) == pytest.approx(12 / math.e)

    def test_pass_and_reject(self):
        assert photonics.threshold_check(4, 8, 1.0)
        assert not photonics.threshold_check(5, 8, 1.0)
        assert photonics.threshold_check(0, 8, 1.0)

    def test_count_bounds(self):
        with pytest.raises(ValueError):
            photonics.threshold_check(9, 8, 1.0)


class TestHonestRejectBound:
    def test_reference_operating_point(self):
        # the reference operating point: m = 75, alpha = 1, two repetitions
        value = photonics.honest_reject_bound(75, 1.0, 2)
        assert value == pytest.approx(2 * math.exp(-75 * math.exp(-2) / 2), rel=1e-12)
        assert value == pytest.approx(0.0125, abs=2e-5)

    def test_monotone_in_m(self):
        values = [photonics.honest_reject_bound(m, 1.0, 1) for m in range(8, 200, 8)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_empirical_failure_rate_below_bound(self):
        rng = np.random.default_rng(7)
        m, alpha, rounds = 75, 1.0, 10_000
        failures = 0
        for _ in range(rounds):
            batch = photonics.sample_batch(m, alpha, rng)
            if not photonics.threshold_check(int(np.sum(batch.counts == 0)), m, alpha):
                failures += 1
        bound = photonics.honest_reject_bound(m, alpha, 1)
        assert failures / rounds <= bound + 3 * math.sqrt(bound * (1 - bound) / rounds)


class TestSurvivorFloor:
    def test_reference_values(self):
        assert photonics.survivor_lower_bound(8, 1.0) == pytest.approx(2.0)
        assert photonics.survivor_lower_bound(75, 1.0) == pytest.approx(18.75)

    def test_floor_holds_whenever_threshold_passes(self):
        rng = np.random.default_rng(8)
        m, alpha = 75, 1.0
        floor = photonics.survivor_lower_bound(m, alpha)
        passing = 0
        for _ in range(5000):
            batch = photonics.sample_batch(m, alpha, rng)
            m0 = int(np.sum(batch.counts == 0))
            if photonics.threshold_check(m0, m, alpha):
                passing += 1
                assert m - m0 >= floor
        assert passing > 4900


class TestMaliciousSideBound:
    def test_low_count_rounds_are_rare(self):
        # frequency of m0 + m1 <= threshold is bounded by the same exponent
        rng = np.random.default_rng(9)
        m, alpha, rounds = 75, 1.0, 10_000
        bound = math.exp(-m * math.exp(-2 * alpha**2) * alpha**4 / 2)
        thr = photonics.threshold_value(m, alpha)
        low = 0
        for _ in range(rounds):
            batch = photonics.sample_batch(m, alpha, rng)
            m0 = int(np.sum(batch.counts == 0))
            m1 = int(np.sum(batch.counts == 1))
            if m0 + m1 <= thr:
                low += 1
        assert low / rounds <= bound + 3 * math.sqrt(bound * (1 - bound) / rounds)
