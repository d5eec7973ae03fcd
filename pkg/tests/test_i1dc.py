"""Cluster-chain collapse: angle formula vs statevector oracle, outcome laws, decoding."""

import itertools

import numpy as np
import pytest

from veriphoton import i1dc
from veriphoton.qubit_protocol import VerifierSecret, prepare_verifier_state


def final_state_angle_fidelity(branch: i1dc.I1dcBranch, phi: int) -> float:
    target = i1dc.plus_state(phi)
    return abs(np.vdot(target.amplitudes, branch.state.amplitudes)) ** 2


class TestPhiFromOutcomes:
    def test_single_photon_passthrough(self):
        for angle in range(4):
            assert i1dc.phi_from_outcomes([angle], []) == angle

    def test_two_photon_examples(self):
        assert i1dc.phi_from_outcomes([1, 1], [0]) == 2
        assert i1dc.phi_from_outcomes([1, 1], [1]) == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="outcomes"):
            i1dc.phi_from_outcomes([0, 1, 2], [0])

    def test_rejects_non_bits(self):
        with pytest.raises(ValueError):
            i1dc.phi_from_outcomes([0, 5], [0])


class TestStatevectorOracle:
    def test_formula_matches_oracle_exhaustively(self):
        for le in (2, 3):
            for angles in itertools.product(range(4), repeat=le):
                for branch in i1dc.run_statevector(angles, exhaustive=True):
                    phi = i1dc.phi_from_outcomes(angles, branch.outcomes)
                    assert final_state_angle_fidelity(branch, phi) == pytest.approx(1.0, abs=1e-10)

    def test_branch_probabilities_are_uniform(self):
        for le in (2, 3, 4, 5):
            angles = tuple(int(a) for a in np.arange(le) % 4)
            branches = i1dc.run_statevector(angles, exhaustive=True)
            assert len(branches) == 2 ** (le - 1)
            for branch in branches:
                assert branch.probability == pytest.approx(2.0 ** -(le - 1), abs=1e-12)

    def test_sampled_branch_agrees_with_exhaustive(self):
        rng = np.random.default_rng(0)
        angles = (1, 3, 2)
        lookup = {b.outcomes: b for b in i1dc.run_statevector(angles, exhaustive=True)}
        for _ in range(20):
            sampled = i1dc.run_statevector(angles, rng=rng)
            ref = lookup[sampled.outcomes]
            assert sampled.probability == pytest.approx(ref.probability, abs=1e-12)
            overlap = abs(np.vdot(ref.state.amplitudes, sampled.state.amplitudes))
            assert overlap == pytest.approx(1.0, abs=1e-10)

    def test_sampled_outcome_frequencies_are_uniform(self):
        rng = np.random.default_rng(1)
        angles = (2, 0, 1)
        counts = {}
        trials = 4000
        for _ in range(trials):
            out = i1dc.run_statevector(angles, rng=rng).outcomes
            counts[out] = counts.get(out, 0) + 1
        for out, c in counts.items():
            assert abs(c / trials - 0.25) < 0.03

    def test_argument_modes_are_exclusive(self):
        with pytest.raises(ValueError, match="exactly one"):
            i1dc.run_statevector((0, 0))
        with pytest.raises(ValueError, match="exactly one"):
            i1dc.run_statevector((0, 0), rng=np.random.default_rng(0), exhaustive=True)

    def test_needs_two_photons(self):
        with pytest.raises(ValueError, match="at least 2"):
            i1dc.run_statevector((0,), exhaustive=True)


class TestRunSymbolic:
    def test_all_zero_angles_give_zero_phi(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            tr = i1dc.run_symbolic((0,) * 6, rng)
            assert tr.phi == 0

    def test_transcript_shape(self):
        rng = np.random.default_rng(3)
        tr = i1dc.run_symbolic((1, 2, 3, 0), rng)
        assert tr.survivor_count == 4
        assert len(tr.outcomes) == 3
        assert tr.phi in range(4)

    def test_needs_two_photons(self):
        rng = np.random.default_rng(4)
        with pytest.raises(ValueError, match="at least 2"):
            i1dc.run_symbolic((1,), rng)

    def test_phi_is_uniform_when_last_angle_is_random(self):
        # chi-square over the four angle values at 1e5 symbolic runs
        rng = np.random.default_rng(5)
        counts = np.zeros(4)
        trials = 100_000
        for _ in range(trials):
            angles = rng.integers(0, 4, 5)
            counts[i1dc.run_symbolic(angles, rng).phi] += 1
        expected = trials / 4
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        assert chi2 < 21.1  # df = 3, far tail


class TestPhiDecoding:
    @pytest.mark.parametrize("phi,hs", [(0, (0, 0)), (2, (0, 1)), (1, (1, 0)), (3, (1, 1))])
    def test_mapping(self, phi, hs):
        assert i1dc.phi_to_hs(phi) == hs
        assert i1dc.hs_to_phi(*hs) == phi

    def test_round_trip_against_state_preparation(self):
        # S^h H |s> must equal |+_phi> exactly for all four angles
        for phi in range(4):
            h, s = i1dc.phi_to_hs(phi)
            prepared = prepare_verifier_state(VerifierSecret((h,), (s,)))
            overlap = abs(np.vdot(prepared.amplitudes, i1dc.plus_state(phi).amplitudes)) ** 2
            assert overlap == pytest.approx(1.0, abs=1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            i1dc.phi_to_hs(4)
