"""Discrete phase randomization: series formula vs Fock oracle, floor, and R sizing."""

import math

import pytest

from veriphoton import phaserand


class TestSeriesVsOracle:
    def test_single_pulse_agreement_across_r(self):
        for r in range(2, 17):
            series = phaserand.single_pulse_fidelity_series(r)
            oracle = phaserand.fock_oracle_fidelity(r, 1.0)
            assert abs(series - oracle) < 1e-6, f"R={r}"

    def test_continuous_limit(self):
        # R at the Fock cutoff behaves as the continuous average
        assert phaserand.single_pulse_fidelity_series(40) == pytest.approx(1.0, abs=1e-12)

    def test_total_fidelity_exponentiation(self):
        single = phaserand.single_pulse_fidelity_series(9)
        assert phaserand.fidelity_series(9, 75, 2) == pytest.approx(single**150, rel=1e-9)

    def test_nondecreasing_in_r_beyond_the_validity_floor(self):
        values = [phaserand.single_pulse_fidelity_series(r) for r in range(9, 21)]
        assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))


class TestFockOracle:
    def test_single_phase_regression_value(self):
        # R = 1 compares a pure coherent state against the Poisson mixture:
        # closed form e^{-2} I_0(2)
        value = phaserand.fock_oracle_fidelity(1, 1.0)
        assert value == pytest.approx(0.308508, abs=2e-6)
        analytic = sum(math.exp(-2) / math.factorial(n) ** 2 for n in range(40))
        assert value == pytest.approx(analytic, abs=1e-7)
        assert value < 1.0

    def test_vacuum_limit(self):
        # alpha -> 0: both states approach the vacuum
        assert phaserand.fock_oracle_fidelity(2, 0.05) == pytest.approx(1.0, abs=1e-4)

    def test_cutoff_guard(self):
        with pytest.raises(ValueError, match="tail"):
            phaserand.fock_oracle_fidelity(2, 1.0, cutoff=5)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            phaserand.PhaseRandConfig(R=1)
        with pytest.raises(ValueError, match="tail"):
            phaserand.PhaseRandConfig(R=9, fock_cutoff=4)
        cfg = phaserand.PhaseRandConfig(R=9)
        assert cfg.fock_cutoff == 40


class TestFidelityFloor:
    def test_reference_value(self):
        value = phaserand.f_min(75, 2, 9)
        assert value == pytest.approx(1 - 300 * (math.e / 8) ** 8, rel=1e-12)
        assert 0.94 < value < 0.95

    def test_validity_floor_enforced(self):
        with pytest.raises(ValueError, match="only valid"):
            phaserand.f_min(75, 2, 8)

    def test_large_r_limit(self):
        assert phaserand.f_min(75, 2, 60) == pytest.approx(1.0, abs=1e-12)

    def test_floor_below_series_over_the_grid(self):
        for m in (8, 75, 200):
            for n in (2, 4, 6):
                for r in range(9, 17):
                    series = phaserand.fidelity_series(r, m, n)
                    assert series >= phaserand.f_min(m, n, r) - 1e-9


class TestRequiredR:
    def test_reference_operating_point(self):
        assert phaserand.required_R(75, 2, 10) == 16

    def test_never_below_the_validity_floor(self):
        for m in (8, 75, 200):
            for n in (2, 3, 6):
                for f in (1.0, 10.0, 100.0):
                    assert phaserand.required_R(m, n, f) >= 9

    def test_shift_bound_holds_at_the_returned_r(self):
        for m in (8, 75, 200):
            for n in (2, 3, 6):
                for f in (1.0, 10.0, 100.0):
                    r = phaserand.required_R(m, n, f)
                    shift = phaserand.acceptance_shift_bound(m, n, r)
                    assert shift <= (n - 1) / (4 * n * f) + 1e-12

    def test_monotone_in_m_and_f(self):
        rs = [phaserand.required_R(m, 2, 10) for m in (8, 30, 75, 150, 300)]
        assert all(a <= b for a, b in zip(rs, rs[1:]))
        rs = [phaserand.required_R(75, 2, f) for f in (1, 5, 10, 100, 1000)]
        assert all(a <= b for a, b in zip(rs, rs[1:]))

    def test_parameter_guards(self):
        with pytest.raises(ValueError):
            phaserand.required_R(75, 1, 10)
        with pytest.raises(ValueError):
            phaserand.required_R(0, 2, 10)
