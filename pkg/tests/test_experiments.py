from dataclasses import replace

import numpy as np
import pytest

from reputax import (
    EconomyDomainError,
    GridSpec,
    SolverConfig,
    TransitionMatrix,
    dynamic_cutoff,
    instrument_specific_variant,
    replicate_figures,
    solve_static,
    sweep_enforcement,
    sweep_garbling,
    sweep_persistence,
)
from conftest import SMALL_GRID, solve_cached, theta_step


def locate_static_cutoff(economy, phi=0.0, grid=SMALL_GRID):
    """Bisect the belief axis on the sign of the refined optimal scale."""
    lo, hi = 0.0, 1.0
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if solve_static(mid, economy, grid, phi=phi).allocation.revenue > 1e-9:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class TestGarblingSweep:
    def test_noise_shrinks_scale(self, small_config):
        result = sweep_garbling(small_config, [0.0, 0.1, 0.2, 0.3])
        assert result.all_pass, result.first_failure()
        # cutoffs weakly increase with noise
        assert np.all(np.diff(result.cutoffs) >= -theta_step(small_config))

    def test_full_noise_recovers_static(self, small_config):
        static = solve_cached(replace(small_config, beta=0.0))
        garbled = solve_cached(replace(
            small_config, tech=replace(small_config.tech, garble_eps=0.4999999)))
        assert np.max(np.abs(garbled.policy.revenue - static.policy.revenue)) <= 1e-6

    def test_descending_levels_rejected(self, small_config):
        with pytest.raises(EconomyDomainError):
            sweep_garbling(small_config, [0.3, 0.1])


class TestEnforcementSweep:
    def test_verification_expands_scale(self, small_config):
        result = sweep_enforcement(small_config, [0.0, 0.5, 1.0], [0.0])
        assert result.all_pass, result.first_failure()
        assert np.all(np.diff(result.cutoffs) <= theta_step(small_config))

    def test_earmark_expands_scale(self, small_config):
        result = sweep_enforcement(small_config, [0.0], [0.0, 0.5])
        assert result.all_pass, result.first_failure()

    def test_full_earmark_taxes_everywhere(self, small_config):
        result = solve_cached(replace(small_config, phi=1.0))
        # with full earmarking the scale rule is U'(C*) = 1, so revenue is
        # positive at every belief
        assert result.policy.revenue.min() > 0.0
        assert dynamic_cutoff(result.policy) == result.policy.theta_grid[0]

    def test_earmark_shifts_static_cutoff(self, quant_economy):
        found = locate_static_cutoff(quant_economy, phi=0.5)
        assert abs(found - 0.18920711500272103) <= 1e-3

    def test_levels_validated(self, small_config):
        with pytest.raises(EconomyDomainError):
            sweep_enforcement(small_config, [0.5, 0.0], [0.0])
        with pytest.raises(EconomyDomainError):
            sweep_enforcement(small_config, [0.0], [1.5])


class TestPersistenceSweep:
    def test_persistence_expands_scale(self, small_config):
        result = sweep_persistence(small_config, [(0.9, 0.9), (0.95, 0.95)])
        assert result.all_pass, result.first_failure()

    def test_iid_types_recover_static(self, small_config):
        static = solve_cached(replace(small_config, beta=0.0))
        iid = solve_cached(replace(small_config, transition=TransitionMatrix(0.5, 0.5)))
        assert np.max(np.abs(iid.policy.revenue - static.policy.revenue)) <= 1e-6

    def test_absorbing_types_maximal(self, small_config):
        base = solve_cached(small_config)
        absorbing = solve_cached(replace(small_config, transition=TransitionMatrix(1.0, 1.0)))
        assert np.min(absorbing.grid_policy.revenue - base.grid_policy.revenue) >= -1e-6

    def test_non_ascending_rejected(self, small_config):
        with pytest.raises(EconomyDomainError):
            sweep_persistence(small_config, [(0.95, 0.95), (0.9, 0.9)])


class TestInstrumentWeights:
    def test_symmetric_weights_flat_across_mixes(self, small_config):
        report = instrument_specific_variant(small_config, (1.0, 1.0))
        assert len(report.members) >= 3
        assert report.continuation_spread <= 1e-10
        assert all(v.passed for v in report.verdicts)

    def test_asymmetric_weights_separate_mixes(self, small_config):
        report = instrument_specific_variant(small_config, (0.0, 2.0))
        assert report.continuation_spread > 1e-6
        assert all(v.passed for v in report.verdicts)

    def test_tilt_reverses_with_weights(self, small_config):
        broad = instrument_specific_variant(small_config, (0.0, 2.0))
        labor = instrument_specific_variant(small_config, (2.0, 0.0))
        assert broad.preferred_member.tau_l < labor.preferred_member.tau_l

    def test_continuation_follows_kernel_revenue(self, small_config):
        report = instrument_specific_variant(small_config, (0.0, 2.0))
        order = np.argsort([m.kernel_revenue for m in report.members])
        conts = np.array([m.continuation for m in report.members])[order]
        assert np.all(np.diff(conts) >= -1e-12)

    def test_zero_revenue_probe_rejected(self, small_config):
        with pytest.raises(EconomyDomainError):
            instrument_specific_variant(small_config, (0.0, 2.0), probe_theta=0.2)


class TestFigureReplication:
    def test_within_plot_tolerance(self):
        tables = replicate_figures(SolverConfig())
        assert tables.max_dev_revenue <= 0.005
        assert tables.max_dev_tau_b <= 0.005
        assert tables.max_abs_tau_l == 0.0

    def test_spot_rows(self):
        tables = replicate_figures(SolverConfig())
        by_theta = {round(r.theta, 2): r for r in tables.rows}
        assert abs(by_theta[0.65].revenue - 0.143) <= 0.005
        assert abs(by_theta[0.85].revenue - 0.505) <= 0.005
        assert abs(by_theta[0.80].tau_b - 0.255) <= 0.005
        assert by_theta[0.80].tau_l == 0.0
        # zero region of the schedule
        assert by_theta[0.50].revenue == 0.0

    def test_requires_quant_backend(self, general_economy):
        with pytest.raises(EconomyDomainError):
            replicate_figures(SolverConfig(economy=general_economy,
                                           grid_spec=GridSpec(11, 11)))
