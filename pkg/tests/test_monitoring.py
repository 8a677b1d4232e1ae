import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reputax import (
    EconomyDomainError,
    MonitoringTech,
    TransitionMatrix,
    apply_enforcement,
    bayes_posterior,
    informativeness_diagnostic,
    one_step_kernel,
    propagate_prior,
    signal_prob,
    threshold_tech,
)

RATIO = MonitoringTech()
PI = TransitionMatrix(0.9, 0.9)


class TestSignalProb:
    def test_honest_at_unit_revenue(self):
        assert signal_prob(RATIO, "H", 1.0) == pytest.approx(0.6, abs=1e-12)

    def test_opportunist_at_unit_revenue(self):
        assert signal_prob(RATIO, "O", 1.0) == pytest.approx(0.05, abs=1e-12)

    def test_fully_garbled_is_uninformative(self):
        tech = MonitoringTech(garble_eps=0.5)
        for r in (0.0, 0.3, 2.0):
            assert signal_prob(tech, "H", r) == pytest.approx(0.5, abs=1e-12)
            assert signal_prob(tech, "O", r) == pytest.approx(0.5, abs=1e-12)

    def test_clamped_at_zero_revenue(self):
        # the raw opportunist kernel is exactly zero at R=0
        assert signal_prob(RATIO, "O", 0.0) == pytest.approx(1e-12, abs=1e-18)

    def test_negative_revenue_rejected(self):
        with pytest.raises(EconomyDomainError):
            signal_prob(RATIO, "H", -0.1)


class TestBayes:
    def test_favorable_signal(self):
        # hand Bayes with q_H=0.6, q_O=0.05: 0.3/0.325 = 12/13
        assert bayes_posterior(0.5, 1.0, 1, RATIO) == pytest.approx(12 / 13, abs=1e-12)

    def test_unfavorable_signal(self):
        # hand Bayes with 0.4 vs 0.95: 0.2/0.675 = 8/27
        assert bayes_posterior(0.5, 1.0, 0, RATIO) == pytest.approx(8 / 27, abs=1e-12)

    def test_degenerate_priors_absorbing(self):
        for s in (0, 1):
            assert bayes_posterior(1.0, 1.0, s, RATIO) == 1.0
            assert bayes_posterior(0.0, 1.0, s, RATIO) == 0.0


class TestPropagation:
    def test_from_certain_honest(self):
        assert propagate_prior(1.0, PI) == pytest.approx(0.9, abs=1e-15)

    def test_from_certain_opportunist(self):
        assert propagate_prior(0.0, PI) == pytest.approx(0.1, abs=1e-15)

    def test_affine_map(self):
        assert propagate_prior(12 / 13, PI) == pytest.approx(0.1 + 0.8 * 12 / 13, abs=1e-15)

    def test_stationary_point(self):
        assert PI.stationary_belief() == pytest.approx(0.5, abs=1e-15)
        assert TransitionMatrix(0.95, 0.8).stationary_belief() == pytest.approx(0.2 / 0.25)


class TestOneStepKernel:
    def test_composition_at_half(self):
        step = one_step_kernel(0.5, 1.0, RATIO, PI)
        assert step.p1 == pytest.approx(0.325, abs=1e-12)
        assert step.theta_up == pytest.approx(0.8384615384615384, abs=1e-9)
        assert step.theta_down == pytest.approx(0.3370370370370370, abs=1e-9)

    def test_uninformative_collapses_branches(self):
        tech = MonitoringTech(garble_eps=0.5)
        step = one_step_kernel(0.5, 1.0, tech, PI)
        assert step.theta_up == pytest.approx(step.theta_down, abs=1e-12)
        assert step.theta_up == pytest.approx(propagate_prior(0.5, PI), abs=1e-12)

    @given(theta=st.floats(1e-6, 1 - 1e-6), revenue=st.floats(0.0, 50.0))
    @settings(max_examples=200, deadline=None)
    def test_martingale_before_propagation(self, theta, revenue):
        step = one_step_kernel(theta, revenue, RATIO, PI)
        mean = step.p1 * step.post_up + (1 - step.p1) * step.post_down
        assert abs(mean - theta) <= 1e-12

    @given(theta=st.floats(1e-6, 1 - 1e-6), revenue=st.floats(0.0, 50.0))
    @settings(max_examples=100, deadline=None)
    def test_propagated_mean(self, theta, revenue):
        step = one_step_kernel(theta, revenue, RATIO, PI)
        mean = step.p1 * step.theta_up + (1 - step.p1) * step.theta_down
        assert abs(mean - propagate_prior(theta, PI)) <= 1e-12

    def test_garbling_shrinks_spread(self):
        spreads = []
        for eps in (0.0, 0.1, 0.2, 0.35, 0.5):
            step = one_step_kernel(0.6, 0.8, MonitoringTech(garble_eps=eps), PI)
            spreads.append(step.theta_up - step.theta_down)
        assert np.all(np.diff(spreads) <= 1e-12)

    def test_boundary_absorption(self):
        for theta in (0.0, 1.0):
            step = one_step_kernel(theta, 1.0, RATIO, PI)
            assert step.post_up == theta
            assert step.post_down == theta


class TestEnforcement:
    def test_zero_weight_is_baseline(self):
        tech = apply_enforcement(RATIO, 0.0)
        base = one_step_kernel(0.5, 1.0, RATIO, PI)
        step = one_step_kernel(0.5, 1.0, tech, PI)
        assert np.allclose(step.branch_probs, base.branch_probs)
        assert np.allclose(step.branch_priors, base.branch_priors)

    def test_coverage_scales_with_revenue(self):
        tech = apply_enforcement(RATIO, 0.6)
        assert tech.reveal_coverage(0.0) == 0.0
        assert tech.reveal_coverage(1.0) == pytest.approx(0.3, abs=1e-15)
        assert tech.reveal_coverage(3.0) == pytest.approx(0.45, abs=1e-15)

    def test_full_weight_reveals_at_scale(self):
        # with full verification and a large revenue base, the kernel is the
        # type indicator propagated through the chain
        tech = apply_enforcement(RATIO, 1.0)
        theta = 0.4
        step = one_step_kernel(theta, 1e9, tech, PI)
        assert step.branch_probs[2] == pytest.approx(theta, rel=1e-6)
        assert step.branch_probs[3] == pytest.approx(1 - theta, rel=1e-6)
        assert step.branch_priors[2] == pytest.approx(PI.pi_hh, abs=1e-15)
        assert step.branch_priors[3] == pytest.approx(1 - PI.pi_oo, abs=1e-15)

    def test_martingale_preserved_under_mixture(self):
        tech = apply_enforcement(RATIO, 0.5)
        step = one_step_kernel(0.5, 1.0, tech, PI)
        assert step.mean_posterior() == pytest.approx(0.5, abs=1e-12)
        assert step.mean_next_prior() == pytest.approx(propagate_prior(0.5, PI), abs=1e-12)

    def test_weight_validated(self):
        with pytest.raises(EconomyDomainError):
            apply_enforcement(RATIO, 1.5)


class TestThresholdTech:
    def test_above_threshold(self):
        tech = threshold_tech(0.1, 0.2)
        assert signal_prob(tech, "H", 0.5) == pytest.approx(0.8, abs=1e-12)
        assert signal_prob(tech, "O", 0.5) == pytest.approx(0.2, abs=1e-12)

    def test_below_threshold(self):
        tech = threshold_tech(0.1, 0.2)
        assert signal_prob(tech, "H", 0.05) == pytest.approx(0.2, abs=1e-12)

    def test_near_half_flip_uninformative(self):
        tech = threshold_tech(0.1, 0.4999999)
        assert abs(signal_prob(tech, "H", 0.5) - signal_prob(tech, "O", 0.5)) <= 1e-6

    def test_flip_level_validated(self):
        with pytest.raises(EconomyDomainError):
            threshold_tech(0.1, 0.6)


class TestInformativeness:
    def test_ratio_tech_monotone_and_informative_at_zero(self):
        report = informativeness_diagnostic(RATIO, [0.0, 0.5, 1.0, 2.0])
        assert report.monotone
        assert report.informative_at_zero
        # R=0 is perfectly revealing for s=1 (raw q_O(0)=0) and sits outside the scan
        assert list(report.revealing_points) == [0.0]
        assert report.odds_ratio[0] == np.inf

    def test_fully_garbled_constant_ratio(self):
        report = informativeness_diagnostic(MonitoringTech(garble_eps=0.5), [0.0, 1.0, 2.0])
        assert report.monotone
        assert not report.informative_at_zero
        assert np.allclose(report.odds_ratio, 1.0)

    def test_threshold_single_jump(self):
        report = informativeness_diagnostic(threshold_tech(0.3, 0.2), [0.1, 0.2, 0.5, 1.0])
        assert report.monotone
        ratios = report.odds_ratio
        assert ratios[0] == ratios[1] == pytest.approx(1.0)
        assert ratios[2] == ratios[3] == pytest.approx(16.0)

    def test_grid_validated(self):
        with pytest.raises(EconomyDomainError):
            informativeness_diagnostic(RATIO, [1.0, 0.5])


class TestCustomTech:
    def test_tabulated_kernel_interpolates(self):
        tech = MonitoringTech(kind="custom", r_table=(0.0, 1.0, 2.0),
                              q_h_table=(0.3, 0.5, 0.7), q_o_table=(0.1, 0.2, 0.3))
        assert signal_prob(tech, "H", 0.5) == pytest.approx(0.4, abs=1e-12)
        assert signal_prob(tech, "O", 1.5) == pytest.approx(0.25, abs=1e-12)
        # flat extrapolation beyond the table
        assert signal_prob(tech, "H", 5.0) == pytest.approx(0.7, abs=1e-12)

    def test_tables_validated(self):
        with pytest.raises(EconomyDomainError):
            MonitoringTech(kind="custom", r_table=(0.0, 1.0), q_h_table=(0.3,),
                           q_o_table=(0.1, 0.2))
