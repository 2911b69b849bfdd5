import numpy as np
import pytest
from numpy.testing import assert_allclose

import platoonshape as ps
from platoonshape.profiles import Parity

FAR = 1e6  # effectively +-infinity for tanh


class TestDesignProfile:
    def test_section_v_amplitudes(self, params):
        profile = ps.design_profile(2.6, 1.74, 0.057, 0.0, params)
        assert_allclose(profile.alpha, 0.43, rtol=1e-12)
        assert_allclose(profile.beta, 0.43, rtol=1e-12)
        # midpoint value of the odd gap recovers tau0 - alpha
        assert_allclose(profile.tau0 - profile.alpha, 2.17, rtol=1e-12)
        assert_allclose(profile.tau_odd_end, 1.74, rtol=1e-12)
        assert_allclose(profile.tau_even_end, 3.46, rtol=1e-12)

    def test_degenerate_target(self, params):
        with pytest.raises(ps.DegenerateProfileError):
            ps.design_profile(2.6, 2.6, 0.057, 0.0, params)

    def test_infeasible_target(self, params):
        # 1.5 s sits below the curve minimum 1.7321 s
        with pytest.raises(ps.InfeasibleTargetError):
            ps.design_profile(2.0, 1.5, 0.1, 0.0, params)


class TestTimeGapAt:
    def test_upstream_limit(self, section_v_profile):
        tau, slope, curv = ps.time_gap_at(section_v_profile, Parity.ODD, -FAR)
        assert abs(tau - 2.6) < 1e-9
        assert abs(slope) < 1e-12
        assert abs(curv) < 1e-12

    def test_center_values(self, section_v_profile):
        tau, slope, _ = ps.time_gap_at(section_v_profile, Parity.ODD, 0.0)
        assert_allclose(tau, 2.17, rtol=1e-12)
        assert_allclose(slope, -0.43 * 0.057, rtol=1e-12)  # -beta*gamma = -0.02451

    def test_even_downstream_limit(self, section_v_profile):
        tau, _, _ = ps.time_gap_at(section_v_profile, Parity.EVEN, FAR)
        assert abs(tau - 3.46) < 1e-9

    def test_parity_consistency(self, section_v_profile):
        s = np.linspace(-300, 300, 601)
        tau_e = ps.time_gap_at(section_v_profile, Parity.EVEN, s)[0]
        tau_o = ps.time_gap_at(section_v_profile, Parity.ODD, s)[0]
        assert_allclose(tau_e + tau_o, 2 * 2.6, rtol=1e-12)

    def test_max_slope_at_center(self, section_v_profile):
        s = np.linspace(-300, 300, 2401)
        slope = ps.time_gap_at(section_v_profile, Parity.ODD, s)[1]
        assert np.max(np.abs(slope)) <= section_v_profile.max_transition_slope + 1e-15
        assert_allclose(abs(ps.time_gap_at(section_v_profile, Parity.ODD, 0.0)[1]),
                        section_v_profile.max_transition_slope, rtol=1e-12)

    def test_analytic_derivatives_match_central_differences(self, section_v_profile):
        h = 0.01
        s = np.arange(-150.0, 150.0 + h, h)
        t_val, d1, d2 = ps.transition_at(section_v_profile, s)
        d1_num = np.gradient(t_val, s, edge_order=2)
        d2_num = np.gradient(d1, s, edge_order=2)
        assert np.max(np.abs(d1 - d1_num)) < 1e-6
        assert np.max(np.abs(d2 - d2_num)) < 1e-6


class TestVelocityProfiles:
    def test_odd_velocity_limits(self, section_v_profile):
        assert abs(ps.odd_velocity(section_v_profile, -FAR) - 18.156) < 1e-3
        assert abs(ps.odd_velocity(section_v_profile, FAR) - 7.625) < 1e-3

    def test_odd_velocity_center(self, section_v_profile, params):
        # equals the boundary velocity at tau = 2.17
        expected = ps.velocity_for_time_gap(2.17, params)
        got = ps.odd_velocity(section_v_profile, 0.0)
        assert_allclose(got, expected, rtol=1e-12)
        assert abs(got - 13.909) < 1e-3

    def test_desired_velocity_limits_match_odd(self, section_v_profile):
        for s in (-FAR, FAR):
            assert_allclose(ps.desired_velocity(section_v_profile, s),
                            ps.odd_velocity(section_v_profile, s), rtol=1e-9)

    def test_desired_velocity_center(self, section_v_profile):
        v_odd = ps.odd_velocity(section_v_profile, 0.0)
        slope = 0.43 * 0.057
        expected = v_odd / (1 + v_odd * slope)
        got = ps.desired_velocity(section_v_profile, 0.0)
        assert_allclose(got, expected, rtol=1e-12)
        assert abs(got - 10.373) < 1e-3

    def test_inconsistent_speedup_profile(self, params):
        # a gap-opening ramp steep enough to flip the flow-balance denominator
        speedup = ps.ShapingProfile(2.6, -0.43, -0.43, 0.5, 0.0, params)
        with pytest.raises(ps.ProfileInconsistencyError):
            ps.desired_velocity(speedup, 0.0)

    def test_odd_rides_safety_boundary(self, section_v_profile, params):
        s = np.linspace(-175, 175, 701)
        v = ps.odd_velocity(section_v_profile, s)
        tau = ps.time_gap_at(section_v_profile, Parity.ODD, s)[0]
        margin = tau - ps.safe_time_gap(v, params)
        assert np.max(np.abs(margin)) < 1e-9

    def test_even_strictly_inside_region(self, section_v_profile, params):
        s = np.linspace(-175, 175, 701)
        v = ps.desired_velocity(section_v_profile, s)
        tau = ps.time_gap_at(section_v_profile, Parity.EVEN, s)[0]
        margin = tau - ps.safe_time_gap(v, params)
        assert np.all(margin > 0)

    def test_ideal_flow_consistency(self, section_v_profile):
        # with both parities on-profile, the time-gap errors have zero slope
        s = np.linspace(-175, 175, 701)
        kin = ps.kinematics_at(section_v_profile, s)
        residual_odd = 1 / kin.v_odd - 1 / kin.v_des - (-kin.transition_d1)
        residual_even = 1 / kin.v_des - 1 / kin.v_odd - kin.transition_d1
        assert np.max(np.abs(residual_odd)) < 1e-9
        assert np.max(np.abs(residual_even)) < 1e-9


class TestAccelerationProfiles:
    def test_constant_profile_zero_acceleration(self, params):
        profile = ps.constant_profile(2.6, params)
        s = np.linspace(-50, 50, 501)
        a_odd, a_even = ps.acceleration_profiles(profile, s)
        assert np.max(np.abs(a_odd)) < 1e-12
        assert np.max(np.abs(a_even)) < 1e-12

    def test_section_v_gamma_is_feasible(self, section_v_profile):
        s = np.arange(-8 / 0.057, 8 / 0.057, 0.1)
        a_odd, a_even = ps.acceleration_profiles(section_v_profile, s)
        assert a_odd.min() >= -4.0
        assert a_even.min() >= -4.0

    def test_steep_gamma_violates_bound(self, params):
        profile = ps.design_profile(2.6, 1.74, 0.2, 0.0, params)
        s = np.arange(-8 / 0.2, 8 / 0.2, 0.05)
        a_odd, a_even = ps.acceleration_profiles(profile, s)
        assert min(a_odd.min(), a_even.min()) < -4.0

    def test_grid_validation(self, section_v_profile):
        with pytest.raises(ValueError):
            ps.acceleration_profiles(section_v_profile, [0.0, 1.0])
        with pytest.raises(ValueError):
            ps.acceleration_profiles(section_v_profile, [0.0, 1.0, 0.5])


class TestOptimizeGamma:
    def test_reproduces_published_optimum(self, params):
        gamma = ps.optimize_gamma(2.6, 1.74, params, tol=1e-4)
        assert abs(gamma - 0.057) <= 0.005

    def test_looser_decel_bound_allows_steeper_ramp(self, params):
        gamma = ps.optimize_gamma(2.6, 1.74, params, tol=1e-4, decel_limit=400.0)
        assert gamma > 0.057

    def test_tiny_shaping_allows_steeper_ramp(self, params):
        gamma = ps.optimize_gamma(2.6, 2.59, params, tol=1e-4)
        assert gamma > 0.057

    def test_no_feasible_gamma(self, params):
        with pytest.raises(ps.OptimizationFailureError):
            ps.optimize_gamma(2.6, 1.74, params, tol=1e-4, decel_limit=1e-3)

    def test_result_is_feasible_by_construction(self, params):
        gamma = ps.optimize_gamma(2.6, 1.74, params, tol=1e-4)
        profile = ps.design_profile(2.6, 1.74, gamma, 0.0, params)
        s = np.arange(-8 / gamma, 8 / gamma, 0.01 / gamma)
        a_odd, a_even = ps.acceleration_profiles(profile, s)
        assert min(a_odd.min(), a_even.min()) >= -4.0 - 1e-6

    def test_monotone_feasibility(self, params):
        # every steepness below a feasible one stays feasible
        def feasible(gamma):
            profile = ps.design_profile(2.6, 1.74, gamma, 0.0, params)
            s = np.arange(-8 / gamma, 8 / gamma, min(0.1, 0.01 / gamma))
            a_odd, a_even = ps.acceleration_profiles(profile, s)
            return min(a_odd.min(), a_even.min()) >= -4.0 - 1e-6

        flags = [feasible(g) for g in np.linspace(0.005, 0.15, 16)]
        # one transition from feasible to infeasible, no flip-flopping
        assert flags[0] and not flags[-1]
        first_false = flags.index(False)
        assert all(not f for f in flags[first_false:])

    def test_determinism(self, params):
        g1 = ps.optimize_gamma(2.6, 1.74, params, tol=1e-4)
        g2 = ps.optimize_gamma(2.6, 1.74, params, tol=1e-4)
        assert g1 == g2


class TestConstantProfile:
    def test_flat_gaps_both_parities(self, params):
        profile = ps.constant_profile(2.6, params)
        s = np.linspace(-100, 100, 201)
        for parity in (Parity.EVEN, Parity.ODD):
            tau, slope, curv = ps.time_gap_at(profile, parity, s)
            assert_allclose(tau, 2.6, rtol=1e-15)
            assert np.all(slope == 0)
            assert np.all(curv == 0)

    def test_infeasible_constant_rejected(self, params):
        with pytest.raises(ps.InfeasibleTargetError):
            ps.constant_profile(1.0, params)


class TestParity:
    def test_lead_is_even(self):
        assert Parity.of_index(0) is Parity.EVEN
        assert Parity.of_index(1) is Parity.ODD
        assert Parity.of_index(8) is Parity.EVEN

    def test_profile_gamma_validation(self, params):
        with pytest.raises(ValueError):
            ps.ShapingProfile(2.6, 0.43, 0.43, -0.1, 0.0, params)
        with pytest.raises(ValueError):
            ps.ShapingProfile(2.6, 0.4, 0.43, 0.1, 0.0, params)
