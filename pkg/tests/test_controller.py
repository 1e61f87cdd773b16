import numpy as np
import pytest

import pdteleop as pt

GAINS = pt.ControllerGains()  # p=100, k=(20,20), alpha=(4,4), omega=(50,50), dbar=(0.2,0.1)


class TestControlLaws:
    def test_synchronized_rest_gives_zero(self):
        tau = pt.pd_output_feedback([0.3, -0.1], [0.3, -0.1], [0, 0], [0, 0], GAINS)
        assert np.all(tau == 0.0)

    def test_reference_torque(self):
        tau = pt.pd_output_feedback([1.0, 0.0], [0.0, 0.0], [0.1, 0.0], [0.0, 0.0], GAINS)
        assert np.allclose(tau, [-102.0, 0.0], atol=1e-13)

    def test_gravity_passthrough(self):
        g = np.array([4.2, -1.3])
        tau = pt.pd_output_feedback([0.5, 0.5], [0.5, 0.5], [0, 0], g, GAINS)
        assert np.array_equal(tau, g)

    def test_state_feedback_matches_output_feedback_on_same_velocity(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            q, qjd, v, g = rng.normal(size=(4, 2))
            assert np.array_equal(
                pt.pd_state_feedback(q, qjd, v, g, GAINS, side=1),
                pt.pd_output_feedback(q, qjd, v, g, GAINS, side=1))

    def test_damping_only(self):
        tau = pt.pd_state_feedback([0.2, 0.2], [0.2, 0.2], [0.5, -0.5], [0, 0], GAINS)
        assert np.allclose(tau, [-10.0, 10.0], atol=1e-13)

    def test_affine_in_position_error(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            e = rng.normal(size=2)
            a = rng.normal()
            base = pt.pd_output_feedback(e, np.zeros(2), np.zeros(2), np.zeros(2), GAINS)
            scaled = pt.pd_output_feedback(a * e, np.zeros(2), np.zeros(2), np.zeros(2), GAINS)
            assert np.allclose(scaled, a * base, rtol=1e-14, atol=1e-12)


class TestGainCondition:
    def test_reference_gains_meet_with_equality(self):
        rep = pt.verify_gain_condition(GAINS)
        assert abs(rep.rho_m) <= 1e-12
        assert abs(rep.rho_s) <= 1e-12
        assert rep.satisfied and not rep.strict

    def test_strict_with_more_damping(self):
        rep = pt.verify_gain_condition(
            pt.ControllerGains(k_damp=(30.0, 30.0)))
        assert rep.rho_m == pytest.approx(-7.5, abs=1e-12)
        assert rep.satisfied and rep.strict

    def test_violated_with_less_damping(self):
        rep = pt.verify_gain_condition(pt.ControllerGains(k_damp=(10.0, 10.0)))
        assert rep.rho_m == pytest.approx(7.5, abs=1e-12)
        assert not rep.satisfied

    def test_monotone_in_damping(self):
        prev_ok = False
        for k in np.linspace(5.0, 45.0, 17):
            rep = pt.verify_gain_condition(pt.ControllerGains(k_damp=(k, k)))
            if prev_ok:
                assert rep.satisfied  # more damping never breaks the condition
            prev_ok = rep.satisfied

    def test_asymmetric_sides(self):
        rep = pt.verify_gain_condition(pt.ControllerGains(k_damp=(30.0, 10.0)))
        assert rep.rho_m < 0 < rep.rho_s
        assert not rep.satisfied
