from dataclasses import replace

import numpy as np
import pytest

import pdteleop as pt
from pdteleop.errors import ConfigError, GainConditionError, InvariantViolationError


def mild_config(**overrides):
    """A non-stiff variant for integrator studies.

    The adaptation gain scales with c_bound^4 / lambda1^2; softening
    c_bound (the observer no longer certifies the true Coriolis bound,
    which is irrelevant for integrator-order measurements) and k_r makes
    every eigenvalue of the coupled system resolvable at millisecond steps.
    Delays are switched off and the forcing is smooth over the whole run.
    """
    robot = pt.RobotParams(c_bound=1.0)
    obs = pt.ObserverParams(k_r=1.0, c=1.0, lambda1=0.3, lambda2=20.0,
                            eps=0.1, alpha=4.0, k_damp=20.0)
    base = dict(
        robot_m=robot, robot_s=robot,
        observer_m=obs, observer_s=obs,
        gains=pt.ControllerGains(dbar=(0.0, 0.0)),
        init_m=pt.ObserverInit(x_hat0=(0.05, 0.02), r0=1.0),
        init_s=pt.ObserverInit(x_hat0=(0.05, 0.02), r0=1.0),
        delay_m=pt.DelayProfile(kind="constant", dbar=0.0),
        delay_s=pt.DelayProfile(kind="constant", dbar=0.0),
        operator=pt.OperatorProfile(amplitude=2.0, bias=0.5, angular_freq=3.0,
                                    stop_time=1e9),
        environment=pt.WallEnvironment(wall_y=1e9),
        duration=1.0, dt=1e-3, decimation=1,
    )
    base.update(overrides)
    return pt.ScenarioConfig(**base)


class TestSystemDerivative:
    def test_reference_initial_accelerations(self, default_config):
        """Hand-checked t=0 rates with the reference initial conditions.

        Master: u = J' (0,1) - 20 (0.05, 0.02) = (2, 0.6);
        M(0)^-1 (2, 0.6) = (0.05, 0.25).
        Slave: M(0)^-1 (-1, -0.4) = (0.05, -0.41666...).
        """
        cfg = default_config
        state = cfg.initial_state()
        dy, aux = pt.system_derivative(state, cfg.history_pair(), cfg)
        assert np.allclose(dy[2:4], [0.05, 0.25], atol=1e-12)
        assert np.allclose(dy[6:8], [0.05, -5.0 / 12.0], atol=1e-12)
        assert aux.f_hy == pytest.approx(1.0)
        assert aux.f_ey == 0.0
        assert np.allclose(aux.tau_m, [-1.0, -0.4], atol=1e-14)

    def test_quiescent_equilibrium(self):
        cfg = mild_config(
            operator=pt.OperatorProfile(amplitude=0.0, bias=0.0, angular_freq=1.0,
                                        stop_time=1e9),
            init_m=pt.ObserverInit(x_hat0=(0.0, 0.0), r0=1.0),
            init_s=pt.ObserverInit(x_hat0=(0.0, 0.0), r0=1.0))
        state = cfg.initial_state()
        dy, _ = pt.system_derivative(state, cfg.history_pair(), cfg)
        assert np.allclose(dy, 0.0, atol=1e-15)

    def test_observer_and_plant_share_torque(self, default_config):
        """With a perfect estimate the observer field equals the plant field."""
        cfg = replace(default_config,
                      init_m=pt.ObserverInit(x_hat0=(0.0, 0.0), r0=2.0),
                      init_s=pt.ObserverInit(x_hat0=(0.0, 0.0), r0=2.0))
        state = cfg.initial_state()
        dy, _ = pt.system_derivative(state, cfg.history_pair(), cfg)
        # xi_dot = f - kx xhat - kx_dot y; at q=0, xhat=0: xi_dot = f = qddot
        assert np.allclose(dy[8:10], dy[2:4], atol=1e-13)
        assert np.allclose(dy[12:14], dy[6:8], atol=1e-13)


class TestRk4Step:
    def test_python_path_matches_batch_kernel(self, default_config):
        cfg = replace(default_config, duration=0.005, decimation=1)
        res = pt.run_scenario(cfg)
        state = cfg.initial_state()
        hist = cfg.history_pair()
        for i in range(cfg.n_steps()):
            state = pt.rk4_step(state, hist, cfg)
        y = state.to_vector()
        logged = np.concatenate([
            res.q_m[-1], res.qd_m[-1], res.q_s[-1], res.qd_s[-1]])
        stepped = np.concatenate([y[0:2], y[2:4], y[4:6], y[6:8]])
        assert np.allclose(stepped, logged, rtol=1e-12, atol=1e-15)
        assert state.obs_master.r == pytest.approx(res.r_m[-1], rel=1e-12)
        assert state.obs_master.sigma_hat == pytest.approx(res.sigma_hat_m[-1],
                                                           rel=1e-9, abs=1e-15)

    def test_deterministic_repeat(self, default_config):
        cfg = replace(default_config, duration=0.5)
        a = pt.run_scenario(cfg)
        b = pt.run_scenario(cfg)
        for name in ("q_m", "qd_s", "vo", "x_hat_m", "work_operator", "d_m"):
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_self_convergence_order(self):
        """Global order on the smooth undelayed system: expect ~4."""
        def final_positions(dt):
            res = pt.run_scenario(mild_config(dt=dt, decimation=int(round(0.5 / dt))))
            return np.concatenate([res.q_m[-1], res.q_s[-1]])

        ref = final_positions(3.125e-5)
        errs = [np.abs(final_positions(dt) - ref).max()
                for dt in (1e-3, 5e-4, 2.5e-4)]
        assert errs[0] / errs[2] >= 8.0          # two halvings shrink >= 8x
        order = np.log2(errs[0] / errs[1])
        assert order >= 3.5

    def test_invariant_violation_when_step_too_large(self, default_config):
        cfg = replace(default_config, duration=0.05, dt=2e-4)
        with pytest.warns(RuntimeWarning, match="stability"):
            cfg.validate()
        with pytest.raises(InvariantViolationError, match="too large"), \
                pytest.warns(RuntimeWarning):
            pt.run_scenario(cfg)


class TestScenarioConfig:
    def test_dt_must_resolve_delays(self, default_config):
        with pytest.raises(ConfigError, match="dbar/10"):
            replace(default_config, dt=0.05).validate()

    def test_gain_refusal_and_force(self, default_config):
        weak = replace(default_config,
                       gains=pt.ControllerGains(k_damp=(10.0, 10.0)),
                       observer_m=replace(default_config.observer_m, k_damp=10.0),
                       observer_s=replace(default_config.observer_s, k_damp=10.0),
                       duration=0.01)
        with pytest.raises(GainConditionError):
            pt.run_scenario(weak)
        res = pt.run_scenario(weak, force=True)  # starts when forced
        assert len(res.t) > 0

    def test_stability_indicator_matches_reference(self, default_config):
        # 2 * k_sigma(t=0) * dt with r0=2: 2 * 12576.4 * 5e-5
        assert default_config.stability_indicator() == pytest.approx(1.2576, abs=2e-4)

    def test_row_count_contract(self, default_config):
        cfg = replace(default_config, duration=0.02, decimation=7)
        res = pt.run_scenario(cfg)
        assert len(res.t) == int(np.floor(cfg.duration / (cfg.dt * cfg.decimation))) + 1

    def test_state_vector_round_trip(self, default_config):
        state = default_config.initial_state()
        again = pt.SystemState.from_vector(state.to_vector(), state.t)
        assert np.array_equal(again.to_vector(), state.to_vector())


class TestStepSizeAdequacy:
    def test_halving_dt_leaves_default_scenario_unchanged(self, default_config, default_run):
        """Positions at t=60 move by < 1e-5 rad when dt is halved."""
        half = pt.run_scenario(replace(default_config, dt=2.5e-5, decimation=400))
        ref = default_run
        assert np.abs(half.q_m[-1] - ref.q_m[-1]).max() < 1e-5
        assert np.abs(half.q_s[-1] - ref.q_s[-1]).max() < 1e-5
