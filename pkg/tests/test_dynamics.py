import numpy as np
import pytest

import pdteleop as pt
from pdteleop.errors import InvalidInputError

PARAMS = pt.RobotParams()  # masses (1, 1.5), lengths (2, 1), horizontal plane
GRAV = pt.RobotParams(gravity_accel=9.81)


class TestMassMatrix:
    def test_reference_configuration(self):
        m = pt.mass_matrix([0.0, 0.0], PARAMS)
        assert np.allclose(m, [[17.5, 4.5], [4.5, 1.5]], atol=1e-14)

    def test_independent_of_first_joint(self):
        m = pt.mass_matrix([0.7, np.pi / 2], PARAMS)
        assert np.allclose(m, [[11.5, 1.5], [1.5, 1.5]], atol=1e-14)
        assert np.allclose(m, pt.mass_matrix([-2.1, np.pi / 2], PARAMS))

    def test_eigenvalues_at_zero_inside_certified_bounds(self):
        w = np.linalg.eigvalsh(pt.mass_matrix([0.0, 0.0], PARAMS))
        assert w[0] == pytest.approx(0.3212201246570905, abs=1e-12)
        assert w[1] == pytest.approx(18.67877987534291, abs=1e-12)
        assert PARAMS.lambda1 < w[0] and w[1] < PARAMS.lambda2

    def test_bounds_hold_over_random_configurations(self):
        # eigenvalue certificate: eig(M) within [0.3, 20] over 1e4 samples
        assert PARAMS.check_inertia_bounds(n_samples=10_000, seed=1234)

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        for q in rng.uniform(-np.pi, np.pi, (50, 2)):
            m = pt.mass_matrix(q, PARAMS)
            assert m[0, 1] == m[1, 0]

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            pt.mass_matrix([np.nan, 0.0], PARAMS)

    def test_rejects_degenerate_masses(self):
        with pytest.raises(InvalidInputError):
            pt.RobotParams(link_masses=(1.0, 0.0))


class TestCoriolis:
    def test_reference_value(self):
        c = pt.coriolis_matrix([0.0, np.pi / 2], [1.0, 1.0], PARAMS)
        assert np.allclose(c, [[-3.0, -6.0], [3.0, 0.0]], atol=1e-12)

    def test_zero_velocity(self):
        assert np.all(pt.coriolis_matrix([0.3, -1.1], [0.0, 0.0], PARAMS) == 0.0)

    def test_linear_in_velocity_argument(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            q = rng.uniform(-np.pi, np.pi, 2)
            x = rng.normal(size=2)
            # power-of-two scales commute exactly through the rounding
            for a in (2.0, 0.25, -8.0):
                assert np.array_equal(pt.coriolis_matrix(q, a * x, PARAMS),
                                      a * pt.coriolis_matrix(q, x, PARAMS))
            a = rng.normal()
            diff = np.abs(pt.coriolis_matrix(q, a * x, PARAMS)
                          - a * pt.coriolis_matrix(q, x, PARAMS)).max()
            # rounding allowance; cancellation in x0+x1 forbids a relative test
            assert diff <= 1e-13 * (1.0 + abs(a) * np.abs(x).max())

    def test_skew_symmetry_of_mdot_minus_2c(self):
        # Mdot from the Christoffel identity Mdot = C + C^T
        rng = np.random.default_rng(21)
        worst = 0.0
        for _ in range(500):
            q = rng.uniform(-np.pi, np.pi, 2)
            qd = rng.normal(size=2) * 3
            x = rng.normal(size=2) * 3
            c = pt.coriolis_matrix(q, qd, PARAMS)
            mdot = c + c.T
            worst = max(worst, abs(x @ (mdot - 2 * c) @ x))
        assert worst < 1e-10

    def test_mdot_matches_finite_differences_along_flow(self):
        rng = np.random.default_rng(22)
        h = 1e-6
        for _ in range(100):
            q = rng.uniform(-np.pi, np.pi, 2)
            qd = rng.normal(size=2)
            c = pt.coriolis_matrix(q, qd, PARAMS)
            mdot_fd = (pt.mass_matrix(q + h * qd, PARAMS)
                       - pt.mass_matrix(q - h * qd, PARAMS)) / (2 * h)
            assert np.allclose(c + c.T, mdot_fd, atol=1e-6)

    def test_norm_bound(self):
        # |C(q, x) y| <= c_bound |x| |y| over 1e4 random triples
        rng = np.random.default_rng(33)
        worst = 0.0
        for _ in range(10_000):
            q = rng.uniform(-np.pi, np.pi, 2)
            x = rng.uniform(-10, 10, 2)
            y = rng.uniform(-10, 10, 2)
            nx, ny = np.linalg.norm(x), np.linalg.norm(y)
            if nx < 1e-12 or ny < 1e-12:
                continue
            ratio = np.linalg.norm(pt.coriolis_matrix(q, x, PARAMS) @ y) / (nx * ny)
            worst = max(worst, ratio)
        assert worst <= PARAMS.c_bound
        # the bound is not vacuous: random sampling gets close to it
        assert worst > 4.0


class TestGravity:
    def test_horizontal_plane_is_zero(self):
        rng = np.random.default_rng(3)
        for q in rng.uniform(-np.pi, np.pi, (20, 2)):
            assert np.all(pt.gravity_vector(q, PARAMS) == 0.0)

    def test_reference_value(self):
        g = pt.gravity_vector([0.0, 0.0], GRAV)
        assert np.allclose(g, [63.765, 14.715], atol=1e-12)

    def test_cosine_zeros(self):
        g = pt.gravity_vector([np.pi / 2, 0.0], GRAV)
        assert np.all(np.abs(g) < 1e-12)


class TestForwardDynamics:
    def test_equilibrium_under_gravity_compensation(self):
        state = pt.JointState(q=np.array([0.4, -0.2]), qdot=np.zeros(2))
        tau = pt.gravity_vector(state.q, GRAV)
        acc = pt.forward_dynamics(state, tau, GRAV)
        assert np.allclose(acc, 0.0, atol=1e-12)

    def test_reference_acceleration(self):
        state = pt.JointState(q=np.zeros(2), qdot=np.zeros(2))
        acc = pt.forward_dynamics(state, [1.0, 0.0], PARAMS)
        assert np.allclose(acc, [0.25, -0.75], atol=1e-13)

    def test_kinetic_energy_conserved_without_torque(self):
        # plain RK4 on the passive arm: |dM/dt - 2C| skewness implies the
        # kinetic energy 0.5 qd' M qd is a first integral
        dt, n = 1e-3, 10_000
        q = np.array([0.2, -0.4])
        qd = np.array([1.0, -0.5])
        tau = np.zeros(2)

        def f(q, qd):
            return qd, pt.forward_dynamics(pt.JointState(q=q, qdot=qd), tau, PARAMS)

        def energy(q, qd):
            return 0.5 * qd @ pt.mass_matrix(q, PARAMS) @ qd

        e0 = energy(q, qd)
        for _ in range(n):
            k1q, k1v = f(q, qd)
            k2q, k2v = f(q + 0.5 * dt * k1q, qd + 0.5 * dt * k1v)
            k3q, k3v = f(q + 0.5 * dt * k2q, qd + 0.5 * dt * k2v)
            k4q, k4v = f(q + dt * k3q, qd + dt * k3v)
            q = q + dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
            qd = qd + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        assert abs(energy(q, qd) - e0) / e0 < 1e-6


class TestKinematics:
    def test_forward_kinematics_values(self):
        assert np.allclose(pt.forward_kinematics([0.0, 0.0], PARAMS), [3.0, 0.0])
        assert np.allclose(pt.forward_kinematics([np.pi / 2, 0.0], PARAMS), [0.0, 3.0],
                           atol=1e-12)

    def test_jacobian_reference(self):
        assert np.allclose(pt.jacobian([0.0, 0.0], PARAMS), [[0.0, 0.0], [3.0, 1.0]],
                           atol=1e-12)

    def test_jacobian_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        h = 1e-6
        for q in rng.uniform(-np.pi, np.pi, (100, 2)):
            j = pt.jacobian(q, PARAMS)
            for k in range(2):
                dq = np.zeros(2)
                dq[k] = h
                col = (pt.forward_kinematics(q + dq, PARAMS)
                       - pt.forward_kinematics(q - dq, PARAMS)) / (2 * h)
                assert np.allclose(j[:, k], col, atol=1e-5)
