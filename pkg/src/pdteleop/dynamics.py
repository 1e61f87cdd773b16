"""Closed-form dynamics of a planar two-link arm with point masses at the link tips.

The model is the standard Euler-Lagrange triple (M, C, g) with the Coriolis
matrix built from Christoffel symbols, so that dM/dt - 2C is exactly skew
symmetric and C is linear in its velocity argument.  Interfaces are written
for n joints but the shipped closed form covers n = 2; the constructor
rejects other sizes.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k
from .errors import InvalidInputError, NumericalError

__all__ = [
    "RobotParams",
    "JointState",
    "mass_matrix",
    "coriolis_matrix",
    "gravity_vector",
    "forward_dynamics",
    "forward_kinematics",
    "jacobian",
]


@dataclass(frozen=True)
class RobotParams:
    """Physical constants of one arm plus its certified dynamics bounds.

    lambda1/lambda2 bound the inertia-matrix eigenvalues over all
    configurations and c_bound is the constant of the Coriolis norm
    inequality |C(q, x) y| <= c_bound |x| |y|.  They are inputs (design
    certificates), not derived quantities; `check_inertia_bounds` samples
    configurations to validate them.
    """

    link_masses: tuple[float, ...] = (1.0, 1.5)
    link_lengths: tuple[float, ...] = (2.0, 1.0)
    gravity_accel: float = 0.0
    lambda1: float = 0.3
    lambda2: float = 20.0
    c_bound: float = 5.0

    def __post_init__(self):
        masses = tuple(float(m) for m in self.link_masses)
        lengths = tuple(float(l) for l in self.link_lengths)
        object.__setattr__(self, "link_masses", masses)
        object.__setattr__(self, "link_lengths", lengths)
        if len(masses) != 2 or len(lengths) != 2:
            raise InvalidInputError("closed-form model requires exactly 2 links")
        if any(m <= 0 for m in masses) or any(l <= 0 for l in lengths):
            raise InvalidInputError("link masses and lengths must be strictly positive")
        if not (self.lambda1 > 0 and self.lambda2 > self.lambda1):
            raise InvalidInputError("need 0 < lambda1 < lambda2")
        if self.c_bound <= 0:
            raise InvalidInputError("c_bound must be positive")
        if self.gravity_accel < 0:
            raise InvalidInputError("gravity_accel must be >= 0")

    @property
    def n_joints(self) -> int:
        return len(self.link_masses)

    def packed(self) -> np.ndarray:
        """Kernel parameter vector [a1, a2, a3, g1, g2, l1, l2]."""
        m1, m2 = self.link_masses
        l1, l2 = self.link_lengths
        g0 = self.gravity_accel
        return np.array([
            (m1 + m2) * l1 ** 2 + m2 * l2 ** 2,
            m2 * l1 * l2,
            m2 * l2 ** 2,
            g0 * (m1 + m2) * l1,
            g0 * m2 * l2,
            l1,
            l2,
        ])

    def check_inertia_bounds(self, n_samples: int = 10_000, seed: int = 0,
                             slack: float = 1e-9) -> bool:
        """Sample random configurations and verify eig(M) within [lambda1, lambda2]."""
        rng = np.random.default_rng(seed)
        rv = self.packed()
        for q2 in rng.uniform(-np.pi, np.pi, n_samples):
            w = np.linalg.eigvalsh(_k.mass22(q2, rv))
            if w[0] < self.lambda1 - slack or w[-1] > self.lambda2 + slack:
                return False
        return True


@dataclass(frozen=True)
class JointState:
    """Joint positions and velocities; positions live on the real line (no wrapping)."""

    q: np.ndarray = field(default_factory=lambda: np.zeros(2))
    qdot: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        qd = np.asarray(self.qdot, dtype=float)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "qdot", qd)
        if q.shape != qd.shape or q.ndim != 1:
            raise InvalidInputError("q and qdot must be 1-D and the same length")
        if not (np.isfinite(q).all() and np.isfinite(qd).all()):
            raise InvalidInputError("joint state entries must be finite")


def _check_q(q, params: RobotParams) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (params.n_joints,):
        raise InvalidInputError(f"expected {params.n_joints} joint angles, got shape {q.shape}")
    if not np.isfinite(q).all():
        raise InvalidInputError("joint angles must be finite")
    return q


def mass_matrix(q, params: RobotParams) -> np.ndarray:
    """Symmetric positive-definite inertia matrix M(q)."""
    q = _check_q(q, params)
    return _k.mass22(q[1], params.packed())


def coriolis_matrix(q, qdot, params: RobotParams) -> np.ndarray:
    """Coriolis/centrifugal matrix C(q, qdot) from Christoffel symbols.

    Satisfies dM/dt = C + C^T along any trajectory and is linear in qdot.
    """
    q = _check_q(q, params)
    qdot = _check_q(qdot, params)
    return _k.coriolis22(q[1], qdot, params.packed())


def gravity_vector(q, params: RobotParams) -> np.ndarray:
    """Joint torques of gravity; identically zero for a horizontal plane."""
    q = _check_q(q, params)
    return _k.gravity2(q, params.packed())


def forward_dynamics(state: JointState, tau_total, params: RobotParams) -> np.ndarray:
    """Joint accelerations M^-1 (tau_total - C qdot - g).

    tau_total is the full torque applied to the plant (control plus
    external).  The 2x2 inverse is computed numerically per call.
    """
    tau_total = np.asarray(tau_total, dtype=float)
    if tau_total.shape != state.q.shape:
        raise InvalidInputError("torque vector shape mismatch")
    rv = params.packed()
    m = _k.mass22(state.q[1], rv)
    det = _k.det22(m)
    scale = max(abs(m).max(), 1.0)
    if abs(det) < 1e-12 * scale * scale:
        raise NumericalError(f"inertia matrix nearly singular (det={det:.3e})")
    return _k.accel2(state.q, state.qdot, tau_total, rv)


def forward_kinematics(q, params: RobotParams) -> np.ndarray:
    """End-effector position (x, y) of the planar chain."""
    q = _check_q(q, params)
    return _k.ee_position2(q, params.packed())


def jacobian(q, params: RobotParams) -> np.ndarray:
    """2 x n end-effector Jacobian, the derivative of forward_kinematics."""
    q = _check_q(q, params)
    return _k.jacobian22(q, params.packed())
