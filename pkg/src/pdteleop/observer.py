"""Dynamically scaled velocity observer with projection-protected adaptation.

Each robot runs an n+2 state observer (xi, r, sigma_hat).  The velocity
estimate is read out as

    x_hat = xi + k_x(r, sigma_hat) * q

and the states evolve as

    xi_dot        = f - k_x x_hat - k_x_dot * q
    r_dot         = -(k_r/2)(r - c_r) + (k_r c^2 / (4 lam1)) |sigma_tilde| r
    sigma_hat_dot = Proj( 2 [x_hat . f + k_sigma * sigma_tilde] )

with f = M(q)^-1 [-C(q, x_hat) x_hat - g(q) + u], sigma = |x_hat|^2 and
sigma_tilde = sigma - sigma_hat.  Everything on the right-hand side is
measurable online: positions, the applied torque, and the observer's own
states.  The scaling factor r inflates the estimation gain k_x to dominate
the Coriolis nonlinearity; [c_r, inf) is an invariant set for it.  The
projection keeps sigma_hat from sinking below -eps.

The gains grow quadratically with r, which makes the adaptation channel
stiff: explicit integrators need roughly 2 * k_sigma * dt < 2.8 to remain
stable (see simulator docs for the step-size check).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .dynamics import RobotParams, forward_dynamics, JointState
from .errors import InvalidInputError, InvariantViolationError

__all__ = [
    "ObserverParams",
    "ObserverState",
    "ObserverOutput",
    "gain_kx",
    "gain_ksigma",
    "project",
    "observer_output",
    "observer_derivatives",
]

#: slack on the sigma_hat >= -eps check, matching the trajectory invariant
SIGMA_SLACK = _k.SH_SLACK


@dataclass(frozen=True)
class ObserverParams:
    """Scalar tuning constants of one observer.

    c, lambda1 and lambda2 are the dynamics certificates of the matching
    RobotParams; alpha and k_damp are shared with the P+d controller
    because they appear inside the estimation gain k_x.
    """

    k_r: float = 5.0
    c_r: float = 1.0
    c: float = 5.0
    lambda1: float = 0.3
    lambda2: float = 20.0
    eps: float = 0.1
    alpha: float = 4.0
    k_damp: float = 20.0

    def __post_init__(self):
        if self.k_r <= 0 or self.c_r <= 0 or self.k_damp <= 0 or self.lambda1 <= 0:
            raise InvalidInputError("k_r, c_r, k_damp and lambda1 must be positive")
        if not 0 < self.eps < 1:
            raise InvalidInputError("eps must lie in (0, 1)")
        if self.alpha <= 1:
            raise InvalidInputError("alpha must exceed 1")

    def packed(self) -> np.ndarray:
        return np.array([self.k_r, self.c_r, self.c, self.lambda1,
                         self.lambda2, self.eps, self.alpha, self.k_damp])

    @classmethod
    def from_robot(cls, robot: RobotParams, k_r, c_r, eps, alpha, k_damp):
        return cls(k_r=k_r, c_r=c_r, c=robot.c_bound, lambda1=robot.lambda1,
                   lambda2=robot.lambda2, eps=eps, alpha=alpha, k_damp=k_damp)


@dataclass(frozen=True)
class ObserverState:
    """Observer states: estimate seed xi, scaling factor r, adaptation sigma_hat."""

    xi: np.ndarray
    r: float
    sigma_hat: float

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        object.__setattr__(self, "xi", xi)
        if not np.isfinite(xi).all() or not np.isfinite([self.r, self.sigma_hat]).all():
            raise InvalidInputError("observer state entries must be finite")


@dataclass(frozen=True)
class ObserverOutput:
    x_hat: np.ndarray
    sigma: float
    sigma_tilde: float


def gain_kx(r: float, sigma_hat: float, params: ObserverParams) -> float:
    """Estimation gain; strictly increasing in r^2 and in sigma_hat."""
    return float(_k.kx_gain(r, sigma_hat, params.packed()))


def gain_ksigma(x_hat, r: float, sigma_hat: float, params: ObserverParams) -> float:
    """Adaptation gain; at least k_r / 8 for any inputs."""
    x_hat = np.asarray(x_hat, dtype=float)
    return float(_k.ksigma_gain(float(x_hat @ x_hat), r, sigma_hat, params.packed()))


def project(sigma_hat: float, tau_raw: float, eps: float) -> float:
    """Projection of the raw adaptation rate.

    Passes tau_raw through unless sigma_hat is in the buffer zone
    [-eps, 0] with a negative rate, where it is scaled by
    (1 - min(1, -sigma_hat/eps)); as a consequence sigma_hat can never
    cross below -eps in continuous time.
    """
    if sigma_hat < -eps - SIGMA_SLACK:
        raise InvariantViolationError(
            f"sigma_hat={sigma_hat} below -eps={-eps}; integrator step too large")
    return float(_k.projected_rate(sigma_hat, tau_raw, eps))


def observer_output(state: ObserverState, y, params: ObserverParams) -> ObserverOutput:
    """Velocity estimate x_hat = xi + k_x(r, sigma_hat) y and its norm bookkeeping."""
    y = np.asarray(y, dtype=float)
    x_hat = state.xi + gain_kx(state.r, state.sigma_hat, params) * y
    sigma = float(x_hat @ x_hat)
    return ObserverOutput(x_hat=x_hat, sigma=sigma, sigma_tilde=sigma - state.sigma_hat)


def observer_derivatives(state: ObserverState, y, u, params: ObserverParams,
                         dyn: RobotParams):
    """State rates (xi_dot, r_dot, sigma_hat_dot).

    u must be the exact total torque applied to the matching plant.  The
    adaptation rate is evaluated first (through the projection), then
    r_dot, then the gain rate k_x_dot that both feed, and finally xi_dot.
    """
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    if state.sigma_hat < -params.eps - SIGMA_SLACK:
        raise InvariantViolationError(
            f"sigma_hat={state.sigma_hat} below -eps={-params.eps}; "
            "integrator step too large")
    out = observer_output(state, y, params)
    f = forward_dynamics(JointState(q=y, qdot=out.x_hat), u, dyn)
    xi_dot, r_dot, sh_dot, _, _ = _k.observer_rates(
        y, out.x_hat, state.r, state.sigma_hat, f, params.packed())
    return xi_dot, float(r_dot), float(sh_dot)
