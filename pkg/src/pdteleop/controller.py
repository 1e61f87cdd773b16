"""P+d control laws and the damping gain condition.

The control torque couples the local robot to the delayed remote position
and injects damping through the local velocity signal:

    tau = -p (q_local - q_remote_delayed) - k_damp * v + g(q_local)

with v either the observer estimate (output feedback) or the measured
velocity (state feedback baseline).  The damping gains must dominate the
energy produced by the delays; `verify_gain_condition` evaluates the
margins

    rho_i = dbar_i * omega_i + dbar_j * p^2 / (4 omega_j) - (1 - 1/alpha_i) k_i

for both sides and reports satisfied (rho <= 0) and strict (rho < 0).
Strictness is what yields square-integrable velocities; equality still
counts as satisfied.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "ControllerGains",
    "GainConditionReport",
    "pd_output_feedback",
    "pd_state_feedback",
    "verify_gain_condition",
]


@dataclass(frozen=True)
class ControllerGains:
    """Coupling/damping gains plus the analysis weights and delay bounds.

    Per-side values are (master, slave) pairs.  omega only enters the gain
    condition and the delay-energy diagnostic, but it is chosen at design
    time together with k_damp, so it lives here.
    """

    p: float = 100.0
    k_damp: tuple[float, float] = (20.0, 20.0)
    alpha: tuple[float, float] = (4.0, 4.0)
    omega: tuple[float, float] = (50.0, 50.0)
    dbar: tuple[float, float] = (0.2, 0.1)

    def __post_init__(self):
        object.__setattr__(self, "k_damp", tuple(float(v) for v in self.k_damp))
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "omega", tuple(float(v) for v in self.omega))
        object.__setattr__(self, "dbar", tuple(float(v) for v in self.dbar))
        if self.p <= 0 or min(self.k_damp) <= 0 or min(self.omega) <= 0:
            raise InvalidInputError("p, k_damp and omega must be positive")
        if min(self.alpha) <= 1:
            raise InvalidInputError("alpha must exceed 1 on both sides")
        if min(self.dbar) < 0:
            raise InvalidInputError("delay bounds must be nonnegative")


@dataclass(frozen=True)
class GainConditionReport:
    satisfied: bool
    strict: bool
    rho_m: float
    rho_s: float

    def __str__(self):
        verdict = "satisfied (strict)" if self.strict else (
            "satisfied with equality" if self.satisfied else "VIOLATED")
        return (f"damping margins rho_m={self.rho_m:+.6g}, rho_s={self.rho_s:+.6g} "
                f"-> {verdict}")


def _vec(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InvalidInputError(f"{name} must be a vector")
    return x


def pd_output_feedback(q_local, q_remote_delayed, x_hat_local, g_local,
                       gains: ControllerGains, side: int = 0) -> np.ndarray:
    """Control torque -p (q - q_jd) - k x_hat + g using the velocity estimate."""
    q = _vec(q_local, "q_local")
    qjd = _vec(q_remote_delayed, "q_remote_delayed")
    xh = _vec(x_hat_local, "x_hat_local")
    g = _vec(g_local, "g_local")
    return -gains.p * (q - qjd) - gains.k_damp[side] * xh + g


def pd_state_feedback(q_local, q_remote_delayed, qdot_local, g_local,
                      gains: ControllerGains, side: int = 0) -> np.ndarray:
    """State-feedback baseline: the same law with the measured velocity."""
    return pd_output_feedback(q_local, q_remote_delayed, qdot_local, g_local,
                              gains, side)


def verify_gain_condition(gains: ControllerGains) -> GainConditionReport:
    """Damping margins for both sides; satisfied iff rho_m <= 0 and rho_s <= 0."""
    rho = []
    for i, j in ((0, 1), (1, 0)):
        rho.append(gains.dbar[i] * gains.omega[i]
                   + gains.dbar[j] * gains.p ** 2 / (4.0 * gains.omega[j])
                   - (1.0 - 1.0 / gains.alpha[i]) * gains.k_damp[i])
    rho_m, rho_s = rho
    return GainConditionReport(
        satisfied=rho_m <= 0.0 and rho_s <= 0.0,
        strict=rho_m < 0.0 and rho_s < 0.0,
        rho_m=rho_m,
        rho_s=rho_s,
    )
