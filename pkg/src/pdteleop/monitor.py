"""Numerical Lyapunov diagnostics: storage functions, decay certificate, work ledger.

The monitored functional splits into

    V1 = 1/2 sum_i qd_i' M_i qd_i + (p/2) |q_m - q_s|^2
    V3 = sum_i omega_i * double integral of |qd_i|^2 over the delay window
    Vo = 1/4 sum_i { 2 eta_i' M_i eta_i + 2 (r_i - c_r)^2 + sigma_tilde_i^2 }

with eta_i = (qd_i - x_hat_i) / r_i the scaled estimation errors.  Vo uses
true velocities, so it is a simulation-only oracle.  The operator and
environment work integrals are reported raw: their unknowable passivity
offsets make the full functional non-computable, so monotonicity of
V1+V3+Vo is only a meaningful check on force-free intervals where the work
terms are frozen.

V3's nested double integral is evaluated through the exact order swap

    int_{-dbar}^0 int_{t+th}^t |qd|^2 dxi dth
        = int_{t-dbar}^t (xi - (t - dbar)) |qd(xi)|^2 dxi

by trapezoidal quadrature on the stored grid (the naive nested form is
O(window^2) per step).

The decay certificate max_t Vo(t) e^{(k_r/2) t} / Vo(0) is meaningful only
while Vo sits above the floating-point floor: Vo is quadratic in state
errors, so double precision cannot represent decays past roughly 1e-16
relative to Vo(0) (velocity errors of ~1e-8 relative).  Past that floor the
weighted ratio grows like e^{(k_r/2)t} no matter how well the observer
works.  The certificate therefore also reports the largest ratio over the
resolvable window Vo(t) >= floor * Vo(0).
"""

from dataclasses import dataclass

import numpy as np

from .dynamics import JointState, RobotParams, mass_matrix
from .errors import InvalidInputError

__all__ = [
    "LyapunovSample",
    "DecayCertificate",
    "EnergyLedger",
    "compute_v1",
    "compute_v3",
    "compute_v3_nested",
    "compute_vo",
    "decay_certificate",
    "VO_RESOLVABLE_FLOOR",
]

#: relative Vo level below which double precision can no longer certify decay
VO_RESOLVABLE_FLOOR = 1e-16


@dataclass(frozen=True)
class LyapunovSample:
    """Per-step values of the monitored functional pieces."""

    t: float
    v1: float
    v3: float
    vo: float
    work_operator: float
    work_environment: float
    decay_ratio: float
    eta_norms: tuple[float, float]


def compute_v1(master: JointState, slave: JointState, p: float,
               dyn: RobotParams) -> float:
    """Kinetic energy of both arms plus the proportional coupling energy."""
    dq = master.q - slave.q
    v1 = 0.5 * (master.qdot @ mass_matrix(master.q, dyn) @ master.qdot
                + slave.qdot @ mass_matrix(slave.q, dyn) @ slave.qdot)
    return float(v1 + 0.5 * p * (dq @ dq))


def compute_v3(times, qdots, dbar: float, omega: float, t: float | None = None,
               qd_pre=None) -> float:
    """Delay-energy term for one robot from its velocity history.

    times/qdots sample qd on [t - dbar, t]; t defaults to times[-1].
    Samples must cover the window; qd_pre supplies the constant pre-run
    velocity for windows that begin before times[0] (defaults to
    qdots[0]).  Quadrature error is O(dt^2).
    """
    times = np.asarray(times, dtype=float)
    qdots = np.asarray(qdots, dtype=float)
    if times.ndim != 1 or qdots.shape[0] != times.shape[0]:
        raise InvalidInputError("times and qdots must align")
    if t is None:
        t = float(times[-1])
    if dbar <= 0.0:
        return 0.0
    t0 = t - dbar
    if t0 < times[0] and qd_pre is None:
        if not np.isclose(times[0], 0.0):
            raise InvalidInputError("history does not cover the window")
        qd_pre = qdots[0]
    if times[-1] < t - 1e-12:
        raise InvalidInputError("history does not cover the window end")

    total = 0.0
    if t0 < times[0]:
        qd_pre = np.asarray(qd_pre, dtype=float)
        seg = times[0] - t0
        total += float(qd_pre @ qd_pre) * 0.5 * seg * seg
        lo = 0
    else:
        lo = int(np.searchsorted(times, t0, side="left"))
        if lo > 0 and times[lo] > t0:
            # fractional panel [t0, times[lo]]; the weight vanishes at t0
            w_hi = (times[lo] - t0)
            f_hi = float(qdots[lo] @ qdots[lo]) * w_hi
            total += 0.5 * f_hi * w_hi
    hi = int(np.searchsorted(times, t, side="right"))
    seg_t = times[lo:hi]
    seg_f = np.einsum("ij,ij->i", qdots[lo:hi], qdots[lo:hi]) * (seg_t - t0)
    total += float(np.trapezoid(seg_f, seg_t))
    return omega * total


def compute_v3_nested(times, qdots, dbar: float, omega: float,
                      t: float | None = None, qd_pre=None) -> float:
    """Direct nested-quadrature evaluation of the delay-energy double integral.

    O(window^2); exists as the independent cross-check of compute_v3.
    """
    times = np.asarray(times, dtype=float)
    qdots = np.asarray(qdots, dtype=float)
    if t is None:
        t = float(times[-1])
    if dbar <= 0.0:
        return 0.0
    if qd_pre is None:
        qd_pre = qdots[0]
    qd_pre = np.asarray(qd_pre, dtype=float)

    def speed_sq(x):
        if x <= times[0]:
            return float(qd_pre @ qd_pre)
        v = np.empty(qdots.shape[1])
        for k in range(qdots.shape[1]):
            v[k] = np.interp(x, times, qdots[:, k])
        return float(v @ v)

    thetas = np.linspace(-dbar, 0.0, 201)
    outer = np.empty_like(thetas)
    for i, th in enumerate(thetas):
        xs = np.linspace(t + th, t, 201)
        ys = np.array([speed_sq(x) for x in xs])
        outer[i] = np.trapezoid(ys, xs)
    return omega * float(np.trapezoid(outer, thetas))


def compute_vo(true_master: JointState, true_slave: JointState,
               x_hat_m, x_hat_s, r_m: float, r_s: float,
               sigma_tilde_m: float, sigma_tilde_s: float,
               c_r: float, dyn: RobotParams) -> float:
    """Observer functional from true velocities (simulation-only oracle)."""
    total = 0.0
    for state, xh, r, sigt in ((true_master, x_hat_m, r_m, sigma_tilde_m),
                               (true_slave, x_hat_s, r_s, sigma_tilde_s)):
        xh = np.asarray(xh, dtype=float)
        eta = (state.qdot - xh) / r
        m = mass_matrix(state.q, dyn)
        total += 0.25 * (2.0 * eta @ m @ eta + 2.0 * (r - c_r) ** 2 + sigt ** 2)
    return float(total)


@dataclass(frozen=True)
class DecayCertificate:
    """Outcome of the exponential-decay check on a Vo series."""

    max_ratio: float
    passed: bool
    max_ratio_resolvable: float
    t_floor: float
    rate: float

    def __str__(self):
        body = (f"max Vo(t)e^({self.rate:g}t)/Vo(0) = {self.max_ratio:.4g} -> "
                f"{'pass' if self.passed else 'FAIL'}")
        if np.isfinite(self.t_floor):
            body += (f"; above the fp floor (t < {self.t_floor:.2f}s) the max is "
                     f"{self.max_ratio_resolvable:.4g}")
        return body


def decay_certificate(times, vo, k_r: float, tol: float = 1.05) -> DecayCertificate:
    """Check Vo(t) <= tol * e^{-(k_r/2) t} Vo(0) over the whole series.

    Also reports the max ratio restricted to the resolvable window
    Vo(t) >= VO_RESOLVABLE_FLOOR * Vo(0), where double precision can still
    represent the decay (see module docstring).
    """
    times = np.asarray(times, dtype=float)
    vo = np.asarray(vo, dtype=float)
    if vo[0] <= 0.0:
        raise InvalidInputError("decay certificate needs Vo(0) > 0")
    rate = 0.5 * k_r
    with np.errstate(over="ignore"):
        ratio = vo * np.exp(rate * times) / vo[0]
    max_ratio = float(np.nanmax(ratio))
    above = vo >= VO_RESOLVABLE_FLOOR * vo[0]
    if above.all():
        t_floor = np.inf
        max_res = max_ratio
    else:
        first_below = int(np.argmin(above))
        t_floor = float(times[first_below])
        max_res = float(np.nanmax(ratio[:first_below])) if first_below > 0 else np.nan
    return DecayCertificate(max_ratio=max_ratio, passed=max_ratio <= tol,
                            max_ratio_resolvable=max_res, t_floor=t_floor,
                            rate=rate)


class EnergyLedger:
    """Trapezoidal accumulator of the operator and environment work integrals.

    Feed it qd' tau products step by step; totals are reported raw (no
    passivity offsets).
    """

    def __init__(self):
        self.work_operator = 0.0
        self.work_environment = 0.0
        self._t_prev = None
        self._p_h = 0.0
        self._p_e = 0.0

    def update(self, t: float, qd_m, tau_h, qd_s, tau_e) -> tuple[float, float]:
        p_h = float(np.dot(qd_m, tau_h))
        p_e = float(np.dot(qd_s, tau_e))
        if self._t_prev is not None:
            dt = t - self._t_prev
            if dt <= 0:
                raise InvalidInputError("ledger timestamps must increase")
            self.work_operator += 0.5 * dt * (self._p_h + p_h)
            self.work_environment += 0.5 * dt * (self._p_e + p_e)
        self._t_prev = t
        self._p_h = p_h
        self._p_e = p_e
        return self.work_operator, self.work_environment
