"""Deterministic fixed-step integration of the coupled delayed teleoperator.

Two plants, two observers and two delayed position channels form one
16-state delay differential equation, integrated with classical RK4 using
the method of steps: delayed terms are read from the interpolated position
history, and lookups that land between the newest stored sample and the
current substep blend toward the substep's own live value (delays may touch
zero).  Each observer receives exactly the torque applied to its plant --
the single evaluation is shared.

Step-size caution: the adaptation gain k_sigma grows with r^2 and with
|x_hat|^2 and enters the sigma_hat dynamics with factor 2, so explicit RK4
is only stable while 2 * k_sigma * dt stays below about 2.8.  With the
default tuning k_sigma starts near 1.26e4 (r0 = 2), which rules out
millisecond steps; the default dt of 5e-5 s keeps roughly 2x headroom.
``ScenarioConfig.validate`` warns when a configuration violates this bound,
and the run loop aborts with a diagnostic on divergence.
"""

import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as _k
from .controller import ControllerGains, verify_gain_condition
from .delays import DelayProfile, HistoryBuffer, delay_at
from .dynamics import JointState, RobotParams
from .errors import (ConfigError, DivergenceError, GainConditionError,
                     HistoryQueryError, InvariantViolationError)
from .interaction import OperatorProfile, WallEnvironment
from .observer import ObserverParams, ObserverState, gain_kx

__all__ = [
    "SystemState",
    "ObserverInit",
    "ScenarioConfig",
    "StepAux",
    "RunResult",
    "system_derivative",
    "rk4_step",
    "run_scenario",
    "OUTPUT_FEEDBACK",
    "STATE_FEEDBACK",
]

OUTPUT_FEEDBACK = "output_feedback"
STATE_FEEDBACK = "state_feedback"

# RK4 real-axis stability interval is (-2.785, 0); warn with some margin.
STABILITY_LIMIT = 2.5


@dataclass(frozen=True)
class SystemState:
    """Concatenated plant and observer states at time t (16 scalar ODE states)."""

    master: JointState
    slave: JointState
    obs_master: ObserverState
    obs_slave: ObserverState
    t: float = 0.0

    def to_vector(self) -> np.ndarray:
        y = np.empty(16)
        y[0:2] = self.master.q
        y[2:4] = self.master.qdot
        y[4:6] = self.slave.q
        y[6:8] = self.slave.qdot
        y[8:10] = self.obs_master.xi
        y[10] = self.obs_master.r
        y[11] = self.obs_master.sigma_hat
        y[12:14] = self.obs_slave.xi
        y[14] = self.obs_slave.r
        y[15] = self.obs_slave.sigma_hat
        return y

    @classmethod
    def from_vector(cls, y, t: float) -> "SystemState":
        y = np.asarray(y, dtype=float)
        return cls(
            master=JointState(q=y[0:2].copy(), qdot=y[2:4].copy()),
            slave=JointState(q=y[4:6].copy(), qdot=y[6:8].copy()),
            obs_master=ObserverState(xi=y[8:10].copy(), r=float(y[10]), sigma_hat=float(y[11])),
            obs_slave=ObserverState(xi=y[12:14].copy(), r=float(y[14]), sigma_hat=float(y[15])),
            t=t,
        )


@dataclass(frozen=True)
class ObserverInit:
    """Initial observer conditions; xi0 is recovered as x_hat0 - k_x * q0."""

    x_hat0: tuple[float, float] = (0.05, 0.02)
    r0: float = 2.0
    sigma_hat0: float | None = None

    def resolved_sigma_hat0(self) -> float:
        if self.sigma_hat0 is not None:
            return float(self.sigma_hat0)
        xh = np.asarray(self.x_hat0, dtype=float)
        return float(xh @ xh)


@dataclass(frozen=True)
class StepAux:
    """Per-evaluation diagnostics of the coupled right-hand side."""

    tau_m: np.ndarray
    tau_s: np.ndarray
    f_hy: float
    f_ey: float
    d_m: float
    d_s: float
    kx_m: float
    kx_s: float
    sigma_tilde_m: float
    sigma_tilde_s: float
    power_operator: float
    power_environment: float

    @classmethod
    def from_kernel(cls, aux: np.ndarray) -> "StepAux":
        return cls(tau_m=aux[0:2].copy(), tau_s=aux[2:4].copy(),
                   f_hy=aux[4], f_ey=aux[5], d_m=aux[6], d_s=aux[7],
                   kx_m=aux[8], kx_s=aux[9],
                   sigma_tilde_m=aux[10], sigma_tilde_s=aux[11],
                   power_operator=aux[12], power_environment=aux[13])


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one deterministic run needs.

    The shipped default file carries the reference two-robot scenario:
    identical 2-link arms, sinusoidal asymmetric delays bounded by 0.2 s
    and 0.1 s, a biased-sinusoid operator force that stops at 40 s, and a
    spring-damper wall at y = 2 m.
    """

    robot_m: RobotParams = RobotParams()
    robot_s: RobotParams = RobotParams()
    gains: ControllerGains = ControllerGains()
    observer_m: ObserverParams = ObserverParams()
    observer_s: ObserverParams = ObserverParams()
    init_m: ObserverInit = ObserverInit()
    init_s: ObserverInit = ObserverInit()
    delay_m: DelayProfile = DelayProfile(kind="sinusoidal", dbar=0.2, freq=0.5, phase=0.0)
    delay_s: DelayProfile = DelayProfile(kind="sinusoidal", dbar=0.1, freq=0.5, phase=1.0)
    operator: OperatorProfile = OperatorProfile()
    environment: WallEnvironment = WallEnvironment()
    q0_m: tuple[float, float] = (0.0, 0.0)
    qd0_m: tuple[float, float] = (0.0, 0.0)
    q0_s: tuple[float, float] = (0.0, 0.0)
    qd0_s: tuple[float, float] = (0.0, 0.0)
    duration: float = 60.0
    dt: float = 5e-5
    mode: str = OUTPUT_FEEDBACK
    decimation: int = 200

    def validate(self) -> None:
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.duration < self.dt:
            raise ConfigError("duration must be at least one step")
        if self.decimation < 1:
            raise ConfigError("decimation must be a positive integer")
        if self.mode not in (OUTPUT_FEEDBACK, STATE_FEEDBACK):
            raise ConfigError(f"unknown controller mode {self.mode!r}")
        for name, prof in (("forward", self.delay_m), ("backward", self.delay_s)):
            if prof.dbar > 0 and self.dt > prof.dbar / 10.0:
                raise ConfigError(
                    f"dt={self.dt} too coarse for the {name} delay bound "
                    f"{prof.dbar} (need dt <= dbar/10)")
        if self.gains.dbar[0] < self.delay_m.dbar or self.gains.dbar[1] < self.delay_s.dbar:
            raise ConfigError("controller delay bounds must cover the delay profiles")
        for robot, obs, side in ((self.robot_m, self.observer_m, "master"),
                                 (self.robot_s, self.observer_s, "slave")):
            if not (np.isclose(robot.lambda1, obs.lambda1)
                    and np.isclose(robot.lambda2, obs.lambda2)
                    and np.isclose(robot.c_bound, obs.c)):
                raise ConfigError(f"{side} observer certificates disagree with the robot's")
        for k, (obs, side) in enumerate(((self.observer_m, "master"), (self.observer_s, "slave"))):
            if not np.isclose(obs.k_damp, self.gains.k_damp[k]) or \
                    not np.isclose(obs.alpha, self.gains.alpha[k]):
                raise ConfigError(f"{side} observer k_damp/alpha disagree with the controller's")
        z = self.stability_indicator()
        if z > STABILITY_LIMIT:
            warnings.warn(
                f"2*k_sigma*dt = {z:.2f} exceeds the explicit-integrator "
                f"stability limit (~2.8); expect divergence. Reduce dt below "
                f"{STABILITY_LIMIT / (z / self.dt):.2e} s.",
                RuntimeWarning, stacklevel=2)

    def stability_indicator(self) -> float:
        """Max over sides of 2 * k_sigma(at t=0) * dt, the stiff-mode step ratio."""
        z = 0.0
        for obs, init in ((self.observer_m, self.init_m), (self.observer_s, self.init_s)):
            xh = np.asarray(init.x_hat0, dtype=float)
            ks = _k.ksigma_gain(float(xh @ xh), init.r0, init.resolved_sigma_hat0(),
                                obs.packed())
            z = max(z, 2.0 * ks * self.dt)
        return z

    def n_steps(self) -> int:
        return max(1, int(round(self.duration / self.dt)))

    def initial_state(self) -> SystemState:
        states = []
        for obs, init, q0 in ((self.observer_m, self.init_m, self.q0_m),
                              (self.observer_s, self.init_s, self.q0_s)):
            sh0 = init.resolved_sigma_hat0()
            kx0 = gain_kx(init.r0, sh0, obs)
            xi0 = np.asarray(init.x_hat0, dtype=float) - kx0 * np.asarray(q0, dtype=float)
            states.append(ObserverState(xi=xi0, r=init.r0, sigma_hat=sh0))
        return SystemState(
            master=JointState(q=np.asarray(self.q0_m, float), qdot=np.asarray(self.qd0_m, float)),
            slave=JointState(q=np.asarray(self.q0_s, float), qdot=np.asarray(self.qd0_s, float)),
            obs_master=states[0],
            obs_slave=states[1],
            t=0.0,
        )

    def control_vector(self) -> np.ndarray:
        return np.array([self.gains.p, self.gains.k_damp[0], self.gains.k_damp[1],
                         self.gains.omega[0], self.gains.omega[1],
                         1.0 if self.mode == STATE_FEEDBACK else 0.0])

    def with_mode(self, mode: str) -> "ScenarioConfig":
        return replace(self, mode=mode)

    def history_pair(self) -> tuple[HistoryBuffer, HistoryBuffer]:
        """Fresh position histories seeded with the initial samples at t=0."""
        horizon = max(self.delay_m.dbar, self.delay_s.dbar, self.dt) + 2 * self.dt
        h_m = HistoryBuffer(horizon)
        h_s = HistoryBuffer(horizon)
        h_m.push_sample(0.0, np.asarray(self.q0_m, float))
        h_s.push_sample(0.0, np.asarray(self.q0_s, float))
        return h_m, h_s


def system_derivative(state: SystemState, histories, config: ScenarioConfig):
    """Time derivative of the packed state vector, plus diagnostics.

    histories is the (master, slave) pair of position HistoryBuffers.  The
    buffers must cover [t - dbar, t-]; the state's own positions serve as
    the live sample for queries beyond the newest stored entry.
    """
    h_m, h_s = histories
    t = state.t
    y = state.to_vector()
    d_m = delay_at(config.delay_m, t)
    d_s = delay_at(config.delay_s, t)
    if not (0.0 <= d_m <= config.delay_m.dbar and 0.0 <= d_s <= config.delay_s.dbar):
        raise InvariantViolationError("delay left its [0, dbar] interval")
    q_md = h_m.delayed_value(t - d_m, live=(t, y[0:2]))
    q_sd = h_s.delayed_value(t - d_s, live=(t, y[4:6]))
    dy, aux, status = _k.rhs_resolved(
        t, y, q_md, q_sd, d_m, d_s,
        config.robot_m.packed(), config.robot_s.packed(),
        config.observer_m.packed(), config.observer_s.packed(),
        config.control_vector(), config.operator.packed(),
        config.environment.packed())
    if status == _k.STATUS_SIGMA:
        raise InvariantViolationError(
            "sigma_hat fell below -eps during evaluation; integrator step too large")
    return dy, StepAux.from_kernel(aux)


def rk4_step(state: SystemState, histories, config: ScenarioConfig) -> SystemState:
    """One classical RK4 step; appends the new positions to the histories.

    Substep evaluations use the history interpolant at the substep times.
    If the combined update drags sigma_hat below -eps it is clamped there
    (the continuous-time projection forbids the crossing; a clamp signals a
    step size at the edge of stability).
    """
    t = state.t
    dt = config.dt
    y = state.to_vector()

    def eval_at(tau, yv):
        st = SystemState.from_vector(yv, tau)
        dy, _ = system_derivative(st, histories, config)
        return dy

    k1 = eval_at(t, y)
    k2 = eval_at(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = eval_at(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = eval_at(t + dt, y + dt * k3)
    y_next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    for idx, eps in ((11, config.observer_m.eps), (15, config.observer_s.eps)):
        if y_next[idx] < -eps:
            y_next[idx] = -eps
    if not np.isfinite(y_next).all():
        raise DivergenceError("state became non-finite after RK4 step",
                              t=t, state=y)
    h_m, h_s = histories
    h_m.push_sample(t + dt, y_next[0:2])
    h_s.push_sample(t + dt, y_next[4:6])
    return SystemState.from_vector(y_next, t + dt)


@dataclass
class RunResult:
    """Decimated time series of one run plus whole-run diagnostics.

    Columns follow the logging layout of the CSV artifact; in
    state-feedback mode the x_hat/x_tilde series record the controller's
    velocity input (the measured velocity and a zero error) while the
    observer internals (r, sigma_hat, sigma_tilde, kx, Vo, eta) always
    describe the observers, which integrate along in both modes.
    """

    config: ScenarioConfig
    t: np.ndarray
    q_m: np.ndarray
    q_s: np.ndarray
    qd_m: np.ndarray
    qd_s: np.ndarray
    x_hat_m: np.ndarray
    x_hat_s: np.ndarray
    x_tilde_m: np.ndarray
    x_tilde_s: np.ndarray
    r_m: np.ndarray
    r_s: np.ndarray
    sigma_hat_m: np.ndarray
    sigma_hat_s: np.ndarray
    tau_m: np.ndarray
    tau_s: np.ndarray
    f_hy: np.ndarray
    f_ey: np.ndarray
    d_m: np.ndarray
    d_s: np.ndarray
    v1: np.ndarray
    v3: np.ndarray
    vo: np.ndarray
    kx_m: np.ndarray
    kx_s: np.ndarray
    sigma_tilde_m: np.ndarray
    sigma_tilde_s: np.ndarray
    work_operator: np.ndarray
    work_environment: np.ndarray
    eta_m: np.ndarray
    eta_s: np.ndarray
    decay_ratio: np.ndarray
    clamp_events_m: int
    clamp_events_s: int
    min_r: float
    min_sigma_hat: float
    max_ksigma: float
    wall_time: float
    final_state: SystemState

    @property
    def sync_error(self) -> np.ndarray:
        """Per-sample max absolute master-slave position error."""
        return np.abs(self.q_m - self.q_s).max(axis=1)

    def certificate_rate(self) -> float:
        return 0.5 * min(self.config.observer_m.k_r, self.config.observer_s.k_r)


def run_scenario(config: ScenarioConfig, force: bool = False) -> RunResult:
    """Integrate the scenario and return the decimated log.

    Refuses to start when the damping gain condition is violated unless
    `force` is set.  Raises InvariantViolationError or DivergenceError when
    the step size cannot hold the observer invariants (see the module
    docstring for the stability bound).
    """
    config.validate()
    report = verify_gain_condition(config.gains)
    if not report.satisfied and not force:
        raise GainConditionError(
            f"{report}; pass force=True (CLI: --force) to run anyway")

    n_steps = config.n_steps()
    cap = int(np.ceil(max(config.delay_m.dbar, config.delay_s.dbar) / config.dt)) + 8
    y0 = config.initial_state().to_vector()

    t0 = time.perf_counter()
    (log, n_rows, status, fail_step, clamp_m, clamp_s, min_r, min_sh,
     max_ksig, work_h, work_e, y_last) = _k.run_loop(
        y0, config.dt, n_steps, config.decimation, cap,
        config.robot_m.packed(), config.robot_s.packed(),
        config.observer_m.packed(), config.observer_s.packed(),
        config.control_vector(),
        config.delay_m.packed(), config.delay_s.packed(),
        config.delay_m.seed, config.delay_s.seed,
        config.operator.packed(), config.environment.packed(),
        config.delay_m.dbar, config.delay_s.dbar)
    wall = time.perf_counter() - t0

    if status == _k.STATUS_SIGMA:
        raise InvariantViolationError(
            f"sigma_hat fell below -eps at t={fail_step * config.dt:.6f}s "
            f"(step {fail_step}); the integrator step dt={config.dt} is too "
            "large for the observer gains (see stability_indicator)")
    if status == _k.STATUS_NONFINITE:
        raise DivergenceError(
            f"state became non-finite at t={fail_step * config.dt:.6f}s "
            f"(step {fail_step}); dt={config.dt} is too large",
            t=fail_step * config.dt, step=fail_step, state=y_last)
    if status == _k.STATUS_HISTORY:
        raise HistoryQueryError("delayed lookup fell outside the history window")

    log = log[:n_rows]
    t = log[:, 0]
    vo = log[:, 31]
    rate = 0.5 * min(config.observer_m.k_r, config.observer_s.k_r)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        decay_ratio = vo * np.exp(rate * t) / vo[0] if vo[0] > 0 else np.full_like(vo, np.nan)

    return RunResult(
        config=config,
        t=t,
        q_m=log[:, 1:3], q_s=log[:, 3:5],
        qd_m=log[:, 5:7], qd_s=log[:, 7:9],
        x_hat_m=log[:, 9:11], x_hat_s=log[:, 11:13],
        x_tilde_m=log[:, 13:15], x_tilde_s=log[:, 15:17],
        r_m=log[:, 17], r_s=log[:, 18],
        sigma_hat_m=log[:, 19], sigma_hat_s=log[:, 20],
        tau_m=log[:, 21:23], tau_s=log[:, 23:25],
        f_hy=log[:, 25], f_ey=log[:, 26],
        d_m=log[:, 27], d_s=log[:, 28],
        v1=log[:, 29], v3=log[:, 30], vo=vo,
        kx_m=log[:, 32], kx_s=log[:, 33],
        sigma_tilde_m=log[:, 34], sigma_tilde_s=log[:, 35],
        work_operator=log[:, 36], work_environment=log[:, 37],
        eta_m=log[:, 38], eta_s=log[:, 39],
        decay_ratio=decay_ratio,
        clamp_events_m=int(clamp_m), clamp_events_s=int(clamp_s),
        min_r=float(min_r), min_sigma_hat=float(min_sh),
        max_ksigma=float(max_ksig),
        wall_time=wall,
        final_state=SystemState.from_vector(y_last, n_steps * config.dt),
    )
