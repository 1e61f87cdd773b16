"""Delayed bilateral teleoperation: P+d control with dynamically scaled velocity observers.

A deterministic simulation library for a two-robot teleoperator with
bounded time-varying communication delays.  Velocities are not measured:
each robot runs an n+2 state observer whose gains are inflated by a dynamic
scaling factor, and the P+d controller injects damping through the
estimates.  The monitor module numerically certifies the observer's
exponential convergence and the closed loop's energy dissipation.
"""

from .controller import (ControllerGains, GainConditionReport,
                         pd_output_feedback, pd_state_feedback,
                         verify_gain_condition)
from .delays import DelayProfile, HistoryBuffer, delay_at, delayed_value, push_sample
from .dynamics import (JointState, RobotParams, coriolis_matrix,
                       forward_dynamics, forward_kinematics, gravity_vector,
                       jacobian, mass_matrix)
from .errors import (ConfigError, DivergenceError, GainConditionError,
                     HistoryQueryError, InvalidInputError,
                     InvariantViolationError, NumericalError,
                     StaleHistoryError)
from .interaction import (OperatorProfile, WallEnvironment, environment_force,
                          operator_force, to_joint_torques)
from .monitor import (DecayCertificate, EnergyLedger, LyapunovSample,
                      compute_v1, compute_v3, compute_v3_nested, compute_vo,
                      decay_certificate)
from .observer import (ObserverOutput, ObserverParams, ObserverState, gain_kx,
                       gain_ksigma, observer_derivatives, observer_output,
                       project)
from .simulator import (OUTPUT_FEEDBACK, STATE_FEEDBACK, ObserverInit,
                        RunResult, ScenarioConfig, StepAux, SystemState,
                        rk4_step, run_scenario, system_derivative)
from .config import (apply_overrides, default_config_text, dump_config,
                     dumps_config, load_config, loads_config)

__version__ = "0.1.0"
