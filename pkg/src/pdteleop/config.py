"""Scenario configuration files: flat key=value sections, diffable round-trip.

The file format is INI-style sections of scalar keys.  `load_config` turns a
file into a ScenarioConfig; `dump_config` writes one back with full float
precision, so a dumped effective config reproduces a bit-identical run.
Overrides take the form "section.key=value".
"""

import configparser
import io
from dataclasses import replace

import numpy as np

from .controller import ControllerGains
from .delays import DelayProfile
from .dynamics import RobotParams
from .errors import ConfigError
from .interaction import OperatorProfile, WallEnvironment
from .observer import ObserverParams
from .simulator import ObserverInit, ScenarioConfig

__all__ = ["load_config", "loads_config", "dump_config", "dumps_config",
           "apply_overrides", "default_config_text"]

_SECTIONS = ("robot_m", "robot_s", "controller", "observer_m", "observer_s",
             "delay_m", "delay_s", "operator", "environment", "simulation")


def default_config_text() -> str:
    from importlib.resources import files
    return files("pdteleop.configs").joinpath("default.ini").read_text()


def _floats(raw: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as numbers") from exc


def _float(sec, key) -> float:
    raw = sec.get(key)
    if raw is None:
        raise ConfigError(f"missing key {sec.name}.{key}")
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{sec.name}.{key}: cannot parse {raw!r} as a number") from exc


def _int(sec, key) -> int:
    raw = sec.get(key)
    if raw is None:
        raise ConfigError(f"missing key {sec.name}.{key}")
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{sec.name}.{key}: cannot parse {raw!r} as an integer") from exc


def loads_config(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    for name in _SECTIONS:
        if name not in parser:
            raise ConfigError(f"missing section [{name}]")

    def robot(name):
        sec = parser[name]
        return RobotParams(
            link_masses=_floats(sec.get("link_masses", ""), f"{name}.link_masses"),
            link_lengths=_floats(sec.get("link_lengths", ""), f"{name}.link_lengths"),
            gravity_accel=_float(sec, "gravity_accel"),
            lambda1=_float(sec, "lambda1"),
            lambda2=_float(sec, "lambda2"),
            c_bound=_float(sec, "c_bound"),
        )

    robot_m = robot("robot_m")
    robot_s = robot("robot_s")

    ctl = parser["controller"]
    delay_m_sec = parser["delay_m"]
    delay_s_sec = parser["delay_s"]

    def delay(sec, name):
        return DelayProfile(
            kind=sec.get("kind", "sinusoidal").strip(),
            dbar=_float(sec, "dbar"),
            freq=_float(sec, "freq") if "freq" in sec else 0.5,
            phase=_float(sec, "phase") if "phase" in sec else 0.0,
            hold=_float(sec, "hold") if "hold" in sec else 0.5,
            seed=_int(sec, "seed") if "seed" in sec else 0,
        )

    delay_m = delay(delay_m_sec, "delay_m")
    delay_s = delay(delay_s_sec, "delay_s")

    gains = ControllerGains(
        p=_float(ctl, "p"),
        k_damp=(_float(ctl, "k_damp_m"), _float(ctl, "k_damp_s")),
        alpha=(_float(ctl, "alpha_m"), _float(ctl, "alpha_s")),
        omega=(_float(ctl, "omega_m"), _float(ctl, "omega_s")),
        dbar=(delay_m.dbar, delay_s.dbar),
    )

    def observer(name, robot, side):
        sec = parser[name]
        params = ObserverParams.from_robot(
            robot, k_r=_float(sec, "k_r"), c_r=_float(sec, "c_r"),
            eps=_float(sec, "eps"), alpha=gains.alpha[side],
            k_damp=gains.k_damp[side])
        init = ObserverInit(
            x_hat0=_floats(sec.get("x_hat0", "0 0"), f"{name}.x_hat0"),
            r0=_float(sec, "r0"),
            sigma_hat0=_float(sec, "sigma_hat0") if "sigma_hat0" in sec else None,
        )
        return params, init

    observer_m, init_m = observer("observer_m", robot_m, 0)
    observer_s, init_s = observer("observer_s", robot_s, 1)

    op = parser["operator"]
    operator = OperatorProfile(
        amplitude=_float(op, "amplitude"), bias=_float(op, "bias"),
        angular_freq=_float(op, "angular_freq"), stop_time=_float(op, "stop_time"))

    env = parser["environment"]
    environment = WallEnvironment(
        stiffness=_float(env, "stiffness"), damping=_float(env, "damping"),
        wall_y=_float(env, "wall_y"))

    sim = parser["simulation"]
    config = ScenarioConfig(
        robot_m=robot_m, robot_s=robot_s, gains=gains,
        observer_m=observer_m, observer_s=observer_s,
        init_m=init_m, init_s=init_s,
        delay_m=delay_m, delay_s=delay_s,
        operator=operator, environment=environment,
        q0_m=_floats(sim.get("q0_m", "0 0"), "simulation.q0_m"),
        qd0_m=_floats(sim.get("qd0_m", "0 0"), "simulation.qd0_m"),
        q0_s=_floats(sim.get("q0_s", "0 0"), "simulation.q0_s"),
        qd0_s=_floats(sim.get("qd0_s", "0 0"), "simulation.qd0_s"),
        duration=_float(sim, "duration"), dt=_float(sim, "dt"),
        mode=sim.get("mode", "output_feedback").strip(),
        decimation=_int(sim, "decimation"),
    )
    config.validate()
    return config


def load_config(path) -> ScenarioConfig:
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads_config(text)


def apply_overrides(text: str, overrides) -> str:
    """Apply "section.key=value" strings on top of a config text."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        target, value = item.split("=", 1)
        if "." not in target:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        section, key = target.split(".", 1)
        section = section.strip()
        if section not in parser:
            raise ConfigError(f"override names unknown section [{section}]")
        parser[section][key.strip()] = value.strip()
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def _fmt(value) -> str:
    if isinstance(value, (tuple, list, np.ndarray)):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dumps_config(config: ScenarioConfig) -> str:
    """Serialize the effective configuration (full float precision)."""
    parts = []

    def section(name, pairs):
        parts.append(f"[{name}]")
        parts.extend(f"{k} = {_fmt(v)}" for k, v in pairs)
        parts.append("")

    for name, robot in (("robot_m", config.robot_m), ("robot_s", config.robot_s)):
        section(name, [
            ("link_masses", robot.link_masses),
            ("link_lengths", robot.link_lengths),
            ("gravity_accel", robot.gravity_accel),
            ("lambda1", robot.lambda1),
            ("lambda2", robot.lambda2),
            ("c_bound", robot.c_bound),
        ])
    g = config.gains
    section("controller", [
        ("p", g.p), ("k_damp_m", g.k_damp[0]), ("k_damp_s", g.k_damp[1]),
        ("alpha_m", g.alpha[0]), ("alpha_s", g.alpha[1]),
        ("omega_m", g.omega[0]), ("omega_s", g.omega[1]),
    ])
    for name, obs, init in (("observer_m", config.observer_m, config.init_m),
                            ("observer_s", config.observer_s, config.init_s)):
        section(name, [
            ("k_r", obs.k_r), ("c_r", obs.c_r), ("eps", obs.eps),
            ("r0", init.r0), ("x_hat0", init.x_hat0),
            ("sigma_hat0", init.resolved_sigma_hat0()),
        ])
    for name, d in (("delay_m", config.delay_m), ("delay_s", config.delay_s)):
        section(name, [
            ("kind", d.kind), ("dbar", d.dbar), ("freq", d.freq),
            ("phase", d.phase), ("hold", d.hold), ("seed", d.seed),
        ])
    op = config.operator
    section("operator", [
        ("amplitude", op.amplitude), ("bias", op.bias),
        ("angular_freq", op.angular_freq), ("stop_time", op.stop_time),
    ])
    env = config.environment
    section("environment", [
        ("stiffness", env.stiffness), ("damping", env.damping), ("wall_y", env.wall_y),
    ])
    section("simulation", [
        ("duration", config.duration), ("dt", config.dt),
        ("decimation", config.decimation), ("mode", config.mode),
        ("q0_m", config.q0_m), ("qd0_m", config.qd0_m),
        ("q0_s", config.q0_s), ("qd0_s", config.qd0_s),
    ])
    return "\n".join(parts)


def dump_config(config: ScenarioConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_config(config))
