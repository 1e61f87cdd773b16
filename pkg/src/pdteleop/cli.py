"""Command-line front end: run scenarios, verify gains, compare control modes.

    pdteleop run [--config FILE] [--set section.key=value ...] [--force]
                 [--output-dir DIR] [--stem NAME] [--mode MODE]
    pdteleop verify-gains [--config FILE] [--set ...]
    pdteleop compare [--config FILE] [--set ...] [--duration SECONDS]

`run` writes <stem>.csv, <stem>_summary.txt, <stem>_config.ini (the
effective configuration; re-running it reproduces the CSV bit for bit) and
<stem>.gp, a gnuplot script rendering the three reference figures.

Exit codes: 0 success; 2 configuration error; 3 gain condition violated;
4 divergence / invariant breach during integration.
"""

import argparse
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from .config import (apply_overrides, default_config_text, dumps_config,
                     loads_config)
from .controller import verify_gain_condition
from .errors import (ConfigError, DivergenceError, GainConditionError,
                     InvariantViolationError)
from .monitor import decay_certificate
from .simulator import (OUTPUT_FEEDBACK, STATE_FEEDBACK, RunResult,
                        run_scenario)

__all__ = ["main", "cmd_run", "cmd_verify_gains", "cmd_compare",
           "RunArtifacts", "CSV_COLUMNS", "write_csv"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GAINS = 3
EXIT_DIVERGED = 4

CSV_COLUMNS = (
    "t",
    "q_m1", "q_m2", "q_s1", "q_s2",
    "qd_m1", "qd_m2", "qd_s1", "qd_s2",
    "xhat_m1", "xhat_m2", "xhat_s1", "xhat_s2",
    "xtilde_m1", "xtilde_m2", "xtilde_s1", "xtilde_s2",
    "r_m", "r_s", "sighat_m", "sighat_s",
    "tau_m1", "tau_m2", "tau_s1", "tau_s2",
    "F_hy", "F_ey", "d_m", "d_s",
    "V1", "V3", "Vo", "decay_ratio",
    "kx_m", "kx_s", "sigtilde_m", "sigtilde_s",
    "work_op", "work_env",
)


@dataclass(frozen=True)
class RunArtifacts:
    csv_path: str
    summary: str
    plot_script_path: str
    config_path: str
    result: RunResult


def _csv_matrix(res: RunResult) -> np.ndarray:
    cols = [
        res.t,
        res.q_m[:, 0], res.q_m[:, 1], res.q_s[:, 0], res.q_s[:, 1],
        res.qd_m[:, 0], res.qd_m[:, 1], res.qd_s[:, 0], res.qd_s[:, 1],
        res.x_hat_m[:, 0], res.x_hat_m[:, 1], res.x_hat_s[:, 0], res.x_hat_s[:, 1],
        res.x_tilde_m[:, 0], res.x_tilde_m[:, 1], res.x_tilde_s[:, 0], res.x_tilde_s[:, 1],
        res.r_m, res.r_s, res.sigma_hat_m, res.sigma_hat_s,
        res.tau_m[:, 0], res.tau_m[:, 1], res.tau_s[:, 0], res.tau_s[:, 1],
        res.f_hy, res.f_ey, res.d_m, res.d_s,
        res.v1, res.v3, res.vo, res.decay_ratio,
        res.kx_m, res.kx_s, res.sigma_tilde_m, res.sigma_tilde_s,
        res.work_operator, res.work_environment,
    ]
    return np.column_stack(cols)


def write_csv(res: RunResult, path) -> None:
    np.savetxt(path, _csv_matrix(res), fmt="%.17g", delimiter=",",
               header=",".join(CSV_COLUMNS), comments="")


def _plot_script(csv_name: str, stem: str) -> str:
    return f"""# gnuplot script: three reference figures from {csv_name}
set datafile separator ","
set key autotitle columnhead
set key top left
set grid
set xlabel "t [s]"
set terminal pngcairo size 960,540

set output "{stem}_positions.png"
set ylabel "joint 1 position [rad]"
plot "{csv_name}" using 1:2 with lines lw 2 title "master q_m1", \\
     "{csv_name}" using 1:4 with lines lw 2 title "slave q_s1"

set output "{stem}_master_velocity.png"
set ylabel "master joint 1 velocity [rad/s]"
plot "{csv_name}" using 1:6 with lines lw 2 title "actual qd_m1", \\
     "{csv_name}" using 1:10 with lines lw 1 title "estimate xhat_m1", \\
     "{csv_name}" using 1:14 with lines lw 1 title "error xtilde_m1"

set output "{stem}_slave_velocity.png"
set ylabel "slave joint 1 velocity [rad/s]"
plot "{csv_name}" using 1:8 with lines lw 2 title "actual qd_s1", \\
     "{csv_name}" using 1:12 with lines lw 1 title "estimate xhat_s1", \\
     "{csv_name}" using 1:16 with lines lw 1 title "error xtilde_s1"
"""


def _summary_text(res: RunResult) -> str:
    cfg = res.config
    report = verify_gain_condition(cfg.gains)
    cert = decay_certificate(res.t, res.vo, min(cfg.observer_m.k_r, cfg.observer_s.k_r)) \
        if res.vo[0] > 0 else None
    sync = res.sync_error
    speeds = np.abs(np.column_stack([res.qd_m, res.qd_s]))
    xt = np.linalg.norm(res.x_tilde_m, axis=1)
    lines = [
        f"mode                : {cfg.mode}",
        f"duration / dt       : {cfg.duration} s / {cfg.dt} s "
        f"({cfg.n_steps()} steps, {len(res.t)} logged rows)",
        f"gain condition      : {report}",
        f"decay certificate   : {cert if cert is not None else 'skipped (Vo(0) = 0)'}",
        f"max |q_m - q_s|     : {sync.max():.6g} rad (final {sync[-1]:.3g} rad)",
        f"final max speed     : {speeds[-1].max():.3g} rad/s",
        f"max |xtilde_m|      : {xt.max():.3g} rad/s",
        f"min r / min sighat  : {res.min_r:.9g} / {res.min_sigma_hat:.9g}",
        f"sigma_hat clamps    : master {res.clamp_events_m}, slave {res.clamp_events_s}",
        f"peak k_sigma        : {res.max_ksigma:.6g} "
        f"(stability ratio 2*k_sigma*dt = {2 * res.max_ksigma * cfg.dt:.3g})",
        f"operator work       : {res.work_operator[-1]:.6g} J",
        f"environment work    : {res.work_environment[-1]:.6g} J",
        f"wall time           : {res.wall_time:.2f} s",
    ]
    return "\n".join(lines) + "\n"


def _effective_config(args) -> "ScenarioConfig":
    text = default_config_text() if args.config is None else open(args.config).read()
    overrides = list(args.set or [])
    if getattr(args, "mode", None):
        overrides.append(f"simulation.mode={args.mode}")
    if overrides:
        text = apply_overrides(text, overrides)
    return loads_config(text)


def cmd_run(args) -> int:
    config = _effective_config(args)
    result = run_scenario(config, force=args.force)
    out_dir = args.output_dir or os.environ.get("OUTPUT_DIR", ".")
    os.makedirs(out_dir, exist_ok=True)
    stem = args.stem
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    gp_path = os.path.join(out_dir, f"{stem}.gp")
    cfg_path = os.path.join(out_dir, f"{stem}_config.ini")
    summary_path = os.path.join(out_dir, f"{stem}_summary.txt")

    write_csv(result, csv_path)
    with open(gp_path, "w") as fh:
        fh.write(_plot_script(f"{stem}.csv", stem))
    with open(cfg_path, "w") as fh:
        fh.write(dumps_config(config))
    summary = _summary_text(result)
    with open(summary_path, "w") as fh:
        fh.write(summary)

    print(summary, end="")
    print(f"wrote {csv_path}, {summary_path}, {gp_path}, {cfg_path}")
    return EXIT_OK


def cmd_verify_gains(args) -> int:
    config = _effective_config(args)
    report = verify_gain_condition(config.gains)
    print(report)
    return EXIT_OK if report.satisfied else EXIT_GAINS


def cmd_compare(args) -> int:
    config = _effective_config(args)
    if args.duration is not None:
        config = replace(config, duration=args.duration)
    res_ofb = run_scenario(config.with_mode(OUTPUT_FEEDBACK), force=args.force)
    res_sfb = run_scenario(config.with_mode(STATE_FEEDBACK), force=args.force)
    diff = np.abs(np.column_stack([res_ofb.q_m - res_sfb.q_m,
                                   res_ofb.q_s - res_sfb.q_s]))
    track = np.abs(res_ofb.q_m - res_ofb.q_s)
    names = ("q_m1", "q_m2", "q_s1", "q_s2")
    print("output feedback vs state feedback (same scenario, same delays):")
    for j, name in enumerate(names):
        print(f"  {name}: max discrepancy {diff[:, j].max():.3e} rad, "
              f"RMS {np.sqrt((diff[:, j] ** 2).mean()):.3e} rad")
    print("tracking error (output feedback run):")
    for j in range(2):
        print(f"  joint {j + 1}: max |q_m - q_s| = {track[:, j].max():.3e} rad, "
              f"final {track[-1, j]:.3e} rad")
    print(f"overall max discrepancy: {diff.max():.3e} rad")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdteleop",
        description="Delayed bilateral teleoperation simulator "
                    "(P+d control, observer-based output feedback)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario file (defaults to the packaged scenario)")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override a config entry (repeatable)")

    p_run = sub.add_parser("run", help="integrate a scenario and write artifacts")
    common(p_run)
    p_run.add_argument("--force", action="store_true",
                       help="run even if the gain condition is violated")
    p_run.add_argument("--output-dir", default=None,
                       help="artifact directory (default: $OUTPUT_DIR or .)")
    p_run.add_argument("--stem", default="run", help="artifact basename")
    p_run.add_argument("--mode", choices=[OUTPUT_FEEDBACK, STATE_FEEDBACK],
                       help="shortcut for --set simulation.mode=...")
    p_run.set_defaults(func=cmd_run)

    p_ver = sub.add_parser("verify-gains", help="evaluate the damping gain condition")
    common(p_ver)
    p_ver.set_defaults(func=cmd_verify_gains)

    p_cmp = sub.add_parser("compare", help="run both control modes and report the gap")
    common(p_cmp)
    p_cmp.add_argument("--force", action="store_true")
    p_cmp.add_argument("--duration", type=float, default=None,
                       help="override the run duration in seconds")
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GainConditionError as exc:
        print(f"gain condition: {exc}", file=sys.stderr)
        return EXIT_GAINS
    except (DivergenceError, InvariantViolationError) as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
