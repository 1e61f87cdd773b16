"""Run the reference teleoperation scenario and reproduce the three figures.

The operator pushes the master arm along +y with a slow biased sinusoid
(peak 5 N at t = 10 s, off at t = 40 s); the slave tracks it across
asymmetric time-varying delays and presses into a spring-damper wall at
y = 2 m.  Both robots are controlled with P+d using observer velocity
estimates only.

Writes three PNGs next to this script:
  positions:        master/slave joint-1 trajectories (wall episode visible)
  master_velocity:  actual vs estimated joint-1 velocity and their error
  slave_velocity:   same for the slave
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import pdteleop as pt
from pdteleop.config import default_config_text, loads_config

out_dir = pathlib.Path(__file__).resolve().parent / "output"
out_dir.mkdir(exist_ok=True)

config = loads_config(default_config_text())
print(f"integrating {config.duration:.0f} s at dt = {config.dt:g} s ...")
res = pt.run_scenario(config)
print(f"done in {res.wall_time:.1f} s wall time")

report = pt.verify_gain_condition(config.gains)
print(report)
print(f"final sync error {res.sync_error[-1]:.2e} rad")

fig, ax = plt.subplots(figsize=(8, 4.5))
ax.plot(res.t, res.q_m[:, 0], label="master $q_{m1}$", lw=1.8)
ax.plot(res.t, res.q_s[:, 0], label="slave $q_{s1}$", lw=1.8)
ax.axhline(0.65, color="gray", ls=":", lw=1, label="contact region boundary")
ax.axvspan(res.t[res.f_ey != 0].min(), res.t[res.f_ey != 0].max(),
           alpha=0.12, color="tab:red", label="wall contact")
ax.set_xlabel("t [s]")
ax.set_ylabel("joint 1 position [rad]")
ax.legend(loc="upper right", fontsize=9)
ax.grid(alpha=0.3)
fig.tight_layout()
fig.savefig(out_dir / "positions.png", dpi=130)

for side, q_dot, x_hat, x_tilde in (
        ("master", res.qd_m, res.x_hat_m, res.x_tilde_m),
        ("slave", res.qd_s, res.x_hat_s, res.x_tilde_s)):
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(res.t, q_dot[:, 0], label="actual", lw=1.8)
    ax.plot(res.t, x_hat[:, 0], label="estimate", lw=1.0, ls="--")
    ax.plot(res.t, x_tilde[:, 0], label="error", lw=1.0)
    ax.set_xlabel("t [s]")
    ax.set_ylabel(f"{side} joint 1 velocity [rad/s]")
    ax.legend(fontsize=9)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_dir / f"{side}_velocity.png", dpi=130)

print(f"figures written to {out_dir}")
