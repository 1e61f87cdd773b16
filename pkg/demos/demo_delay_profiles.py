"""Bounded time-varying delay profiles and the interpolated history lookup.

All profiles stay inside [0, dbar]: a constant worst case, a smooth
sinusoid that periodically touches both bounds, and a seeded
piecewise-constant random hold with deliberate jump discontinuities (the
closed-loop analysis needs no bound on the delay rate, so the simulator
must cope with jumps).  The second panel shows the delayed signal
q(t - d(t)) produced by the history buffer for each profile.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import pdteleop as pt

out_dir = pathlib.Path(__file__).resolve().parent / "output"
out_dir.mkdir(exist_ok=True)

profiles = {
    "constant": pt.DelayProfile(kind="constant", dbar=0.2),
    "sinusoidal": pt.DelayProfile(kind="sinusoidal", dbar=0.2, freq=0.5),
    "piecewise_random": pt.DelayProfile(kind="piecewise_random", dbar=0.2,
                                        hold=0.4, seed=7),
}

ts = np.linspace(0, 6, 3001)
fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6.5), sharex=True)
for name, prof in profiles.items():
    ax1.plot(ts, [pt.delay_at(prof, t) for t in ts], label=name, lw=1.4)
ax1.axhline(0.2, color="k", ls=":", lw=0.8)
ax1.set_ylabel("delay d(t) [s]")
ax1.set_ylim(-0.01, 0.22)
ax1.legend(fontsize=9)
ax1.grid(alpha=0.3)

# feed a reference signal through the buffer, sampled at 1 kHz
dt = 1e-3
buf = pt.HistoryBuffer(horizon=0.5)
grid = np.arange(0, 6 + dt / 2, dt)
for t in grid:
    buf.push_sample(float(t) if t > 0 else 0.0, [np.sin(2.0 * t), 0.0])

ax2.plot(ts, np.sin(2.0 * ts), "k", lw=1.0, label="q(t)")
for name, prof in profiles.items():
    delayed = [buf.delayed_value(t - pt.delay_at(prof, t))[0] for t in ts]
    ax2.plot(ts, delayed, lw=1.2, label=f"q(t - d(t)), {name}")
ax2.set_xlabel("t [s]")
ax2.set_ylabel("delayed signal")
ax2.legend(fontsize=9)
ax2.grid(alpha=0.3)
fig.tight_layout()
fig.savefig(out_dir / "delay_profiles.png", dpi=130)
print(f"figure written to {out_dir / 'delay_profiles.png'}")
