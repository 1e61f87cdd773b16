"""Damping margins versus gain choices.

The damping gains must absorb the energy produced by the delays:

    rho_i = dbar_i omega_i + dbar_j p^2 / (4 omega_j) - (1 - 1/alpha_i) k_i

has to be nonpositive on both sides.  The reference tuning (p = 100,
k = 20, alpha = 4, omega = 50, dbar = 0.2/0.1 s) sits exactly on the
boundary: rho_m = rho_s = 0.  This demo sweeps the shared damping gain and
the proportional gain and plots the margin surfaces.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import pdteleop as pt

out_dir = pathlib.Path(__file__).resolve().parent / "output"
out_dir.mkdir(exist_ok=True)

print("reference tuning:", pt.verify_gain_condition(pt.ControllerGains()))
print("more damping:    ", pt.verify_gain_condition(pt.ControllerGains(k_damp=(30, 30))))
print("less damping:    ", pt.verify_gain_condition(pt.ControllerGains(k_damp=(10, 10))))

k_grid = np.linspace(5, 45, 161)
rho_m = np.empty_like(k_grid)
rho_s = np.empty_like(k_grid)
for i, k in enumerate(k_grid):
    rep = pt.verify_gain_condition(pt.ControllerGains(k_damp=(k, k)))
    rho_m[i], rho_s[i] = rep.rho_m, rep.rho_s

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
ax1.plot(k_grid, rho_m, label=r"$\rho_m$")
ax1.plot(k_grid, rho_s, label=r"$\rho_s$", ls="--")
ax1.axhline(0, color="k", lw=0.8)
ax1.axvline(20, color="gray", ls=":", label="reference $k=20$")
ax1.set_xlabel("damping gain $k$")
ax1.set_ylabel("margin")
ax1.set_title("margins vs damping")
ax1.legend(fontsize=9)
ax1.grid(alpha=0.3)

p_grid = np.linspace(20, 180, 161)
rho_p = np.array([pt.verify_gain_condition(
    pt.ControllerGains(p=p)).rho_m for p in p_grid])
ax2.plot(p_grid, rho_p, label=r"$\rho_m$")
ax2.axhline(0, color="k", lw=0.8)
ax2.axvline(100, color="gray", ls=":", label="reference $p=100$")
ax2.set_xlabel("proportional gain $p$")
ax2.set_title("margin vs coupling stiffness")
ax2.legend(fontsize=9)
ax2.grid(alpha=0.3)
fig.tight_layout()
fig.savefig(out_dir / "gain_margins.png", dpi=130)
print(f"figure written to {out_dir / 'gain_margins.png'}")
