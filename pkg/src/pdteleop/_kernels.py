"""Numba-compiled numerical core.

Every formula that appears both in the public module API and in the batch
simulation loop lives here exactly once, as a plain float64 kernel.  The
wrappers in ``dynamics``/``observer``/... unpack their dataclasses into the
packed parameter vectors below; ``simulator.run_scenario`` drives the same
kernels from a compiled loop.

Parameter packing conventions (all float64 arrays):

    robot (7):    a1, a2, a3, g1, g2, l1, l2
                  with a1=(m1+m2)l1^2+m2l2^2, a2=m2l1l2, a3=m2l2^2,
                  g1=g0(m1+m2)l1, g2=g0*m2*l2
    observer (8): k_r, c_r, c, lam1, lam2, eps, alpha, k_damp
    control (6):  p, k_m, k_s, omega_m, omega_s, sfb flag (0/1)
    delay (5):    kind (0 constant, 1 sinusoidal, 2 piecewise_random),
                  dbar, freq, phase, hold
    operator (4): amplitude, bias, angular_freq, stop_time
    wall (3):     stiffness, damping, wall_y

State vector layout (16):
    q_m(0:2) qd_m(2:4) q_s(4:6) qd_s(6:8)
    xi_m(8:10) r_m(10) sh_m(11) xi_s(12:14) r_s(14) sh_s(15)

Status codes returned by the loop kernels:
    0 ok, 1 sigma_hat invariant breached (step too large),
    2 non-finite state, 3 history under-run.
"""

import numpy as np
from numba import njit

# Slack applied to the sigma_hat >= -eps invariant before declaring failure;
# matches the tolerance used by the trajectory invariant checks.
SH_SLACK = 1e-9

STATUS_OK = 0
STATUS_SIGMA = 1
STATUS_NONFINITE = 2
STATUS_HISTORY = 3

# Number of diagnostic slots produced per right-hand-side evaluation.
N_AUX = 14
# aux layout: tau_m1 tau_m2 tau_s1 tau_s2 F_hy F_ey d_m d_s
#             kx_m kx_s sigt_m sigt_s pow_h pow_e

# Log row layout (40 slots); the CSV writer reorders/drops as needed.
N_LOG = 40
# 0 t | 1:5 q | 5:9 qd | 9:13 xhat | 13:17 xtilde | 17 r_m 18 r_s
# 19 sh_m 20 sh_s | 21:25 tau | 25 F_hy 26 F_ey | 27 d_m 28 d_s
# 29 V1 30 V3 31 Vo | 32 kx_m 33 kx_s | 34 sigt_m 35 sigt_s
# 36 work_op 37 work_env | 38 eta_m 39 eta_s


# ---------------------------------------------------------------------------
# deterministic per-block uniforms (piecewise_random delay profile)

@njit(cache=True)
def _splitmix64(x):
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = x
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def block_uniform(seed, block):
    """Deterministic uniform in [0, 1) for integer (seed, block)."""
    h = _splitmix64(np.uint64(seed) ^ _splitmix64(np.uint64(block)))
    return float(h >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def delay_eval(dvec, seed, t):
    """Delay d(t) for a packed profile; always inside [0, dbar]."""
    kind = int(dvec[0])
    dbar = dvec[1]
    if kind == 0:
        return dbar
    if kind == 1:
        return 0.5 * dbar * (1.0 + np.sin(2.0 * np.pi * dvec[2] * t + dvec[3]))
    block = int(t / dvec[4])
    return dbar * block_uniform(seed, block)


# ---------------------------------------------------------------------------
# two-link dynamics (point masses at the link tips)

@njit(cache=True)
def mass22(q2, rv):
    c2 = np.cos(q2)
    m = np.empty((2, 2))
    m[0, 0] = rv[0] + 2.0 * rv[1] * c2
    m[0, 1] = rv[2] + rv[1] * c2
    m[1, 0] = m[0, 1]
    m[1, 1] = rv[2]
    return m


@njit(cache=True)
def coriolis22(q2, w, rv):
    """C(q, w); Christoffel factorization, linear in the velocity slot w."""
    h = rv[1] * np.sin(q2)
    c = np.empty((2, 2))
    c[0, 0] = -h * w[1]
    c[0, 1] = -h * (w[0] + w[1])
    c[1, 0] = h * w[0]
    c[1, 1] = 0.0
    return c


@njit(cache=True)
def coriolis_vec(q2, w, v, rv):
    """C(q, w) @ v without forming the matrix (hot-loop helper)."""
    h = rv[1] * np.sin(q2)
    out = np.empty(2)
    out[0] = -h * (w[1] * v[0] + (w[0] + w[1]) * v[1])
    out[1] = h * w[0] * v[0]
    return out


@njit(cache=True)
def gravity2(q, rv):
    c1 = np.cos(q[0])
    c12 = np.cos(q[0] + q[1])
    g = np.empty(2)
    g[0] = rv[3] * c1 + rv[4] * c12
    g[1] = rv[4] * c12
    return g


@njit(cache=True)
def solve22(m, b):
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    out = np.empty(2)
    out[0] = (m[1, 1] * b[0] - m[0, 1] * b[1]) / det
    out[1] = (m[0, 0] * b[1] - m[1, 0] * b[0]) / det
    return out


@njit(cache=True)
def det22(m):
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


@njit(cache=True)
def jacobian22(q, rv):
    l1 = rv[5]
    l2 = rv[6]
    s1 = np.sin(q[0])
    c1 = np.cos(q[0])
    s12 = np.sin(q[0] + q[1])
    c12 = np.cos(q[0] + q[1])
    j = np.empty((2, 2))
    j[0, 0] = -l1 * s1 - l2 * s12
    j[0, 1] = -l2 * s12
    j[1, 0] = l1 * c1 + l2 * c12
    j[1, 1] = l2 * c12
    return j


@njit(cache=True)
def ee_position2(q, rv):
    l1 = rv[5]
    l2 = rv[6]
    p = np.empty(2)
    p[0] = l1 * np.cos(q[0]) + l2 * np.cos(q[0] + q[1])
    p[1] = l1 * np.sin(q[0]) + l2 * np.sin(q[0] + q[1])
    return p


@njit(cache=True)
def accel2(q, qd, u, rv):
    """Joint accelerations M(q)^-1 [u - C(q, qd) qd - g(q)]."""
    m = mass22(q[1], rv)
    cqd = coriolis_vec(q[1], qd, qd, rv)
    return solve22(m, u - cqd - gravity2(q, rv))


# ---------------------------------------------------------------------------
# observer gains and rates

@njit(cache=True)
def kx_gain(r, sh, ov):
    k_r = ov[0]
    c = ov[2]
    return (2.0 / k_r + 0.25 * k_r * (3.0 * ov[4] + c * c * sh)
            + 0.25 * ov[6] * ov[7] * r * r) / ov[3]


@njit(cache=True)
def ksigma_gain(xhat_sq, r, sh, ov):
    k_r = ov[0]
    c2 = ov[2] * ov[2]
    kx = kx_gain(r, sh, ov)
    return (k_r / 16.0) * (c2 * c2 * r * r / (ov[3] * ov[3])
                           + 4.0 * kx * kx * xhat_sq * r * r + 2.0)


@njit(cache=True)
def projected_rate(sh, raw, eps):
    """Adaptation rate after projection; keeps sh from sinking below -eps."""
    if sh > 0.0 or raw >= 0.0:
        return raw
    c_sig = -sh / eps
    if c_sig > 1.0:
        c_sig = 1.0
    return (1.0 - c_sig) * raw


@njit(cache=True)
def observer_rates(q, xh, r, sh, f, ov):
    """State rates (xi_dot, r_dot, sh_dot) plus kx and sigma_tilde.

    Evaluation order matters: the adaptation rate feeds r_dot's companion
    kx_dot, which feeds xi_dot.
    """
    k_r = ov[0]
    c_r = ov[1]
    c2 = ov[2] * ov[2]
    lam1 = ov[3]
    sig = xh[0] * xh[0] + xh[1] * xh[1]
    sigt = sig - sh
    ksig = ksigma_gain(sig, r, sh, ov)
    sh_dot = projected_rate(sh, 2.0 * (xh[0] * f[0] + xh[1] * f[1] + ksig * sigt), ov[5])
    r_dot = -0.5 * k_r * (r - c_r) + (k_r / (4.0 * lam1)) * c2 * abs(sigt) * r
    kx_dot = (2.0 * ov[6] * ov[7] * r * r_dot + k_r * c2 * sh_dot) / (4.0 * lam1)
    kx = kx_gain(r, sh, ov)
    xi_dot = f - kx * xh - kx_dot * q
    return xi_dot, r_dot, sh_dot, kx, sigt


# ---------------------------------------------------------------------------
# external forces

@njit(cache=True)
def operator_fy(opv, t):
    if t >= opv[3]:
        return 0.0
    return opv[0] * np.sin(opv[2] * t) + opv[1]


@njit(cache=True)
def wall_fy(envv, y_ee, ydot_ee):
    if y_ee > envv[2]:
        return -envv[0] * (y_ee - envv[2]) - envv[1] * ydot_ee
    return 0.0


# ---------------------------------------------------------------------------
# coupled right-hand side with delayed positions already resolved

@njit(cache=True)
def rhs_resolved(t, y, q_md, q_sd, d_m, d_s, rvm, rvs, ovm, ovs, cv, opv, envv):
    """Time derivative of the 16-state vector, given the delayed positions.

    q_md / q_sd are the remote-side position samples q_m(t - d_m(t)) and
    q_s(t - d_s(t)).  Returns (dy, aux, status); the torque handed to each
    observer is the exact torque applied to its plant.
    """
    q_m = y[0:2]
    qd_m = y[2:4]
    q_s = y[4:6]
    qd_s = y[6:8]
    xi_m = y[8:10]
    r_m = y[10]
    sh_m = y[11]
    xi_s = y[12:14]
    r_s = y[14]
    sh_s = y[15]

    if sh_m < -ovm[5] - SH_SLACK or sh_s < -ovs[5] - SH_SLACK:
        return np.zeros(16), np.zeros(N_AUX), STATUS_SIGMA
    dy = np.empty(16)
    aux = np.empty(N_AUX)

    kx_m = kx_gain(r_m, sh_m, ovm)
    kx_s = kx_gain(r_s, sh_s, ovs)
    xh_m = xi_m + kx_m * q_m
    xh_s = xi_s + kx_s * q_s

    sfb = cv[5] != 0.0
    p = cv[0]
    g_m = gravity2(q_m, rvm)
    g_s = gravity2(q_s, rvs)
    vel_m = qd_m if sfb else xh_m
    vel_s = qd_s if sfb else xh_s
    tau_m = -p * (q_m - q_sd) - cv[1] * vel_m + g_m
    tau_s = -p * (q_s - q_md) - cv[2] * vel_s + g_s

    fh = operator_fy(opv, t)
    jm = jacobian22(q_m, rvm)
    tau_h = np.empty(2)
    tau_h[0] = jm[1, 0] * fh
    tau_h[1] = jm[1, 1] * fh

    js = jacobian22(q_s, rvs)
    y_ee = ee_position2(q_s, rvs)[1]
    ydot_ee = js[1, 0] * qd_s[0] + js[1, 1] * qd_s[1]
    fe = wall_fy(envv, y_ee, ydot_ee)
    tau_e = np.empty(2)
    tau_e[0] = js[1, 0] * fe
    tau_e[1] = js[1, 1] * fe

    u_m = tau_m + tau_h
    u_s = tau_s + tau_e

    m_m = mass22(q_m[1], rvm)
    m_s = mass22(q_s[1], rvs)
    dy[0:2] = qd_m
    dy[2:4] = solve22(m_m, u_m - coriolis_vec(q_m[1], qd_m, qd_m, rvm) - g_m)
    dy[4:6] = qd_s
    dy[6:8] = solve22(m_s, u_s - coriolis_vec(q_s[1], qd_s, qd_s, rvs) - g_s)

    f_m = solve22(m_m, u_m - coriolis_vec(q_m[1], xh_m, xh_m, rvm) - g_m)
    f_s = solve22(m_s, u_s - coriolis_vec(q_s[1], xh_s, xh_s, rvs) - g_s)
    xi_dot_m, r_dot_m, sh_dot_m, kxv_m, sigt_m = observer_rates(q_m, xh_m, r_m, sh_m, f_m, ovm)
    xi_dot_s, r_dot_s, sh_dot_s, kxv_s, sigt_s = observer_rates(q_s, xh_s, r_s, sh_s, f_s, ovs)
    dy[8:10] = xi_dot_m
    dy[10] = r_dot_m
    dy[11] = sh_dot_m
    dy[12:14] = xi_dot_s
    dy[14] = r_dot_s
    dy[15] = sh_dot_s

    aux[0] = tau_m[0]
    aux[1] = tau_m[1]
    aux[2] = tau_s[0]
    aux[3] = tau_s[1]
    aux[4] = fh
    aux[5] = fe
    aux[6] = d_m
    aux[7] = d_s
    aux[8] = kxv_m
    aux[9] = kxv_s
    aux[10] = sigt_m
    aux[11] = sigt_s
    aux[12] = qd_m[0] * tau_h[0] + qd_m[1] * tau_h[1]
    aux[13] = qd_s[0] * tau_e[0] + qd_s[1] * tau_e[1]
    return dy, aux, STATUS_OK


# ---------------------------------------------------------------------------
# uniform-grid ring history

@njit(cache=True)
def ring_lookup(tq, ring, newest_k, dt, t_live, q_live):
    """Linear interpolation over samples stored at t = k*dt, k <= newest_k.

    Queries older than the retained window return the oldest retained
    sample (pre-run history equals the initial condition); queries beyond
    t = newest_k*dt blend toward the caller's live sample at t_live.
    """
    cap = ring.shape[0]
    out = np.empty(2)
    oldest_k = newest_k - cap + 1
    if oldest_k < 0:
        oldest_k = 0
    t_new = newest_k * dt
    if tq >= t_new:
        if tq >= t_live or t_live <= t_new:
            out[0] = q_live[0]
            out[1] = q_live[1]
            return out
        w = (tq - t_new) / (t_live - t_new)
        s = newest_k % cap
        out[0] = (1.0 - w) * ring[s, 0] + w * q_live[0]
        out[1] = (1.0 - w) * ring[s, 1] + w * q_live[1]
        return out
    kf = tq / dt
    lo = int(np.floor(kf))
    if lo < oldest_k:
        s = oldest_k % cap
        out[0] = ring[s, 0]
        out[1] = ring[s, 1]
        return out
    if lo >= newest_k:
        lo = newest_k - 1
    w = kf - lo
    s0 = lo % cap
    s1 = (lo + 1) % cap
    out[0] = (1.0 - w) * ring[s0, 0] + w * ring[s1, 0]
    out[1] = (1.0 - w) * ring[s0, 1] + w * ring[s1, 1]
    return out


@njit(cache=True)
def rhs_ring(t, y, newest_k, dt, ring_qm, ring_qs,
             rvm, rvs, ovm, ovs, cv, dvm, dvs, seed_m, seed_s, opv, envv):
    """rhs_resolved with delayed positions read from the ring histories."""
    d_m = delay_eval(dvm, seed_m, t)
    d_s = delay_eval(dvs, seed_s, t)
    q_md = ring_lookup(t - d_m, ring_qm, newest_k, dt, t, y[0:2])
    q_sd = ring_lookup(t - d_s, ring_qs, newest_k, dt, t, y[4:6])
    return rhs_resolved(t, y, q_md, q_sd, d_m, d_s, rvm, rvs, ovm, ovs, cv, opv, envv)


# ---------------------------------------------------------------------------
# Lyapunov diagnostics at a log instant

@njit(cache=True)
def v3_window(t, newest_k, dt, ring_qd, qd0_sq, dbar, omega):
    """omega * integral over [t-dbar, t] of (xi-(t-dbar))*|qd(xi)|^2 dxi.

    Trapezoidal on the stored grid; the pre-run segment (xi < 0) uses the
    constant initial speed.  Exact reformulation of the nested double
    integral with the integration order swapped.
    """
    if dbar <= 0.0:
        return 0.0
    t0 = t - dbar
    total = 0.0
    if t0 < 0.0:
        # closed form for the constant pre-run segment [t0, 0)
        total += qd0_sq * 0.5 * (t0 * t0)
        j_lo = 0
    else:
        j_lo = int(np.ceil(t0 / dt - 1e-12))
    cap = ring_qd.shape[0]
    oldest_k = newest_k - cap + 1
    if oldest_k < 0:
        oldest_k = 0
    if j_lo < oldest_k:
        j_lo = oldest_k
    # boundary panel [t0, j_lo*dt] (weight vanishes at t0)
    tj = j_lo * dt
    s = j_lo % cap
    f_lo = (ring_qd[s, 0] ** 2 + ring_qd[s, 1] ** 2) * (tj - t0)
    if t0 >= 0.0 and tj > t0 + 1e-15:
        total += 0.5 * f_lo * (tj - t0)
    prev = f_lo
    for j in range(j_lo + 1, newest_k + 1):
        s = j % cap
        w = j * dt - t0
        cur = (ring_qd[s, 0] ** 2 + ring_qd[s, 1] ** 2) * w
        total += 0.5 * (prev + cur) * dt
        prev = cur
    return omega * total


@njit(cache=True)
def lyapunov_point(y, rvm, rvs, ovm, ovs, p):
    """(V1, Vo, |eta_m|, |eta_s|) from true states and observer states."""
    q_m = y[0:2]
    qd_m = y[2:4]
    q_s = y[4:6]
    qd_s = y[6:8]
    m_m = mass22(q_m[1], rvm)
    m_s = mass22(q_s[1], rvs)
    dq = q_m - q_s
    v1 = 0.5 * (qd_m @ (m_m @ qd_m) + qd_s @ (m_s @ qd_s)) \
        + 0.5 * p * (dq[0] * dq[0] + dq[1] * dq[1])

    kx_m = kx_gain(y[10], y[11], ovm)
    kx_s = kx_gain(y[14], y[15], ovs)
    xh_m = y[8:10] + kx_m * q_m
    xh_s = y[12:14] + kx_s * q_s
    eta_m = (qd_m - xh_m) / y[10]
    eta_s = (qd_s - xh_s) / y[14]
    sigt_m = xh_m @ xh_m - y[11]
    sigt_s = xh_s @ xh_s - y[15]
    vo = 0.25 * (2.0 * (eta_m @ (m_m @ eta_m)) + 2.0 * (y[10] - ovm[1]) ** 2 + sigt_m * sigt_m) \
        + 0.25 * (2.0 * (eta_s @ (m_s @ eta_s)) + 2.0 * (y[14] - ovs[1]) ** 2 + sigt_s * sigt_s)
    eta_m_n = np.sqrt(eta_m[0] ** 2 + eta_m[1] ** 2)
    eta_s_n = np.sqrt(eta_s[0] ** 2 + eta_s[1] ** 2)
    return v1, vo, eta_m_n, eta_s_n


# ---------------------------------------------------------------------------
# batch integration loop

@njit(cache=True)
def run_loop(y0, dt, n_steps, log_every, cap,
             rvm, rvs, ovm, ovs, cv, dvm, dvs, seed_m, seed_s, opv, envv,
             dbar_m, dbar_s):
    """Fixed-step RK4 over the coupled delayed system with in-loop logging.

    Returns (log, n_rows, status, fail_step, clamp_m, clamp_s,
             min_r, min_sh, max_ksigma, work_h, work_e, y_final).
    """
    n_rows = n_steps // log_every + 1
    log = np.zeros((n_rows, N_LOG))

    y = y0.copy()
    ring_qm = np.zeros((cap, 2))
    ring_qs = np.zeros((cap, 2))
    ring_qdm = np.zeros((cap, 2))
    ring_qds = np.zeros((cap, 2))
    ring_qm[0] = y[0:2]
    ring_qs[0] = y[4:6]
    ring_qdm[0] = y[2:4]
    ring_qds[0] = y[6:8]
    qd0m_sq = y[2] * y[2] + y[3] * y[3]
    qd0s_sq = y[6] * y[6] + y[7] * y[7]

    work_h = 0.0
    work_e = 0.0
    pow_h_prev = 0.0
    pow_e_prev = 0.0
    clamp_m = 0
    clamp_s = 0
    min_r = y[10] if y[10] < y[14] else y[14]
    min_sh = y[11] if y[11] < y[15] else y[15]
    max_ksig = 0.0
    row = 0
    sfb = cv[5] != 0.0

    for i in range(n_steps + 1):
        t = i * dt
        k1, aux, st = rhs_ring(t, y, i, dt, ring_qm, ring_qs,
                               rvm, rvs, ovm, ovs, cv, dvm, dvs,
                               seed_m, seed_s, opv, envv)
        if st != STATUS_OK:
            return log, row, st, i, clamp_m, clamp_s, min_r, min_sh, max_ksig, work_h, work_e, y
        if i > 0:
            work_h += 0.5 * dt * (pow_h_prev + aux[12])
            work_e += 0.5 * dt * (pow_e_prev + aux[13])
        pow_h_prev = aux[12]
        pow_e_prev = aux[13]

        if i % log_every == 0:
            # peak adaptation gain (stability diagnostic), sampled at log rate
            kx_m = kx_gain(y[10], y[11], ovm)
            kx_s = kx_gain(y[14], y[15], ovs)
            xh_m0 = y[8] + kx_m * y[0]
            xh_m1 = y[9] + kx_m * y[1]
            xh_s0 = y[12] + kx_s * y[4]
            xh_s1 = y[13] + kx_s * y[5]
            ks_m = ksigma_gain(xh_m0 * xh_m0 + xh_m1 * xh_m1, y[10], y[11], ovm)
            ks_s = ksigma_gain(xh_s0 * xh_s0 + xh_s1 * xh_s1, y[14], y[15], ovs)
            if ks_m > max_ksig:
                max_ksig = ks_m
            if ks_s > max_ksig:
                max_ksig = ks_s

            v1, vo, eta_m_n, eta_s_n = lyapunov_point(y, rvm, rvs, ovm, ovs, cv[0])
            v3 = v3_window(t, i, dt, ring_qdm, qd0m_sq, dbar_m, cv[3]) \
                + v3_window(t, i, dt, ring_qds, qd0s_sq, dbar_s, cv[4])
            log[row, 0] = t
            log[row, 1:3] = y[0:2]
            log[row, 3:5] = y[4:6]
            log[row, 5:7] = y[2:4]
            log[row, 7:9] = y[6:8]
            if sfb:
                log[row, 9:11] = y[2:4]
                log[row, 11:13] = y[6:8]
                # xtilde columns stay zero
            else:
                log[row, 9] = xh_m0
                log[row, 10] = xh_m1
                log[row, 11] = xh_s0
                log[row, 12] = xh_s1
                log[row, 13] = y[2] - xh_m0
                log[row, 14] = y[3] - xh_m1
                log[row, 15] = y[6] - xh_s0
                log[row, 16] = y[7] - xh_s1
            log[row, 17] = y[10]
            log[row, 18] = y[14]
            log[row, 19] = y[11]
            log[row, 20] = y[15]
            log[row, 21:25] = aux[0:4]
            log[row, 25] = aux[4]
            log[row, 26] = aux[5]
            log[row, 27] = aux[6]
            log[row, 28] = aux[7]
            log[row, 29] = v1
            log[row, 30] = v3
            log[row, 31] = vo
            log[row, 32] = aux[8]
            log[row, 33] = aux[9]
            log[row, 34] = aux[10]
            log[row, 35] = aux[11]
            log[row, 36] = work_h
            log[row, 37] = work_e
            log[row, 38] = eta_m_n
            log[row, 39] = eta_s_n
            row += 1

        if i == n_steps:
            break

        k2, _, s2 = rhs_ring(t + 0.5 * dt, y + 0.5 * dt * k1, i, dt, ring_qm, ring_qs,
                             rvm, rvs, ovm, ovs, cv, dvm, dvs, seed_m, seed_s, opv, envv)
        if s2 != STATUS_OK:
            return log, row, s2, i, clamp_m, clamp_s, min_r, min_sh, max_ksig, work_h, work_e, y
        k3, _, s3 = rhs_ring(t + 0.5 * dt, y + 0.5 * dt * k2, i, dt, ring_qm, ring_qs,
                             rvm, rvs, ovm, ovs, cv, dvm, dvs, seed_m, seed_s, opv, envv)
        if s3 != STATUS_OK:
            return log, row, s3, i, clamp_m, clamp_s, min_r, min_sh, max_ksig, work_h, work_e, y
        k4, _, s4 = rhs_ring(t + dt, y + dt * k3, i, dt, ring_qm, ring_qs,
                             rvm, rvs, ovm, ovs, cv, dvm, dvs, seed_m, seed_s, opv, envv)
        if s4 != STATUS_OK:
            return log, row, s4, i, clamp_m, clamp_s, min_r, min_sh, max_ksig, work_h, work_e, y
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        if y[11] < -ovm[5]:
            y[11] = -ovm[5]
            clamp_m += 1
        if y[15] < -ovs[5]:
            y[15] = -ovs[5]
            clamp_s += 1
        ok = True
        for j in range(16):
            if not np.isfinite(y[j]):
                ok = False
        if not ok:
            return log, row, STATUS_NONFINITE, i, clamp_m, clamp_s, min_r, min_sh, max_ksig, work_h, work_e, y

        if y[10] < min_r:
            min_r = y[10]
        if y[14] < min_r:
            min_r = y[14]
        if y[11] < min_sh:
            min_sh = y[11]
        if y[15] < min_sh:
            min_sh = y[15]

        s = (i + 1) % cap
        ring_qm[s] = y[0:2]
        ring_qs[s] = y[4:6]
        ring_qdm[s] = y[2:4]
        ring_qds[s] = y[6:8]

    return log, row, STATUS_OK, n_steps, clamp_m, clamp_s, min_r, min_sh, max_ksig, work_h, work_e, y
