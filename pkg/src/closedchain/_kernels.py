"""Numeric kernels for the transmission math.

Everything here operates on packed float64 parameter arrays (see the layout
constants below) so the same code compiles under numba and runs unchanged as
pure numpy. Mechanism objects in the public modules own the packing; nothing
in this file knows about dataclasses or exceptions. Errors are reported as
integer status codes that the wrappers translate.

Scalar math is deliberately unrolled: the hot paths (the simulator loop, the
estimator, the gain transfer) sit inside these functions, and explicit
scalars beat small-array temporaries under both backends.
"""
from __future__ import annotations

import math

import numpy as np

from .backend import njit

# Numerical guards. Feasibility gets a tiny slack so boundary configurations
# survive roundoff; the near-singular band is a warning, the hard floor an
# error for derivative-based quantities.
EPS_FEAS = 1e-9
NEAR_SINGULAR_MARGIN = 1e-3
EPS_SINGULAR = 1e-8
ESTIMATE_STALL_RESIDUAL = 1e-4

KIND_PLANAR = 0.0
KIND_ANKLE = 1.0

# Packed layout, planar: [kind, crank, rod, link, base]
P_CRANK, P_ROD, P_LINK, P_BASE = 1, 2, 3, 4
PLANAR_LEN = 5

# Packed layout, ankle: [kind, e1 (3), e2 (3), side0 (17), side1 (17)]
# with each side block [frame rows (9), origin offset c = O - M in world (3),
# foot point p_B (3), crank, rod]. Frame rows map world vectors to motor
# coordinates; the third row is the motor axis.
A_E1 = 1
A_E2 = 4
A_SIDE = 7
S_RM = 0
S_C = 9
S_PB = 12
S_CRANK = 15
S_ROD = 16
SIDE_LEN = 17
ANKLE_LEN = A_SIDE + 2 * SIDE_LEN

# Per-side scalar outputs of the projected chain.
SD_QM, SD_QM1, SD_QM2, SD_R, SD_RHAT, SD_LBAR, SD_ZB, SD_MARGIN = range(8)
SD_LEN = 8

# Status codes: 0 ok; otherwise code + 10 * side of the first failing side.
ST_OK = 0
ST_INFEASIBLE = 1
ST_ROD_SHORT = 2
ST_AXIS_HIT = 3
ST_SINGULAR = 4

# Simulator scenario and fault codes.
SCEN_SERIAL_PD = 0
SCEN_TRANSFERRED = 1
SCEN_FEEDFORWARD = 2

FAULT_NONE = 0
FAULT_INFEASIBLE = 1
FAULT_SINGULAR = 2
FAULT_DIVERGED = 3
FAULT_ESTIMATOR = 4

WAVE_CONSTANT = 0
WAVE_SINE = 1
WAVE_CHIRP = 2
WAVE_STEP = 3

DIVERGENCE_BOUND = 10.0


@njit(cache=True)
def serial_dim(mech):
    return 1 if mech[0] == KIND_PLANAR else 2


@njit(cache=True)
def _fk_side(mech, side, q1, q2):
    """Coupler point and its serial derivatives in one motor frame.

    Returns (b, B_s, B_ss) with shapes (3,), (3, ns), (ns, 3, ns) where
    B_ss[j][:, i] is the derivative of B_s column i by serial coordinate j.
    """
    if mech[0] == KIND_PLANAR:
        link = mech[P_LINK]
        base = mech[P_BASE]
        c = math.cos(q1)
        s = math.sin(q1)
        b = np.empty(3)
        bs = np.zeros((3, 1))
        bss = np.zeros((1, 3, 1))
        b[0] = base + link * c
        b[1] = link * s
        b[2] = 0.0
        bs[0, 0] = -link * s
        bs[1, 0] = link * c
        bss[0, 0, 0] = -link * c
        bss[0, 1, 0] = -link * s
        return b, bs, bss

    off = A_SIDE + side * SIDE_LEN
    e1x = mech[A_E1]
    e1y = mech[A_E1 + 1]
    e1z = mech[A_E1 + 2]
    e2x = mech[A_E2]
    e2y = mech[A_E2 + 1]
    e2z = mech[A_E2 + 2]
    pbx = mech[off + S_PB]
    pby = mech[off + S_PB + 1]
    pbz = mech[off + S_PB + 2]

    c1 = math.cos(q1)
    s1 = math.sin(q1)
    c2 = math.cos(q2)
    s2 = math.sin(q2)

    # w = R(e2, q2) p_B, by Rodrigues
    d2 = e2x * pbx + e2y * pby + e2z * pbz
    k2 = (1.0 - c2) * d2
    wx = pbx * c2 + (e2y * pbz - e2z * pby) * s2 + e2x * k2
    wy = pby * c2 + (e2z * pbx - e2x * pbz) * s2 + e2y * k2
    wz = pbz * c2 + (e2x * pby - e2y * pbx) * s2 + e2z * k2

    # u = R(e1, q1) w, the coupler point relative to the joint centre
    d1 = e1x * wx + e1y * wy + e1z * wz
    k1 = (1.0 - c1) * d1
    ux = wx * c1 + (e1y * wz - e1z * wy) * s1 + e1x * k1
    uy = wy * c1 + (e1z * wx - e1x * wz) * s1 + e1y * k1
    uz = wz * c1 + (e1x * wy - e1y * wx) * s1 + e1z * k1

    # instantaneous axes: om1 = e1, om2 = R(e1, q1) e2
    g1 = e1x * e2x + e1y * e2y + e1z * e2z
    kk = (1.0 - c1) * g1
    o2x = e2x * c1 + (e1y * e2z - e1z * e2y) * s1 + e1x * kk
    o2y = e2y * c1 + (e1z * e2x - e1x * e2z) * s1 + e1y * kk
    o2z = e2z * c1 + (e1x * e2y - e1y * e2x) * s1 + e1z * kk

    # first derivatives of u: t_i = om_i x u
    t1x = e1y * uz - e1z * uy
    t1y = e1z * ux - e1x * uz
    t1z = e1x * uy - e1y * ux
    t2x = o2y * uz - o2z * uy
    t2y = o2z * ux - o2x * uz
    t2z = o2x * uy - o2y * ux

    # second derivatives in world coordinates
    d11x = e1y * t1z - e1z * t1y
    d11y = e1z * t1x - e1x * t1z
    d11z = e1x * t1y - e1y * t1x
    d12x = e1y * t2z - e1z * t2y
    d12y = e1z * t2x - e1x * t2z
    d12z = e1x * t2y - e1y * t2x
    # dom2/dq1 = e1 x om2
    px = e1y * o2z - e1z * o2y
    py = e1z * o2x - e1x * o2z
    pz = e1x * o2y - e1y * o2x
    d21x = (py * uz - pz * uy) + (o2y * t1z - o2z * t1y)
    d21y = (pz * ux - px * uz) + (o2z * t1x - o2x * t1z)
    d21z = (px * uy - py * ux) + (o2x * t1y - o2y * t1x)
    d22x = o2y * t2z - o2z * t2y
    d22y = o2z * t2x - o2x * t2z
    d22z = o2x * t2y - o2y * t2x

    # rotate into the motor frame: rows of Rm, then add the origin offset
    b = np.empty(3)
    bs = np.empty((3, 2))
    bss = np.empty((2, 3, 2))
    cx = mech[off + S_C]
    cy = mech[off + S_C + 1]
    cz = mech[off + S_C + 2]
    vx = ux + cx
    vy = uy + cy
    vz = uz + cz
    for row in range(3):
        rx = mech[off + S_RM + 3 * row]
        ry = mech[off + S_RM + 3 * row + 1]
        rz = mech[off + S_RM + 3 * row + 2]
        b[row] = rx * vx + ry * vy + rz * vz
        bs[row, 0] = rx * t1x + ry * t1y + rz * t1z
        bs[row, 1] = rx * t2x + ry * t2y + rz * t2z
        bss[0, row, 0] = rx * d11x + ry * d11y + rz * d11z
        bss[1, row, 0] = rx * d12x + ry * d12y + rz * d12z
        bss[0, row, 1] = rx * d21x + ry * d21y + rz * d21z
        bss[1, row, 1] = rx * d22x + ry * d22y + rz * d22z
    return b, bs, bss


@njit(cache=True)
def eval_chain(mech, qs, order):
    """Evaluate the geometric map and, optionally, its derivatives.

    order 0: motor angles only. order 1: adds the actuation Jacobian.
    order 2: adds the per-motor Hessians of the map.

    Always total: infeasible inputs are evaluated through the clipped
    continuous extension and reported via status, never by raising.

    Returns (q_m (nm,), J_A (nm, ns), hess (nm, ns, ns), side_data
    (nm, SD_LEN), status).
    """
    ns = serial_dim(mech)
    nm = ns
    qm = np.zeros(nm)
    ja = np.zeros((nm, ns))
    hess = np.zeros((nm, ns, ns))
    sd = np.zeros((nm, SD_LEN))
    status = ST_OK
    q2 = qs[1] if ns == 2 else 0.0

    for side in range(nm):
        if mech[0] == KIND_PLANAR:
            crank = mech[P_CRANK]
            rod = mech[P_ROD]
        else:
            off = A_SIDE + side * SIDE_LEN
            crank = mech[off + S_CRANK]
            rod = mech[off + S_ROD]

        b, bs, bss = _fk_side(mech, side, qs[0], q2)
        b0 = b[0]
        b1 = b[1]
        b2 = b[2]

        lbar2 = b0 * b0 + b1 * b1
        lbar = math.sqrt(lbar2)
        rod2 = rod * rod - b2 * b2
        side_st = ST_OK
        if lbar < 1e-12:
            side_st = ST_AXIS_HIT
            lbar = 1e-12
            lbar2 = lbar * lbar
        if rod2 <= 0.0:
            side_st = ST_ROD_SHORT
            rod2 = 0.0
        r_raw = (lbar2 + crank * crank - rod2) / (2.0 * lbar * crank)
        margin = 1.0 - abs(r_raw)
        if side_st == ST_OK and abs(r_raw) > 1.0 + EPS_FEAS:
            side_st = ST_INFEASIBLE
        r = min(1.0, max(-1.0, r_raw))
        qm2 = math.acos(r)
        rhat = math.sin(qm2)
        qm1 = math.atan2(b1, b0)

        qm[side] = qm1 + qm2
        sd[side, SD_QM] = qm1 + qm2
        sd[side, SD_QM1] = qm1
        sd[side, SD_QM2] = qm2
        sd[side, SD_R] = r
        sd[side, SD_RHAT] = rhat
        sd[side, SD_LBAR] = lbar
        sd[side, SD_ZB] = b2
        sd[side, SD_MARGIN] = margin
        if side_st != ST_OK and status == ST_OK:
            status = side_st + 10 * side
        if order < 1:
            continue

        rh = rhat if rhat > EPS_SINGULAR else EPS_SINGULAR
        if rhat <= EPS_SINGULAR and status == ST_OK:
            status = ST_SINGULAR + 10 * side

        # condensation matrix K mapping coupler motion to crank angle rate
        mu = (r * crank - lbar) / (rh * lbar2 * crank)
        nu = 1.0 / lbar2
        xi = -1.0 / (rh * lbar * crank)
        # lam = K^T b appears both in the Jacobian row (b^T K = lam^T) and
        # as the crank force direction for unit motor torque
        lam0 = mu * b0 - nu * b1
        lam1 = nu * b0 + mu * b1
        lam2 = xi * b2
        for col in range(ns):
            ja[side, col] = lam0 * bs[0, col] + lam1 * bs[1, col] + lam2 * bs[2, col]
        if order < 2:
            continue

        # partials of K in (lbar, r, rhat)
        mu_l = (lbar - 2.0 * r * crank) / (rh * lbar2 * lbar * crank)
        mu_r = 1.0 / (rh * lbar2)
        mu_rh = (lbar - r * crank) / (rh * rh * lbar2 * crank)
        nu_l = -2.0 / (lbar2 * lbar)
        xi_l = 1.0 / (rh * lbar2 * crank)
        xi_rh = 1.0 / (rh * rh * lbar * crank)

        # dK^T/dlbar . b
        al0 = mu_l * b0 - nu_l * b1
        al1 = nu_l * b0 + mu_l * b1
        al2 = xi_l * b2
        # (dr/dqm2 dK^T/dr + drhat/dqm2 dK^T/drhat) . b
        cq = -rhat * mu_r + r * mu_rh
        aq0 = cq * b0
        aq1 = cq * b1
        aq2 = r * xi_rh * b2
        # gradients of lbar and qm2 with respect to b
        dl0 = b0 / lbar
        dl1 = b1 / lbar
        dq0 = mu * b0
        dq1 = mu * b1
        dq2 = xi * b2

        # dlam/db = al (x) dl + aq (x) dq + K^T
        d00 = al0 * dl0 + aq0 * dq0 + mu
        d01 = al0 * dl1 + aq0 * dq1 - nu
        d02 = aq0 * dq2
        d10 = al1 * dl0 + aq1 * dq0 + nu
        d11 = al1 * dl1 + aq1 * dq1 + mu
        d12 = aq1 * dq2
        d20 = al2 * dl0 + aq2 * dq0
        d21 = al2 * dl1 + aq2 * dq1
        d22 = aq2 * dq2 + xi

        for i in range(ns):
            w0 = d00 * bs[0, i] + d01 * bs[1, i] + d02 * bs[2, i]
            w1 = d10 * bs[0, i] + d11 * bs[1, i] + d12 * bs[2, i]
            w2 = d20 * bs[0, i] + d21 * bs[1, i] + d22 * bs[2, i]
            for j in range(ns):
                acc = bs[0, j] * w0 + bs[1, j] * w1 + bs[2, j] * w2
                acc += (
                    bss[j, 0, i] * lam0
                    + bss[j, 1, i] * lam1
                    + bss[j, 2, i] * lam2
                )
                hess[side, i, j] = acc
    return qm, ja, hess, sd, status


@njit(cache=True)
def solve_square(a, rhs):
    """Solve a 1x1 or 2x2 system. Returns (x, ok)."""
    n = a.shape[0]
    x = np.zeros(n)
    if n == 1:
        if abs(a[0, 0]) < 1e-300:
            return x, False
        x[0] = rhs[0] / a[0, 0]
        return x, True
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if abs(det) < 1e-300:
        return x, False
    x[0] = (rhs[0] * a[1, 1] - rhs[1] * a[0, 1]) / det
    x[1] = (rhs[1] * a[0, 0] - rhs[0] * a[1, 0]) / det
    return x, True


@njit(cache=True)
def invert_square(a):
    """Invert a 1x1 or 2x2 matrix. Returns (inverse, ok)."""
    n = a.shape[0]
    out = np.zeros((n, n))
    if n == 1:
        if abs(a[0, 0]) < 1e-300:
            return out, False
        out[0, 0] = 1.0 / a[0, 0]
        return out, True
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if abs(det) < 1e-300:
        return out, False
    out[0, 0] = a[1, 1] / det
    out[0, 1] = -a[0, 1] / det
    out[1, 0] = -a[1, 0] / det
    out[1, 1] = a[0, 0] / det
    return out, True


@njit(cache=True)
def sigma_min_square(a):
    """Smallest singular value of a 1x1 or 2x2 matrix, in closed form."""
    if a.shape[0] == 1:
        return abs(a[0, 0])
    e = 0.5 * (a[0, 0] + a[1, 1])
    f = 0.5 * (a[0, 0] - a[1, 1])
    g = 0.5 * (a[1, 0] + a[0, 1])
    h = 0.5 * (a[1, 0] - a[0, 1])
    q = math.sqrt(e * e + h * h)
    rr = math.sqrt(f * f + g * g)
    return abs(q - rr)


@njit(cache=True)
def transfer_kernel(mech, qs, qsd, qm, qmd, qs_ref, kp, kd):
    """Map a diagonal serial impedance to an equivalent motor impedance.

    The motor stiffness is the negative state derivative of the composite
    desired-torque map, split into the congruence term plus the two
    configuration-dependent corrections (torque curvature and velocity map
    curvature). Returns (k_pm, k_dm, qm_ref, tau_m, a_pm, b_pm, c_pm,
    degenerate, status).
    """
    ns = qs.shape[0]
    nm = ns
    k_pm = np.zeros((nm, nm))
    k_dm = np.zeros((nm, nm))
    a_pm = np.zeros((nm, nm))
    b_pm = np.zeros((nm, nm))
    c_pm = np.zeros((nm, nm))
    qm_ref = np.zeros(nm)
    tau_m = np.zeros(nm)
    degenerate = 0

    qmv, ja, hess, sd, status = eval_chain(mech, qs, 2)
    if status != ST_OK:
        return k_pm, k_dm, qm_ref, tau_m, a_pm, b_pm, c_pm, degenerate, status
    jai, ok = invert_square(ja)
    if not ok:
        return (
            k_pm, k_dm, qm_ref, tau_m, a_pm, b_pm, c_pm, degenerate, ST_SINGULAR,
        )

    tau_s = np.empty(ns)
    for i in range(ns):
        tau_s[i] = kp[i] * (qs_ref[i] - qs[i]) - kd[i] * qsd[i]
    for i in range(nm):
        acc = 0.0
        for j in range(ns):
            acc += jai[j, i] * tau_s[j]
        tau_m[i] = acc

    # b_pm = J^-T diag(kp) J^-1, k_dm likewise with kd
    for i in range(nm):
        for j in range(nm):
            accp = 0.0
            accd = 0.0
            for k in range(ns):
                accp += jai[k, i] * kp[k] * jai[k, j]
                accd += jai[k, i] * kd[k] * jai[k, j]
            b_pm[i, j] = accp
            k_dm[i, j] = accd

    # torque curvature: H = sum_i tau_m[i] hess[i], a_pm = J^-T H J^-1
    hsum = np.zeros((ns, ns))
    for i in range(nm):
        for a in range(ns):
            for bcol in range(ns):
                hsum[a, bcol] += tau_m[i] * hess[i, a, bcol]
    tmp = np.zeros((ns, nm))
    for a in range(ns):
        for j in range(nm):
            acc = 0.0
            for bcol in range(ns):
                acc += hsum[a, bcol] * jai[bcol, j]
            tmp[a, j] = acc
    for i in range(nm):
        for j in range(nm):
            acc = 0.0
            for a in range(ns):
                acc += jai[a, i] * tmp[a, j]
            a_pm[i, j] = acc

    # velocity-map curvature: rows of G are hess[i] qs_dot,
    # c_pm = -k_dm G J^-1
    gmat = np.zeros((nm, ns))
    for i in range(nm):
        for a in range(ns):
            acc = 0.0
            for bcol in range(ns):
                acc += hess[i, a, bcol] * qsd[bcol]
            gmat[i, a] = acc
    for i in range(nm):
        for j in range(nm):
            acc = 0.0
            for a in range(nm):
                for bcol in range(ns):
                    acc += k_dm[i, a] * gmat[a, bcol] * jai[bcol, j]
            c_pm[i, j] = -acc

    for i in range(nm):
        for j in range(nm):
            k_pm[i, j] = a_pm[i, j] + b_pm[i, j] + c_pm[i, j]

    # consistent motor setpoint: k_pm (qm_ref - qm) - k_dm qmd = tau_m
    rhs = np.empty(nm)
    for i in range(nm):
        acc = tau_m[i]
        for j in range(nm):
            acc += k_dm[i, j] * qmd[j]
        rhs[i] = acc
    delta, ok = solve_square(k_pm, rhs)
    if ok:
        for i in range(nm):
            qm_ref[i] = qm[i] + delta[i]
    else:
        degenerate = 1
        for i in range(nm):
            qm_ref[i] = qm[i]
    return k_pm, k_dm, qm_ref, tau_m, a_pm, b_pm, c_pm, degenerate, status


@njit(cache=True)
def estimate_kernel(mech, target, qs0, lo, hi, tol, max_iters):
    """Damped Gauss-Newton inversion of the geometric map.

    Iterates stay clamped to the configured serial range. Levenberg damping
    starts at zero and is raised tenfold whenever a backtracking line search
    (factor 0.5, at most 8 halvings) fails to reduce the residual.

    Returns (q_s, residual, iterations, status) with status 0 converged,
    1 out of iterations, 2 stalled above the workspace residual.
    """
    ns = serial_dim(mech)
    qs = np.empty(ns)
    for i in range(ns):
        qs[i] = min(hi[i], max(lo[i], qs0[i]))

    qmv, ja, hess, sd, status = eval_chain(mech, qs, 1)
    cost = 0.0
    for i in range(ns):
        d = qmv[i] - target[i]
        cost += d * d
    lam = 0.0
    iters = 0
    stalled = False

    while iters < max_iters:
        if math.sqrt(cost) <= tol:
            break
        grad = np.zeros(ns)
        nmat = np.zeros((ns, ns))
        for i in range(ns):
            ri = qmv[i] - target[i]
            for j in range(ns):
                grad[j] += ja[i, j] * ri
                for k in range(ns):
                    nmat[j, k] += ja[i, j] * ja[i, k]
        for j in range(ns):
            nmat[j, j] += lam
            grad[j] = -grad[j]
        step, ok = solve_square(nmat, grad)
        accepted = False
        if ok:
            alpha = 1.0
            for _ in range(9):
                cand = np.empty(ns)
                moved = False
                for i in range(ns):
                    cand[i] = min(hi[i], max(lo[i], qs[i] + alpha * step[i]))
                    if cand[i] != qs[i]:
                        moved = True
                if moved:
                    qmc, jac, hc, sdc, stc = eval_chain(mech, cand, 1)
                    # candidates outside the closure set only see the
                    # clipped extension, whose Jacobian is meaningless;
                    # keep the iteration inside by rejecting them
                    base_st = stc % 10
                    feasible = base_st == ST_OK or base_st == ST_SINGULAR
                    cc = 0.0
                    for i in range(ns):
                        d = qmc[i] - target[i]
                        cc += d * d
                    if feasible and cc < cost:
                        qs = cand
                        cost = cc
                        qmv = qmc
                        ja = jac
                        accepted = True
                        break
                alpha *= 0.5
        if accepted:
            iters += 1
            lam = 0.0 if lam < 1e-9 else lam * 0.1
        else:
            lam = 1e-8 if lam == 0.0 else lam * 10.0
            if lam > 1e12:
                stalled = True
                break

    residual = math.sqrt(cost)
    if residual <= tol:
        return qs, residual, iters, 0
    if stalled and residual > ESTIMATE_STALL_RESIDUAL:
        return qs, residual, iters, 2
    return qs, residual, iters, 1


@njit(cache=True)
def grid_map_kernel(mech, grid1, grid2, motor_lo, motor_hi):
    """Feasibility/limit verdicts and transmission ratios over a grid.

    Row-major over (grid1, grid2); planar mechanisms pass a single-entry
    grid2. Verdicts: 0 feasible, 1 motor limit violated, 2 closure
    infeasible. Jacobian entries are NaN wherever the verdict is 2, inverse
    entries also NaN at singular points.
    """
    ns = serial_dim(mech)
    nm = ns
    n1 = grid1.shape[0]
    n2 = grid2.shape[0]
    n = n1 * n2
    verdict = np.zeros(n, np.int64)
    qm_out = np.full((n, nm), np.nan)
    ja_out = np.full((n, nm * ns), np.nan)
    jai_out = np.full((n, ns * nm), np.nan)
    margin_out = np.empty(n)
    qs = np.empty(ns)
    idx = 0
    for i1 in range(n1):
        for i2 in range(n2):
            qs[0] = grid1[i1]
            if ns == 2:
                qs[1] = grid2[i2]
            qmv, ja, hess, sd, status = eval_chain(mech, qs, 1)
            margin = sd[0, SD_MARGIN]
            for side in range(1, nm):
                if sd[side, SD_MARGIN] < margin:
                    margin = sd[side, SD_MARGIN]
            margin_out[idx] = margin
            base_st = status % 10
            if status != ST_OK and base_st != ST_SINGULAR:
                verdict[idx] = 2
            else:
                for i in range(nm):
                    qm_out[idx, i] = qmv[i]
                    for j in range(ns):
                        ja_out[idx, i * ns + j] = ja[i, j]
                limit = False
                for i in range(nm):
                    if qmv[i] < motor_lo[i] or qmv[i] > motor_hi[i]:
                        limit = True
                verdict[idx] = 1 if limit else 0
                if base_st != ST_SINGULAR:
                    jai, ok = invert_square(ja)
                    if ok:
                        for i in range(ns):
                            for j in range(nm):
                                jai_out[idx, i * nm + j] = jai[i, j]
            idx += 1
    return verdict, qm_out, ja_out, jai_out, margin_out


@njit(cache=True)
def _waveform(kind, t, duration, freq0, freq1, step_time):
    if kind == WAVE_SINE:
        return math.sin(2.0 * math.pi * freq0 * t)
    if kind == WAVE_CHIRP:
        return math.sin(
            2.0 * math.pi * (freq0 * t + 0.5 * (freq1 - freq0) * t * t / duration)
        )
    if kind == WAVE_STEP:
        return 1.0 if t >= step_time else 0.0
    return 0.0


@njit(cache=True)
def simulate_kernel(
    mech,
    scenario,
    inertia,
    damping,
    gravity,
    qs_init,
    qsd_init,
    wave_kind,
    wave_offset,
    wave_amp,
    wave_freq0,
    wave_freq1,
    wave_step_time,
    kp,
    kd,
    n_steps,
    dt,
    motor_every,
    gains_every,
    policy_every,
    est_lo,
    est_hi,
    est_tol,
    est_max_iters,
):
    """Multi-rate closed-loop run on a rigid-transmission plant.

    Physics advances with semi-implicit Euler at dt. Motor state is derived
    from the serial state every step (the transmission is a constraint, not
    integrated dynamics). Controller registers update only at their tick
    boundaries and hold in between.

    Trace rows hold the state at the start of each step together with the
    torques applied across that step.
    """
    ns = serial_dim(mech)
    nm = ns
    duration = n_steps * dt

    t_tr = np.zeros(n_steps)
    qs_tr = np.zeros((n_steps, ns))
    qsd_tr = np.zeros((n_steps, ns))
    qm_tr = np.zeros((n_steps, nm))
    qmd_tr = np.zeros((n_steps, nm))
    tau_s_tr = np.zeros((n_steps, ns))
    tau_m_tr = np.zeros((n_steps, nm))
    qs_ref_tr = np.zeros((n_steps, ns))
    qm_ref_tr = np.zeros((n_steps, nm))
    kpm_tr = np.zeros((n_steps, nm * nm))
    kdm_tr = np.zeros((n_steps, nm * nm))
    margin_tr = np.zeros(n_steps)

    n_ticks = (n_steps + gains_every - 1) // gains_every
    est_steps = np.full(n_ticks, -1, np.int64)
    est_iters = np.full(n_ticks, -1, np.int64)
    est_resid = np.full(n_ticks, np.nan)

    qs = qs_init.copy()
    qsd = qsd_init.copy()

    qs_ref = np.zeros(ns)
    tau_s_hold = np.zeros(ns)
    tau_m_hold = np.zeros(nm)
    tau_ff_hold = np.zeros(nm)
    kpm_hold = np.zeros((nm, nm))
    kdm_hold = np.zeros((nm, nm))
    qm_ref_hold = np.zeros(nm)
    est_qs = np.empty(ns)
    for i in range(ns):
        est_qs[i] = 0.5 * (est_lo[i] + est_hi[i])

    fault_code = FAULT_NONE
    fault_step = -1
    tick_idx = 0
    steps_done = 0

    for k in range(n_steps):
        t = k * dt

        if k % policy_every == 0:
            w = _waveform(wave_kind, t, duration, wave_freq0, wave_freq1, wave_step_time)
            for i in range(ns):
                qs_ref[i] = wave_offset[i] + wave_amp[i] * w

        qmv, ja, hess, sd, status = eval_chain(mech, qs, 1)
        if status != ST_OK:
            base_st = status % 10
            fault_code = (
                FAULT_SINGULAR if base_st == ST_SINGULAR else FAULT_INFEASIBLE
            )
            fault_step = k
            break
        qmd = np.zeros(nm)
        for i in range(nm):
            for j in range(ns):
                qmd[i] += ja[i, j] * qsd[j]
        margin = sd[0, SD_MARGIN]
        for side in range(1, nm):
            if sd[side, SD_MARGIN] < margin:
                margin = sd[side, SD_MARGIN]

        if scenario != SCEN_SERIAL_PD and k % gains_every == 0:
            est_new, resid, iters, est_st = estimate_kernel(
                mech, qmv, est_qs, est_lo, est_hi, est_tol, est_max_iters
            )
            est_qs = est_new
            est_steps[tick_idx] = k
            est_iters[tick_idx] = iters
            est_resid[tick_idx] = resid
            tick_idx += 1
            if est_st != 0:
                fault_code = FAULT_ESTIMATOR
                fault_step = k
                break
            qm_hat, ja_hat, hess_hat, sd_hat, st_hat = eval_chain(mech, est_qs, 1)
            if st_hat != ST_OK:
                fault_code = FAULT_SINGULAR
                fault_step = k
                break
            qsd_hat, ok = solve_square(ja_hat, qmd)
            if not ok:
                fault_code = FAULT_SINGULAR
                fault_step = k
                break
            if scenario == SCEN_TRANSFERRED:
                k_pm, k_dm, qm_ref, tau_m_star, a_pm, b_pm, c_pm, degen, tst = (
                    transfer_kernel(
                        mech, est_qs, qsd_hat, qmv, qmd, qs_ref, kp, kd
                    )
                )
                if tst != ST_OK:
                    fault_code = FAULT_SINGULAR
                    fault_step = k
                    break
                if degen == 1:
                    for i in range(nm):
                        tau_ff_hold[i] = tau_m_star[i]
                        qm_ref_hold[i] = qmv[i]
                        for j in range(nm):
                            kpm_hold[i, j] = 0.0
                            kdm_hold[i, j] = 0.0
                else:
                    for i in range(nm):
                        tau_ff_hold[i] = 0.0
                        qm_ref_hold[i] = qm_ref[i]
                        for j in range(nm):
                            kpm_hold[i, j] = k_pm[i, j]
                            kdm_hold[i, j] = k_dm[i, j]
            else:
                tau_s_star = np.empty(ns)
                for i in range(ns):
                    tau_s_star[i] = (
                        kp[i] * (qs_ref[i] - est_qs[i]) - kd[i] * qsd_hat[i]
                    )
                jat = np.empty((ns, nm))
                for i in range(ns):
                    for j in range(nm):
                        jat[i, j] = ja_hat[j, i]
                tau_m_star, ok = solve_square(jat, tau_s_star)
                if not ok:
                    fault_code = FAULT_SINGULAR
                    fault_step = k
                    break
                for i in range(nm):
                    tau_m_hold[i] = tau_m_star[i]

        if k % motor_every == 0:
            if scenario == SCEN_SERIAL_PD:
                for i in range(ns):
                    tau_s_hold[i] = kp[i] * (qs_ref[i] - qs[i]) - kd[i] * qsd[i]
            elif scenario == SCEN_TRANSFERRED:
                for i in range(nm):
                    acc = tau_ff_hold[i]
                    for j in range(nm):
                        acc += kpm_hold[i, j] * (qm_ref_hold[j] - qmv[j])
                        acc -= kdm_hold[i, j] * qmd[j]
                    tau_m_hold[i] = acc

        tau_s = np.empty(ns)
        tau_m = np.empty(nm)
        if scenario == SCEN_SERIAL_PD:
            for i in range(ns):
                tau_s[i] = tau_s_hold[i]
            jat = np.empty((ns, nm))
            for i in range(ns):
                for j in range(nm):
                    jat[i, j] = ja[j, i]
            tm, ok = solve_square(jat, tau_s)
            if not ok:
                fault_code = FAULT_SINGULAR
                fault_step = k
                break
            for i in range(nm):
                tau_m[i] = tm[i]
        else:
            for i in range(nm):
                tau_m[i] = tau_m_hold[i]
            for i in range(ns):
                acc = 0.0
                for j in range(nm):
                    acc += ja[j, i] * tau_m[j]
                tau_s[i] = acc

        t_tr[k] = t
        for i in range(ns):
            qs_tr[k, i] = qs[i]
            qsd_tr[k, i] = qsd[i]
            tau_s_tr[k, i] = tau_s[i]
            qs_ref_tr[k, i] = qs_ref[i]
        for i in range(nm):
            qm_tr[k, i] = qmv[i]
            qmd_tr[k, i] = qmd[i]
            tau_m_tr[k, i] = tau_m[i]
            qm_ref_tr[k, i] = qm_ref_hold[i]
            for j in range(nm):
                kpm_tr[k, i * nm + j] = kpm_hold[i, j]
                kdm_tr[k, i * nm + j] = kdm_hold[i, j]
        margin_tr[k] = margin
        steps_done = k + 1

        # semi-implicit Euler on the serial plant
        diverged = False
        for i in range(ns):
            acc = (tau_s[i] - gravity[i] * math.sin(qs[i]) - damping[i] * qsd[i]) / inertia[i]
            qsd[i] = qsd[i] + dt * acc
            qs[i] = qs[i] + dt * qsd[i]
            if abs(qs[i]) > DIVERGENCE_BOUND:
                diverged = True
        if diverged:
            fault_code = FAULT_DIVERGED
            fault_step = k
            break

    return (
        t_tr,
        qs_tr,
        qsd_tr,
        qm_tr,
        qmd_tr,
        tau_s_tr,
        tau_m_tr,
        qs_ref_tr,
        qm_ref_tr,
        kpm_tr,
        kdm_tr,
        margin_tr,
        est_steps,
        est_iters,
        est_resid,
        qs,
        qsd,
        fault_code,
        fault_step,
        steps_done,
    )
