"""Hot numerical kernels, compiled with numba unless the fallback is forced.

Every function here is written in scalar numpy/math style that runs unchanged
under both backends (see :mod:`nilsphere.backend`).  Trajectory kernels
evaluate rotations from the accumulated phase omega * j * dt rather than by
composing per-step rotation matrices, so closed-form invariants carry no
coherent roundoff drift over millions of steps.

Status codes returned by the implicit-midpoint kernels:
0 = completed, 1 = pole proximity (step rejected), 2 = Newton divergence.
"""

import math

import numpy as np

from .backend import jit

TWO_PI = 2.0 * math.pi

STATUS_OK = 0
STATUS_POLE = 1
STATUS_NEWTON = 2

# profile codes mirrored from nilsphere.hamiltonians
_P_SUB = 0
_P_USIN = 1
_P_USIN3 = 2


@jit
def v_profile(code, r):
    sr = math.sin(r)
    if code == _P_SUB:
        w2 = (TWO_PI * sr) ** 2
        return w2 / (1.0 + w2)
    if code == _P_USIN:
        return (TWO_PI * sr) ** 2
    u = TWO_PI * sr + sr**3
    return u * u


@jit
def dv_profile(code, r):
    sr = math.sin(r)
    cr = math.cos(r)
    if code == _P_SUB:
        w = TWO_PI * sr
        dw = TWO_PI * cr
        return 2.0 * w * dw / (1.0 + w * w) ** 2
    if code == _P_USIN:
        return 2.0 * (TWO_PI * sr) * (TWO_PI * cr)
    u = TWO_PI * sr + sr**3
    du = TWO_PI * cr + 3.0 * sr * sr * cr
    return 2.0 * u * du


@jit
def d2v_profile(code, r):
    sr = math.sin(r)
    cr = math.cos(r)
    if code == _P_SUB:
        w = TWO_PI * sr
        dw = TWO_PI * cr
        d2w = -TWO_PI * sr
        q = 1.0 + w * w
        return 2.0 * ((dw * dw + w * d2w) / q**2 - 4.0 * w * w * dw * dw / q**3)
    if code == _P_USIN:
        u = TWO_PI * sr
        du = TWO_PI * cr
        return 2.0 * (du * du - u * u)
    u = TWO_PI * sr + sr**3
    du = TWO_PI * cr + 3.0 * sr * sr * cr
    d2u = -TWO_PI * sr + 6.0 * sr * cr * cr - 3.0 * sr**3
    return 2.0 * (du * du + u * d2u)


# ---------------------------------------------------------------------------
# closed-form factor trajectories


@jit
def nil_closed_traj(u0, k, dt, stride, n_samples):
    """Closed-form nil geodesic sampler.

    (a, b) rotate exactly at rate k*c; x, y advance by the exact reconstruction
    integrals; z by the midpoint quadrature of its reconstruction equation.
    Samples every ``stride`` steps, including the initial state.
    """
    out = np.empty((n_samples, 6))
    x = u0[0]
    y = u0[1]
    z = u0[2]
    px = u0[3]
    py = u0[4]
    pz = u0[5]
    a0 = px - 0.5 * k * y * pz
    b0 = py + 0.5 * k * x * pz
    c = pz
    om = k * c
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = z
    out[0, 3] = px
    out[0, 4] = py
    out[0, 5] = pz

    sdt = math.sin(om * dt)
    cdtm1 = -2.0 * math.sin(0.5 * om * dt) ** 2
    sh = math.sin(0.5 * om * dt)
    ch = math.cos(0.5 * om * dt)
    chm1 = -2.0 * math.sin(0.25 * om * dt) ** 2

    isample = 1
    n_steps = (n_samples - 1) * stride
    for j in range(n_steps):
        th = om * (j * dt)
        cj = math.cos(th)
        sj = math.sin(th)
        aj = a0 * cj - b0 * sj
        bj = a0 * sj + b0 * cj
        am = aj * ch - bj * sh
        bm = aj * sh + bj * ch
        if om != 0.0:
            dx = (aj * sdt + bj * cdtm1) / om
            dy = (bj * sdt - aj * cdtm1) / om
            dxh = (aj * sh + bj * chm1) / om
            dyh = (bj * sh - aj * chm1) / om
        else:
            dx = aj * dt
            dy = bj * dt
            dxh = 0.5 * aj * dt
            dyh = 0.5 * bj * dt
        xm = x + dxh
        ym = y + dyh
        z += dt * (c + 0.5 * k * (bm * xm - am * ym))
        x += dx
        y += dy
        if (j + 1) % stride == 0:
            th1 = om * ((j + 1) * dt)
            c1 = math.cos(th1)
            s1 = math.sin(th1)
            a1 = a0 * c1 - b0 * s1
            b1 = a0 * s1 + b0 * c1
            out[isample, 0] = x
            out[isample, 1] = y
            out[isample, 2] = z
            out[isample, 3] = a1 + 0.5 * k * y * c
            out[isample, 4] = b1 - 0.5 * k * x * c
            out[isample, 5] = c
            isample += 1
    return out


@jit
def sphere_exact_traj(u0, dt, stride, n_samples):
    """Exact great-circle sampler for the embedded sphere state (xi, p)."""
    out = np.empty((n_samples, 6))
    xi1 = u0[0]
    xi2 = u0[1]
    xi3 = u0[2]
    p1 = u0[3]
    p2 = u0[4]
    p3 = u0[5]
    om = math.sqrt(p1 * p1 + p2 * p2 + p3 * p3)
    for m in range(6):
        out[0, m] = u0[m]
    if om == 0.0:
        for i in range(1, n_samples):
            for m in range(6):
                out[i, m] = u0[m]
        return out
    e21 = p1 / om
    e22 = p2 / om
    e23 = p3 / om
    for i in range(1, n_samples):
        th = om * (i * stride * dt)
        cth = math.cos(th)
        sth = math.sin(th)
        out[i, 0] = xi1 * cth + e21 * sth
        out[i, 1] = xi2 * cth + e22 * sth
        out[i, 2] = xi3 * cth + e23 * sth
        out[i, 3] = -om * xi1 * sth + p1 * cth
        out[i, 4] = -om * xi2 * sth + p2 * cth
        out[i, 5] = -om * xi3 * sth + p3 * cth
    return out


@jit
def split_product_traj(u0, k, dt, stride, n_samples):
    """Product trajectory: closed-form nil factor x exact sphere factor."""
    out = np.empty((n_samples, 12))
    nil = nil_closed_traj(u0[:6], k, dt, stride, n_samples)
    sph = sphere_exact_traj(u0[6:12], dt, stride, n_samples)
    for i in range(n_samples):
        for m in range(6):
            out[i, m] = nil[i, m]
            out[i, 6 + m] = sph[i, m]
    return out


@jit
def split_step_n(u, k, dt, n_steps):
    """Advance a 12-component product state n_steps, interval-local phases."""
    out = np.empty(12)
    nil = nil_closed_traj(u[:6], k, dt, n_steps, 2)
    sph = sphere_exact_traj(u[6:12], dt, n_steps, 2)
    for m in range(6):
        out[m] = nil[1, m]
        out[6 + m] = sph[1, m]
    return out


# ---------------------------------------------------------------------------
# implicit midpoint on the reduced chart


@jit
def reduced_field(u, code):
    x = u[0]
    y = u[1]
    r = u[2]
    px = u[4]
    py = u[5]
    pr = u[6]
    ps = u[7]
    A = px - 0.5 * y * ps
    B = py + 0.5 * x * ps
    v = v_profile(code, r)
    dv = dv_profile(code, r)
    f = np.empty(8)
    f[0] = A
    f[1] = B
    f[2] = pr
    f[3] = -0.5 * y * A + 0.5 * x * B + ps / v
    f[4] = -0.5 * ps * B
    f[5] = 0.5 * ps * A
    f[6] = 0.5 * ps * ps * dv / (v * v)
    f[7] = 0.0
    return f


@jit
def reduced_jacobian(u, code):
    x = u[0]
    y = u[1]
    r = u[2]
    px = u[4]
    py = u[5]
    ps = u[7]
    A = px - 0.5 * y * ps
    B = py + 0.5 * x * ps
    v = v_profile(code, r)
    dv = dv_profile(code, r)
    d2v = d2v_profile(code, r)
    J = np.zeros((8, 8))
    # row 0: d(A)
    J[0, 1] = -0.5 * ps
    J[0, 4] = 1.0
    J[0, 7] = -0.5 * y
    # row 1: d(B)
    J[1, 0] = 0.5 * ps
    J[1, 5] = 1.0
    J[1, 7] = 0.5 * x
    # row 2: d(pr)
    J[2, 6] = 1.0
    # row 3: d(-y A/2 + x B/2 + ps/v)
    J[3, 0] = 0.5 * B + 0.25 * x * ps
    J[3, 1] = -0.5 * A + 0.25 * y * ps
    J[3, 2] = -ps * dv / (v * v)
    J[3, 4] = -0.5 * y
    J[3, 5] = 0.5 * x
    J[3, 7] = 0.25 * (x * x + y * y) + 1.0 / v
    # row 4: d(-ps B / 2)
    J[4, 0] = -0.25 * ps * ps
    J[4, 5] = -0.5 * ps
    J[4, 7] = -0.5 * B - 0.25 * x * ps
    # row 5: d(ps A / 2)
    J[5, 1] = -0.25 * ps * ps
    J[5, 4] = 0.5 * ps
    J[5, 7] = 0.5 * A - 0.25 * y * ps
    # row 6: d(ps^2 dv / (2 v^2))
    J[6, 2] = 0.5 * ps * ps * (d2v / (v * v) - 2.0 * dv * dv / (v * v * v))
    J[6, 7] = ps * dv / (v * v)
    return J


@jit
def _midpoint_step_reduced(u, code, dt, newton_tol, max_iter, delta_pole):
    """One implicit midpoint step; returns (new_state, status)."""
    unew = u + dt * reduced_field(u, code)
    status = STATUS_NEWTON
    for _ in range(max_iter):
        mid = 0.5 * (u + unew)
        if mid[2] < delta_pole or mid[2] > math.pi - delta_pole:
            return unew, STATUS_POLE
        resid = unew - u - dt * reduced_field(mid, code)
        rmax = 0.0
        for m in range(8):
            rm = abs(resid[m])
            if rm > rmax:
                rmax = rm
        if rmax <= newton_tol:
            status = STATUS_OK
            break
        J = np.eye(8) - (0.5 * dt) * reduced_jacobian(mid, code)
        delta = np.linalg.solve(J, -resid)
        unew = unew + delta
    return unew, status


@jit
def midpoint_reduced_traj(
    u0, code, dt, stride, n_samples, newton_tol, max_iter, delta_pole
):
    out = np.empty((n_samples, 8))
    u = u0.copy()
    for m in range(8):
        out[0, m] = u[m]
    isample = 1
    n_steps = (n_samples - 1) * stride
    for j in range(n_steps):
        u, status = _midpoint_step_reduced(u, code, dt, newton_tol, max_iter, delta_pole)
        if status != STATUS_OK:
            return out, status, j
        if (j + 1) % stride == 0:
            for m in range(8):
                out[isample, m] = u[m]
            isample += 1
    return out, STATUS_OK, n_steps


# ---------------------------------------------------------------------------
# implicit midpoint on the nil chart for the conformally scaled energy


@jit
def variant_field(u, k):
    x = u[0]
    y = u[1]
    px = u[3]
    py = u[4]
    pz = u[5]
    a = px - 0.5 * k * y * pz
    b = py + 0.5 * k * x * pz
    c = pz
    m = 2.0 + math.sin(TWO_PI * y)
    dm = TWO_PI * math.cos(TWO_PI * y)
    e = 0.5 * (a * a + b * b + c * c)
    f = np.empty(6)
    f[0] = m * a
    f[1] = m * b
    f[2] = m * (c + 0.5 * k * (x * b - y * a))
    f[3] = -m * 0.5 * k * pz * b
    f[4] = -dm * e + m * 0.5 * k * pz * a
    f[5] = 0.0
    return f


@jit
def _variant_jacobian_fd(u, k):
    J = np.empty((6, 6))
    h = 1e-7
    for jcol in range(6):
        up = u.copy()
        um = u.copy()
        up[jcol] += h
        um[jcol] -= h
        fp = variant_field(up, k)
        fm = variant_field(um, k)
        for irow in range(6):
            J[irow, jcol] = (fp[irow] - fm[irow]) / (2.0 * h)
    return J


@jit
def midpoint_variant_traj(u0, k, dt, stride, n_samples, newton_tol, max_iter):
    out = np.empty((n_samples, 6))
    u = u0.copy()
    for m in range(6):
        out[0, m] = u[m]
    isample = 1
    n_steps = (n_samples - 1) * stride
    for j in range(n_steps):
        unew = u + dt * variant_field(u, k)
        status = STATUS_NEWTON
        for _ in range(max_iter):
            mid = 0.5 * (u + unew)
            resid = unew - u - dt * variant_field(mid, k)
            rmax = 0.0
            for m in range(6):
                rm = abs(resid[m])
                if rm > rmax:
                    rmax = rm
            if rmax <= newton_tol:
                status = STATUS_OK
                break
            J = np.eye(6) - (0.5 * dt) * _variant_jacobian_fd(mid, k)
            delta = np.linalg.solve(J, -resid)
            unew = unew + delta
        if status != STATUS_OK:
            return out, status, j
        u = unew
        if (j + 1) % stride == 0:
            for m in range(6):
                out[isample, m] = u[m]
            isample += 1
    return out, STATUS_OK, n_steps


# ---------------------------------------------------------------------------
# recurrence search on the reduced cover chart


@jit
def _reduced_coords_from_product(z, xi1, xi2, xi3, p1, p2, p3):
    """(r, s mod 1 offset, pr) of the projected product state."""
    r = math.acos(min(1.0, max(-1.0, xi1)))
    phi = math.atan2(xi3, xi2) / TWO_PI
    if phi < 0.0:
        phi += 1.0
    sr = math.sin(r)
    cr = math.cos(r)
    cphi = math.cos(TWO_PI * phi)
    sphi = math.sin(TWO_PI * phi)
    pr = -sr * p1 + cr * cphi * p2 + cr * sphi * p3
    s = z + phi
    return r, s, pr


@jit
def recurrence_search(u0, k, dt, n_max, eps, min_steps):
    """First re-entry step into the eps-ball of the initial reduced state.

    Integrates the split-product flow, projecting each step to the reduced
    cover chart (x, y, r, s mod 1, px, py, pr, ps).  The trajectory must
    first leave the ball; the ball test uses the Euclidean distance with the
    s-difference wrapped to [-1/2, 1/2).  Returns -1 if no return occurs
    within n_max steps.
    """
    x = u0[0]
    y = u0[1]
    z = u0[2]
    px = u0[3]
    py = u0[4]
    pz = u0[5]
    a0 = px - 0.5 * k * y * pz
    b0 = py + 0.5 * k * x * pz
    c = pz
    om = k * c
    xi1 = u0[6]
    xi2 = u0[7]
    xi3 = u0[8]
    p1 = u0[9]
    p2 = u0[10]
    p3 = u0[11]
    oms = math.sqrt(p1 * p1 + p2 * p2 + p3 * p3)
    if oms > 0.0:
        e21 = p1 / oms
        e22 = p2 / oms
        e23 = p3 / oms
    else:
        e21 = 0.0
        e22 = 0.0
        e23 = 0.0

    r0, s0, pr0 = _reduced_coords_from_product(z, xi1, xi2, xi3, p1, p2, p3)
    x0 = x
    y0 = y
    px0 = px
    py0 = py
    eps2 = eps * eps

    sdt = math.sin(om * dt)
    cdtm1 = -2.0 * math.sin(0.5 * om * dt) ** 2
    sh = math.sin(0.5 * om * dt)
    ch = math.cos(0.5 * om * dt)
    chm1 = -2.0 * math.sin(0.25 * om * dt) ** 2

    left = False
    for j in range(n_max):
        th = om * (j * dt)
        cj = math.cos(th)
        sj = math.sin(th)
        aj = a0 * cj - b0 * sj
        bj = a0 * sj + b0 * cj
        am = aj * ch - bj * sh
        bm = aj * sh + bj * ch
        if om != 0.0:
            dx = (aj * sdt + bj * cdtm1) / om
            dy = (bj * sdt - aj * cdtm1) / om
            dxh = (aj * sh + bj * chm1) / om
            dyh = (bj * sh - aj * chm1) / om
        else:
            dx = aj * dt
            dy = bj * dt
            dxh = 0.5 * aj * dt
            dyh = 0.5 * bj * dt
        z += dt * (c + 0.5 * k * (bm * (x + dxh) - am * (y + dyh)))
        x += dx
        y += dy

        # cheap lower bound on the distance before touching the sphere factor
        th1 = om * ((j + 1) * dt)
        c1 = math.cos(th1)
        s1 = math.sin(th1)
        a1 = a0 * c1 - b0 * s1
        b1 = a0 * s1 + b0 * c1
        pxj = a1 + 0.5 * k * y * c
        pyj = b1 - 0.5 * k * x * c
        d2 = (x - x0) ** 2 + (y - y0) ** 2 + (pxj - px0) ** 2 + (pyj - py0) ** 2
        inside_possible = d2 <= eps2
        if (not left) or inside_possible:
            ths = oms * ((j + 1) * dt)
            cs = math.cos(ths)
            ss = math.sin(ths)
            nxi1 = xi1 * cs + e21 * ss
            nxi2 = xi2 * cs + e22 * ss
            nxi3 = xi3 * cs + e23 * ss
            np1 = -oms * xi1 * ss + p1 * cs
            np2 = -oms * xi2 * ss + p2 * cs
            np3 = -oms * xi3 * ss + p3 * cs
            r, s, pr = _reduced_coords_from_product(
                z, nxi1, nxi2, nxi3, np1, np2, np3
            )
            ds = (s - s0) % 1.0
            if ds > 0.5:
                ds -= 1.0
            d2full = d2 + (r - r0) ** 2 + ds * ds + (pr - pr0) ** 2
            if not left:
                if d2full > eps2:
                    left = True
            elif j + 1 >= min_steps and d2full <= eps2:
                return j + 1
    return -1


# ---------------------------------------------------------------------------
# largest Lyapunov exponent (two-trajectory Benettin estimate)


@jit
def lyapunov_benettin(u0, v0, k, dt, renorm_steps, checkpoints):
    """Running Benettin estimates at the given checkpoint step counts.

    ``checkpoints`` is an increasing int64 array of step counts, each a
    multiple of ``renorm_steps``.  Returns lambda(t) at each checkpoint.
    ``v0`` is the perturbed companion; its offset norm is the reference
    separation delta0.
    """
    delta0 = 0.0
    for m in range(12):
        delta0 += (v0[m] - u0[m]) ** 2
    delta0 = math.sqrt(delta0)
    u = u0.copy()
    v = v0.copy()
    out = np.empty(len(checkpoints))
    logsum = 0.0
    icheck = 0
    steps_done = 0
    n_total = checkpoints[len(checkpoints) - 1]
    while steps_done < n_total:
        u = split_step_n(u, k, dt, renorm_steps)
        v = split_step_n(v, k, dt, renorm_steps)
        steps_done += renorm_steps
        d = 0.0
        for m in range(12):
            d += (v[m] - u[m]) ** 2
        d = math.sqrt(d)
        logsum += math.log(d / delta0)
        # pull the companion back to separation delta0 and re-impose the
        # sphere constraints
        scale = delta0 / d
        for m in range(12):
            v[m] = u[m] + scale * (v[m] - u[m])
        nrm = math.sqrt(v[6] ** 2 + v[7] ** 2 + v[8] ** 2)
        v[6] /= nrm
        v[7] /= nrm
        v[8] /= nrm
        dotp = v[6] * v[9] + v[7] * v[10] + v[8] * v[11]
        v[9] -= dotp * v[6]
        v[10] -= dotp * v[7]
        v[11] -= dotp * v[8]
        if icheck < len(checkpoints) and steps_done >= checkpoints[icheck]:
            out[icheck] = logsum / (steps_done * dt)
            icheck += 1
    while icheck < len(checkpoints):
        out[icheck] = logsum / (n_total * dt)
        icheck += 1
    return out
