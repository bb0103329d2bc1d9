"""Hot numeric kernels: polynomial right-hand sides and adaptive RK stepping.

Everything here is written loop-style so numba can compile it; with
``SSM_BACKBONE_NO_NUMBA=1`` the same code runs as plain python/numpy (the
fallback path).  The integrator is the Dormand-Prince 5(4) pair with FSAL,
proportional step control, and step clamping onto requested output times.

State layout for variational integration: y = [x (dim), Phi (dim*dim)] with
Phi' = (A + J_nl(x)) Phi.
"""

from __future__ import annotations

import numpy as np

from ._accel import USING_NUMBA, njit

__all__ = ["USING_NUMBA", "rhs", "integrate_core", "STATUS_OK", "STATUS_UNDERFLOW"]

STATUS_OK = 0
STATUS_UNDERFLOW = 1

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, 0] = 1.0 / 5.0
_A[2, :2] = (3.0 / 40.0, 9.0 / 40.0)
_A[3, :3] = (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0)
_A[4, :4] = (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0)
_A[5, :5] = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0)
_A[6, :6] = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0)
_B5 = _A[6, :7].copy()  # 5th-order weights (FSAL row)
_B4 = np.array([5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0])
_E = _B5 - _B4


@njit(cache=True)
def rhs(t, y, dim, a_mat, exps, coefs, jexps, jcoefs, jvars, g_cos, g_sin, eps, omega, with_var, out):
    """dy/dt for the forced polynomial system, optionally with tangent flow."""
    cs = eps * np.cos(omega * t)
    sn = eps * np.sin(omega * t)
    for i in range(dim):
        acc = cs * g_cos[i] + sn * g_sin[i]
        for k in range(dim):
            acc += a_mat[i, k] * y[k]
        out[i] = acc
    for term in range(exps.shape[0]):
        mono = 1.0
        for v in range(dim):
            e = exps[term, v]
            if e == 1:
                mono *= y[v]
            elif e > 1:
                mono *= y[v] ** e
        for i in range(dim):
            c = coefs[term, i]
            if c != 0.0:
                out[i] += c * mono
    if with_var:
        # jac[i, k] = a_mat[i, k] + sum over derivative terms
        jac = np.zeros((dim, dim))
        for i in range(dim):
            for k in range(dim):
                jac[i, k] = a_mat[i, k]
        for term in range(jexps.shape[0]):
            mono = 1.0
            for v in range(dim):
                e = jexps[term, v]
                if e == 1:
                    mono *= y[v]
                elif e > 1:
                    mono *= y[v] ** e
            col = jvars[term]
            for i in range(dim):
                c = jcoefs[term, i]
                if c != 0.0:
                    jac[i, col] += c * mono
        for i in range(dim):
            for k in range(dim):
                acc = 0.0
                for m in range(dim):
                    acc += jac[i, m] * y[dim + m * dim + k]
                out[dim + i * dim + k] = acc


@njit(cache=True)
def integrate_core(
    y0,
    t0,
    t1,
    dim,
    a_mat,
    exps,
    coefs,
    jexps,
    jcoefs,
    jvars,
    g_cos,
    g_sin,
    eps,
    omega,
    with_var,
    rtol,
    atol,
    t_eval,
    c_nodes,
    a_tab,
    b5,
    err_w,
    max_steps,
):
    """Adaptive Dormand-Prince loop; fills states at every t_eval point.

    Returns (y_eval (n_eval, n), y_final, n_steps, status).
    """
    n = y0.size
    n_eval = t_eval.size
    y_eval = np.zeros((n_eval, n))
    y = y0.copy()
    t = t0
    span = t1 - t0

    k = np.zeros((7, n))
    work = np.zeros(n)
    ytmp = np.zeros(n)

    rhs(t, y, dim, a_mat, exps, coefs, jexps, jcoefs, jvars, g_cos, g_sin, eps, omega, with_var, work)
    k[0] = work

    # initial step heuristic
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (k[0, i] / sc) ** 2
    d0 = np.sqrt(d0 / n)
    d1 = np.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6 * abs(span)
    else:
        h = 0.01 * d0 / d1
    if h > abs(span):
        h = abs(span)
    direction = 1.0 if span >= 0 else -1.0
    h *= direction

    next_eval = 0
    n_steps = 0
    status = STATUS_OK

    while next_eval < n_eval and direction * (t - t_eval[next_eval]) >= -1e-13 * max(abs(t), 1.0):
        y_eval[next_eval] = y
        next_eval += 1

    while direction * (t1 - t) > 1e-14 * max(abs(t), abs(t1), 1.0):
        if n_steps >= max_steps:
            status = STATUS_UNDERFLOW
            break
        clamp = False
        h_try = h
        if direction * (t + h_try - t1) > 0.0:
            h_try = t1 - t
            clamp = True
        if next_eval < n_eval and direction * (t + h_try - t_eval[next_eval]) > 0.0:
            h_try = t_eval[next_eval] - t
            clamp = True

        # stages 2..7 (k1 is FSAL from the previous step)
        for s in range(1, 7):
            for i in range(n):
                acc = 0.0
                for j in range(s):
                    aij = a_tab[s, j]
                    if aij != 0.0:
                        acc += aij * k[j, i]
                ytmp[i] = y[i] + h_try * acc
            rhs(t + c_nodes[s] * h_try, ytmp, dim, a_mat, exps, coefs, jexps, jcoefs, jvars, g_cos, g_sin, eps, omega, with_var, work)
            k[s] = work

        err = 0.0
        for i in range(n):
            ynew = y[i]
            eacc = 0.0
            for s in range(7):
                if b5[s] != 0.0:
                    ynew += h_try * b5[s] * k[s, i]
                if err_w[s] != 0.0:
                    eacc += err_w[s] * k[s, i]
            ytmp[i] = ynew
            sc = atol + rtol * max(abs(y[i]), abs(ynew))
            err += (h_try * eacc / sc) ** 2
        err = np.sqrt(err / n)
        n_steps += 1

        if err <= 1.0:
            t = t + h_try
            for i in range(n):
                y[i] = ytmp[i]
            # FSAL: stage 7 was evaluated at (t+h, y_new)
            k[0] = k[6]
            while next_eval < n_eval and direction * (t - t_eval[next_eval]) >= -1e-13 * max(abs(t), 1.0):
                y_eval[next_eval] = y
                next_eval += 1
            factor = 5.0
            if err > 0.0:
                factor = 0.9 * err ** (-0.2)
                if factor > 5.0:
                    factor = 5.0
            if not clamp:
                h = h_try * factor
            else:
                h = h * factor if factor < 1.0 else h
        else:
            # rejected: t, y unchanged so the FSAL stage k[0] stays valid
            factor = 0.9 * err ** (-0.2)
            if factor < 0.2:
                factor = 0.2
            h = h_try * factor

        if abs(h) < 1e-14 * max(abs(t), 1.0):
            status = STATUS_UNDERFLOW
            break

    while next_eval < n_eval and status == STATUS_OK:
        y_eval[next_eval] = y
        next_eval += 1

    return y_eval, y, n_steps, status


def tableau():
    """Integrator tableau arrays (c nodes, a matrix, b5 weights, error weights)."""
    return _C, _A, _B5, _E
