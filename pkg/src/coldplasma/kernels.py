"""Hot numeric kernels for the affine cold-plasma hierarchy.

Everything in this module operates on flat ``float64`` arrays and is written
so the same source compiles under numba and runs under plain NumPy (see
:mod:`coldplasma.backend`).  State layouts:

* full9:          (a, b, c, d, A, B, C, D, Bz)
* electrostatic4: (a, d, A, D)
* axisym2:        (a, A)
* radial5:        (a, c, A, C, Bz)

Augmented kernels carry a base axisymmetric (or embedded) orbit together with
the columns of a fundamental matrix, row-major, for monodromy computations.
"""
from __future__ import annotations

import numpy as np

from .backend import jit, jit_dynamic

# ---------------------------------------------------------------------------
# Nonlinear right-hand sides (autonomous; t argument kept for the integrator)
# ---------------------------------------------------------------------------


@jit
def rhs_axisym(t, y):
    out = np.empty(2)
    a = y[0]
    A = y[1]
    out[0] = -A - a * a
    out[1] = (1.0 - 2.0 * A) * a
    return out


@jit
def rhs_electrostatic(t, y):
    out = np.empty(4)
    a = y[0]
    d = y[1]
    A = y[2]
    D = y[3]
    n = 1.0 - A - D
    out[0] = -a * a - A
    out[1] = -d * d - D
    out[2] = n * a
    out[3] = n * d
    return out


@jit
def rhs_radial(t, y):
    out = np.empty(5)
    a = y[0]
    c = y[1]
    A = y[2]
    C = y[3]
    Bz = y[4]
    n1 = 1.0 - 2.0 * A
    out[0] = -a * a + c * c - A + Bz * c
    out[1] = -2.0 * c * a - C - Bz * a
    out[2] = n1 * a
    out[3] = n1 * c
    out[4] = 2.0 * C
    return out


@jit
def rhs_full(t, y):
    # Expression ordering matters: it makes embedded symmetric submanifolds
    # (d=a, c=-b, D=A, C=-B) invariant to the last bit, which the manifold
    # tests rely on.
    out = np.empty(9)
    a = y[0]
    b = y[1]
    c = y[2]
    d = y[3]
    A = y[4]
    B = y[5]
    C = y[6]
    D = y[7]
    Bz = y[8]
    n = 1.0 - A - D
    out[0] = -(a * a + b * c) - Bz * c - A
    out[1] = -b * (a + d) - Bz * d - B
    out[2] = -c * (a + d) + Bz * a - C
    out[3] = -(d * d + b * c) + Bz * b - D
    out[4] = n * a
    out[5] = n * b
    out[6] = n * c
    out[7] = n * d
    out[8] = B - C
    return out


@jit
def jacobian_full9(y):
    """Analytic Jacobian of ``rhs_full`` at state ``y``."""
    a = y[0]
    b = y[1]
    c = y[2]
    d = y[3]
    A = y[4]
    D = y[7]
    Bz = y[8]
    n = 1.0 - A - D
    J = np.zeros((9, 9))
    # velocity rows
    J[0, 0] = -2.0 * a
    J[0, 1] = -c
    J[0, 2] = -b - Bz
    J[0, 4] = -1.0
    J[0, 8] = -c
    J[1, 0] = -b
    J[1, 1] = -(a + d)
    J[1, 3] = -b - Bz
    J[1, 5] = -1.0
    J[1, 8] = -d
    J[2, 0] = -c + Bz
    J[2, 2] = -(a + d)
    J[2, 3] = -c
    J[2, 6] = -1.0
    J[2, 8] = a
    J[3, 1] = -c + Bz
    J[3, 2] = -b
    J[3, 3] = -2.0 * d
    J[3, 7] = -1.0
    J[3, 8] = b
    # field rows
    J[4, 0] = n
    J[4, 4] = -a
    J[4, 7] = -a
    J[5, 1] = n
    J[5, 4] = -b
    J[5, 7] = -b
    J[6, 2] = n
    J[6, 4] = -c
    J[6, 7] = -c
    J[7, 3] = n
    J[7, 4] = -d
    J[7, 7] = -d
    # magnetic row
    J[8, 5] = 1.0
    J[8, 6] = -1.0
    return J


# ---------------------------------------------------------------------------
# Variational coefficient matrices along an axisymmetric base orbit (a0, A0)
# ---------------------------------------------------------------------------


@jit
def var_matrix_axisym(a0, A0):
    """2x2 coefficient matrix for tangent (a1, A1)."""
    M = np.empty((2, 2))
    M[0, 0] = -2.0 * a0
    M[0, 1] = -1.0
    M[1, 0] = 1.0 - 2.0 * A0
    M[1, 1] = -2.0 * a0
    return M


@jit
def var_matrix_electrostatic(a0, A0):
    """4x4 coefficient matrix for tangent (A1, a1, delta1, sigma1)."""
    M = np.zeros((4, 4))
    M[0, 0] = -2.0 * a0
    M[0, 1] = 1.0 - 2.0 * A0
    M[0, 2] = -a0
    M[1, 0] = -1.0
    M[1, 1] = -2.0 * a0
    M[2, 3] = 1.0 - 2.0 * A0
    M[3, 2] = -1.0
    M[3, 3] = -2.0 * a0
    return M


@jit
def var_matrix_radial(a0, A0):
    """3x3 coefficient matrix for tangent (C1, c1, B1)."""
    M = np.zeros((3, 3))
    M[0, 1] = 1.0 - 2.0 * A0
    M[1, 0] = -1.0
    M[1, 1] = -2.0 * a0
    M[1, 2] = -a0
    M[2, 0] = 2.0
    return M


# ---------------------------------------------------------------------------
# Augmented systems: base orbit + fundamental-matrix columns (row-major)
# ---------------------------------------------------------------------------


@jit
def rhs_aug_axisym(t, y):
    out = np.empty(2 + 4)
    a0 = y[0]
    A0 = y[1]
    out[0] = -A0 - a0 * a0
    out[1] = (1.0 - 2.0 * A0) * a0
    M = var_matrix_axisym(a0, A0)
    for i in range(2):
        for k in range(2):
            s = 0.0
            for j in range(2):
                s += M[i, j] * y[2 + 2 * j + k]
            out[2 + 2 * i + k] = s
    return out


@jit
def rhs_aug_electrostatic(t, y):
    out = np.empty(2 + 16)
    a0 = y[0]
    A0 = y[1]
    out[0] = -A0 - a0 * a0
    out[1] = (1.0 - 2.0 * A0) * a0
    M = var_matrix_electrostatic(a0, A0)
    for i in range(4):
        for k in range(4):
            s = 0.0
            for j in range(4):
                s += M[i, j] * y[2 + 4 * j + k]
            out[2 + 4 * i + k] = s
    return out


@jit
def rhs_aug_radial(t, y):
    out = np.empty(2 + 9)
    a0 = y[0]
    A0 = y[1]
    out[0] = -A0 - a0 * a0
    out[1] = (1.0 - 2.0 * A0) * a0
    M = var_matrix_radial(a0, A0)
    for i in range(3):
        for k in range(3):
            s = 0.0
            for j in range(3):
                s += M[i, j] * y[2 + 3 * j + k]
            out[2 + 3 * i + k] = s
    return out


@jit
def rhs_aug_full9(t, y):
    # Base: embedded axisymmetric orbit in the full 9-component system.
    out = np.empty(9 + 81)
    base = rhs_full(t, y[:9])
    for i in range(9):
        out[i] = base[i]
    J = jacobian_full9(y[:9])
    for i in range(9):
        for k in range(9):
            s = 0.0
            for j in range(9):
                s += J[i, j] * y[9 + 9 * j + k]
            out[9 + 9 * i + k] = s
    return out


# ---------------------------------------------------------------------------
# Adaptive Runge-Kutta-Fehlberg 4(5)
# ---------------------------------------------------------------------------

# Fehlberg tableau
C2, C3, C4, C5, C6 = 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5
A21 = 0.25
A31, A32 = 3.0 / 32.0, 9.0 / 32.0
A41, A42, A43 = 1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0
A51, A52, A53, A54 = 439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0
A61, A62, A63, A64, A65 = (-8.0 / 27.0, 2.0, -3544.0 / 2565.0,
                           1859.0 / 4104.0, -11.0 / 40.0)
# 5th-order weights (propagated) and 4th-order weights (embedded)
B51, B53, B54, B55, B56 = (16.0 / 135.0, 6656.0 / 12825.0, 28561.0 / 56430.0,
                           -9.0 / 50.0, 2.0 / 55.0)
B41, B43, B44, B45 = 25.0 / 216.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2
# error weights = 5th - 4th
E1, E3, E4, E5, E6 = (1.0 / 360.0, -128.0 / 4275.0, -2197.0 / 75240.0,
                      1.0 / 50.0, 2.0 / 55.0)

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0

STATUS_COMPLETED = 0
STATUS_DIVERGED = 1
STATUS_STEP_UNDERFLOW = 2
STATUS_STEP_BUDGET = 3


def _rkf45_drive_impl(rhs, y0, t0, t1, rtol, atol, h_init, h_min, h_max,
                      max_steps, divergence_norm):
    n = y0.shape[0]
    cap = 1024
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    ts[0] = t0
    ys[0, :] = y0
    m = 1

    t = t0
    y = y0.copy()
    h = h_init
    if h <= 0.0:
        h = (t1 - t0) * 1e-3
    if h > h_max:
        h = h_max
    if h < h_min:
        h = h_min

    accepted = 0
    rejected = 0
    h_last = 0.0
    status = STATUS_COMPLETED

    while t < t1:
        if accepted + rejected >= max_steps:
            status = STATUS_STEP_BUDGET
            break
        if h < h_min:
            status = STATUS_STEP_UNDERFLOW
            break
        last = False
        ht = h
        if t + ht >= t1:
            ht = t1 - t
            last = True

        k1 = rhs(t, y)
        k2 = rhs(t + C2 * ht, y + ht * (A21 * k1))
        k3 = rhs(t + C3 * ht, y + ht * (A31 * k1 + A32 * k2))
        k4 = rhs(t + C4 * ht, y + ht * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = rhs(t + C5 * ht,
                 y + ht * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = rhs(t + C6 * ht,
                 y + ht * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4
                           + A65 * k5))
        y5 = y + ht * (B51 * k1 + B53 * k3 + B54 * k4 + B55 * k5 + B56 * k6)

        # weighted max norm of the embedded error estimate
        err = 0.0
        for i in range(n):
            ei = abs(ht * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                           + E6 * k6[i]))
            ya = abs(y[i])
            yb = abs(y5[i])
            sc = atol + rtol * (ya if ya > yb else yb)
            r = ei / sc
            if r > err:
                err = r

        if err <= 1.0:
            t = t1 if last else t + ht
            y = y5
            if m >= cap:
                ncap = 2 * cap
                ts2 = np.empty(ncap)
                ys2 = np.empty((ncap, n))
                ts2[:m] = ts[:m]
                ys2[:m, :] = ys[:m, :]
                ts = ts2
                ys = ys2
                cap = ncap
            ts[m] = t
            ys[m, :] = y
            m += 1
            accepted += 1
            h_last = ht
            big = 0.0
            for i in range(n):
                ai = abs(y[i])
                if ai > big:
                    big = ai
            if big > divergence_norm or not np.isfinite(big):
                status = STATUS_DIVERGED
                break
        else:
            rejected += 1

        if not np.isfinite(err):
            fac = FAC_MIN
        elif err == 0.0:
            fac = FAC_MAX
        else:
            fac = SAFETY * err ** -0.2
            if fac < FAC_MIN:
                fac = FAC_MIN
            elif fac > FAC_MAX:
                fac = FAC_MAX
        h = ht * fac
        if h > h_max:
            h = h_max

    return ts[:m].copy(), ys[:m, :].copy(), status, accepted, rejected, h_last


# Plain-Python flavor accepts any callable rhs; the compiled flavor requires a
# jitted rhs and is picked automatically by the integrator front end.
rkf45_drive_python = _rkf45_drive_impl
rkf45_drive_compiled = jit_dynamic(_rkf45_drive_impl)
