"""Compiled adaptive Runge-Kutta integration of the fundamental system.

The pair is Dormand-Prince 8(5,3) (the DOP853 tableau, taken from SciPy).
State layout (8 components)::

    0 c    1 c'    2 s    3 s'          fundamental solutions
    4 c_l  5 c_l'  6 s_l  7 s_l'        their derivatives in lambda

with ``y'' = (q - lambda) y`` and ``y_l'' = (q - lambda) y_l - y``.
"""

import math

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _dop

KIND_FOURIER = 0
KIND_SAMPLES = 1

STAGES = _dop.N_STAGES
A = np.ascontiguousarray(_dop.A[:STAGES, :STAGES])
B = np.ascontiguousarray(_dop.B)
C = np.ascontiguousarray(_dop.C[:STAGES])
E3 = np.ascontiguousarray(_dop.E3)
E5 = np.ascontiguousarray(_dop.E5)

DIM = 8
MAX_STEPS = 1_000_000


@njit(cache=True)
def potential_at(x, kind, ns, cre, cim, q0, samples):
    if kind == KIND_FOURIER:
        v = q0
        for j in range(ns.size):
            arg = 2.0 * math.pi * ns[j] * x
            v += 2.0 * (cre[j] * math.cos(arg) - cim[j] * math.sin(arg))
        return v
    m = samples.size
    u = (x - math.floor(x)) * m
    i = int(math.floor(u))
    w = u - i
    i = i % m
    return (1.0 - w) * samples[i] + w * samples[(i + 1) % m]


@njit(cache=True)
def _rhs(x, y, lam, kind, ns, cre, cim, q0, samples, out):
    g = potential_at(x, kind, ns, cre, cim, q0, samples) - lam
    out[0] = y[1]
    out[1] = g * y[0]
    out[2] = y[3]
    out[3] = g * y[2]
    out[4] = y[5]
    out[5] = g * y[4] - y[0]
    out[6] = y[7]
    out[7] = g * y[6] - y[2]


@njit(cache=True)
def _fundamental(lam, tol, kind, ns, cre, cim, q0, samples, A, B, C, E3, E5):
    s = B.size
    K = np.zeros((s + 1, DIM))
    y = np.zeros(DIM)
    y[0] = 1.0
    y[3] = 1.0
    tmp = np.empty(DIM)
    ynew = np.empty(DIM)
    order_exp = -1.0 / 8.0

    x = 0.0
    h = 0.1 / (1.0 + math.sqrt(abs(lam)))
    _rhs(x, y, lam, kind, ns, cre, cim, q0, samples, K[0])
    steps = 0
    m_knots = samples.size if kind == KIND_SAMPLES else 1
    for _ in range(MAX_STEPS):
        if x >= 1.0:
            return y, steps, True
        # never step across a kink of the interpolated potential
        knot = (math.floor(x * m_knots + 1e-9) + 1.0) / m_knots
        last = x + h >= knot
        if last:
            h = knot - x
        for j in range(1, s):
            for i in range(DIM):
                acc = 0.0
                for m in range(j):
                    acc += A[j, m] * K[m, i]
                tmp[i] = y[i] + h * acc
            _rhs(x + C[j] * h, tmp, lam, kind, ns, cre, cim, q0, samples, K[j])
        for i in range(DIM):
            acc = 0.0
            for m in range(s):
                acc += B[m] * K[m, i]
            ynew[i] = y[i] + h * acc
        _rhs(x + h, ynew, lam, kind, ns, cre, cim, q0, samples, K[s])

        e5 = 0.0
        e3 = 0.0
        for i in range(DIM):
            sc = tol + tol * max(abs(y[i]), abs(ynew[i]))
            a5 = 0.0
            a3 = 0.0
            for m in range(s + 1):
                a5 += E5[m] * K[m, i]
                a3 += E3[m] * K[m, i]
            e5 += (a5 / sc) ** 2
            e3 += (a3 / sc) ** 2
        if e5 == 0.0 and e3 == 0.0:
            err = 0.0
        else:
            err = h * e5 / math.sqrt((e5 + 0.01 * e3) * DIM)

        if err <= 1.0:
            x = knot if last else x + h
            for i in range(DIM):
                y[i] = ynew[i]
                K[0, i] = K[s, i]
            steps += 1
            fac = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** order_exp)
        else:
            fac = max(0.2, 0.9 * err ** order_exp)
        h *= fac
        if h < 1e-14:
            return y, steps, False
    return y, steps, False


def fundamental(lam, tol, kind, ns, cre, cim, q0, samples):
    """Integrate over [0, 1]; returns (state at x=1, accepted steps, ok flag)."""
    return _fundamental(lam, tol, kind, ns, cre, cim, q0, samples, A, B, C, E3, E5)
