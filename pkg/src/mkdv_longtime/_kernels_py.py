"""Pure-Python/numpy versions of the compiled kernels (same algorithms, same outputs)."""
import math

import numpy as np


def jost_sweep(u, um, x0, h, z):
    u = np.asarray(u, dtype=float)
    um = np.asarray(um, dtype=float)
    z = np.asarray(z, dtype=float)
    w = 2.0 * z
    p = np.ones(z.shape, dtype=complex)
    q = np.zeros(z.shape, dtype=complex)
    e0 = np.exp(1j * w * x0)
    for k in range(u.size - 1):
        x = x0 + k * h
        em = np.exp(1j * w * (x + 0.5 * h))
        e1 = np.exp(1j * w * (x + h))
        k1p = u[k] * e0 * q
        k1q = u[k] * e0.conj() * p
        tp = p + 0.5 * h * k1p
        tq = q + 0.5 * h * k1q
        k2p = um[k] * em * tq
        k2q = um[k] * em.conj() * tp
        tp = p + 0.5 * h * k2p
        tq = q + 0.5 * h * k2q
        k3p = um[k] * em * tq
        k3q = um[k] * em.conj() * tp
        tp = p + h * k3p
        tq = q + h * k3q
        k4p = u[k + 1] * e1 * tq
        k4q = u[k + 1] * e1.conj() * tp
        p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        q = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        e0 = e1
    return p, q


_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def painleve_march(p0, dp0, s_start, ds, nsteps, rtol, atol, guard, max_substeps):
    P = np.zeros(nsteps + 1)
    D = np.zeros(nsteps + 1)
    P[0], D[0] = p0, dp0
    y0, y1 = float(p0), float(dp0)
    h = -ds
    status = 0
    k = -1
    for k in range(nsteps):
        s = s_start - k * ds
        s_end = s_start - (k + 1) * ds
        sub = 0
        while s > s_end:
            if h < s_end - s:
                h = s_end - s
            sub += 1
            if sub > max_substeps:
                status = 2
                break
            ka = [0.0] * 7
            kb = [0.0] * 7
            for i in range(6):
                ta, tb = y0, y1
                for j, a in enumerate(_A[i]):
                    ta += h * a * ka[j]
                    tb += h * a * kb[j]
                ka[i] = tb
                kb[i] = (s + _C[i] * h) * ta + 2.0 * ta * ta * ta
            n0 = y0 + h * sum(b * kk for b, kk in zip(_B, ka[:6]))
            n1 = y1 + h * sum(b * kk for b, kk in zip(_B, kb[:6]))
            ka[6] = n1
            kb[6] = (s + h) * n0 + 2.0 * n0 * n0 * n0
            sc0 = atol + rtol * max(abs(y0), abs(n0))
            sc1 = atol + rtol * max(abs(y1), abs(n1))
            err = max(abs(h * sum(e * kk for e, kk in zip(_E, ka))) / sc0,
                      abs(h * sum(e * kk for e, kk in zip(_E, kb))) / sc1)
            if not math.isfinite(err):
                err = 1e10
            if err <= 1.0:
                s = s + h
                y0, y1 = n0, n1
                if s - s_end < 1e-14 * ds:
                    s = s_end
            fac = 5.0 if err < 1e-10 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = max(h * fac, -ds)
        if status != 0:
            break
        P[k + 1] = y0
        D[k + 1] = y1
        if not abs(y0) <= guard:
            status = 1
            break
    return P, D, status, k + 1 if nsteps > 0 else 0
