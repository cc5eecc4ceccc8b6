# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: Jost envelope sweep and the Painleve II march."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, fmax, fmin, pow, isfinite

cnp.import_array()


cdef void _jost_one(const double[::1] u, const double[::1] um, double x0,
                    double h, double z, double complex* p_out,
                    double complex* q_out) noexcept nogil:
    cdef Py_ssize_t k, n = u.shape[0]
    cdef double x, w = 2.0 * z
    cdef double complex p = 1.0, q = 0.0
    cdef double complex e0, em, e1, k1p, k1q, k2p, k2q, k3p, k3q, k4p, k4q
    cdef double complex tp, tq
    cdef double complex rot = cos(0.5 * w * h) + 1j * sin(0.5 * w * h)
    x = x0
    e0 = cos(w * x) + 1j * sin(w * x)
    for k in range(n - 1):
        # advance the phase by rotation; resynchronise exactly every 128 steps
        if (k & 127) == 0:
            x = x0 + k * h
            e0 = cos(w * x) + 1j * sin(w * x)
        em = e0 * rot
        e1 = em * rot
        # p' = u e^{2ixz} q ,  q' = u e^{-2ixz} p
        k1p = u[k] * e0 * q
        k1q = u[k] * e0.conjugate() * p
        tp = p + 0.5 * h * k1p
        tq = q + 0.5 * h * k1q
        k2p = um[k] * em * tq
        k2q = um[k] * em.conjugate() * tp
        tp = p + 0.5 * h * k2p
        tq = q + 0.5 * h * k2q
        k3p = um[k] * em * tq
        k3q = um[k] * em.conjugate() * tp
        tp = p + h * k3p
        tq = q + h * k3q
        k4p = u[k + 1] * e1 * tq
        k4q = u[k + 1] * e1.conjugate() * tp
        p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        q = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q)
        e0 = e1
    p_out[0] = p
    q_out[0] = q


def jost_sweep(const double[::1] u, const double[::1] um, double x0, double h,
               const double[::1] z):
    """Envelope first column (Phi11, Phi21) at the right end, one per z."""
    cdef Py_ssize_t j, m = z.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] p = np.empty(m, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] q = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] pv = p
    cdef double complex[::1] qv = q
    with nogil:
        for j in range(m):
            _jost_one(u, um, x0, h, z[j], &pv[j], &qv[j])
    return p, q


# Dormand-Prince 5(4) tableau
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0, A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0, B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0, E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0
cdef double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0


cdef inline double _f2(double s, double p) noexcept nogil:
    return s * p + 2.0 * p * p * p


def painleve_march(double p0, double dp0, double s_start, double ds, Py_ssize_t nsteps,
                   double rtol, double atol, double guard, Py_ssize_t max_substeps):
    """March P'' = sP + 2P^3 from s_start towards s_start - nsteps*ds.

    Returns (P, dP, status, index); status 0 ok, 1 guard exceeded, 2 step control stalled.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] P = np.zeros(nsteps + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] D = np.zeros(nsteps + 1)
    cdef double[::1] Pv = P
    cdef double[::1] Dv = D
    cdef Py_ssize_t k, sub
    cdef double s, s_end, hstep, h, y0, y1, err, sc0, sc1, fac
    cdef double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b, k5a, k5b, k6a, k6b, k7a, k7b
    cdef double n0, n1, ta, tb
    cdef int status = 0
    Pv[0] = p0
    Dv[0] = dp0
    y0 = p0
    y1 = dp0
    h = -ds
    with nogil:
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
                k1a = y1
                k1b = _f2(s, y0)
                ta = y0 + h * A21 * k1a
                tb = y1 + h * A21 * k1b
                k2a = tb
                k2b = _f2(s + C2 * h, ta)
                ta = y0 + h * (A31 * k1a + A32 * k2a)
                tb = y1 + h * (A31 * k1b + A32 * k2b)
                k3a = tb
                k3b = _f2(s + C3 * h, ta)
                ta = y0 + h * (A41 * k1a + A42 * k2a + A43 * k3a)
                tb = y1 + h * (A41 * k1b + A42 * k2b + A43 * k3b)
                k4a = tb
                k4b = _f2(s + C4 * h, ta)
                ta = y0 + h * (A51 * k1a + A52 * k2a + A53 * k3a + A54 * k4a)
                tb = y1 + h * (A51 * k1b + A52 * k2b + A53 * k3b + A54 * k4b)
                k5a = tb
                k5b = _f2(s + C5 * h, ta)
                ta = y0 + h * (A61 * k1a + A62 * k2a + A63 * k3a + A64 * k4a + A65 * k5a)
                tb = y1 + h * (A61 * k1b + A62 * k2b + A63 * k3b + A64 * k4b + A65 * k5b)
                k6a = tb
                k6b = _f2(s + h, ta)
                n0 = y0 + h * (B1 * k1a + B3 * k3a + B4 * k4a + B5 * k5a + B6 * k6a)
                n1 = y1 + h * (B1 * k1b + B3 * k3b + B4 * k4b + B5 * k5b + B6 * k6b)
                k7a = n1
                k7b = _f2(s + h, n0)
                sc0 = atol + rtol * fmax(fabs(y0), fabs(n0))
                sc1 = atol + rtol * fmax(fabs(y1), fabs(n1))
                err = fmax(fabs(h * (E1 * k1a + E3 * k3a + E4 * k4a + E5 * k5a + E6 * k6a + E7 * k7a)) / sc0,
                           fabs(h * (E1 * k1b + E3 * k3b + E4 * k4b + E5 * k5b + E6 * k6b + E7 * k7b)) / sc1)
                if not isfinite(err):
                    err = 1e10
                if err <= 1.0:
                    s = s + h
                    y0 = n0
                    y1 = n1
                    if s - s_end < 1e-14 * ds:
                        s = s_end
                if err < 1e-10:
                    fac = 5.0
                else:
                    fac = fmin(5.0, fmax(0.2, 0.9 * pow(err, -0.2)))
                h = h * fac
                if h < -ds:
                    h = -ds
            if status != 0:
                break
            Pv[k + 1] = y0
            Dv[k + 1] = y1
            if not (fabs(y0) <= guard):
                status = 1
                break
    return P, D, status, k + 1 if nsteps > 0 else 0
