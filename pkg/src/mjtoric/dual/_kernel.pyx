# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled flow kernel; mirrors ``_kernel_py`` node by node."""

from libc.math cimport log, sqrt, fabs

import numpy as np

cdef int OK = 0
cdef int MAX_STEPS = 1
cdef int E_INCREASED = 2
cdef int CONVEXITY_LOST = 3
cdef int NEWTON_FAILED = 4

cdef double NEWTON_TOL = 1e-12
cdef int NEWTON_MAX_ITER = 50


cdef inline int _hess_alpha(double[:, ::1] Ua, double[::1] la, double y0, double y1, int n,
                            double* H00, double* H01, double* H11) noexcept nogil:
    cdef Py_ssize_t j
    cdef double ell, w
    H00[0] = 0.0
    H01[0] = 0.0
    H11[0] = 0.0
    for j in range(Ua.shape[0]):
        ell = Ua[j, 0] * y0 + la[j]
        if n == 2:
            ell += Ua[j, 1] * y1
        if ell <= 0:
            return 0
        w = 0.5 / ell
        H00[0] += w * Ua[j, 0] * Ua[j, 0]
        if n == 2:
            H01[0] += w * Ua[j, 0] * Ua[j, 1]
            H11[0] += w * Ua[j, 1] * Ua[j, 1]
    return 1


cdef inline int _psi(double[:, ::1] Ua, double[::1] la, double y0, double y1, int n,
                     double x0, double x1, double* out) noexcept nogil:
    # psi(y) = h_alpha(y) - <x, y>; returns 0 when y is infeasible
    cdef Py_ssize_t j
    cdef double ell, s = 0.0
    for j in range(Ua.shape[0]):
        ell = Ua[j, 0] * y0 + la[j]
        if n == 2:
            ell += Ua[j, 1] * y1
        if ell <= 0:
            return 0
        s += 0.5 * ell * log(ell)
    s -= x0 * y0
    if n == 2:
        s -= x1 * y1
    out[0] = s
    return 1


cdef inline void _grad_alpha(double[:, ::1] Ua, double[::1] la, double y0, double y1, int n,
                             double* g0, double* g1) noexcept nogil:
    cdef Py_ssize_t j
    cdef double ell, w
    g0[0] = 0.0
    g1[0] = 0.0
    for j in range(Ua.shape[0]):
        ell = Ua[j, 0] * y0 + la[j]
        if n == 2:
            ell += Ua[j, 1] * y1
        w = 0.5 * (log(ell) + 1.0)
        g0[0] += w * Ua[j, 0]
        if n == 2:
            g1[0] += w * Ua[j, 1]


cdef int _newton(double[:, ::1] Ua, double[::1] la, double x0, double x1, int n,
                 double* y0, double* y1) noexcept nogil:
    cdef int it
    cdef double g0, g1, H00, H01, H11, det, s0, s1, t, psi0, psi, c0, c1, slope, smax
    for it in range(NEWTON_MAX_ITER):
        _grad_alpha(Ua, la, y0[0], y1[0], n, &g0, &g1)
        g0 -= x0
        g1 = g1 - x1 if n == 2 else 0.0
        if fabs(g0) <= NEWTON_TOL and fabs(g1) <= NEWTON_TOL:
            return 1
        _hess_alpha(Ua, la, y0[0], y1[0], n, &H00, &H01, &H11)
        if n == 1:
            s0 = g0 / H00
            s1 = 0.0
        else:
            det = H00 * H11 - H01 * H01
            s0 = (H11 * g0 - H01 * g1) / det
            s1 = (H00 * g1 - H01 * g0) / det
        slope = g0 * s0 + g1 * s1
        smax = fabs(s0) if fabs(s0) > fabs(s1) else fabs(s1)
        _psi(Ua, la, y0[0], y1[0], n, x0, x1, &psi0)
        t = 1.0
        while True:
            c0 = y0[0] - t * s0
            c1 = y1[0] - t * s1
            if _psi(Ua, la, c0, c1, n, x0, x1, &psi):
                if t * smax < 1e-3 or psi <= psi0 - 1e-4 * t * slope:
                    break
            t *= 0.5
            if t < 1e-30:
                return 0
        if t * smax <= 1e-15 * (1.0 + (fabs(y0[0]) if fabs(y0[0]) > fabs(y1[0]) else fabs(y1[0]))):
            y0[0] = c0
            y1[0] = c1
            return 1
        y0[0] = c0
        y1[0] = c1
    _grad_alpha(Ua, la, y0[0], y1[0], n, &g0, &g1)
    g0 -= x0
    g1 = g1 - x1 if n == 2 else 0.0
    return 1 if fabs(g0) <= 10 * NEWTON_TOL and fabs(g1) <= 10 * NEWTON_TOL else 0


cdef int _evaluate(double[::1] u, long[::1] idx, long[::1] strides, double[::1] inv_d,
                   double[:, ::1] gcan, double[:, :, ::1] Hcan, double[::1] rhs,
                   double[:, ::1] Ua, double[::1] la, double[:, ::1] ya, double b,
                   double[::1] R, double[::1] coef, long* bad) noexcept nogil:
    cdef int n = strides.shape[0]
    cdef Py_ssize_t k, p, s0, s1 = 0
    cdef double id0 = inv_d[0], id1 = 0.0, dmin2, c
    cdef double x0, x1 = 0.0, h00, h01 = 0.0, h11 = 0.0, detH
    cdef double y0, y1, A00, A01, A11, detA, F00, F01, F11, detF, M00, M01, M11
    s0 = strides[0]
    if n == 2:
        s1 = strides[1]
        id1 = inv_d[1]
    dmin2 = id0 if id0 > id1 else id1
    dmin2 = 1.0 / (dmin2 * dmin2)
    for k in range(idx.shape[0]):
        p = idx[k]
        c = u[p]
        x0 = gcan[k, 0] + 0.5 * (u[p + s0] - u[p - s0]) * id0
        h00 = Hcan[k, 0, 0] + (u[p + s0] - 2.0 * c + u[p - s0]) * id0 * id0
        if n == 2:
            x1 = gcan[k, 1] + 0.5 * (u[p + s1] - u[p - s1]) * id1
            h11 = Hcan[k, 1, 1] + (u[p + s1] - 2.0 * c + u[p - s1]) * id1 * id1
            h01 = Hcan[k, 0, 1] + (u[p + s0 + s1] - u[p + s0 - s1] - u[p - s0 + s1]
                                   + u[p - s0 - s1]) * 0.25 * id0 * id1
            detH = h00 * h11 - h01 * h01
            if not (h00 > 0 and detH > 0):
                bad[0] = k
                return CONVEXITY_LOST
        else:
            detH = h00
            if not (h00 > 0):
                bad[0] = k
                return CONVEXITY_LOST
        y0 = ya[k, 0]
        y1 = ya[k, 1] if n == 2 else 0.0
        if not _newton(Ua, la, x0, x1, n, &y0, &y1):
            bad[0] = k
            return NEWTON_FAILED
        ya[k, 0] = y0
        if n == 2:
            ya[k, 1] = y1
        _hess_alpha(Ua, la, y0, y1, n, &A00, &A01, &A11)
        if n == 1:
            F00 = 1.0 / A00
            R[k] = (1.0 + b) * F00 * h00 - rhs[k]
            coef[k] = 2.0 * (1.0 + b) * F00 * dmin2 * id0 * id0
        else:
            detA = A00 * A11 - A01 * A01
            F00 = A11 / detA
            F11 = A00 / detA
            F01 = -A01 / detA
            detF = 1.0 / detA
            R[k] = F00 * h00 + F11 * h11 + 2.0 * F01 * h01 + b * detF * detH - rhs[k]
            M00 = F00 + b * detF * h11
            M11 = F11 + b * detF * h00
            M01 = F01 - b * detF * h01
            coef[k] = (2.0 * M00 * id0 * id0 + 2.0 * M11 * id1 * id1 + fabs(M01) * id0 * id1) * dmin2
    return OK


def evaluate(double[::1] u, long[::1] idx, long[::1] strides, double[::1] inv_d,
             double[:, ::1] gcan, double[:, :, ::1] Hcan, double[::1] rhs,
             double[:, ::1] Ua, double[::1] la, double[:, ::1] ya, double b,
             double[::1] R, double[::1] coef):
    cdef long bad = -1
    cdef int status
    with nogil:
        status = _evaluate(u, idx, strides, inv_d, gcan, Hcan, rhs, Ua, la, ya, b, R, coef, &bad)
    return status, bad


def run_flow(double[::1] u, long[::1] idx, long[::1] strides, double[::1] inv_d,
             double[:, ::1] gcan, double[:, :, ::1] Hcan, double[::1] rhs,
             double[:, ::1] Ua, double[::1] la, double[:, ::1] ya, double b,
             double dt, long max_steps, double tol, double cell, double nfact,
             long step0, double t0, double dJ0, double E_prev, double e_slack,
             long record_every, bint record_first, double[:, ::1] records,
             double[::1] R, double[::1] coef):
    cdef Py_ssize_t K = idx.shape[0], k
    cdef long step = step0, bad = -1
    cdef double t = t0, dJ = dJ0, dJ_prev = dJ0, E = 0.0, sq, res_sup, r
    cdef long nrec = 0
    cdef int status
    cdef bint moved = False, first = True, done, final
    cdef double[::1] u_prev = np.empty(K)
    with nogil:
        while True:
            status = _evaluate(u, idx, strides, inv_d, gcan, Hcan, rhs, Ua, la, ya, b, R, coef, &bad)
            if status != OK:
                if moved:
                    for k in range(K):
                        u[idx[k]] = u_prev[k]
                    t -= dt
                    step -= 1
                    dJ = dJ_prev
                break
            sq = 0.0
            res_sup = 0.0
            for k in range(K):
                r = R[k]
                sq += r * r
                if fabs(r) > res_sup:
                    res_sup = fabs(r)
            E = nfact * cell * sq
            if moved:
                if E > E_prev * (1.0 + e_slack):
                    for k in range(K):
                        u[idx[k]] = u_prev[k]
                    t -= dt
                    step -= 1
                    dJ = dJ_prev
                    status = E_INCREASED
                    break
                dJ = dJ_prev - 0.5 * dt * (E_prev + E)
            done = res_sup <= tol
            final = done or step - step0 >= max_steps
            if (step % record_every == 0 or final) and (record_first or not first):
                records[nrec, 0] = step
                records[nrec, 1] = t
                records[nrec, 2] = dt
                records[nrec, 3] = res_sup
                records[nrec, 4] = sqrt(cell * sq)
                records[nrec, 5] = E
                records[nrec, 6] = dJ
                nrec += 1
            first = False
            if done:
                status = OK
                break
            if final:
                status = MAX_STEPS
                break
            for k in range(K):
                u_prev[k] = u[idx[k]]
            dJ_prev = dJ
            E_prev = E
            for k in range(K):
                u[idx[k]] += dt * R[k]
            t += dt
            step += 1
            moved = True
    if status == OK or status == MAX_STEPS:
        return status, step, t, dJ, E, -1, nrec
    return status, step, t, dJ, E_prev, bad, nrec
