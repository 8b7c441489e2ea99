"""Reference implementation of the flow kernel in vectorized numpy.

Same signatures and status codes as the compiled module; used when the
extension is unavailable and as its test oracle.
"""

import numpy as np

OK, MAX_STEPS, E_INCREASED, CONVEXITY_LOST, NEWTON_FAILED = 0, 1, 2, 3, 4

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50


def _derivatives(u, idx, strides, inv_d, gcan, Hcan):
    n = strides.size
    c = u[idx]
    grad = gcan.copy()
    H = Hcan.copy()
    for i in range(n):
        s = strides[i]
        up, dn = u[idx + s], u[idx - s]
        grad[:, i] += 0.5 * (up - dn) * inv_d[i]
        H[:, i, i] += (up - 2.0 * c + dn) * inv_d[i] ** 2
    if n == 2:
        s0, s1 = strides
        mixed = (u[idx + s0 + s1] - u[idx + s0 - s1] - u[idx - s0 + s1] + u[idx - s0 - s1]) \
            * 0.25 * inv_d[0] * inv_d[1]
        H[:, 0, 1] += mixed
        H[:, 1, 0] += mixed
    return grad, H


def _dual_points(x, Ua, la, ya):
    """Solve ``grad h_alpha(y) = x`` for every row; updates ``ya`` in place."""
    y = ya
    todo = np.ones(len(x), dtype=bool)
    for _ in range(NEWTON_MAX_ITER):
        ell = y[todo] @ Ua.T + la
        G = 0.5 * (np.log(ell) + 1.0) @ Ua - x[todo]
        done = np.max(np.abs(G), axis=1) <= NEWTON_TOL
        sub = np.flatnonzero(todo)
        todo[sub[done]] = False
        if not todo.any():
            return True
        keep = ~done
        ell, G, sub = ell[keep], G[keep], sub[keep]
        Ha = 0.5 * np.einsum("km,mi,mj->kij", 1.0 / ell, Ua, Ua)
        step = np.linalg.solve(Ha, G[..., None])[..., 0]
        yk, xk = y[sub], x[sub]
        psi0 = 0.5 * np.sum(ell * np.log(ell), axis=1) - np.sum(xk * yk, axis=1)
        slope = np.sum(G * step, axis=1)
        t = np.ones(len(sub))
        pending = np.ones(len(sub), dtype=bool)
        while pending.any():
            cand = yk - t[:, None] * step
            lc = cand @ Ua.T + la
            feas = np.all(lc > 0, axis=1)
            with np.errstate(invalid="ignore", divide="ignore"):
                psi = 0.5 * np.sum(lc * np.log(np.where(lc > 0, lc, 1.0)), axis=1) - np.sum(xk * cand, axis=1)
            small = t * np.max(np.abs(step), axis=1) < 1e-3
            ok = feas & (small | (psi <= psi0 - 1e-4 * t * slope))
            pending &= ~ok
            t[pending] *= 0.5
            if np.any(t[pending] < 1e-30):
                return False
        y[sub] = yk - t[:, None] * step
        tiny = np.max(np.abs(t[:, None] * step), axis=1) <= 1e-15 * (1.0 + np.max(np.abs(yk), axis=1))
        todo[sub[tiny]] = False
    ell = y @ Ua.T + la
    G = 0.5 * (np.log(ell) + 1.0) @ Ua - x
    return bool(np.all(np.max(np.abs(G), axis=1) <= 10 * NEWTON_TOL))


def evaluate(u, idx, strides, inv_d, gcan, Hcan, rhs, Ua, la, ya, b, R, coef):
    """Residual and stability coefficient at every interior node.

    Returns ``(status, bad)``; ``bad`` is the offending position in ``idx``
    or ``-1``.
    """
    n = strides.size
    grad, H = _derivatives(u, idx, strides, inv_d, gcan, Hcan)
    if n == 1:
        detH = H[:, 0, 0]
        bad = np.flatnonzero(~(detH > 0))
    else:
        detH = H[:, 0, 0] * H[:, 1, 1] - H[:, 0, 1] * H[:, 1, 0]
        bad = np.flatnonzero(~((H[:, 0, 0] > 0) & (detH > 0)))
    if bad.size:
        return CONVEXITY_LOST, int(bad[0])
    if not _dual_points(grad, Ua, la, ya):
        return NEWTON_FAILED, -1
    ell = ya @ Ua.T + la
    Ha = 0.5 * np.einsum("km,mi,mj->kij", 1.0 / ell, Ua, Ua)
    dmin2 = 1.0 / np.max(inv_d) ** 2
    if n == 1:
        F = 1.0 / Ha[:, 0, 0]
        R[:] = F * H[:, 0, 0] + b * F * H[:, 0, 0] - rhs
        coef[:] = 2.0 * (F + b * F) * dmin2 * inv_d[0] ** 2
    else:
        detHa = Ha[:, 0, 0] * Ha[:, 1, 1] - Ha[:, 0, 1] ** 2
        F00, F11, F01 = Ha[:, 1, 1] / detHa, Ha[:, 0, 0] / detHa, -Ha[:, 0, 1] / detHa
        detF = 1.0 / detHa
        tr = F00 * H[:, 0, 0] + F11 * H[:, 1, 1] + 2.0 * F01 * H[:, 0, 1]
        R[:] = tr + b * detF * detH - rhs
        M00 = F00 + b * detF * H[:, 1, 1]
        M11 = F11 + b * detF * H[:, 0, 0]
        M01 = F01 - b * detF * H[:, 0, 1]
        coef[:] = (2.0 * M00 * inv_d[0] ** 2 + 2.0 * M11 * inv_d[1] ** 2
                   + np.abs(M01) * inv_d[0] * inv_d[1]) * dmin2
    return OK, -1


def run_flow(u, idx, strides, inv_d, gcan, Hcan, rhs, Ua, la, ya, b, dt, max_steps, tol,
             cell, nfact, step0, t0, dJ0, E_prev, e_slack, record_every, record_first,
             records, R, coef):
    """Explicit steps ``u += dt * R`` on interior nodes.

    Each evaluation writes a record ``(step, t, dt, res_sup, res_l2, E, dJ)``
    when ``step % record_every == 0`` or the run ends.  ``E_prev < 0`` means
    no previous energy.  Returns ``(status, step, t, dJ, E, bad, n_records)``;
    on statuses 2-4 after at least one update the previous state is restored.
    """
    step, t, dJ = step0, t0, dJ0
    nrec = 0
    u_prev = np.empty(idx.size)
    moved = False
    first = True

    def restore():
        u[idx] = u_prev

    while True:
        status, bad = evaluate(u, idx, strides, inv_d, gcan, Hcan, rhs, Ua, la, ya, b, R, coef)
        if status != OK:
            if moved:
                restore()
                t -= dt
                step -= 1
                dJ = dJ_prev
            return status, step, t, dJ, E_prev, bad, nrec
        sq = float(R @ R)
        E = nfact * cell * sq
        if moved:
            if E > E_prev * (1.0 + e_slack):
                restore()
                return E_INCREASED, step - 1, t - dt, dJ_prev, E_prev, -1, nrec
            dJ = dJ_prev - 0.5 * dt * (E_prev + E)
        res_sup = float(np.max(np.abs(R))) if R.size else 0.0
        done = res_sup <= tol
        final = done or step - step0 >= max_steps
        if (step % record_every == 0 or final) and (record_first or not first):
            records[nrec] = (step, t, dt, res_sup, np.sqrt(cell * sq), E, dJ)
            nrec += 1
        first = False
        if done:
            return OK, step, t, dJ, E, -1, nrec
        if final:
            return MAX_STEPS, step, t, dJ, E, -1, nrec
        u_prev[:] = u[idx]
        dJ_prev = dJ
        E_prev = E
        u[idx] += dt * R
        t += dt
        step += 1
        moved = True
