"""Compiled inner loops for the reflected random walks.

Edges are passed as three ``(E, 2)`` arrays: start points ``a``, edge
vectors ``d`` and inward unit normals ``nrm``.  Status codes returned by
the kernels are the ``ST_*`` constants below.
"""

import numpy as np
from numba import njit

ST_OK = 0
ST_VERTEX = 1
ST_BOUNCES = 2
ST_COUPLED = 3
ST_EVBUF = 4
ST_DOUBLE = 5

MAX_BOUNCES = 64
VERTEX_TOL = 1e-12


@njit(cache=True)
def _reflect_target(tx, ty, ax, ay, nx, ny):
    s = (tx - ax) * nx + (ty - ay) * ny
    return tx - 2.0 * s * nx, ty - 2.0 * s * ny, -2.0 * s


@njit(cache=True)
def billiard(px, py, qx, qy, a, d, nrm, corner_ok, ev_edge, ev_push):
    """Specular reflection of the move p -> q inside the polygon.

    Returns ``(fx, fy, n_events, status)``.  Events are written into
    ``ev_edge`` / ``ev_push`` (capacity ``2 * MAX_BOUNCES + 2``).  With
    ``corner_ok`` false an exact vertex hit returns ``ST_VERTEX``;
    otherwise the move is reflected off both edges meeting at the vertex.
    """
    E = a.shape[0]
    cx, cy = px, py
    tx, ty = qx, qy
    nev = 0
    for it in range(MAX_BOUNCES + 1):
        mx = tx - cx
        my = ty - cy
        best_t = np.inf
        best_k = -1
        best_u = 0.0
        for k in range(E):
            dn = mx * nrm[k, 0] + my * nrm[k, 1]
            if dn >= 0.0:
                continue
            st = (tx - a[k, 0]) * nrm[k, 0] + (ty - a[k, 1]) * nrm[k, 1]
            if st >= 0.0:
                continue
            sc = (cx - a[k, 0]) * nrm[k, 0] + (cy - a[k, 1]) * nrm[k, 1]
            if sc < 0.0:
                sc = 0.0
            t = sc / (sc - st)
            if t > best_t:
                continue
            xx = cx + t * mx
            yy = cy + t * my
            L2 = d[k, 0] * d[k, 0] + d[k, 1] * d[k, 1]
            u = ((xx - a[k, 0]) * d[k, 0] + (yy - a[k, 1]) * d[k, 1]) / L2
            ulen = np.sqrt(L2)
            if u * ulen < -VERTEX_TOL or (u - 1.0) * ulen > VERTEX_TOL:
                continue
            best_t = t
            best_k = k
            best_u = u
        if best_k < 0:
            return tx, ty, nev, ST_OK
        if it == MAX_BOUNCES:
            return tx, ty, nev, ST_BOUNCES
        k = best_k
        ulen = np.sqrt(d[k, 0] * d[k, 0] + d[k, 1] * d[k, 1])
        hit_vertex = best_u * ulen <= VERTEX_TOL or (1.0 - best_u) * ulen <= VERTEX_TOL
        cx = cx + best_t * mx
        cy = cy + best_t * my
        if hit_vertex:
            if not corner_ok:
                return tx, ty, nev, ST_VERTEX
            k2 = (k - 1) % E if best_u * ulen <= VERTEX_TOL else (k + 1) % E
            tx, ty, push = _reflect_target(tx, ty, a[k, 0], a[k, 1], nrm[k, 0], nrm[k, 1])
            ev_edge[nev] = k
            ev_push[nev] = push
            nev += 1
            s2 = (tx - a[k2, 0]) * nrm[k2, 0] + (ty - a[k2, 1]) * nrm[k2, 1]
            if s2 < 0.0:
                tx, ty, push = _reflect_target(tx, ty, a[k2, 0], a[k2, 1],
                                               nrm[k2, 0], nrm[k2, 1])
                ev_edge[nev] = k2
                ev_push[nev] = push
                nev += 1
            # restart from the vertex itself
            if best_u * ulen <= VERTEX_TOL:
                cx, cy = a[k, 0], a[k, 1]
            else:
                cx, cy = a[k, 0] + d[k, 0], a[k, 1] + d[k, 1]
        else:
            tx, ty, push = _reflect_target(tx, ty, a[k, 0], a[k, 1], nrm[k, 0], nrm[k, 1])
            ev_edge[nev] = k
            ev_push[nev] = push
            nev += 1
    return tx, ty, nev, ST_BOUNCES


@njit(cache=True)
def coupling_run(state, dW, a, d, nrm, eps_couple, step0, stride, continue_after,
                 record, split_double,
                 out_step, out_X, out_Y, out_c, ev_step, ev_which, ev_edge, ev_push):
    """Advance the mirror-coupled pair through the increments ``dW``.

    ``state`` is ``[Xx, Xy, Yx, Yy, coupled]`` and is updated in place.
    Returns ``(steps_done, n_out, n_ev, status)``.  On ``ST_VERTEX`` and
    ``ST_DOUBLE`` (both particles reflect in one step while
    ``split_double`` is set) the step ``steps_done`` was not taken and the
    caller must retry or refine it.
    """
    n = dW.shape[0]
    n_out = 0
    n_ev = 0
    cap = ev_step.shape[0]
    buf_e = np.empty(2 * MAX_BOUNCES + 2, dtype=np.int64)
    buf_p = np.empty(2 * MAX_BOUNCES + 2)
    for i in range(n):
        if n_ev + 4 * MAX_BOUNCES + 4 > cap:
            return i, n_out, n_ev, ST_EVBUF
        Xx, Xy, Yx, Yy = state[0], state[1], state[2], state[3]
        coupled = state[4] != 0.0
        wx, wy = dW[i, 0], dW[i, 1]
        if coupled:
            zx, zy = wx, wy
        else:
            mx = Yx - Xx
            my = Yy - Xy
            r = np.sqrt(mx * mx + my * my)
            mx /= r
            my /= r
            proj = mx * wx + my * wy
            zx = wx - 2.0 * mx * proj
            zy = wy - 2.0 * my * proj
        nXx, nXy, nex, st = billiard(Xx, Xy, Xx + wx, Xy + wy, a, d, nrm, False, buf_e, buf_p)
        if st != ST_OK:
            return i, n_out, n_ev, st
        step = step0 + i + 1
        for j in range(nex):
            ev_step[n_ev] = step
            ev_which[n_ev] = 0
            ev_edge[n_ev] = buf_e[j]
            ev_push[n_ev] = buf_p[j]
            n_ev += 1
        if coupled:
            nYx, nYy = nXx, nXy
        else:
            nYx, nYy, ney, st = billiard(Yx, Yy, Yx + zx, Yy + zy, a, d, nrm, False,
                                         buf_e, buf_p)
            if st != ST_OK:
                # undo X's events for the retried step
                n_ev -= nex
                return i, n_out, n_ev, st
            if split_double and nex > 0 and ney > 0:
                n_ev -= nex
                return i, n_out, n_ev, ST_DOUBLE
            for j in range(ney):
                ev_step[n_ev] = step
                ev_which[n_ev] = 1
                ev_edge[n_ev] = buf_e[j]
                ev_push[n_ev] = buf_p[j]
                n_ev += 1
        just_coupled = False
        if not coupled:
            sep = np.sqrt((nYx - nXx) ** 2 + (nYy - nXy) ** 2)
            if sep <= eps_couple:
                nYx, nYy = nXx, nXy
                coupled = True
                just_coupled = True
        state[0], state[1], state[2], state[3] = nXx, nXy, nYx, nYy
        state[4] = 1.0 if coupled else 0.0
        if record and (just_coupled or step % stride == 0):
            out_step[n_out] = step
            out_X[n_out, 0] = nXx
            out_X[n_out, 1] = nXy
            out_Y[n_out, 0] = nYx
            out_Y[n_out, 1] = nYy
            out_c[n_out] = coupled
            n_out += 1
        if just_coupled and not continue_after:
            return i + 1, n_out, n_ev, ST_COUPLED
    return n, n_out, n_ev, ST_OK


@njit(cache=True)
def reflect_batch(P, Q, a, d, nrm, out):
    """Billiard-reflect many independent moves; vertex hits bounce off both edges."""
    buf_e = np.empty(2 * MAX_BOUNCES + 2, dtype=np.int64)
    buf_p = np.empty(2 * MAX_BOUNCES + 2)
    worst = ST_OK
    for i in range(P.shape[0]):
        fx, fy, nev, st = billiard(P[i, 0], P[i, 1], Q[i, 0], Q[i, 1], a, d, nrm, True,
                                   buf_e, buf_p)
        out[i, 0] = fx
        out[i, 1] = fy
        if st != ST_OK:
            worst = st
    return worst
