"""Mirror coupling of two reflected Brownian motions in a polygon.

The scheme is Euler-Maruyama with specular (billiard) reflection.  The
increment of ``Y`` is the mirror image of the increment of ``X`` in the
perpendicular bisector of the pair; once the pair is closer than
``eps_couple`` (default ``2 * sqrt(dt)``) it is declared coupled and
``Y`` follows ``X``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .errors import (CoupledStateError, GeometryError, StepTooLargeError,
                     VertexHitError)
from .geometry import (BOUNDARY, MEMBERSHIP_TOL, Domain, Line2, Region,
                       TriangleMarkers, as_point, line_domain_clip,
                       perpendicular_bisector, triangle_corners)

CHUNK = 8192

# Rule (M) tolerance constant, calibrated on the rectangle and wedge
# oracles (observed ratios below 1e-11) and frozen with a wide margin.
RULE_M_C = 1.0


@dataclass(frozen=True)
class IncrementPair:
    dW: np.ndarray
    dZ: np.ndarray


@dataclass(frozen=True, eq=False)
class MirrorState:
    t: float
    X: np.ndarray
    Y: np.ndarray
    coupled: bool
    K: Line2 | None
    alpha: float | None


@dataclass(frozen=True)
class BoundaryEvent:
    t: float
    which: str
    edge: int
    push: float


def _edge_arrays(D: Domain):
    a = np.ascontiguousarray(D.edges[:, 0])
    d = np.ascontiguousarray(D.edges[:, 1] - D.edges[:, 0])
    nrm = np.ascontiguousarray(D.inward_normals)
    return a, d, nrm


def mirror_increment(dW, X, Y, tol: float = 1e-12) -> IncrementPair:
    """Mirror image of ``dW`` in the bisector of ``X`` and ``Y``."""
    dW = np.asarray(dW, dtype=float)
    X, Y = as_point(X), as_point(Y)
    m = Y - X
    r = math.hypot(m[0], m[1])
    if r <= tol:
        raise CoupledStateError("X and Y coincide; mirror increment undefined")
    m = m / r
    dZ = dW - 2.0 * m * float(np.dot(m, dW))
    return IncrementPair(dW.copy(), dZ)


def reflect_into_domain(D: Domain, start, end, vertex_policy: str = "corner"):
    """Billiard-reflect the move ``start -> end`` back into ``closure(D)``.

    Returns ``(final_point, events)`` with one :class:`BoundaryEvent` per
    bounce (``t`` is 0 and ``which`` is ``"X"``; callers relabel).  An
    exact vertex hit bounces off both incident edges when
    ``vertex_policy == "corner"`` and raises :class:`VertexHitError` when
    it is ``"raise"``.
    """
    p, q = as_point(start), as_point(end)
    if D.locate(p[None])[0] < BOUNDARY:
        raise GeometryError("start point is outside the domain")
    a, d, nrm = _edge_arrays(D)
    buf_e = np.empty(2 * K.MAX_BOUNCES + 2, dtype=np.int64)
    buf_p = np.empty(2 * K.MAX_BOUNCES + 2)
    fx, fy, nev, st = K.billiard(p[0], p[1], q[0], q[1], a, d, nrm,
                                 vertex_policy == "corner", buf_e, buf_p)
    if st == K.ST_VERTEX:
        raise VertexHitError("move passes through a polygon vertex")
    if st == K.ST_BOUNCES:
        raise StepTooLargeError(f"more than {K.MAX_BOUNCES} bounces in one step")
    events = [BoundaryEvent(0.0, "X", int(buf_e[i]), float(buf_p[i])) for i in range(nev)]
    return np.array([fx, fy]), events


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded states of one coupled pair.

    States are stored column-wise; :attr:`states` and :attr:`events`
    materialise the per-record objects on demand.
    """

    t: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    coupled: np.ndarray
    event_t: np.ndarray
    event_which: np.ndarray
    event_edge: np.ndarray
    event_push: np.ndarray
    zeta: float | None
    seed: int
    dt: float
    path_index: int = 0
    stride: int = 1
    reference: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0]))
    orientation: float = 1.0

    def __len__(self):
        return len(self.t)

    @property
    def n_precoupling(self) -> int:
        """Number of leading states before the pair met."""
        idx = np.flatnonzero(self.coupled)
        return int(idx[0]) if len(idx) else len(self.t)

    def mirror_lines(self) -> tuple[np.ndarray, np.ndarray]:
        """Origins and unit directions of the mirror; NaN once coupled."""
        diff = self.Y - self.X
        r = np.linalg.norm(diff, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            direction = np.stack([-diff[:, 1], diff[:, 0]], axis=1) / r[:, None]
        origin = 0.5 * (self.X + self.Y)
        bad = self.coupled | (r == 0)
        origin[bad] = np.nan
        direction[bad] = np.nan
        return origin, direction

    def alpha(self) -> np.ndarray:
        """Mirror angle against :attr:`reference`, in [0, pi)."""
        _, d = self.mirror_lines()
        r = self.reference
        ang = np.arctan2(self.orientation * (r[0] * d[:, 1] - r[1] * d[:, 0]),
                         r[0] * d[:, 0] + r[1] * d[:, 1])
        return np.mod(ang, np.pi)

    @property
    def states(self) -> list[MirrorState]:
        o, d = self.mirror_lines()
        al = self.alpha()
        out = []
        for i in range(len(self.t)):
            c = bool(self.coupled[i])
            line = None if c else Line2(o[i], d[i])
            out.append(MirrorState(float(self.t[i]), self.X[i].copy(), self.Y[i].copy(), c,
                                   line, None if c else float(al[i])))
        return out

    @property
    def events(self) -> list[BoundaryEvent]:
        return [BoundaryEvent(float(t), "XY"[int(w)], int(e), float(p))
                for t, w, e, p in zip(self.event_t, self.event_which,
                                      self.event_edge, self.event_push)]

    @property
    def event_steps(self) -> np.ndarray:
        return np.rint(self.event_t / self.dt).astype(np.int64)


def _reference_for(D: Domain):
    if D.kind == "obtuse-triangle":
        try:
            C1, C2, _ = triangle_corners(D)
        except GeometryError:
            return np.array([1.0, 0.0]), 1.0
        u = C2 - C1
        return u / np.linalg.norm(u), 1.0
    return np.array([1.0, 0.0]), 1.0


def path_generators(seed: int, path_index: int):
    """Main and redraw generators for one path, independent of ensemble order."""
    main, redraw = np.random.SeedSequence(seed, spawn_key=(path_index,)).spawn(2)
    return np.random.default_rng(main), np.random.default_rng(redraw)


class _Runner:
    """Drives the compiled stepper and accumulates its output buffers."""

    def __init__(self, D, state, dt, eps, stride, continue_after, redraw, refine_depth):
        self.edges = _edge_arrays(D)
        self.state = state
        self.dt = dt
        self.eps = eps
        self.stride = stride
        self.continue_after = continue_after
        self.redraw = redraw
        self.refine_depth = refine_depth
        self.steps, self.X, self.Y, self.C = [], [], [], []
        self.ev = {"step": [], "which": [], "edge": [], "push": []}

    def record(self, step):
        st = self.state
        self.steps.append(np.array([step], dtype=np.int64))
        self.X.append(st[None, 0:2].copy())
        self.Y.append(st[None, 2:4].copy())
        self.C.append(np.array([st[4] != 0.0]))

    def _buffers(self, cap):
        if getattr(self, "_cap", -1) < cap:
            ecap = 8 * cap + 8 * K.MAX_BOUNCES
            self._cap = cap
            self._out = (np.empty(cap + 1, dtype=np.int64), np.empty((cap + 1, 2)),
                         np.empty((cap + 1, 2)), np.empty(cap + 1, dtype=np.bool_))
            self._evb = (np.empty(ecap, dtype=np.int64), np.empty(ecap, dtype=np.int8),
                         np.empty(ecap, dtype=np.int64), np.empty(ecap))
        return self._out, self._evb

    def call(self, dW, step0, record, split):
        (out_step, out_X, out_Y, out_c), (e_step, e_which, e_edge, e_push) = \
            self._buffers(max(len(dW), CHUNK))
        a, d, nrm = self.edges
        took, n_out, n_ev, st = K.coupling_run(
            self.state, dW, a, d, nrm, self.eps, step0, self.stride, self.continue_after,
            record, split, out_step, out_X, out_Y, out_c, e_step, e_which, e_edge, e_push)
        if n_out:
            self.steps.append(out_step[:n_out].copy())
            self.X.append(out_X[:n_out].copy())
            self.Y.append(out_Y[:n_out].copy())
            self.C.append(out_c[:n_out].copy())
        if n_ev:
            for key, arr in (("step", e_step), ("which", e_which),
                             ("edge", e_edge), ("push", e_push)):
                self.ev[key].append(arr[:n_ev].copy())
        if st == K.ST_BOUNCES:
            raise StepTooLargeError(f"more than {K.MAX_BOUNCES} bounces in one step; reduce dt")
        return took, st

    def refined_step(self, inc, h, step, depth):
        """Take one step of length ``h`` as two Brownian-bridge halves."""
        mid = 0.5 * inc + math.sqrt(h / 4.0) * self.redraw.standard_normal(2)
        for part in (mid, inc - mid):
            part = part[None].copy()
            while True:
                split = depth + 1 < self.refine_depth
                _, st = self.call(part, step - 1, False, split)
                if st == K.ST_VERTEX:
                    part[0] = self.redraw.standard_normal(2) * math.sqrt(h / 2.0)
                    continue
                if st == K.ST_DOUBLE:
                    st = self.refined_step(part[0], h / 2.0, step, depth + 1)
                break
            if st == K.ST_COUPLED:
                return st
        return K.ST_OK


def simulate_coupling(D: Domain, x, y, dt: float, t_max: float, seed: int, *,
                      path_index: int = 0, eps_couple: float | None = None,
                      stride: int = 1, continue_after_coupling: bool = False,
                      refine_depth: int = 4, reference=None) -> Trajectory:
    """Simulate the mirror coupling started from ``(x, y)``.

    Increments are centred Gaussians with covariance ``dt * I`` drawn from
    a generator keyed by ``(seed, path_index)``.  The run stops at
    ``t_max`` or at the coupling time unless ``continue_after_coupling``
    is set, in which case ``Y`` moves with ``X`` until ``t_max``.  Only
    every ``stride``-th state is stored (plus the initial state and the
    coupling state).

    A step in which both particles would reflect is split into two
    Brownian-bridge halves, recursively up to ``refine_depth`` levels;
    ``refine_depth=0`` disables this and reflects both particles in the
    same step.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    x, y = as_point(x), as_point(y)
    if np.any(D.locate(np.array([x, y])) < BOUNDARY):
        raise GeometryError("start points must lie in the closed domain")
    eps = 2.0 * math.sqrt(dt) if eps_couple is None else float(eps_couple)
    if reference is None:
        ref, orient = _reference_for(D)
    else:
        ref, orient = np.asarray(reference[0], float), float(reference[1])
    n_steps = int(round(t_max / dt))
    rng, redraw = path_generators(seed, path_index)
    sdt = math.sqrt(dt)

    coupled0 = float(np.linalg.norm(y - x)) <= eps
    if coupled0:
        y = x.copy()
    state = np.array([x[0], x[1], y[0], y[1], 1.0 if coupled0 else 0.0])
    run = _Runner(D, state, dt, eps, stride, continue_after_coupling, redraw, refine_depth)
    run.record(0)
    zeta = 0.0 if coupled0 else None
    if coupled0 and not continue_after_coupling:
        n_steps = 0

    done = 0
    stopped = False
    while done < n_steps and not stopped:
        m = min(CHUNK, n_steps - done)
        dW = rng.standard_normal((m, 2)) * sdt
        i = 0
        while i < m:
            was_coupled = state[4] != 0.0
            took, st = run.call(dW[i:], done + i, True, refine_depth > 0)
            i += took
            if st == K.ST_VERTEX:
                dW[i] = redraw.standard_normal(2) * sdt
            elif st == K.ST_DOUBLE:
                step = done + i + 1
                st = run.refined_step(dW[i], dt, step, 0)
                i += 1
                if state[4] != 0.0 and not was_coupled or step % stride == 0:
                    run.record(step)
            if zeta is None and state[4] != 0.0:
                zeta = float(run.steps[-1][np.flatnonzero(run.C[-1])[0]]) * dt
            if st == K.ST_COUPLED and not continue_after_coupling:
                stopped = True
                break
        done += i

    ev = run.ev
    ev_step = np.concatenate(ev["step"]) if ev["step"] else np.empty(0, np.int64)
    order = np.argsort(ev_step, kind="stable")
    cat = lambda key, dtype: (np.concatenate(ev[key]) if ev[key] else np.empty(0, dtype))[order]
    return Trajectory(
        t=np.concatenate(run.steps) * dt,
        X=np.concatenate(run.X), Y=np.concatenate(run.Y), coupled=np.concatenate(run.C),
        event_t=ev_step[order] * dt,
        event_which=cat("which", np.int8), event_edge=cat("edge", np.int64),
        event_push=cat("push", float),
        zeta=zeta, seed=int(seed), dt=float(dt), path_index=int(path_index),
        stride=int(stride), reference=ref, orientation=orient)


# ---------------------------------------------------------------------------
# Rule (M)


@dataclass(frozen=True)
class RuleMWindow:
    edge: int
    t_start: float
    t_end: float
    n_events: int
    hinge_drift: float
    max_alpha_decrease: float
    hinge_at_infinity: bool
    clear_of_other_edges: bool


@dataclass
class RuleMReport:
    windows: list[RuleMWindow]
    dt: float
    max_hinge_drift: float = 0.0
    max_alpha_decrease: float = 0.0

    def violations(self, C: float = RULE_M_C) -> list[RuleMWindow]:
        lim = C * math.sqrt(self.dt)
        out = []
        for w in self.windows:
            if not w.clear_of_other_edges:
                continue
            drift_bad = (not w.hinge_at_infinity) and w.hinge_drift > lim
            if drift_bad or w.max_alpha_decrease > lim:
                out.append(w)
        return out

    def passes(self, C: float = RULE_M_C) -> bool:
        return not self.violations(C)


def _hinge_and_angle(origin, direction, ea, ed):
    """Intersection of each mirror with the edge line and the acute angle."""
    eu = ed / np.linalg.norm(ed)
    cross = direction[:, 0] * eu[1] - direction[:, 1] * eu[0]
    dot = direction @ eu
    alpha = np.arctan2(np.abs(cross), np.abs(dot))
    with np.errstate(divide="ignore", invalid="ignore"):
        s = ((ea[0] - origin[:, 0]) * eu[1] - (ea[1] - origin[:, 1]) * eu[0]) / cross
    hinge = origin + s[:, None] * direction
    return hinge, alpha, np.abs(cross)


def check_rule_M(traj: Trajectory, D: Domain) -> RuleMReport:
    """Monitor hinge fixity and angle monotonicity on single-edge windows.

    A window is a maximal run of states whose boundary events all involve
    one polygon edge ``I``.  Steps with events on two or more edges split
    windows and belong to none.  Windows whose mirror is parallel to the
    edge line report ``hinge_at_infinity`` and are excluded from the drift
    statistic.
    """
    if traj.stride != 1:
        raise ValueError("rule (M) monitoring needs every state (stride=1)")
    n_pre = traj.n_precoupling
    report = RuleMReport(windows=[], dt=traj.dt)
    if n_pre < 2 or len(traj.event_t) == 0:
        return report
    steps = traj.event_steps
    keep = steps <= n_pre - 1
    steps, edges = steps[keep], traj.event_edge[keep]
    if len(steps) == 0:
        return report
    uniq, first = np.unique(steps, return_index=True)
    bounds = list(first[1:]) + [len(steps)]
    step_edge = []
    for s, lo, hi in zip(uniq, first, bounds):
        es = np.unique(edges[lo:hi])
        step_edge.append((int(s), int(es[0]) if len(es) == 1 else -1))

    groups = []
    for j, (s, e) in enumerate(step_edge):
        if e >= 0 and groups and groups[-1][2] == e and groups[-1][1] == j - 1:
            groups[-1][1] = j
        elif e >= 0:
            groups.append([j, j, e])
    origin, direction = traj.mirror_lines()
    other_clear = 2.0 * math.sqrt(traj.dt)
    for ja, jb, e in groups:
        lo = step_edge[ja - 1][0] if ja > 0 else 0
        hi = step_edge[jb + 1][0] - 1 if jb + 1 < len(step_edge) else n_pre - 1
        if hi <= lo:
            continue
        o, dr = origin[lo:hi + 1], direction[lo:hi + 1]
        hinge, alpha, sin_a = _hinge_and_angle(o, dr, D.edges[e, 0], D.edges[e, 1] - D.edges[e, 0])
        at_inf = bool(np.any(sin_a < 1e-9))
        drift = float(np.max(np.linalg.norm(hinge - hinge[0], axis=1))) if not at_inf else math.nan
        dec = float(max(0.0, np.max(alpha[:-1] - alpha[1:]))) if len(alpha) > 1 else 0.0
        others = [k for k in range(D.n) if k != e]
        pts = np.concatenate([traj.X[lo:hi + 1], traj.Y[lo:hi + 1]])
        clear = bool(np.min(D.edge_distances(pts)[:, others]) >= other_clear)
        report.windows.append(RuleMWindow(e, float(traj.t[lo]), float(traj.t[hi]),
                                          int(jb - ja + 1), drift, dec, at_inf, clear))
    usable = [w for w in report.windows if w.clear_of_other_edges]
    drifts = [w.hinge_drift for w in usable if not w.hinge_at_infinity]
    report.max_hinge_drift = max(drifts, default=0.0)
    report.max_alpha_decrease = max((w.max_alpha_decrease for w in usable), default=0.0)
    return report


# ---------------------------------------------------------------------------
# Confinement of the mirror


@dataclass(frozen=True)
class ConfinementReport:
    passed: bool
    n_states: int
    time: float | None = None
    point: tuple[float, float] | None = None
    state_index: int | None = None


def _clip_lines_convex(D: Domain, origin, direction):
    """Parameter interval of each line inside a convex polygon."""
    a = D.edges[:, 0]
    nrm = D.inward_normals
    nd = direction @ nrm.T
    c = np.einsum("ek,nek->ne", nrm, origin[:, None, :] - a[None])
    lo = np.full(len(origin), -np.inf)
    hi = np.full(len(origin), np.inf)
    ok = np.ones(len(origin), dtype=bool)
    eps = 1e-15
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = -c / nd
    pos = nd > eps
    neg = nd < -eps
    par = ~(pos | neg)
    lo = np.max(np.where(pos, bound, -np.inf), axis=1)
    hi = np.min(np.where(neg, bound, np.inf), axis=1)
    ok &= ~np.any(par & (c < -1e-12), axis=1)
    ok &= hi - lo > 1e-12
    return lo, hi, ok


def mirror_confinement(traj: Trajectory, D: Domain, A: Region,
                       resolution: float | None = None,
                       tol: float = MEMBERSHIP_TOL) -> ConfinementReport:
    """Check that every pre-coupling mirror meets the domain inside ``A``."""
    n_pre = traj.n_precoupling
    if n_pre == 0:
        return ConfinementReport(True, 0)
    step = resolution if resolution is not None else 1e-3 * D.diameter
    origin, direction = traj.mirror_lines()
    origin, direction = origin[:n_pre], direction[:n_pre]
    if D.is_convex:
        lo, hi, ok = _clip_lines_convex(D, origin, direction)
        idx = np.flatnonzero(ok)
        P = origin[idx] + lo[idx, None] * direction[idx]
        Q = origin[idx] + hi[idx, None] * direction[idx]
    else:
        idx_l, P_l, Q_l = [], [], []
        for i in range(n_pre):
            for p, q in line_domain_clip(Line2(origin[i], direction[i]), D):
                idx_l.append(i)
                P_l.append(p)
                Q_l.append(q)
        idx = np.asarray(idx_l, dtype=np.int64)
        P = np.asarray(P_l).reshape(-1, 2)
        Q = np.asarray(Q_l).reshape(-1, 2)
    hit = A.first_violation(P, Q, step, tol)
    if hit is None:
        return ConfinementReport(True, n_pre)
    j, pt = hit
    i = int(idx[j])
    return ConfinementReport(False, n_pre, float(traj.t[i]), (float(pt[0]), float(pt[1])), i)


def angle_window_violations(traj: Trajectory, m: TriangleMarkers, tol: float):
    """Count pre-coupling states whose mirror angle leaves [beta1-tol, beta2+tol].

    Returns ``(count, worst_excess)``.
    """
    n_pre = traj.n_precoupling
    if n_pre == 0:
        return 0, 0.0
    _, d = traj.mirror_lines()
    d = d[:n_pre]
    r = m.reference
    ang = np.mod(np.arctan2(m.orientation * (r[0] * d[:, 1] - r[1] * d[:, 0]),
                            r[0] * d[:, 0] + r[1] * d[:, 1]), np.pi)
    excess = np.maximum(m.beta1 - ang, ang - m.beta2)
    return int(np.sum(excess > tol)), float(max(0.0, excess.max()))


# ---------------------------------------------------------------------------
# Start pairs


def example1_start_pair(m: TriangleMarkers, x, D: Domain | None = None,
                        tol: float = 1e-9) -> np.ndarray:
    """Partner of ``x`` on the ray from C1 at distance d(C1, C3)."""
    x = as_point(x)
    dist = float(np.linalg.norm(x - m.C1))
    if dist == 0.0 or dist >= m.r1:
        raise GeometryError("x must lie strictly within d(C1,C3)/2 of C1 (and differ from C1)")
    if D is not None and D.locate(x[None])[0] < BOUNDARY:
        raise GeometryError("x is outside the domain")
    y = m.C1 + (2.0 * m.r1) * (x - m.C1) / dist
    dom = D
    if dom is None:
        from .geometry import build_polygon
        dom = build_polygon([m.C1, m.C2, m.C3])
    if not dom.contains(y[None], tol)[0]:
        raise GeometryError("constructed partner point is outside the domain")
    return y


def example1_start_points(m: TriangleMarkers,
                          fractions=(0.2, 0.35, 0.5, 0.65, 0.8)) -> list[np.ndarray]:
    """Deterministic start points in the sector of radius r1 at C1.

    Fraction ``f`` gives the point at distance ``f * r1`` from C1 whose
    direction is turned by ``f`` times the corner angle at C1, from C1C2
    toward C1C3.
    """
    u = m.reference
    w = (m.C3 - m.C1) / np.linalg.norm(m.C3 - m.C1)
    corner = math.acos(float(np.clip(np.dot(u, w), -1.0, 1.0)))
    pts = []
    for f in fractions:
        if not 0.0 < f < 1.0:
            raise ValueError("fractions must lie strictly between 0 and 1")
        th = m.orientation * f * corner
        d = np.array([u[0] * math.cos(th) - u[1] * math.sin(th),
                      u[0] * math.sin(th) + u[1] * math.cos(th)])
        pts.append(m.C1 + f * m.r1 * d)
    return pts


def example2_start_pair(a: float, x, b: float = 0.0, D: Domain | None = None,
                        tol: float = 1e-9) -> np.ndarray:
    """Partner of a point left of the strip A in the flat-sided example.

    ``y = (-x1, x2)`` when ``x1 >= -a``.  In the left cap the reflected
    point is used if it lies in the domain, otherwise it is clamped to the
    line ``x1 = a``.
    """
    x = as_point(x)
    half = b + 1.0 / (4.0 * a)
    if not x[0] < -half:
        raise GeometryError(f"x must lie left of the strip |x1| <= {half:.6g}")
    if D is not None and D.locate(x[None])[0] < BOUNDARY:
        raise GeometryError("x is outside the domain")
    y = np.array([-x[0], x[1]])
    if x[0] < -a and D is not None and not D.contains(y[None], tol)[0]:
        y = np.array([a, x[1]])
    return y


# ---------------------------------------------------------------------------
# Occupation statistics


def _clip_polygon_to_box(poly, x0, y0, x1, y1):
    """Sutherland-Hodgman clip of a polygon against an axis-aligned box."""
    pts = [tuple(p) for p in poly]
    for axis, bound, keep_ge in ((0, x0, True), (0, x1, False), (1, y0, True), (1, y1, False)):
        if not pts:
            break
        out = []
        for i in range(len(pts)):
            p, q = pts[i - 1], pts[i]
            pin = (p[axis] >= bound) if keep_ge else (p[axis] <= bound)
            qin = (q[axis] >= bound) if keep_ge else (q[axis] <= bound)
            if qin:
                if not pin:
                    out.append(_cut(p, q, axis, bound))
                out.append(q)
            elif pin:
                out.append(_cut(p, q, axis, bound))
        pts = out
    return pts


def _cut(p, q, axis, bound):
    t = (bound - p[axis]) / (q[axis] - p[axis])
    return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


@dataclass(frozen=True, eq=False)
class OccupationHistogram:
    counts: np.ndarray
    expected: np.ndarray
    xedges: np.ndarray
    yedges: np.ndarray
    total: int

    def max_relative_deviation(self) -> float:
        m = self.expected > 0
        if not np.any(m):
            return 0.0
        return float(np.max(np.abs(self.counts[m] - self.expected[m]) / self.expected[m]))


def occupation_histogram(trajectories, D: Domain, cells) -> OccupationHistogram:
    """Histogram of X positions against the uniform expectation on a grid."""
    from .geometry import polygon_signed_area

    nx, ny = (cells, cells) if np.isscalar(cells) else cells
    xmin, ymin, xmax, ymax = D.bbox
    xe = np.linspace(xmin, xmax, int(nx) + 1)
    ye = np.linspace(ymin, ymax, int(ny) + 1)
    pts = np.concatenate([np.asarray(tr.X) for tr in trajectories])
    if len(pts) == 0:
        raise ValueError("no states to histogram")
    counts, _, _ = np.histogram2d(pts[:, 0], pts[:, 1], bins=[xe, ye])
    areas = np.zeros((int(nx), int(ny)))
    for i in range(int(nx)):
        for j in range(int(ny)):
            clip = _clip_polygon_to_box(D.vertices, xe[i], ye[j], xe[i + 1], ye[j + 1])
            if len(clip) >= 3:
                areas[i, j] = abs(polygon_signed_area(clip))
    expected = len(pts) * areas / D.area
    return OccupationHistogram(counts, expected, xe, ye, len(pts))


# ---------------------------------------------------------------------------
# Export


def write_trajectory_csv(traj: Trajectory, path) -> None:
    o, d = traj.mirror_lines()
    al = traj.alpha()
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "Xx", "Xy", "Yx", "Yy", "coupled", "Kx0", "Ky0", "Kdx", "Kdy", "alpha"])
        for i in range(len(traj.t)):
            if traj.coupled[i]:
                k = ["", "", "", "", ""]
            else:
                k = [repr(float(o[i, 0])), repr(float(o[i, 1])), repr(float(d[i, 0])),
                     repr(float(d[i, 1])), repr(float(al[i]))]
            w.writerow([repr(float(traj.t[i])), repr(float(traj.X[i, 0])), repr(float(traj.X[i, 1])),
                        repr(float(traj.Y[i, 0])), repr(float(traj.Y[i, 1])),
                        int(traj.coupled[i])] + k)


def write_events_csv(traj: Trajectory, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "which", "edge", "push"])
        for e in traj.events:
            w.writerow([repr(e.t), e.which, e.edge, repr(e.push)])
