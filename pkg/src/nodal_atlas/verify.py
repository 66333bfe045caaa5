"""Pass/fail reports for the confinement claims, from both routes.

Every report carries the parameters needed to rerun it.  Monte-Carlo
verdicts are empirical certificates over seeded ensembles, never proofs.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels as K
from .coupling import (RULE_M_C, _edge_arrays, angle_window_violations, check_rule_M,
                       example1_start_pair, example1_start_points, example2_start_pair,
                       mirror_confinement, occupation_histogram, path_generators,
                       simulate_coupling)
from .errors import ConfigError, GeometryError, MeshError, SpectralError
from .geometry import (BOUNDARY, Domain, EmptyRegion, Region, as_point, build_polygon,
                       is_lip_domain, lip_domain_regions, obtuse_triangle_markers,
                       region_A1_triangle, region_A_triangle, region_D1_triangle,
                       sector_polygon, triangle_corners)
from .spectral import (mixed_first_eigenvalue, nodal_domain, second_modes,
                       sector_constants)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

CLAIMS = ("E1-i", "E1-ii", "E2-i", "E2-ii", "THM1-premise", "RULE-M", "ANGLE-WINDOW",
          "UNIFORM", "EXIT-RATE", "MIXED-EQ", "CONJ-1", "SECTOR")
INFORMATIONAL = frozenset({"CONJ-1"})

# Frozen Monte-Carlo thresholds (see the calibration notes in the README).
COUPLED_FRACTION_MIN = 0.9
UNIFORM_MAX_DEVIATION = 0.05
UNIFORM_T_MAX = 8000.0
UNIFORM_CELLS = 4
UNIFORM_STRIDE = 100
EXIT_RATE_REL_TOL = 0.15
EXIT_MIN_TAIL = 50
EXIT_STOP_ALIVE = 0.04
MIXED_REL_TOL = 0.02
SECTOR_REL_TOL = 0.02
ANGLE_TOL_FACTOR = 5.0
# nodal-line verdicts need a band 2h that is small against the domain
MAX_H_FRACTION = 0.1

DEFAULTS = {"dt": 1e-4, "t_max": 20.0, "N": 40, "seed": 42}


@dataclass
class ClaimReport:
    claim: str
    status: str
    measured: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    message: str = ""

    @property
    def informational(self) -> bool:
        return self.claim in INFORMATIONAL

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        d = asdict(self)
        d["informational"] = self.informational
        return _plain(d)

    def summary(self) -> str:
        tag = " (informational)" if self.informational else ""
        msg = f": {self.message}" if self.message else ""
        return f"{self.claim:<13} {self.status.upper()}{tag}{msg}"


def _plain(obj):
    """Convert numpy scalars and arrays to JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def suite_passed(reports) -> bool:
    return all(r.passed for r in reports if not r.informational)


# ---------------------------------------------------------------------------
# Spectral route


def _modes_or_none(D, h):
    if h > MAX_H_FRACTION * D.diameter:
        return None, (f"mesh too coarse for an informative 2h band "
                      f"(h > {MAX_H_FRACTION:g} * diameter)")
    try:
        return second_modes(D, h), ""
    except (MeshError, SpectralError) as exc:
        return None, str(exc)


def _curve_points(modes, h):
    return [m.nodal.sample(0.5 * h) for m in modes]


def _triangle_domain(C1, C2, C3) -> Domain:
    return build_polygon([C1, C2, C3], kind="obtuse-triangle")


def certify_triangle(C1, C2, C3, h: float) -> tuple[ClaimReport, ClaimReport]:
    """Nodal line meets A (E1-i) and stays within A1 (E1-ii), within 2h.

    Raises
    ------
    GeometryError
        The angle at C3 is not obtuse.
    """
    m = obtuse_triangle_markers(C1, C2, C3)
    D = _triangle_domain(m.C1, m.C2, m.C3)
    A, A1 = region_A_triangle(m, D), region_A1_triangle(m, D)
    params = {"vertices": [m.C1, m.C2, m.C3], "h": h}
    tol = {"band": 2 * h}
    modes, err = _modes_or_none(D, h)
    if modes is None:
        return (ClaimReport("E1-i", INCONCLUSIVE, {}, tol, params, err),
                ClaimReport("E1-ii", INCONCLUSIVE, {}, tol, params, err))
    hits, worst, nest = [], [], 0
    for pts in _curve_points(modes, h):
        inA = A.contains(pts, tol=2 * h)
        dA1 = A1.distance(pts)
        hits.append(int(inA.sum()))
        worst.append(float(dA1.max()))
        nest += int(np.sum(A.contains(pts, tol=0.0) & (dA1 > 2 * h)))
    base = {"mu2": modes[0].eig.mu2, "multiplicity": modes[0].multiplicity,
            "domain_count": [md.nodal.domain_count for md in modes]}
    r1 = ClaimReport("E1-i", PASS if all(k > 0 for k in hits) else FAIL,
                     {**base, "points_in_A": hits}, tol, params)
    r2 = ClaimReport("E1-ii", PASS if all(w <= 2 * h for w in worst) else FAIL,
                     {**base, "max_distance_to_A1": worst, "nesting_violations": nest},
                     tol, params)
    return r1, r2


def _lip_domain(D, a, b):
    if not isinstance(D, Domain):
        D = build_polygon(D, kind="lip", lip_params={"a": a, "b": b})
    return D


def certify_lip(D, a: float, b: float, h: float) -> tuple[ClaimReport, ClaimReport]:
    """Nodal line meets the strip A (E2-i) and stays in A1 (E2-ii), within 2h.

    E2-ii only applies to lip domains and is reported inconclusive
    otherwise.  Near-double second eigenvalues are checked for both
    eigenvectors of the pair.
    """
    D = _lip_domain(D, a, b)
    A, A1 = lip_domain_regions(a, b, D)
    if D.kind != "lip" or not D.lip_params:
        D = build_polygon(D.vertices, kind="lip", lip_params={"a": a, "b": b})
    params = {"vertices": D.vertices, "a": a, "b": b, "h": h}
    tol = {"band": 2 * h}
    lip = is_lip_domain(D)
    modes, err = _modes_or_none(D, h)
    if modes is None:
        return (ClaimReport("E2-i", INCONCLUSIVE, {}, tol, params, err),
                ClaimReport("E2-ii", INCONCLUSIVE, {}, tol, params, err))
    pts_all = _curve_points(modes, h)
    min_abs = [float(np.abs(p[:, 0]).min()) for p in pts_all]
    max_abs = [float(np.abs(p[:, 0]).max()) for p in pts_all]
    base = {"mu2": modes[0].eig.mu2, "multiplicity": modes[0].multiplicity,
            "domain_count": [md.nodal.domain_count for md in modes],
            "half_width_A": A.half_width, "half_width_A1": A1.half_width}
    ok1 = all(v <= A.half_width + 2 * h for v in min_abs)
    r1 = ClaimReport("E2-i", PASS if ok1 else FAIL,
                     {**base, "min_abs_x": min_abs}, tol, params)
    if not lip:
        r2 = ClaimReport("E2-ii", INCONCLUSIVE, {**base, "is_lip_domain": False}, tol, params,
                         "domain is not a lip domain; claim does not apply")
    else:
        ok2 = all(v <= A1.half_width + 2 * h for v in max_abs)
        r2 = ClaimReport("E2-ii", PASS if ok2 else FAIL,
                         {**base, "max_abs_x": max_abs, "is_lip_domain": True}, tol, params)
    return r1, r2


def conjecture1_check(C1, C2, C3, h: float) -> ClaimReport:
    """Is the nodal line inside the larger piece cut off by the altitude at C3?"""
    m = obtuse_triangle_markers(C1, C2, C3)
    D = _triangle_domain(m.C1, m.C2, m.C3)
    D1, a_left, a_right = region_D1_triangle(m, D)
    params = {"vertices": [m.C1, m.C2, m.C3], "h": h}
    tol = {"band": 2 * h}
    meas = {"C12": m.C12, "area_C1_side": a_left, "area_C2_side": a_right}
    if abs(a_left - a_right) <= 1e-12 * D.area:
        return ClaimReport("CONJ-1", INCONCLUSIVE, meas, tol, params,
                           "symmetric triangle: the two pieces are equal")
    modes, err = _modes_or_none(D, h)
    if modes is None:
        return ClaimReport("CONJ-1", INCONCLUSIVE, meas, tol, params, err)
    worst = [float(D1.distance(p).max()) for p in _curve_points(modes, h)]
    meas["max_distance_to_D1"] = worst
    return ClaimReport("CONJ-1", PASS if max(worst) <= 2 * h else FAIL, meas, tol, params)


def mixed_identity_check(D: Domain, h: float) -> ClaimReport:
    """First mixed eigenvalue of a nodal domain against ``mu2``.

    The nodal domain containing the reference point is cut out along the
    mesh edges nearest its nodal line, which become Dirichlet edges.
    """
    params = {"vertices": D.vertices, "h": h}
    tol = {"relative": MIXED_REL_TOL}
    modes, err = _modes_or_none(D, h)
    if modes is None:
        return ClaimReport("MIXED-EQ", INCONCLUSIVE, {}, tol, params, err)
    md = modes[0]
    B = nodal_domain(md.mesh, md.u, -1)
    lam = mixed_first_eigenvalue(B.mesh)
    rel = abs(lam - md.eig.mu2) / md.eig.mu2
    meas = {"mu2": md.eig.mu2, "mixed_lambda1": lam, "relative_difference": rel,
            "nodal_domain_area": B.area}
    return ClaimReport("MIXED-EQ", PASS if rel <= MIXED_REL_TOL else FAIL, meas, tol, params)


def sector_check(h: float = 0.01, chords: int = 24, opening: float = 0.15) -> ClaimReport:
    """Mean distance of the nodal line from the apex of a thin sector."""
    a0, a1, ratio = sector_constants()
    D = sector_polygon(1.0, opening, chords)
    params = {"h": h, "chords": chords, "opening": opening, "radius": 1.0}
    tol = {"relative": SECTOR_REL_TOL}
    modes, err = _modes_or_none(D, h)
    meas = {"a0": a0, "a1": a1, "ratio": ratio}
    if modes is None:
        return ClaimReport("SECTOR", INCONCLUSIVE, meas, tol, params, err)
    seg = modes[0].nodal.segments
    mid = 0.5 * (seg[:, 0] + seg[:, 1])
    w = np.linalg.norm(seg[:, 1] - seg[:, 0], axis=1)
    mean_r = float(np.sum(np.linalg.norm(mid, axis=1) * w) / np.sum(w))
    rel = abs(mean_r - ratio) / ratio
    meas.update({"mean_nodal_radius": mean_r, "relative_difference": rel,
                 "mu2": modes[0].eig.mu2})
    return ClaimReport("SECTOR", PASS if rel <= SECTOR_REL_TOL else FAIL, meas, tol, params)


# ---------------------------------------------------------------------------
# Coupling route


def run_ensemble(D: Domain, pairs, N: int, dt: float, t_max: float, seed: int):
    """``N`` seeded coupled paths per start pair; path index ``i * N + j``."""
    out = []
    for i, (x, y) in enumerate(pairs):
        for j in range(N):
            out.append(simulate_coupling(D, x, y, dt, t_max, seed, path_index=i * N + j))
    return out


def coupling_certificate(D: Domain, A: Region, pairs, N: int = 40, dt: float = 1e-4,
                         t_max: float = 20.0, seed: int = 42, trajectories=None) -> ClaimReport:
    """Empirical check that every pre-coupling mirror meets ``D`` inside ``A``."""
    pairs = [(as_point(x), as_point(y)) for x, y in pairs]
    params = {"vertices": D.vertices, "region": A.tag, "pairs": pairs, "N": N, "dt": dt,
              "t_max": t_max, "seed": seed}
    trajs = trajectories if trajectories is not None else run_ensemble(D, pairs, N, dt, t_max, seed)
    first_fail = None
    n_fail = 0
    for k, tr in enumerate(trajs):
        rep = mirror_confinement(tr, D, A)
        if not rep.passed:
            n_fail += 1
            if first_fail is None:
                first_fail = {"path": k, "t": rep.time, "point": rep.point}
    coupled = float(np.mean([tr.zeta is not None for tr in trajs])) if trajs else 0.0
    zetas = [tr.zeta for tr in trajs if tr.zeta is not None]
    meas = {"paths": len(trajs), "failed_paths": n_fail, "coupled_fraction": coupled,
            "median_zeta": float(np.median(zetas)) if zetas else None}
    if first_fail:
        meas["first_violation"] = first_fail
    return ClaimReport("THM1-premise", PASS if n_fail == 0 else FAIL, meas,
                       {"coupled_fraction_reported_min": COUPLED_FRACTION_MIN}, params,
                       "empirical certificate over seeded paths")


def angle_window_report(trajectories, m, dt: float, params=None) -> ClaimReport:
    tol = ANGLE_TOL_FACTOR * math.sqrt(dt)
    count, worst = 0, 0.0
    for tr in trajectories:
        c, w = angle_window_violations(tr, m, tol)
        count += c
        worst = max(worst, w)
    meas = {"violations": count, "worst_excess": worst, "beta1": m.beta1, "beta2": m.beta2}
    return ClaimReport("ANGLE-WINDOW", PASS if count == 0 else FAIL, meas, {"angle": tol},
                       params or {})


def rule_m_report(D: Domain, pairs, N: int, dt: float, t_max: float, seed: int,
                  trajectories=None, C: float = RULE_M_C) -> ClaimReport:
    params = {"vertices": D.vertices, "pairs": [(as_point(x), as_point(y)) for x, y in pairs],
              "N": N, "dt": dt, "t_max": t_max, "seed": seed}
    trajs = trajectories if trajectories is not None else run_ensemble(D, pairs, N, dt, t_max, seed)
    windows = drift = dec = 0.0
    bad = 0
    for tr in trajs:
        rep = check_rule_M(tr, D)
        windows += len(rep.windows)
        drift = max(drift, rep.max_hinge_drift)
        dec = max(dec, rep.max_alpha_decrease)
        bad += len(rep.violations(C))
    meas = {"windows": int(windows), "max_hinge_drift": drift, "max_alpha_decrease": dec,
            "violating_windows": bad}
    return ClaimReport("RULE-M", PASS if bad == 0 else FAIL, meas,
                       {"C": C, "bound": C * math.sqrt(dt)}, params)


def uniform_check(D: Domain, x=None, dt: float = 1e-4, t_max: float = UNIFORM_T_MAX,
                  seed: int = 42, cells: int = UNIFORM_CELLS) -> ClaimReport:
    """Occupation of grid cells by one long reflected path against area."""
    if x is None:
        x = _interior_point(D)
    x = as_point(x)
    tr = simulate_coupling(D, x, x, dt, t_max, seed, stride=UNIFORM_STRIDE,
                           continue_after_coupling=True)
    hist = occupation_histogram([tr], D, cells)
    dev = hist.max_relative_deviation()
    params = {"vertices": D.vertices, "x": x, "dt": dt, "t_max": t_max, "seed": seed,
              "cells": cells, "stride": UNIFORM_STRIDE}
    return ClaimReport("UNIFORM", PASS if dev <= UNIFORM_MAX_DEVIATION else FAIL,
                       {"max_relative_deviation": dev, "samples": hist.total},
                       {"max_relative_deviation": UNIFORM_MAX_DEVIATION}, params)


def _interior_point(D: Domain) -> np.ndarray:
    c = D.vertices.mean(axis=0)
    if D.locate(c[None])[0] > BOUNDARY:
        return c
    # fall back to the centroid of an ear
    v = D.vertices
    for i in range(D.n):
        p = (v[i - 1] + v[i] + v[(i + 1) % D.n]) / 3.0
        if D.locate(p[None])[0] > BOUNDARY:
            return p
    raise GeometryError("could not find an interior point")


# ---------------------------------------------------------------------------
# Exit rate


def _sample_uniform(mesh, n, rng):
    p = mesh.areas / mesh.areas.sum()
    t = rng.choice(len(p), size=n, p=p)
    r1, r2 = rng.random(n), rng.random(n)
    flip = r1 + r2 > 1
    r1[flip], r2[flip] = 1 - r1[flip], 1 - r2[flip]
    P = mesh.nodes[mesh.triangles[t]]
    return P[:, 0] + r1[:, None] * (P[:, 1] - P[:, 0]) + r2[:, None] * (P[:, 2] - P[:, 0])


class _FieldSign:
    """Sign of a P1 field at arbitrary points of the closed domain."""

    def __init__(self, mesh, u):
        from matplotlib.tri import LinearTriInterpolator, Triangulation
        from scipy.spatial import cKDTree

        self.tri = Triangulation(mesh.nodes[:, 0], mesh.nodes[:, 1], mesh.triangles)
        self.interp = LinearTriInterpolator(self.tri, u)
        self.tree = cKDTree(mesh.nodes)
        self.u = u

    def __call__(self, P):
        val = self.interp(P[:, 0], P[:, 1])
        out = np.asarray(val.filled(np.nan), dtype=float)
        miss = np.isnan(out)
        if np.any(miss):
            _, idx = self.tree.query(P[miss])
            out[miss] = self.u[idx]
        return out


def exit_time_rate(D: Domain, B, N: int = 2000, dt: float = 1e-4, seed: int = 42,
                   mu2: float | None = None, t_max: float = 50.0) -> ClaimReport:
    """Tail decay rate of survival in a nodal domain against ``mu2``.

    Paths are reflected Brownian motions with generator equal to the
    Laplacian (increment covariance ``2 dt I``), started uniformly in the
    nodal domain ``B`` and killed when the interpolated eigenfunction
    changes sign.  The slope of log-survival is fitted between the median
    and the 95th percentile of the exit times.

    Raises
    ------
    SpectralError
        ``B`` has no nodal (Dirichlet) interface to be killed on.
    """
    if len(B.interface_nodes) == 0:
        raise SpectralError("nodal domain has no killing interface")
    if mu2 is None:
        raise ValueError("mu2 is required")
    params = {"vertices": D.vertices, "N": N, "dt": dt, "seed": seed, "t_max": t_max,
              "sign": B.sign}
    tol = {"relative": EXIT_RATE_REL_TOL, "min_tail_samples": EXIT_MIN_TAIL}
    rng, _ = path_generators(seed, 0)
    P = _sample_uniform(B.mesh, N, rng)
    field_sign = _FieldSign(B.parent, B.u)
    a, d, nrm = _edge_arrays(D)
    alive = np.ones(N, dtype=bool)
    inside = lambda v: (v >= 0) if B.sign > 0 else (v < 0)
    alive &= inside(field_sign(P))
    exit_step = np.full(N, -1, dtype=np.int64)
    exit_step[~alive] = 0
    sd = math.sqrt(2.0 * dt)
    n_steps = int(round(t_max / dt))
    Q = np.empty_like(P)
    for step in range(1, n_steps + 1):
        idx = np.flatnonzero(alive)
        if len(idx) <= EXIT_STOP_ALIVE * N:
            break
        target = P[idx] + sd * rng.standard_normal((len(idx), 2))
        out = Q[:len(idx)]
        K.reflect_batch(np.ascontiguousarray(P[idx]), np.ascontiguousarray(target), a, d, nrm, out)
        P[idx] = out
        dead = idx[~inside(field_sign(out))]
        alive[dead] = False
        exit_step[dead] = step
    done = exit_step[exit_step >= 0] * dt
    meas = {"exits": int(len(done)), "mu2": mu2}
    if len(done) < 2:
        return ClaimReport("EXIT-RATE", INCONCLUSIVE, meas, tol, params, "too few exits")
    # survival curve as a function of exit time, over all N paths
    t_sorted = np.sort(done)
    lo, hi = np.quantile(t_sorted, 0.5), np.quantile(t_sorted, 0.95)
    in_win = (t_sorted >= lo) & (t_sorted <= hi)
    meas.update({"window": [float(lo), float(hi)], "tail_samples": int(in_win.sum())})
    if in_win.sum() < EXIT_MIN_TAIL:
        return ClaimReport("EXIT-RATE", INCONCLUSIVE, meas, tol, params,
                           f"fewer than {EXIT_MIN_TAIL} exits in the tail window")
    surv = 1.0 - (np.arange(1, len(t_sorted) + 1)) / N
    tt, ss = t_sorted[in_win], surv[in_win]
    keep = ss > 0
    slope = float(np.polyfit(tt[keep], np.log(ss[keep]), 1)[0])
    rel = abs(slope + mu2) / mu2
    meas.update({"slope": slope, "relative_difference": rel})
    return ClaimReport("EXIT-RATE", PASS if rel <= EXIT_RATE_REL_TOL else FAIL, meas, tol, params)


def exit_rate_check(D: Domain, h: float, N: int = 2000, dt: float = 1e-4,
                    seed: int = 42) -> ClaimReport:
    modes, err = _modes_or_none(D, h)
    if modes is None:
        return ClaimReport("EXIT-RATE", INCONCLUSIVE, {}, {}, {"h": h}, err)
    md = modes[0]
    B = nodal_domain(md.mesh, md.u, -1)
    rep = exit_time_rate(D, B, N, dt, seed, mu2=md.eig.mu2)
    rep.params["h"] = h
    return rep


# ---------------------------------------------------------------------------
# Cross-validation of the two routes


def cross_validate(A: Region, starts, modes) -> dict:
    """Nodal domains that avoid ``A`` yet contain a certified start point.

    Whenever the coupling premise holds for ``x``, no nodal domain whose
    closure avoids ``A`` may contain ``x``; returns the number of such
    conflicts found over the given modes.
    """
    conflicts = 0
    checked = 0
    for md in modes:
        sign_at = _FieldSign(md.mesh, md.u)
        for sgn in (1, -1):
            nodes = md.mesh.nodes[(md.u >= 0) if sgn > 0 else (md.u < 0)]
            pts = np.vstack([nodes, md.nodal.points()])
            avoids = not np.any(A.contains(pts, tol=0.0))
            checked += 1
            if not avoids:
                continue
            for x in starts:
                v = sign_at(as_point(x)[None])[0]
                if (v >= 0) == (sgn > 0):
                    conflicts += 1
    return {"components_checked": checked, "conflicts": conflicts}


# ---------------------------------------------------------------------------
# Start pairs per example


def example1_pairs(m, D):
    return [(x, example1_start_pair(m, x, D)) for x in example1_start_points(m)]


def example2_pairs(a: float, b: float, D: Domain, fractions=(0.2, 0.35, 0.5, 0.65, 0.8)):
    """Start points left of the strip A, spread over ``[-a, -half) x (0, 1)``."""
    half = b + 1.0 / (4.0 * a)
    out = []
    for f in fractions:
        x = np.array([-half - f * (a - half), f])
        out.append((x, example2_start_pair(a, x, b, D)))
    return out


# ---------------------------------------------------------------------------
# Suite


def default_claims(D: Domain) -> list[str]:
    if D.kind == "obtuse-triangle":
        return ["E1-i", "E1-ii", "THM1-premise", "ANGLE-WINDOW", "RULE-M", "CONJ-1"]
    if D.kind == "lip":
        return ["E2-i", "E2-ii", "THM1-premise", "RULE-M"]
    return ["MIXED-EQ"]


class _Suite:
    def __init__(self, D: Domain, cfg: dict):
        self.D = D
        self.h = float(cfg.get("h") or 0.02 * D.diameter)
        self.dt = float(cfg.get("dt", DEFAULTS["dt"]))
        self.t_max = float(cfg.get("t_max", DEFAULTS["t_max"]))
        self.N = int(cfg.get("N", DEFAULTS["N"]))
        self.seed = int(cfg.get("seed", DEFAULTS["seed"]))
        self.region = cfg.get("region", "A")
        self.exit_paths = int(cfg.get("exit_paths", 2000))
        self.uniform_t_max = float(cfg.get("uniform_t_max", UNIFORM_T_MAX))
        self.pairs_cfg = cfg.get("pairs")
        self._trajs = None
        self._triangle = None
        self._reports = {}

    # lazily built shared objects
    def triangle(self):
        if self._triangle is None:
            if self.D.kind != "obtuse-triangle":
                raise ConfigError("claim needs an obtuse-triangle domain")
            m = obtuse_triangle_markers(*triangle_corners(self.D))
            self._triangle = m
        return self._triangle

    def lip(self):
        if self.D.kind != "lip" or not self.D.lip_params:
            raise ConfigError("claim needs a lip domain with lip_params")
        p = self.D.lip_params
        return float(p["a"]), float(p.get("b", 0.0))

    def region_A(self):
        if self.region == "empty":
            return EmptyRegion(self.D)
        if self.region != "A":
            raise ConfigError(f"unknown region {self.region!r}")
        if self.D.kind == "obtuse-triangle":
            return region_A_triangle(self.triangle(), self.D)
        if self.D.kind == "lip":
            a, b = self.lip()
            return lip_domain_regions(a, b, self.D)[0]
        raise ConfigError("region A is only defined for triangle and lip domains")

    def pairs(self):
        if self.pairs_cfg is not None:
            return [(as_point(x), as_point(y)) for x, y in self.pairs_cfg]
        if self.D.kind == "obtuse-triangle":
            return example1_pairs(self.triangle(), self.D)
        if self.D.kind == "lip":
            a, b = self.lip()
            return example2_pairs(a, b, self.D)
        raise ConfigError("coupling claims on a generic domain need explicit pairs")

    def trajectories(self):
        if self._trajs is None:
            self._trajs = run_ensemble(self.D, self.pairs(), self.N, self.dt, self.t_max, self.seed)
        return self._trajs

    def coupling_params(self):
        return {"vertices": self.D.vertices, "pairs": self.pairs(), "N": self.N,
                "dt": self.dt, "t_max": self.t_max, "seed": self.seed}

    def run(self, claim: str) -> ClaimReport:
        if claim in self._reports:
            return self._reports[claim]
        D = self.D
        if claim in ("E1-i", "E1-ii"):
            m = self.triangle()
            r1, r2 = certify_triangle(m.C1, m.C2, m.C3, self.h)
            self._reports.update({"E1-i": r1, "E1-ii": r2})
        elif claim in ("E2-i", "E2-ii"):
            a, b = self.lip()
            r1, r2 = certify_lip(D, a, b, self.h)
            self._reports.update({"E2-i": r1, "E2-ii": r2})
        elif claim == "THM1-premise":
            A = self.region_A()
            rep = coupling_certificate(D, A, self.pairs(), self.N, self.dt, self.t_max,
                                       self.seed, trajectories=self.trajectories())
            if rep.passed and D.kind in ("obtuse-triangle", "lip"):
                modes, _ = _modes_or_none(D, self.h)
                if modes is not None:
                    cv = cross_validate(A, [x for x, _ in self.pairs()], modes)
                    rep.measured["cross_check"] = cv
                    if cv["conflicts"]:
                        rep.status = FAIL
                        rep.message = "spectral cross-check found a conflicting nodal domain"
            self._reports[claim] = rep
        elif claim == "ANGLE-WINDOW":
            self._reports[claim] = angle_window_report(self.trajectories(), self.triangle(),
                                                       self.dt, self.coupling_params())
        elif claim == "RULE-M":
            self._reports[claim] = rule_m_report(D, self.pairs(), self.N, self.dt, self.t_max,
                                                 self.seed, trajectories=self.trajectories())
        elif claim == "UNIFORM":
            self._reports[claim] = uniform_check(D, None, self.dt, self.uniform_t_max, self.seed)
        elif claim == "EXIT-RATE":
            self._reports[claim] = exit_rate_check(D, self.h, self.exit_paths, self.dt, self.seed)
        elif claim == "MIXED-EQ":
            self._reports[claim] = mixed_identity_check(D, self.h)
        elif claim == "CONJ-1":
            m = self.triangle()
            self._reports[claim] = conjecture1_check(m.C1, m.C2, m.C3, self.h)
        elif claim == "SECTOR":
            self._reports[claim] = sector_check()
        else:
            raise ConfigError(f"unknown claim {claim!r}")
        return self._reports[claim]


def run_suite(config: dict) -> list[ClaimReport]:
    """Run the configured claims in order.

    ``config`` holds ``claims`` (list of ids, default chosen from the
    domain kind), ``domain`` (a :class:`Domain` or a spec dict), and the
    optional numeric settings ``h``, ``dt``, ``t_max``, ``N``, ``seed``,
    ``exit_paths``, ``uniform_t_max``, plus ``region`` (``"A"`` or
    ``"empty"``) and explicit start ``pairs``.

    Raises
    ------
    ConfigError
        Unknown claim id or a claim that does not fit the domain.
    """
    from .io import domain_from_spec

    if not isinstance(config, dict):
        raise ConfigError("suite config must be a JSON object")
    claims = config.get("claims")
    dom = config.get("domain")
    if dom is None:
        if claims:
            raise ConfigError("config has claims but no domain")
        return []
    D = dom if isinstance(dom, Domain) else domain_from_spec(dom)
    if claims is None:
        claims = default_claims(D)
    unknown = [c for c in claims if c not in CLAIMS]
    if unknown:
        raise ConfigError(f"unknown claim id(s): {', '.join(map(str, unknown))}")
    suite = _Suite(D, config)
    return [suite.run(c) for c in claims]


def reproduce(report: ClaimReport) -> ClaimReport:
    """Rerun a report from its embedded parameters."""
    p = report.params
    c = report.claim
    if c in ("E1-i", "E1-ii"):
        r = certify_triangle(*p["vertices"], p["h"])
        return r[0] if c == "E1-i" else r[1]
    if c in ("E2-i", "E2-ii"):
        r = certify_lip(build_polygon(p["vertices"]), p["a"], p["b"], p["h"])
        return r[0] if c == "E2-i" else r[1]
    if c == "CONJ-1":
        return conjecture1_check(*p["vertices"], p["h"])
    if c == "MIXED-EQ":
        return mixed_identity_check(build_polygon(p["vertices"]), p["h"])
    if c == "SECTOR":
        return sector_check(p["h"], p["chords"], p["opening"])
    if c == "UNIFORM":
        return uniform_check(build_polygon(p["vertices"]), p["x"], p["dt"], p["t_max"],
                             p["seed"], p["cells"])
    raise ConfigError(f"reproduce does not support {c!r}; rerun the suite config instead")
