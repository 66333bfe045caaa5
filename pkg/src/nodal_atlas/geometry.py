"""Planar primitives, polygonal domains and the confinement regions.

Points are plain ``(x, y)`` pairs; anything ``np.asarray`` turns into a
length-2 float vector is accepted.  Batch predicates take ``(n, 2)``
arrays and return arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .errors import GeometryError, MarkerInconsistencyError, CoupledStateError

# absolute band for "on the boundary" / "on a region curve"
BOUNDARY_TOL = 1e-9
MEMBERSHIP_TOL = 1e-9

INSIDE, BOUNDARY, OUTSIDE = 1, 0, -1


class Point2(NamedTuple):
    x: float
    y: float


class Location(str, Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(-1)
    if a.shape != (2,) or not np.all(np.isfinite(a)):
        raise GeometryError(f"not a finite planar point: {p!r}")
    return a


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _perp(u):
    """Rotate by +90 degrees."""
    u = np.asarray(u, dtype=float)
    return np.stack([-u[..., 1], u[..., 0]], axis=-1)


@dataclass(frozen=True, eq=False)
class Line2:
    """Infinite line through ``origin`` with unit ``direction``."""

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        o = as_point(self.origin)
        d = as_point(self.direction)
        n = math.hypot(d[0], d[1])
        if n == 0.0:
            raise GeometryError("line direction must be non-zero")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d / n)

    def point_at(self, s: float) -> np.ndarray:
        return self.origin + s * self.direction

    def distance(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return np.abs(_cross(self.direction, p - self.origin))

    @classmethod
    def through(cls, p, q) -> "Line2":
        p, q = as_point(p), as_point(q)
        return cls(p, q - p)


def line_intersection(a: Line2, b: Line2) -> np.ndarray | None:
    """Intersection point of two lines, ``None`` if parallel."""
    den = _cross(a.direction, b.direction)
    if abs(den) < 1e-15:
        return None
    s = _cross(b.origin - a.origin, b.direction) / den
    return a.point_at(s)


def project_onto_line(p, line: Line2) -> np.ndarray:
    p = as_point(p)
    s = float(np.dot(p - line.origin, line.direction))
    return line.point_at(s)


def reflect_point_across_line(p, line: Line2) -> np.ndarray:
    p = as_point(p)
    foot = project_onto_line(p, line)
    return 2.0 * foot - p


def perpendicular_bisector(x, y, tol: float = 1e-12) -> Line2:
    """Mirror line of the pair ``(x, y)``.

    Raises :class:`CoupledStateError` when the points are closer than
    ``tol``; the mirror is undefined once the particles have met.
    """
    x, y = as_point(x), as_point(y)
    d = y - x
    if math.hypot(d[0], d[1]) <= tol:
        raise CoupledStateError("points coincide; mirror undefined")
    return Line2(0.5 * (x + y), _perp(d))


def orientation_angle(direction, reference, sign: float = 1.0) -> float:
    """Angle of an unoriented line against ``reference`` in ``[0, pi)``.

    ``sign`` flips the sense of rotation, so that angles can be measured
    toward a chosen side of the reference line.
    """
    d = as_point(direction)
    r = as_point(reference)
    ang = math.atan2(sign * _cross(r, d), float(np.dot(r, d)))
    ang = math.fmod(ang, math.pi)
    if ang < 0:
        ang += math.pi
    if ang >= math.pi:
        ang -= math.pi
    return ang


def acute_angle(u, v) -> float:
    """The smaller of the two angles between the lines spanned by u and v."""
    u, v = as_point(u), as_point(v)
    c = abs(float(np.dot(u, v))) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.acos(min(1.0, c))


def polygon_signed_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    w = np.roll(v, -1, axis=0)
    return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))


def _segments_intersect(p1, p2, q1, q2, eps) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_seg(a, b, c):
        return (min(a[0], b[0]) - eps <= c[0] <= max(a[0], b[0]) + eps
                and min(a[1], b[1]) - eps <= c[1] <= max(a[1], b[1]) + eps)

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and \
            ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)):
        return True
    if abs(d1) <= eps and on_seg(q1, q2, p1):
        return True
    if abs(d2) <= eps and on_seg(q1, q2, p2):
        return True
    if abs(d3) <= eps and on_seg(p1, p2, q1):
        return True
    if abs(d4) <= eps and on_seg(p1, p2, q2):
        return True
    return False


@dataclass(frozen=True, eq=False)
class Domain:
    """Simple polygon with counterclockwise vertices.

    Build through :func:`build_polygon`, which validates and orients the
    vertex list; the constructor itself trusts its input.
    """

    vertices: np.ndarray
    kind: str = "generic"
    lip_params: dict | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def edges(self) -> np.ndarray:
        """``(n, 2, 2)`` array; edge ``i`` runs from vertex ``i`` to ``i+1``."""
        if "edges" not in self._cache:
            e = np.stack([self.vertices, np.roll(self.vertices, -1, axis=0)], axis=1)
            e.setflags(write=False)
            self._cache["edges"] = e
        return self._cache["edges"]

    @property
    def inward_normals(self) -> np.ndarray:
        if "normals" not in self._cache:
            d = self.edges[:, 1] - self.edges[:, 0]
            nrm = _perp(d) / np.linalg.norm(d, axis=1)[:, None]
            nrm.setflags(write=False)
            self._cache["normals"] = nrm
        return self._cache["normals"]

    @property
    def area(self) -> float:
        return polygon_signed_area(self.vertices)

    @property
    def diameter(self) -> float:
        v = self.vertices
        return float(np.max(np.linalg.norm(v[:, None, :] - v[None, :, :], axis=2)))

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    @property
    def is_convex(self) -> bool:
        if "convex" not in self._cache:
            e = self.edges[:, 1] - self.edges[:, 0]
            turns = _cross(e, np.roll(e, -1, axis=0))
            self._cache["convex"] = bool(np.all(turns >= -1e-12 * self.diameter ** 2))
        return self._cache["convex"]

    def interior_angles(self) -> np.ndarray:
        v = self.vertices
        prev = np.roll(v, 1, axis=0) - v
        nxt = np.roll(v, -1, axis=0) - v
        ang = np.arctan2(_cross(nxt, prev), np.sum(nxt * prev, axis=1))
        return np.mod(ang, 2 * np.pi)

    def edge_distances(self, points) -> np.ndarray:
        """``(m, n)`` Euclidean distances from points to each edge segment."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        a = self.edges[:, 0]
        d = self.edges[:, 1] - a
        rel = p[:, None, :] - a[None, :, :]
        t = np.clip(np.sum(rel * d, axis=2) / np.sum(d * d, axis=1), 0.0, 1.0)
        foot = a[None] + t[..., None] * d[None]
        return np.linalg.norm(p[:, None, :] - foot, axis=2)

    def boundary_distance(self, points) -> np.ndarray:
        return self.edge_distances(points).min(axis=1)

    def locate(self, points, band: float = BOUNDARY_TOL) -> np.ndarray:
        """Vectorised classification: 1 inside, 0 boundary, -1 outside."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        x, y = p[:, 0:1], p[:, 1:2]
        a = self.edges[:, 0]
        b = self.edges[:, 1]
        ay, by = a[None, :, 1], b[None, :, 1]
        straddle = (ay > y) != (by > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = a[None, :, 0] + (y - ay) * (b[None, :, 0] - a[None, :, 0]) / (by - ay)
        hits = np.sum(straddle & (x < xcross), axis=1)
        inside = (hits % 2) == 1
        on_bdry = self.boundary_distance(p) <= band
        return np.where(on_bdry, BOUNDARY, np.where(inside, INSIDE, OUTSIDE))

    def contains(self, points, tol: float = BOUNDARY_TOL) -> np.ndarray:
        """Membership of the closed domain, enlarged by ``tol``."""
        return self.locate(points, band=tol) >= BOUNDARY

    def to_spec(self) -> dict:
        spec = {"vertices": self.vertices.tolist(), "kind": self.kind}
        if self.lip_params is not None:
            spec["lip_params"] = dict(self.lip_params)
        return spec


def _all_collinear(v, eps) -> bool:
    d = v - v[0]
    k = int(np.argmax(np.linalg.norm(d, axis=1)))
    return bool(np.all(np.abs(_cross(d[k], d)) <= eps * np.linalg.norm(d[k])))


def build_polygon(vertices: Sequence, kind: str = "generic",
                  lip_params: dict | None = None) -> Domain:
    """Validate a vertex list and return a counterclockwise :class:`Domain`.

    Raises
    ------
    GeometryError
        Fewer than three vertices, repeated consecutive vertices, zero
        area (all collinear) or a self-intersecting boundary.
    """
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2:
        raise GeometryError("vertices must be a list of (x, y) pairs")
    if len(v) < 3:
        raise GeometryError("a polygon needs at least 3 vertices")
    if not np.all(np.isfinite(v)):
        raise GeometryError("vertex coordinates must be finite")
    scale = max(1.0, float(np.abs(v).max()))
    eps = 1e-12 * scale
    step = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
    if np.any(step <= eps):
        raise GeometryError("repeated consecutive vertices")
    area = polygon_signed_area(v)
    if abs(area) <= 1e-12 * scale * scale and _all_collinear(v, eps * scale):
        raise GeometryError("degenerate polygon (collinear vertices)")
    n = len(v)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n], eps * scale):
                raise GeometryError(f"self-intersecting polygon (edges {i} and {j})")
    if abs(area) <= 1e-12 * scale * scale:
        raise GeometryError("degenerate polygon (zero area)")
    if area < 0:
        v = v[::-1].copy()
    if kind not in ("generic", "obtuse-triangle", "lip"):
        raise GeometryError(f"unknown domain kind {kind!r}")
    return Domain(v, kind=kind, lip_params=lip_params)


def point_in_domain(D: Domain, p) -> Location:
    code = int(D.locate(as_point(p)[None])[0])
    return {INSIDE: Location.INSIDE, BOUNDARY: Location.BOUNDARY, OUTSIDE: Location.OUTSIDE}[code]


def line_domain_clip(L: Line2, D: Domain) -> list[tuple[np.ndarray, np.ndarray]]:
    """Maximal pieces of ``L`` lying in the closed domain.

    A line containing a boundary edge returns that edge.  Isolated
    touching points (a line grazing a vertex) are not returned since they
    do not meet the open domain.
    """
    o, d = L.origin, L.direction
    a = D.edges[:, 0]
    e = D.edges[:, 1] - a
    params = []
    den = _cross(d, e)
    rel = a - o
    eps = 1e-12 * max(1.0, D.diameter)
    for k in range(D.n):
        if abs(den[k]) > 1e-14 * np.linalg.norm(e[k]):
            s = _cross(rel[k], e[k]) / den[k]
            u = _cross(rel[k], d) / den[k]
            if -1e-12 <= u <= 1 + 1e-12:
                params.append(s)
        elif abs(_cross(d, rel[k])) <= eps:
            # collinear edge
            params.append(float(np.dot(a[k] - o, d)))
            params.append(float(np.dot(a[k] + e[k] - o, d)))
    if not params:
        return []
    params = np.unique(np.round(np.asarray(params, dtype=float), 13))
    out: list[list[float]] = []
    for s0, s1 in zip(params[:-1], params[1:]):
        if s1 - s0 <= eps:
            continue
        mid = o + 0.5 * (s0 + s1) * d
        if D.locate(mid[None])[0] >= BOUNDARY:
            if out and abs(out[-1][1] - s0) <= eps:
                out[-1][1] = s1
            else:
                out.append([s0, s1])
    return [(o + s0 * d, o + s1 * d) for s0, s1 in out]


def is_lip_domain(D: Domain, slope_tol: float = 1e-12) -> bool:
    """True if the boundary is two 1-Lipschitz graphs joined by vertical ends."""
    v = D.vertices
    n = D.n
    eps = 1e-12 * max(1.0, D.diameter)
    xs = v[:, 0]

    def ends(xval):
        idx = np.flatnonzero(np.abs(xs - xval) <= eps)
        return int(idx[np.argmin(v[idx, 1])]), int(idx[np.argmax(v[idx, 1])])

    lb, lt = ends(xs.min())
    rb, rt = ends(xs.max())

    def walk(i, j):
        seq = [i]
        while i != j:
            i = (i + 1) % n
            seq.append(i)
        return seq

    def chain_ok(seq, sign):
        for p, q in zip(seq[:-1], seq[1:]):
            dx = (v[q, 0] - v[p, 0]) * sign
            if dx <= eps:
                return False
            if abs(v[q, 1] - v[p, 1]) > (1.0 + slope_tol) * dx:
                return False
        return True

    def vertical_ok(seq):
        return all(abs(v[q, 0] - v[p, 0]) <= eps for p, q in zip(seq[:-1], seq[1:]))

    # counterclockwise: bottom left->right, right end up, top right->left, left end down
    return (chain_ok(walk(lb, rb), +1) and vertical_ok(walk(rb, rt))
            and chain_ok(walk(rt, lt), -1) and vertical_ok(walk(lt, lb)))


# ---------------------------------------------------------------------------
# Example 1: obtuse triangle markers


@dataclass(frozen=True, eq=False)
class TriangleMarkers:
    C1: np.ndarray
    C2: np.ndarray
    C3: np.ndarray
    C4: np.ndarray
    C5: np.ndarray
    C6: np.ndarray
    C7: np.ndarray
    C8: np.ndarray
    C9: np.ndarray
    C10: np.ndarray
    C11: np.ndarray
    C12: np.ndarray
    r1: float
    r2: float
    beta1: float
    beta2: float
    # +1 if C1, C2, C3 are counterclockwise
    orientation: float = 1.0

    @property
    def reference(self) -> np.ndarray:
        """Unit vector along C1 -> C2; mirror angles are measured from it."""
        d = self.C2 - self.C1
        return d / np.linalg.norm(d)

    def mirror_angle(self, direction) -> float:
        """Angle of a line against C1C2 in [0, pi), increasing toward C3."""
        return orientation_angle(direction, self.reference, self.orientation)

    def pentagons(self) -> tuple[np.ndarray, np.ndarray]:
        p1 = np.array([self.C3, self.C4, self.C8, self.C9, self.C6])
        p2 = np.array([self.C3, self.C10, self.C5, self.C7, self.C11])
        return p1, p2


def _between(p, a, b, strict=True, eps=1e-12) -> bool:
    """Is p on segment ab (strictly inside if ``strict``)?"""
    d = b - a
    L2 = float(np.dot(d, d))
    t = float(np.dot(p - a, d)) / L2
    off = abs(_cross(d, p - a)) / math.sqrt(L2)
    if off > 1e-9 * math.sqrt(L2):
        return False
    return (eps < t < 1 - eps) if strict else (-eps <= t <= 1 + eps)


def obtuse_triangle_markers(C1, C2, C3) -> TriangleMarkers:
    """Construct the marker points C4..C12 and the angles beta1 < beta2.

    Raises
    ------
    GeometryError
        The angle at C3 is not obtuse, or the triangle is degenerate.
    MarkerInconsistencyError
        A constructed point leaves the side it is supposed to lie on.
    """
    C1, C2, C3 = as_point(C1), as_point(C2), as_point(C3)
    area2 = _cross(C2 - C1, C3 - C1)
    scale = max(np.linalg.norm(C2 - C1), np.linalg.norm(C3 - C1), 1e-300)
    if abs(area2) <= 1e-12 * scale * scale:
        raise GeometryError("degenerate triangle")
    if float(np.dot(C1 - C3, C2 - C3)) >= 0.0:
        raise GeometryError("angle at C3 must be strictly greater than pi/2")
    r1 = 0.5 * float(np.linalg.norm(C3 - C1))
    r2 = 0.5 * float(np.linalg.norm(C3 - C2))
    u12 = (C2 - C1) / np.linalg.norm(C2 - C1)
    base = Line2(C1, u12)
    side13 = Line2.through(C1, C3)
    side23 = Line2.through(C2, C3)

    C4 = 0.5 * (C1 + C3)
    C6 = 0.5 * (C2 + C3)
    C5 = C1 + r1 * u12
    C7 = C2 - r2 * u12
    C8 = line_intersection(Line2(C4, _perp(C3 - C2)), base)
    C9 = line_intersection(Line2(C6, _perp(C3 - C1)), base)
    C10 = project_onto_line(C5, side13)
    C11 = project_onto_line(C7, side23)
    C12 = project_onto_line(C3, base)

    orient = 1.0 if area2 > 0 else -1.0
    beta1 = orientation_angle(_perp(C3 - C2), u12, orient)
    beta2 = orientation_angle(_perp(C3 - C1), u12, orient)

    checks = [
        ("C5 strictly inside C1C2", _between(C5, C1, C2)),
        ("C7 strictly between C5 and C2", _between(C7, C5, C2)),
        ("C8 on C1C2", C8 is not None and _between(C8, C1, C2, strict=False)),
        ("C9 on C1C2", C9 is not None and _between(C9, C1, C2, strict=False)),
        ("C8 before C9 along C1C2", C8 is not None and C9 is not None
         and np.dot(C9 - C8, u12) > 0),
        ("C10 on C1C3", _between(C10, C1, C3, strict=False)),
        ("C11 on C2C3", _between(C11, C2, C3, strict=False)),
        ("beta1 < beta2", beta1 < beta2),
    ]
    bad = [name for name, ok in checks if not ok]
    if bad:
        raise MarkerInconsistencyError("marker ordering violated: " + "; ".join(bad))
    m = TriangleMarkers(C1, C2, C3, C4, C5, C6, C7, C8, C9, C10, C11, C12,
                        r1, r2, beta1, beta2, orient)
    for poly in m.pentagons():
        try:
            build_polygon(poly)
        except GeometryError as exc:
            raise MarkerInconsistencyError(f"pentagon is not simple: {exc}") from exc
    return m


def triangle_corners(D: Domain) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (C1, C2, C3) for an obtuse triangle domain.

    C3 is the obtuse vertex; C1, C2 follow it counterclockwise.
    """
    if D.n != 3:
        raise GeometryError("domain is not a triangle")
    ang = D.interior_angles()
    k = int(np.argmax(ang))
    if ang[k] <= math.pi / 2:
        raise GeometryError("triangle has no obtuse angle")
    v = D.vertices
    return v[(k + 1) % 3].copy(), v[(k + 2) % 3].copy(), v[k].copy()


# ---------------------------------------------------------------------------
# Regions


class Region:
    """Closed subset of a domain's closure, tested by a membership predicate."""

    tag: str = "region"

    def __init__(self, domain: Domain):
        self.domain = domain

    def contains(self, points, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        raise NotImplementedError

    def first_violation(self, starts, ends, step: float,
                        tol: float = MEMBERSHIP_TOL) -> tuple[int, np.ndarray] | None:
        """First segment (by index) with a point outside the region.

        Segments are sampled with spacing at most ``step``, always
        including both endpoints.
        """
        P = np.atleast_2d(np.asarray(starts, dtype=float))
        Q = np.atleast_2d(np.asarray(ends, dtype=float))
        if len(P) == 0:
            return None
        lengths = np.linalg.norm(Q - P, axis=1)
        nsamp = int(max(2, math.ceil(float(lengths.max()) / step) + 1))
        s = np.linspace(0.0, 1.0, nsamp)
        chunk = max(1, 200_000 // nsamp)
        for lo in range(0, len(P), chunk):
            p, q = P[lo:lo + chunk], Q[lo:lo + chunk]
            pts = p[:, None, :] + s[None, :, None] * (q - p)[:, None, :]
            ok = self.contains(pts.reshape(-1, 2), tol).reshape(len(p), nsamp)
            bad = np.flatnonzero(~ok.all(axis=1))
            if len(bad):
                i = int(bad[0])
                j = int(np.flatnonzero(~ok[i])[0])
                return lo + i, pts[i, j]
        return None

    def _in_domain(self, p, tol):
        return self.domain.contains(p, max(tol, BOUNDARY_TOL))


class DiscComplementRegion(Region):
    """Points of the closed domain at distance >= r_i from every centre c_i."""

    def __init__(self, domain, centers, radii, tag="triangle-A"):
        super().__init__(domain)
        self.centers = np.atleast_2d(np.asarray(centers, dtype=float))
        self.radii = np.asarray(radii, dtype=float).reshape(-1)
        self.tag = tag

    def contains(self, points, tol=MEMBERSHIP_TOL):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        dist = np.linalg.norm(p[:, None, :] - self.centers[None], axis=2)
        ok = np.all(dist >= self.radii[None] - tol, axis=1)
        return ok & self._in_domain(p, tol)

    def first_violation(self, starts, ends, step, tol=MEMBERSHIP_TOL):
        # exact: closest approach of each segment to each centre
        P = np.atleast_2d(np.asarray(starts, dtype=float))
        Q = np.atleast_2d(np.asarray(ends, dtype=float))
        if len(P) == 0:
            return None
        d = Q - P
        L2 = np.maximum(np.sum(d * d, axis=1), 1e-300)
        worst = None
        for c, r in zip(self.centers, self.radii):
            t = np.clip(np.sum((c - P) * d, axis=1) / L2, 0.0, 1.0)
            foot = P + t[:, None] * d
            bad = np.flatnonzero(np.linalg.norm(foot - c, axis=1) < r - tol)
            if len(bad) and (worst is None or bad[0] < worst[0]):
                worst = (int(bad[0]), foot[bad[0]])
        return worst


class StripRegion(Region):
    """Points of the closed domain with ``|x - center| <= half_width``."""

    def __init__(self, domain, half_width, tag="lip-A", center=0.0):
        super().__init__(domain)
        self.half_width = float(half_width)
        self.center = float(center)
        self.tag = tag

    def contains(self, points, tol=MEMBERSHIP_TOL):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        ok = np.abs(p[:, 0] - self.center) <= self.half_width + tol
        return ok & self._in_domain(p, tol)

    def first_violation(self, starts, ends, step, tol=MEMBERSHIP_TOL):
        # a strip is convex: endpoints decide
        P = np.atleast_2d(np.asarray(starts, dtype=float))
        Q = np.atleast_2d(np.asarray(ends, dtype=float))
        lim = self.half_width + tol
        badP = np.abs(P[:, 0] - self.center) > lim
        badQ = np.abs(Q[:, 0] - self.center) > lim
        bad = np.flatnonzero(badP | badQ)
        if not len(bad):
            return None
        i = int(bad[0])
        return i, (P[i] if badP[i] else Q[i])


class PolygonUnionRegion(Region):
    """Union of closed polygons (assumed to lie in the domain closure)."""

    def __init__(self, domain, polygons, tag="triangle-A1"):
        super().__init__(domain)
        self.polygons = [p if isinstance(p, Domain) else build_polygon(p) for p in polygons]
        self.tag = tag

    def contains(self, points, tol=MEMBERSHIP_TOL):
        p = np.atleast_2d(np.asarray(points, dtype=float))
        ok = np.zeros(len(p), dtype=bool)
        for poly in self.polygons:
            ok |= poly.contains(p, tol)
        return ok

    def distance(self, points) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.full(len(p), np.inf)
        for poly in self.polygons:
            d = np.where(poly.locate(p, 0.0) >= BOUNDARY, 0.0, poly.boundary_distance(p))
            out = np.minimum(out, d)
        return out


class EmptyRegion(Region):
    tag = "empty"

    def contains(self, points, tol=MEMBERSHIP_TOL):
        return np.zeros(len(np.atleast_2d(points)), dtype=bool)

    def first_violation(self, starts, ends, step, tol=MEMBERSHIP_TOL):
        P = np.atleast_2d(np.asarray(starts, dtype=float))
        return (0, P[0]) if len(P) else None


def region_A_triangle(m: TriangleMarkers, D: Domain) -> DiscComplementRegion:
    return DiscComplementRegion(D, [m.C1, m.C2], [m.r1, m.r2], tag="triangle-A")


def region_A1_triangle(m: TriangleMarkers, D: Domain) -> PolygonUnionRegion:
    polys = []
    for p in m.pentagons():
        try:
            polys.append(build_polygon(p))
        except GeometryError as exc:
            raise MarkerInconsistencyError(f"pentagon is not simple: {exc}") from exc
    return PolygonUnionRegion(D, polys, tag="triangle-A1")


def region_D1_triangle(m: TriangleMarkers, D: Domain) -> tuple[PolygonUnionRegion, float, float]:
    """Larger piece of the triangle cut along the altitude C12C3.

    Returns the region and the two piece areas (C1 side, C2 side).
    """
    left = np.array([m.C1, m.C12, m.C3])
    right = np.array([m.C12, m.C2, m.C3])
    a_left = abs(polygon_signed_area(left))
    a_right = abs(polygon_signed_area(right))
    piece = right if a_right >= a_left else left
    return PolygonUnionRegion(D, [build_polygon(piece)], tag="half-domain-D1"), a_left, a_right


def lip_constraint_ok(a: float, b: float) -> bool:
    return a > 0.5 and 0.0 <= b < a - 1.0 / (4.0 * a)


def lip_domain_regions(a: float, b: float, D: Domain | None = None,
                       tol: float = 1e-9) -> tuple[StripRegion, StripRegion]:
    """Strip regions A and A1 for the two-flat-sides example.

    Raises
    ------
    GeometryError
        ``a <= 1/2``, ``b`` outside ``[0, a - 1/(4a))``, or ``D`` not of
        the expected shape (flat sides ``[-a, a] x {0}`` and
        ``[-a, a] x {1}`` on the boundary, caps within the side boxes).
    """
    if not a > 0.5:
        raise GeometryError(f"need a > 1/2, got a={a}")
    if not (0.0 <= b < a - 1.0 / (4.0 * a)):
        raise GeometryError(f"need 0 <= b < a - 1/(4a) = {a - 1 / (4 * a):.6g}, got b={b}")
    if D is not None:
        v = D.vertices
        if (v[:, 0].min() < -a - b - tol or v[:, 0].max() > a + b + tol
                or v[:, 1].min() < -tol or v[:, 1].max() > 1 + tol):
            raise GeometryError("domain leaves [-a-b, a+b] x [0, 1]")
        xs = np.linspace(-a, a, 9)
        flat = np.concatenate([np.c_[xs, np.zeros(9)], np.c_[xs, np.ones(9)]])
        if np.any(D.boundary_distance(flat) > tol):
            raise GeometryError("flat sides [-a, a] x {0, 1} are not on the boundary")
    half = b + 1.0 / (4.0 * a)
    dom = D if D is not None else build_polygon([(-a - b, 0), (a + b, 0), (a + b, 1), (-a - b, 1)])
    return (StripRegion(dom, half, tag="lip-A"), StripRegion(dom, half + 1.0, tag="lip-A1"))


def sector_polygon(radius: float = 1.0, opening: float = 0.15, chords: int = 24) -> Domain:
    """Circular sector with apex at the origin, arc replaced by ``chords`` chords."""
    if not (radius > 0 and 0 < opening < math.pi and chords >= 1):
        raise GeometryError("need radius > 0, 0 < opening < pi and at least one chord")
    th = np.linspace(0.0, opening, chords + 1)
    arc = radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    return build_polygon(np.vstack([[0.0, 0.0], arc]))
