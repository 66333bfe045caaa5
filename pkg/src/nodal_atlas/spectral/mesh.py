"""Triangulation of polygonal domains.

Meshes come from Shewchuk's ``triangle`` (constrained Delaunay with
quality refinement).  The polygon boundary is pre-split into pieces no
longer than ``h`` so that boundary elements respect the size bound as
well, and every boundary edge remembers which polygon edge it came from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import triangle

from ..errors import MeshError
from ..geometry import Domain

MIN_ANGLE = 20.0
MAX_EDGE_FACTOR = 1.5
MAX_ELEMENTS = 4_000_000
DIRICHLET = -1


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation with tagged boundary edges.

    ``edge_markers[i]`` is the polygon edge that ``boundary_edges[i]``
    subdivides, or ``DIRICHLET`` for an interface edge introduced when a
    sub-mesh is cut out along a nodal line.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    edge_markers: np.ndarray
    h: float
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def areas(self) -> np.ndarray:
        if "areas" not in self._cache:
            p = self.nodes[self.triangles]
            d1 = p[:, 1] - p[:, 0]
            d2 = p[:, 2] - p[:, 0]
            self._cache["areas"] = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        return self._cache["areas"]

    @property
    def area(self) -> float:
        return float(self.areas.sum())

    def edge_lengths(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        return np.stack([np.linalg.norm(p[:, (i + 1) % 3] - p[:, i], axis=1)
                         for i in range(3)], axis=1)

    def min_angles(self) -> np.ndarray:
        """Smallest interior angle of each triangle, in degrees."""
        L = self.edge_lengths()
        a, b, c = L[:, 1], L[:, 2], L[:, 0]   # side opposite node 0, 1, 2
        cos0 = (b * b + c * c - a * a) / (2 * b * c)
        cos1 = (a * a + c * c - b * b) / (2 * a * c)
        cos2 = (a * a + b * b - c * c) / (2 * a * b)
        ang = np.degrees(np.arccos(np.clip(np.stack([cos0, cos1, cos2], axis=1), -1, 1)))
        return ang.min(axis=1)

    @property
    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    def boundary_nodes(self, markers=None) -> np.ndarray:
        """Nodes on boundary edges, optionally only those with given markers."""
        e = self.boundary_edges
        if markers is not None:
            e = e[np.isin(self.edge_markers, np.asarray(list(markers)))]
        return np.unique(e)

    def validate(self, tol: float = 1e-14) -> None:
        """Raise :class:`MeshError` on inverted or degenerate elements."""
        if self.n_triangles == 0:
            raise MeshError("mesh has no triangles")
        bad = np.flatnonzero(self.areas <= tol)
        if len(bad):
            raise MeshError(f"{len(bad)} degenerate or inverted triangles (first {int(bad[0])})")


def _split_boundary(D: Domain, h: float):
    pts, seg, mark = [], [], []
    for k, (a, b) in enumerate(D.edges):
        n = max(1, int(math.ceil(np.linalg.norm(b - a) / h - 1e-9)))
        for j in range(n):
            pts.append(a + (b - a) * (j / n))
            mark.append(k)
    m = len(pts)
    seg = [[i, (i + 1) % m] for i in range(m)]
    return np.array(pts), np.array(seg, dtype=np.int32), np.array(mark, dtype=np.int32)


def triangulate(D: Domain, h: float, min_angle: float = MIN_ANGLE) -> Mesh:
    """Quality triangulation of ``D`` with element size about ``h``.

    Every element edge is at most ``1.5 h`` long and, away from polygon
    corners sharper than ``min_angle``, every angle is at least
    ``min_angle`` degrees.  Boundary edges carry the index of the polygon
    edge they lie on.

    Raises
    ------
    MeshError
        ``h`` not positive or larger than the domain diameter, or the
        element count would exceed ``MAX_ELEMENTS``.
    """
    if not (np.isfinite(h) and h > 0):
        raise MeshError(f"mesh size must be positive, got h={h}")
    if h > D.diameter * (1 + 1e-12):
        raise MeshError(f"mesh size h={h} exceeds the domain diameter {D.diameter:.6g}")
    target = h * h * math.sqrt(3) / 4
    if D.area / target > MAX_ELEMENTS:
        raise MeshError(f"h={h} would need more than {MAX_ELEMENTS} elements")
    pts, seg, mark = _split_boundary(D, h)
    # triangle reserves marker 0 for "unmarked", so shift by one
    geom = {"vertices": pts, "segments": seg, "segment_markers": (mark + 1)[:, None]}
    factor = 0.8
    for _ in range(6):
        area = factor * target
        out = triangle.triangulate(geom, f"pq{min_angle:g}a{area:.15f}Q")
        nodes = np.ascontiguousarray(out["vertices"], dtype=float)
        tris = np.ascontiguousarray(out["triangles"], dtype=np.int64)
        p = nodes[tris]
        longest = max(float(np.max(np.linalg.norm(p[:, (i + 1) % 3] - p[:, i], axis=1)))
                      for i in range(3))
        if longest <= MAX_EDGE_FACTOR * h:
            break
        factor *= 0.7
    else:
        raise MeshError(f"could not reach element size {h} (longest edge {longest:.4g})")
    bedges = np.asarray(out["segments"], dtype=np.int64)
    bmark = np.asarray(out["segment_markers"], dtype=np.int64).reshape(-1) - 1
    mesh = Mesh(nodes, tris, bedges, bmark, float(h))
    if np.any(mesh.areas < 0):
        mesh = Mesh(nodes, tris[:, [0, 2, 1]].copy(), bedges, bmark, float(h))
    mesh.validate()
    return mesh


def submesh(mesh: Mesh, keep: np.ndarray) -> tuple[Mesh, np.ndarray]:
    """Mesh made of the triangles selected by boolean mask ``keep``.

    Edges of the selection that were interior to ``mesh`` become
    boundary edges with marker ``DIRICHLET``.  Returns the new mesh and
    the map from new node index to old node index.
    """
    tris = mesh.triangles[keep]
    if len(tris) == 0:
        raise MeshError("empty sub-mesh")
    used = np.unique(tris)
    remap = np.full(mesh.n_nodes, -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    new_tris = remap[tris]

    e = np.sort(np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    edge_once = uniq[counts == 1]
    old_b = np.sort(mesh.boundary_edges, axis=1)
    key = lambda arr: arr[:, 0] * mesh.n_nodes + arr[:, 1]
    lookup = dict(zip(key(old_b).tolist(), mesh.edge_markers.tolist()))
    marks = np.array([lookup.get(k, DIRICHLET) for k in key(edge_once).tolist()], dtype=np.int64)
    sub = Mesh(mesh.nodes[used], new_tris, remap[edge_once], marks, mesh.h)
    return sub, used


def write_mesh_text(mesh: Mesh, path) -> None:
    """Plain-text mesh: counts, nodes, triangles, then marked boundary edges."""
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_nodes} {mesh.n_triangles} {len(mesh.boundary_edges)}\n")
        for x, y in mesh.nodes:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")
        for (a, b), m in zip(mesh.boundary_edges, mesh.edge_markers):
            fh.write(f"{a} {b} {m}\n")


def read_mesh_text(path, h: float = math.nan) -> Mesh:
    with open(path) as fh:
        nn, nt, nb = (int(v) for v in fh.readline().split())
        nodes = np.array([[float(v) for v in fh.readline().split()] for _ in range(nn)])
        tris = np.array([[int(v) for v in fh.readline().split()] for _ in range(nt)], dtype=np.int64)
        rows = [[int(v) for v in fh.readline().split()] for _ in range(nb)]
    b = np.array(rows, dtype=np.int64).reshape(-1, 3)
    return Mesh(nodes.reshape(-1, 2), tris.reshape(-1, 3), b[:, :2].copy(), b[:, 2].copy(), h)
