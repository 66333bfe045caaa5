"""Zero sets and sign components of piecewise-linear fields.

Nodes where the field is exactly zero count as positive.  The zero set
of a P1 field is a union of straight pieces, one per triangle whose
nodes carry both signs, so extraction is exact for linear data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from ..errors import NodalDomainError
from ..geometry import Domain, triangle_corners
from .fem import EigenResult, assemble, multiplicity_estimate, smallest_eigenpairs
from .mesh import DIRICHLET, Mesh, submesh, triangulate


@dataclass(frozen=True, eq=False)
class NodalSet:
    """Zero-crossing segments and sign components of a nodal field.

    Attributes
    ----------
    segments : (s, 2, 2) array
        One straight piece per straddling triangle (zero-length pieces
        dropped).
    triangle_labels : (m,) int8 array
        +1 or -1 for triangles of one sign, 0 for straddling ones.
    domain_count : int
        Number of connected sign components.
    component_sign : (domain_count,) int8 array
        Sign of each component.
    """

    segments: np.ndarray
    triangle_labels: np.ndarray
    domain_count: int
    component_sign: np.ndarray

    def points(self) -> np.ndarray:
        return self.segments.reshape(-1, 2)

    def sample(self, step: float) -> np.ndarray:
        """Points along every segment with spacing at most ``step``."""
        if len(self.segments) == 0:
            return np.empty((0, 2))
        P, Q = self.segments[:, 0], self.segments[:, 1]
        n = int(max(2, np.ceil(np.linalg.norm(Q - P, axis=1).max() / step) + 1))
        s = np.linspace(0.0, 1.0, n)
        return (P[:, None, :] + s[None, :, None] * (Q - P)[:, None, :]).reshape(-1, 2)

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.segments[:, 1] - self.segments[:, 0], axis=1).sum())


def _crossings(mesh: Mesh, u: np.ndarray, pos: np.ndarray):
    tris = mesh.triangles
    segs = []
    straddle = np.flatnonzero(pos[tris].any(axis=1) & ~pos[tris].all(axis=1))
    for t in straddle:
        pts = []
        for i in range(3):
            a, b = tris[t, i], tris[t, (i + 1) % 3]
            if pos[a] != pos[b]:
                s = u[a] / (u[a] - u[b])
                pts.append(mesh.nodes[a] + s * (mesh.nodes[b] - mesh.nodes[a]))
        if len(pts) == 2 and np.any(pts[0] != pts[1]):
            segs.append(pts)
    return np.array(segs, dtype=float).reshape(-1, 2, 2), straddle


def sign_components(mesh: Mesh, u: np.ndarray):
    """Connected components of ``{u >= 0}`` and ``{u < 0}`` on the mesh.

    Each triangle contributes one piece per sign present at its nodes.
    Two pieces of the same sign in neighbouring triangles touch when
    their shared edge has a node of that sign.  Returns
    ``(n_components, piece_triangle, piece_sign, piece_label)``.
    """
    pos = u >= 0
    tris = mesh.triangles
    m = len(tris)
    has = np.stack([pos[tris].any(axis=1), (~pos[tris]).any(axis=1)], axis=1)
    piece_id = np.full((m, 2), -1, dtype=np.int64)
    piece_id[has] = np.arange(int(has.sum()))
    pt, ps = np.nonzero(has)

    e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    owner = np.tile(np.arange(m), 3)
    key = np.sort(e, axis=1)
    order = np.lexsort((key[:, 1], key[:, 0]))
    key, owner, e = key[order], owner[order], e[order]
    same = np.all(key[1:] == key[:-1], axis=1)
    i = np.flatnonzero(same)
    t1, t2 = owner[i], owner[i + 1]
    ends = pos[key[i]]
    rows, cols = [], []
    for s, present in ((0, ends.any(axis=1)), (1, (~ends).any(axis=1))):
        ok = present & has[t1, s] & has[t2, s]
        rows.append(piece_id[t1[ok], s])
        cols.append(piece_id[t2[ok], s])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    n = len(pt)
    G = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ncomp, labels = connected_components(G, directed=False)
    return ncomp, pt, ps, labels


def nodal_set(mesh: Mesh, u) -> NodalSet:
    """Zero set of the P1 field ``u`` and a count of its sign components.

    Raises
    ------
    NodalDomainError
        ``u`` is identically zero or has the wrong length.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.n_nodes,):
        raise NodalDomainError(f"field has {u.size} values for {mesh.n_nodes} nodes")
    if not np.any(u != 0):
        raise NodalDomainError("field is identically zero")
    pos = u >= 0
    segs, straddle = _crossings(mesh, u, pos)
    labels = np.where(pos[mesh.triangles].all(axis=1), 1, -1).astype(np.int8)
    labels[straddle] = 0
    ncomp, _, ps, lab = sign_components(mesh, u)
    comp_sign = np.zeros(ncomp, dtype=np.int8)
    comp_sign[lab] = np.where(ps == 0, 1, -1)
    return NodalSet(segs, labels, int(ncomp), comp_sign)


def reference_point(D: Domain) -> np.ndarray:
    """Point whose nodal domain is made negative by the sign convention."""
    if D.kind == "obtuse-triangle":
        return triangle_corners(D)[0]
    if D.kind == "lip" and D.lip_params:
        a, b = float(D.lip_params["a"]), float(D.lip_params.get("b", 0.0))
        return np.array([-a - b, 0.5])
    return D.vertices[0].copy()


def orient(mesh: Mesh, u: np.ndarray, ref) -> np.ndarray:
    """``u`` with sign chosen so the node nearest ``ref`` is negative."""
    i = int(np.argmin(np.linalg.norm(mesh.nodes - np.asarray(ref, float), axis=1)))
    return -u if u[i] > 0 else u


@dataclass(frozen=True, eq=False)
class SecondMode:
    """Everything computed for one second eigenfunction."""

    domain: Domain
    mesh: Mesh
    eig: EigenResult
    u: np.ndarray
    nodal: NodalSet
    index: int
    multiplicity: int


def solve_domain(D: Domain, h: float, k: int = 4) -> EigenResult:
    mesh = triangulate(D, h)
    K, M = assemble(mesh)
    return smallest_eigenpairs(K, M, k, mesh)


def second_modes(D: Domain, h: float, k: int = 4, require_two: bool = True) -> list[SecondMode]:
    """Second eigenfunction(s) of ``D``, one per member of a near-double pair."""
    eig = solve_domain(D, h, k)
    mult = multiplicity_estimate(eig)
    ref = reference_point(D)
    out = []
    for idx in range(1, 1 + mult):
        u = orient(eig.mesh, eig.vector(idx), ref)
        ns = nodal_set(eig.mesh, u)
        if require_two and ns.domain_count != 2:
            raise NodalDomainError(
                f"eigenfunction {idx + 1} has {ns.domain_count} nodal domains, expected 2")
        out.append(SecondMode(D, eig.mesh, eig, u, ns, idx, mult))
    return out


def second_eigenfunction(D: Domain, h: float, k: int = 4) -> tuple[EigenResult, NodalSet]:
    """Mesh, solve and extract the nodal set of the second eigenfunction.

    The returned result's second column is sign-oriented so that the
    node nearest the reference point (corner C1 of an obtuse triangle,
    ``(-a-b, 1/2)`` for the two-flat-sides family, vertex 0 otherwise) is
    negative.

    Raises
    ------
    NodalDomainError
        The eigenfunction does not have exactly two nodal domains.
    """
    mode = second_modes(D, h, k)[0]
    V = mode.eig.eigenvectors.copy()
    V[:, 1] = mode.u
    eig = EigenResult(mode.eig.eigenvalues, V, mode.eig.residuals,
                      mode.eig.orthogonality, mode.mesh)
    return eig, mode.nodal


@dataclass(frozen=True, eq=False)
class NodalDomain:
    """One sign component cut out of the mesh along its nodal line.

    The nodal line is snapped to the nearest chain of mesh edges: on
    every edge where the field changes sign, the endpoint closer to the
    zero crossing becomes an interface node.  The sub-mesh keeps the
    triangles whose remaining nodes all have the requested sign, and its
    interface edges are tagged ``DIRICHLET``.
    """

    mesh: Mesh
    node_map: np.ndarray
    sign: int
    parent: Mesh
    u: np.ndarray

    @property
    def interface_nodes(self) -> np.ndarray:
        return self.mesh.boundary_nodes([DIRICHLET])

    @property
    def area(self) -> float:
        return self.mesh.area


def snap_nodes(mesh: Mesh, u) -> np.ndarray:
    """Boolean mask of nodes that carry the snapped nodal line."""
    u = np.asarray(u, dtype=float)
    t = mesh.triangles
    e = np.unique(np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1),
                  axis=0)
    pos = u >= 0
    cross = e[pos[e[:, 0]] != pos[e[:, 1]]]
    ua, ub = np.abs(u[cross[:, 0]]), np.abs(u[cross[:, 1]])
    near = np.where(ua <= ub, cross[:, 0], cross[:, 1])
    mask = np.zeros(mesh.n_nodes, dtype=bool)
    mask[near] = True
    return mask


def nodal_domain(mesh: Mesh, u, sign: int) -> NodalDomain:
    """Sub-mesh of the nodal domain where ``u`` has sign ``sign``."""
    u = np.asarray(u, dtype=float)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    z = snap_nodes(mesh, u)
    if not z.any():
        raise NodalDomainError("field does not change sign; no nodal interface")
    own = ((u >= 0) if sign > 0 else (u < 0)) & ~z
    other = ~own & ~z
    t = mesh.triangles
    keep = ~other[t].any(axis=1) & own[t].any(axis=1)
    flat = z[t].all(axis=1)
    mean = u[t].mean(axis=1)
    keep |= flat & ((mean >= 0) if sign > 0 else (mean < 0))
    if not keep.any():
        raise NodalDomainError("selected sign component is empty")
    sub, used = submesh(mesh, keep)
    if not np.any(sub.edge_markers == DIRICHLET):
        raise NodalDomainError("selected component has no nodal interface")
    return NodalDomain(sub, used, sign, mesh, u)
