import math
import warnings

import numpy as np
import pytest
from scipy import special

from nodal_atlas.errors import MeshError, NodalDomainError, SpectralError
from nodal_atlas.geometry import build_polygon
from nodal_atlas.spectral import (DIRICHLET, EigenResult, Mesh, assemble,
                                  mixed_first_eigenvalue, multiplicity_estimate, nodal_domain,
                                  nodal_set, read_mesh_text, second_eigenfunction,
                                  sector_constants, sector_nodal_ratio, smallest_eigenpairs,
                                  triangulate, write_mesh_text)
from nodal_atlas.spectral.nodal import solve_domain
from nodal_atlas.spectral import bessel

SQUARE = build_polygon([(0, 0), (1, 0), (1, 1), (0, 1)])
RECT = build_polygon([(0, 0), (2, 0), (2, 1), (0, 1)])
TRI = build_polygon([(0, 0), (4, 0), (1, 1)], kind="obtuse-triangle")
MU2_RECT = (math.pi / 2) ** 2


def two_triangle_square():
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    tris = np.array([[0, 1, 2], [0, 2, 3]])
    edges = np.array([[0, 1], [1, 2], [2, 3], [3, 0]])
    return Mesh(nodes, tris, edges, np.arange(4), 1.0)


@pytest.fixture(scope="module")
def rect_mesh():
    return triangulate(RECT, 0.05)


# meshing


def test_square_mesh_area():
    m = triangulate(SQUARE, 0.5)
    assert m.n_triangles >= 8
    assert m.area == pytest.approx(1.0, abs=1e-12)


def test_mesh_quality(rect_mesh):
    m = rect_mesh
    m.validate()
    assert np.all(m.areas > 1e-14)
    assert m.edge_lengths().max() <= 1.5 * m.h
    assert m.min_angles().min() >= 20.0 - 1e-9


def test_coarse_triangle_mesh():
    m = triangulate(TRI, TRI.diameter / 2)
    m.validate()
    assert m.area == pytest.approx(2.0, abs=1e-12)
    # elements away from the sharp input corners keep the angle bound
    sharp = [i for i, a in enumerate(TRI.interior_angles()) if math.degrees(a) < 20]
    fine = triangulate(TRI, 0.05)
    touching = np.isin(fine.triangles, fine.boundary_nodes()).any(axis=1)
    near = np.zeros(fine.n_triangles, bool)
    for i in sharp:
        near |= np.linalg.norm(fine.centroids - TRI.vertices[i], axis=1) < 0.2
    assert fine.min_angles()[~near].min() >= 20.0 - 1e-9
    assert touching.any()


def test_boundary_markers(rect_mesh):
    m = rect_mesh
    for e in range(4):
        a, b = RECT.edges[e]
        P = m.nodes[m.boundary_edges[m.edge_markers == e]].reshape(-1, 2)
        cross = (b[0] - a[0]) * (P[:, 1] - a[1]) - (b[1] - a[1]) * (P[:, 0] - a[0])
        assert np.all(np.abs(cross) < 1e-12)


@pytest.mark.parametrize("h", [0.0, -1.0, 10.0, 1e-5])
def test_bad_mesh_sizes(h):
    with pytest.raises(MeshError):
        triangulate(SQUARE, h)


def test_mesh_text_roundtrip(tmp_path):
    m = triangulate(TRI, 0.3)
    write_mesh_text(m, tmp_path / "m.txt")
    r = read_mesh_text(tmp_path / "m.txt")
    assert np.array_equal(r.nodes, m.nodes) and np.array_equal(r.triangles, m.triangles)
    assert np.array_equal(r.edge_markers, m.edge_markers)


# assembly


def test_two_triangle_stiffness():
    K, M = assemble(two_triangle_square())
    # hand assembly of two unit right triangles sharing the diagonal 0-2
    expected = np.array([[1.0, -0.5, 0.0, -0.5],
                         [-0.5, 1.0, -0.5, 0.0],
                         [0.0, -0.5, 1.0, -0.5],
                         [-0.5, 0.0, -0.5, 1.0]])
    assert np.allclose(K.toarray(), expected, atol=1e-15)
    # each diagonal node couples to its neighbours with total weight -1
    off = K.toarray() - np.diag(K.diagonal())
    assert off[0].sum() == pytest.approx(-1.0) and off[2].sum() == pytest.approx(-1.0)
    assert np.abs(K.sum(axis=1)).max() < 1e-14
    assert M.sum() == pytest.approx(1.0, abs=1e-14)


def test_single_right_triangle():
    m = Mesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]]),
             np.array([[0, 1], [1, 2], [2, 0]]), np.arange(3), 1.0)
    K, M = assemble(m)
    assert np.allclose(K.toarray(), [[1, -0.5, -0.5], [-0.5, 0.5, 0], [-0.5, 0, 0.5]])
    assert np.abs(K @ np.ones(3)).max() < 1e-15
    assert M.sum() == pytest.approx(0.5)


def test_assembly_properties(rect_mesh):
    K, M = assemble(rect_mesh)
    assert abs(K - K.T).max() == 0 and abs(M - M.T).max() == 0
    assert np.abs(K @ np.ones(rect_mesh.n_nodes)).max() <= 1e-10
    assert M.sum() == pytest.approx(2.0, abs=1e-10)
    w = np.linalg.eigvalsh(M.toarray()[:200, :200])
    assert w.min() > 0


# eigenpairs


@pytest.fixture(scope="module")
def rect_eig(rect_mesh):
    K, M = assemble(rect_mesh)
    return smallest_eigenpairs(K, M, 4, rect_mesh), K, M


def test_eigen_invariants(rect_eig):
    ev, K, M = rect_eig
    mu = ev.eigenvalues
    assert abs(mu[0]) <= 1e-8
    assert np.all(np.diff(mu) >= 0)
    V = ev.eigenvectors
    assert np.std(V[:, 0]) <= 1e-6
    assert np.abs(V.T @ (M @ V) - np.eye(4)).max() <= 1e-8
    for i in range(4):
        r = np.linalg.norm(K @ V[:, i] - mu[i] * (M @ V[:, i]))
        assert r <= 1e-8 * np.linalg.norm(V[:, i])
    assert np.all(ev.residuals <= 1e-8)


def test_rectangle_spectrum(rect_eig):
    ev, _, _ = rect_eig
    assert ev.mu2 == pytest.approx(MU2_RECT, rel=5e-3)
    # (pi)^2 is shared by the (2,0) and (0,1) modes
    assert ev.eigenvalues[2] == pytest.approx(math.pi ** 2, rel=2e-2)
    assert ev.eigenvalues[3] == pytest.approx(math.pi ** 2, rel=2e-2)
    assert multiplicity_estimate(ev) == 1


def test_convergence_rate():
    err = [abs(solve_domain(RECT, h).mu2 - MU2_RECT) for h in (0.08, 0.04)]
    assert err[1] / err[0] <= 0.5


def test_square_double_eigenvalue():
    ev = solve_domain(SQUARE, 0.05)
    assert multiplicity_estimate(ev) == 2
    assert ev.mu2 == pytest.approx(math.pi ** 2, rel=1e-2)
    _, ns = second_eigenfunction(SQUARE, 0.05)
    assert ns.domain_count == 2


def test_multiplicity_clamps():
    ev = EigenResult(np.array([0.0, 1.0, 1.001, 1.002]), np.zeros((3, 4)), np.zeros(4), 0.0, None)
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        assert multiplicity_estimate(ev) == 2
    assert any("gap" in str(x.message) for x in w)
    with pytest.raises(SpectralError):
        multiplicity_estimate(EigenResult(np.array([0.0, 1.0]), np.zeros((3, 2)),
                                          np.zeros(2), 0.0, None))


def test_small_problem_dense_path():
    ev = smallest_eigenpairs(*assemble(two_triangle_square()), k=3)
    assert abs(ev.eigenvalues[0]) < 1e-12


def test_triangle_second_eigenfunction():
    eig, ns = second_eigenfunction(TRI, 0.02)
    assert ns.domain_count == 2
    assert multiplicity_estimate(eig) == 1
    # the node nearest C1 carries the negative sign
    i = np.argmin(np.linalg.norm(eig.mesh.nodes, axis=1))
    assert eig.vector(1)[i] < 0


def test_rectangle_nodal_line():
    h = 0.02
    eig, ns = second_eigenfunction(RECT, h)
    assert eig.mu2 == pytest.approx(MU2_RECT, rel=1e-2)
    assert np.abs(ns.points()[:, 0] - 1.0).max() <= h
    assert ns.length == pytest.approx(1.0, rel=1e-6)


# nodal extraction


def test_linear_field_exact(rect_mesh):
    u = rect_mesh.nodes[:, 0] - 1.0
    ns = nodal_set(rect_mesh, u)
    assert np.abs(ns.points()[:, 0] - 1.0).max() <= 1e-12
    assert ns.domain_count == 2
    assert set(ns.component_sign.tolist()) == {-1, 1}


def test_constant_field(rect_mesh):
    ns = nodal_set(rect_mesh, np.ones(rect_mesh.n_nodes))
    assert len(ns.segments) == 0 and ns.domain_count == 1


def test_zero_field_rejected(rect_mesh):
    with pytest.raises(NodalDomainError):
        nodal_set(rect_mesh, np.zeros(rect_mesh.n_nodes))
    with pytest.raises(NodalDomainError):
        nodal_set(rect_mesh, np.ones(3))


def test_checkerboard_two_triangles():
    m = two_triangle_square()
    ns = nodal_set(m, np.array([0.0, 1.0, 0.0, -1.0]))
    assert len(ns.segments) == 1 and ns.domain_count == 2


def test_nodal_domain_cut(rect_mesh):
    u = rect_mesh.nodes[:, 0] - 1.0 + 1e-3
    left = nodal_domain(rect_mesh, u, -1)
    right = nodal_domain(rect_mesh, u, 1)
    assert len(left.interface_nodes) > 0
    assert left.area + right.area <= 2.0 + 1e-12
    assert abs(left.mesh.nodes[left.interface_nodes, 0] - 1.0).max() <= rect_mesh.h
    with pytest.raises(NodalDomainError):
        nodal_domain(rect_mesh, np.ones(rect_mesh.n_nodes), 1)


# mixed problem


def test_mixed_quarter_waves():
    sq = mixed_first_eigenvalue(triangulate(SQUARE, 0.02), [1])
    long = build_polygon([(0, 0), (1.5, 0), (1.5, 1), (0, 1)])
    lg = mixed_first_eigenvalue(triangulate(long, 0.02), [1])
    assert sq == pytest.approx((math.pi / 2) ** 2, rel=5e-3)
    assert lg == pytest.approx((math.pi / 3) ** 2, rel=5e-3)
    assert lg < sq


def test_mixed_monotone_in_length():
    vals = []
    for s in (1.0, 1.25, 1.5):
        D = build_polygon([(0, 0), (s, 0), (s, 1), (0, 1)])
        vals.append(mixed_first_eigenvalue(triangulate(D, 0.05), [1]))
    assert vals[0] > vals[1] > vals[2] > 0


def test_mixed_errors():
    m = triangulate(SQUARE, 0.25)
    with pytest.raises(SpectralError):
        mixed_first_eigenvalue(m)  # no DIRICHLET-marked edges on a plain mesh
    with pytest.raises(SpectralError):
        mixed_first_eigenvalue(m, m.boundary_edges.tolist() + m.triangles[:, :2].tolist())


def test_mixed_on_cut_rectangle():
    eig, _ = second_eigenfunction(RECT, 0.02)
    left = nodal_domain(eig.mesh, eig.vector(1), -1)
    assert np.any(left.mesh.edge_markers == DIRICHLET)
    lam = mixed_first_eigenvalue(left.mesh)
    assert lam == pytest.approx(eig.mu2, rel=2e-2)


# Bessel constants


def test_sector_constants_against_scipy():
    a0, a1, ratio = sector_constants()
    assert a0 == pytest.approx(special.jn_zeros(0, 1)[0], abs=1e-8)
    assert a1 == pytest.approx(special.jnp_zeros(0, 1)[0], abs=1e-8)
    assert a0 == pytest.approx(2.404825558, abs=1e-8)
    assert a1 == pytest.approx(3.831705970, abs=1e-8)
    assert sector_nodal_ratio() == pytest.approx(0.6276, abs=1e-4)
    assert ratio == pytest.approx(a0 / a1, abs=1e-9)


@pytest.mark.parametrize("x", [0.1, 1.0, 2.5, 3.8, 6.0])
def test_series_against_scipy(x):
    assert bessel.j0(x) == pytest.approx(special.j0(x), abs=1e-13)
    assert bessel.j1(x) == pytest.approx(special.j1(x), abs=1e-13)


def test_bisect_rejects_bad_bracket():
    with pytest.raises(ValueError):
        bessel.bisect(lambda x: x * x + 1, -1.0, 1.0)
