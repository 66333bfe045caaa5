import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from nodal_atlas.errors import GeometryError
from nodal_atlas.geometry import (Line2, Location, build_polygon, is_lip_domain,
                                  line_domain_clip, lip_domain_regions,
                                  obtuse_triangle_markers, perpendicular_bisector,
                                  point_in_domain, reflect_point_across_line,
                                  region_A1_triangle, region_A_triangle, region_D1_triangle,
                                  sector_polygon, triangle_corners)

TRI = [(0, 0), (4, 0), (1, 1)]


@pytest.fixture(scope="module")
def tri():
    return build_polygon(TRI, kind="obtuse-triangle")


@pytest.fixture(scope="module")
def markers():
    return obtuse_triangle_markers(*TRI)


# build_polygon


def test_triangle_area(tri):
    assert tri.area == pytest.approx(2.0, abs=1e-15)


def test_clockwise_input_is_reordered():
    D = build_polygon([(0, 0), (1, 1), (4, 0)])
    assert D.area == pytest.approx(2.0)
    assert D.vertices.tolist() == [[4.0, 0.0], [1.0, 1.0], [0.0, 0.0]]


def test_bowtie_rejected():
    with pytest.raises(GeometryError, match="self-intersecting"):
        build_polygon([(0, 0), (2, 0), (0, 2), (2, 2)])


@pytest.mark.parametrize("verts", [[(0, 0), (1, 1)], [(0, 0), (1, 0), (1, 0), (0, 1)],
                                   [(0, 0), (1, 0), (2, 0)], [(0, 0), (1, 0), (float("nan"), 1)]])
def test_invalid_polygons(verts):
    with pytest.raises(GeometryError):
        build_polygon(verts)


def test_unknown_kind():
    with pytest.raises(GeometryError):
        build_polygon(TRI, kind="blob")


# markers


def _sympy_markers():
    """Independent exact construction of the marker points with sympy."""
    C1, C2, C3 = sp.Point(0, 0), sp.Point(4, 0), sp.Point(1, 1)
    r1 = C1.distance(C3) / 2
    r2 = C2.distance(C3) / 2
    base = sp.Line(C1, C2)
    u = (C2 - C1) / C1.distance(C2)
    C4 = sp.Point((C1 + C3) / 2)
    C6 = sp.Point((C2 + C3) / 2)
    C5 = C1 + u * r1
    C7 = C2 - u * r2
    C8 = base.intersection(sp.Line(C2, C3).perpendicular_line(C4))[0]
    C9 = base.intersection(sp.Line(C1, C3).perpendicular_line(C6))[0]
    C10 = sp.Line(C1, C3).projection(C5)
    C11 = sp.Line(C2, C3).projection(C7)
    C12 = base.projection(C3)
    pts = dict(C4=C4, C5=C5, C6=C6, C7=C7, C8=C8, C9=C9, C10=C10, C11=C11, C12=C12)
    return {k: np.array([float(v.x), float(v.y)]) for k, v in pts.items()}, float(r1), float(r2)


def test_markers_match_exact_construction(markers):
    exact, r1, r2 = _sympy_markers()
    for name, val in exact.items():
        assert np.allclose(getattr(markers, name), val, atol=1e-12), name
    assert markers.r1 == pytest.approx(r1, abs=1e-14)
    assert markers.r2 == pytest.approx(r2, abs=1e-14)


def test_marker_examples(markers):
    assert np.allclose(markers.C4, [0.5, 0.5])
    assert np.allclose(markers.C5, [math.sqrt(2) / 2, 0.0], atol=1e-12)
    assert np.allclose(markers.C7, [4 - math.sqrt(10) / 2, 0.0], atol=1e-12)
    assert np.allclose(markers.C5, [0.70711, 0.0], atol=5e-6)
    assert np.allclose(markers.C7, [2.41886, 0.0], atol=5e-6)


def test_marker_perpendicularity(markers):
    m = markers
    dot = lambda a, b, c, d: float(np.dot(b - a, d - c))
    assert abs(dot(m.C4, m.C8, m.C2, m.C3)) < 1e-12
    assert abs(dot(m.C6, m.C9, m.C1, m.C3)) < 1e-12
    assert abs(dot(m.C5, m.C10, m.C1, m.C3)) < 1e-12
    assert abs(dot(m.C7, m.C11, m.C2, m.C3)) < 1e-12
    assert abs(dot(m.C12, m.C3, m.C1, m.C2)) < 1e-12


def test_beta_angles(markers):
    # mirror perpendicular to C2C3 / C1C3, measured from C1->C2 toward C3
    assert markers.beta1 == pytest.approx(math.pi / 2 - math.atan2(1, 3), abs=1e-12)
    assert markers.beta2 == pytest.approx(3 * math.pi / 4, abs=1e-12)
    assert markers.beta1 < markers.beta2


def test_non_obtuse_rejected():
    with pytest.raises(GeometryError):
        obtuse_triangle_markers((0, 0), (1, 0), (0, 1))
    with pytest.raises(GeometryError):
        obtuse_triangle_markers((0, 0), (1, 0), (2, 0))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.45))
def test_marker_ordering_on_obtuse_triangles(px, py):
    # C3 above the base inside the Thales circle: angle at C3 is obtuse
    if (px - 0.5) ** 2 + py ** 2 >= 0.25 * 0.98:
        return
    # the consistency guard never fires on a genuinely obtuse triangle
    m = obtuse_triangle_markers((0, 0), (1, 0), (px, py))
    assert 0 < m.C5[0] < m.C7[0] < 1
    assert m.beta1 < m.beta2


def test_triangle_corners(tri):
    C1, C2, C3 = triangle_corners(tri)
    assert np.allclose(C3, [1, 1]) and np.allclose(C1, [0, 0]) and np.allclose(C2, [4, 0])


# regions


def test_region_A_examples(tri, markers):
    A = region_A_triangle(markers, tri)
    assert A.contains([(1.5, 0.3)])[0]
    assert A.contains([(1.0, 1.0)])[0]
    assert not A.contains([(0.1, 0.05)])[0]
    assert not A.contains([(10.0, 0.5)])[0]


def test_region_A_is_the_distance_predicate(tri, markers):
    A = region_A_triangle(markers, tri)
    res = 1e-3 * tri.diameter
    xs = np.arange(-0.1, 4.1, res * 8)
    ys = np.arange(-0.1, 1.1, res * 8)
    P = np.array(np.meshgrid(xs, ys)).reshape(2, -1).T
    d1 = np.linalg.norm(P - markers.C1, axis=1)
    d2 = np.linalg.norm(P - markers.C2, axis=1)
    brute = (d1 >= markers.r1 - 1e-9) & (d2 >= markers.r2 - 1e-9) & tri.contains(P)
    assert np.array_equal(A.contains(P), brute)


def test_region_A1_examples(tri, markers):
    A1 = region_A1_triangle(markers, tri)
    assert A1.contains([markers.C3])[0]
    assert not A1.contains([markers.C1])[0]
    assert A1.contains([0.5 * (markers.C4 + markers.C6)])[0]


def test_region_D1(tri, markers):
    D1, left, right = region_D1_triangle(markers, tri)
    assert np.allclose(markers.C12, [1, 0])
    assert left == pytest.approx(0.5) and right == pytest.approx(1.5)
    assert D1.contains([(2.0, 0.2)])[0] and not D1.contains([(0.5, 0.2)])[0]


def test_lip_regions():
    A, A1 = lip_domain_regions(1.0, 0.4)
    assert A.half_width == pytest.approx(0.65) and A1.half_width == pytest.approx(1.65)
    A, _ = lip_domain_regions(1.0, 0.0)
    assert A.half_width == pytest.approx(0.25)
    with pytest.raises(GeometryError):
        lip_domain_regions(0.4, 0.0)
    with pytest.raises(GeometryError):
        lip_domain_regions(0.6, 0.5)


def test_lip_regions_shape_check():
    D = build_polygon([(-1, 0), (1, 0), (1, 0.8), (-1, 1)])
    with pytest.raises(GeometryError):
        lip_domain_regions(1.0, 0.0, D)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.51, 5.0), st.floats(0.0, 1.0))
def test_lip_A_inside_A1(a, frac):
    b = frac * (a - 1 / (4 * a)) * 0.999
    A, A1 = lip_domain_regions(a, b)
    assert A1.half_width - A.half_width == pytest.approx(1.0)
    xs = np.linspace(-a - b, a + b, 41)
    P = np.c_[xs, np.full_like(xs, 0.5)]
    assert np.all(~A.contains(P) | A1.contains(P))


# lines


def test_reflection_examples():
    assert np.allclose(reflect_point_across_line((2, 3), Line2((1, 0), (0, 1))), [0, 3])
    assert np.allclose(reflect_point_across_line((1, 5), Line2((1, 0), (0, 1))), [1, 5])
    assert np.allclose(reflect_point_across_line((1, 0), Line2((0, 0), (1, 1))), [0, 1])


coord = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(coord, coord, coord, coord, st.floats(0, 2 * math.pi))
def test_reflection_involution(px, py, ox, oy, th):
    L = Line2((ox, oy), (math.cos(th), math.sin(th)))
    p = np.array([px, py])
    assert np.allclose(reflect_point_across_line(reflect_point_across_line(p, L), L), p,
                       atol=1e-12)


def test_bisector_examples():
    L = perpendicular_bisector((0, 0), (2, 0))
    assert L.distance([(1.0, 0.0)]) < 1e-15 and abs(L.direction[0]) < 1e-15
    L = perpendicular_bisector((0, 0), (0, 2))
    assert L.distance([(0.0, 1.0)]) < 1e-15 and abs(L.direction[1]) < 1e-15
    L = perpendicular_bisector((0, 0), (2, 2))
    assert L.distance([(1.0, 1.0)]) < 1e-15
    assert abs(abs(np.dot(L.direction, [1, -1])) / math.sqrt(2) - 1) < 1e-12
    with pytest.raises(GeometryError):
        perpendicular_bisector((1, 1), (1, 1))


@settings(max_examples=200, deadline=None)
@given(coord, coord, coord, coord, st.floats(-20, 20))
def test_bisector_equidistant(x1, y1, x2, y2, s):
    if math.hypot(x2 - x1, y2 - y1) < 1e-6:
        return
    L = perpendicular_bisector((x1, y1), (x2, y2))
    q = L.point_at(s)
    assert abs(np.linalg.norm(q - [x1, y1]) - np.linalg.norm(q - [x2, y2])) < 1e-10


def test_clip_examples(tri):
    segs = line_domain_clip(Line2((1, -5), (0, 1)), tri)
    assert len(segs) == 1
    p, q = sorted(segs[0], key=lambda v: v[1])
    assert np.allclose(p, [1, 0]) and np.allclose(q, [1, 1])
    assert line_domain_clip(Line2((10, 0), (0, 1)), tri) == []
    segs = line_domain_clip(Line2((-3, 0), (1, 0)), tri)
    assert len(segs) == 1
    assert sorted(float(v[0]) for v in segs[0]) == pytest.approx([0.0, 4.0])


def test_clip_nonconvex():
    U = build_polygon([(0, 0), (3, 0), (3, 2), (2, 2), (2, 1), (1, 1), (1, 2), (0, 2)])
    segs = line_domain_clip(Line2((0, 1.5), (1, 0)), U)
    assert len(segs) == 2


@settings(max_examples=100, deadline=None)
@given(st.floats(-1, 5), st.floats(-1, 2), st.floats(0, math.pi))
def test_clip_segments_inside(ox, oy, th):
    D = build_polygon([(0, 0), (3, 0), (3, 2), (2, 2), (2, 1), (1, 1), (1, 2), (0, 2)])
    for p, q in line_domain_clip(Line2((ox, oy), (math.cos(th), math.sin(th))), D):
        s = np.linspace(0, 1, 25)[:, None]
        assert np.all(D.locate(p + s * (q - p), band=1e-9) >= 0)


def test_point_in_domain(tri):
    assert point_in_domain(tri, (5 / 3, 1 / 3)) == Location.INSIDE
    assert point_in_domain(tri, (4, 0)) == Location.BOUNDARY
    assert point_in_domain(tri, (100, 100)) == Location.OUTSIDE


def test_is_lip_domain():
    assert is_lip_domain(build_polygon([(-1, 0), (1, 0), (1, 1), (-1, 1)]))
    assert is_lip_domain(build_polygon(TRI))
    assert not is_lip_domain(build_polygon([(0, 0), (1, 0), (0.5, 2)]))
    hexa = [(-1.4, 0), (1, 0), (1.4, 0.4), (1.4, 1), (-1, 1), (-1.4, 0.6)]
    assert is_lip_domain(build_polygon(hexa))


def test_sector_polygon():
    S = sector_polygon(1.0, 0.15, 24)
    assert S.n == 26
    exact = 0.5 * 24 * math.sin(0.15 / 24)
    assert S.area == pytest.approx(exact, rel=1e-12)
