import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floorflow.errors import DegenerateInput, GeometryError, OffsetCollapse
from floorflow.geom import (
    Containment,
    FaceWithHoles,
    IntersectionKind,
    Point2,
    Polygon,
    SegmentClass,
    Side,
    classify_segment_against_face,
    convex_hull,
    delaunay_edges,
    delaunay_triangulate,
    is_inside,
    offset_polygon,
    point_in_face,
    point_segment_distance,
    rectangle,
    segment,
    segment_intersection,
)

FIXTURES = Path(__file__).parent / "fixtures"


def unit_square_with_hole():
    return FaceWithHoles(rectangle(0, 0, 1, 1), (rectangle(0.4, 0.4, 0.6, 0.6),))


def circumdisk_contains(a, b, c, p):
    """Plain circumcentre/radius oracle, independent of the library predicate."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
    r = math.hypot(ax - ux, ay - uy)
    return math.hypot(p[0] - ux, p[1] - uy) < r * (1 - 1e-9)


class TestPointInFace:
    def test_examples(self):
        face = unit_square_with_hole()
        assert point_in_face((0.2, 0.2), face) is Containment.NAVIGABLE
        assert point_in_face((0.5, 0.5), face) is Containment.IN_HOLE
        assert point_in_face((2.0, 2.0), face) is Containment.OUTSIDE
        assert point_in_face((0.4, 0.5), face) is Containment.ON_BOUNDARY
        assert point_in_face((1.0, 0.3), face) is Containment.ON_BOUNDARY
        assert is_inside((0.0, 0.0), face)
        assert not is_inside((0.5, 0.5), face)

    @given(st.floats(-0.5, 1.5), st.floats(-0.5, 1.5))
    def test_hole_removal_consistency(self, x, y):
        with_hole = unit_square_with_hole()
        without = FaceWithHoles(with_hole.outer, ())
        res = point_in_face((x, y), with_hole)
        if res is Containment.IN_HOLE:
            assert point_in_face((x, y), without) is Containment.NAVIGABLE

    def test_hole_must_be_inside(self):
        with pytest.raises(GeometryError):
            FaceWithHoles(rectangle(0, 0, 1, 1), (rectangle(0.8, 0.8, 1.2, 1.2),))


class TestPolygon:
    def test_orientation_normalised(self):
        cw = Polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
        assert cw.area == pytest.approx(1.0)

    def test_self_intersecting_rejected(self):
        with pytest.raises(GeometryError):
            Polygon([(0, 0), (1, 1), (1, 0), (0, 1)])

    def test_short_segment_rejected(self):
        with pytest.raises(GeometryError):
            segment((0, 0), (1e-7, 0))


class TestSegmentIntersection:
    def test_examples(self):
        r = segment_intersection(segment((0, 0), (1, 0)), segment((0.5, -1), (0.5, 1)))
        assert r.kind is IntersectionKind.PROPER
        assert r.point == pytest.approx((0.5, 0.0))
        assert segment_intersection(segment((0, 0), (1, 0)), segment((0, 1), (1, 1))).kind is IntersectionKind.NONE
        r = segment_intersection(segment((0, 0), (1, 0)), segment((1, 0), (1, 1)))
        assert r.kind is IntersectionKind.TOUCH
        assert r.point == pytest.approx((1.0, 0.0))

    def test_collinear(self):
        r = segment_intersection(segment((0, 0), (2, 0)), segment((1, 0), (3, 0)))
        assert r.kind is IntersectionKind.COLLINEAR_OVERLAP
        r = segment_intersection(segment((0, 0), (1, 0)), segment((1, 0), (3, 0)))
        assert r.kind is IntersectionKind.TOUCH
        r = segment_intersection(segment((0, 0), (1, 0)), segment((2, 0), (3, 0)))
        assert r.kind is IntersectionKind.NONE

    def test_t_junction_is_touch(self):
        r = segment_intersection(segment((0, 0), (2, 0)), segment((1, 0), (1, 1)))
        assert r.kind is IntersectionKind.TOUCH

    coords = st.integers(-4, 4).map(lambda v: v / 2)

    @given(coords, coords, coords, coords, coords, coords, coords, coords)
    def test_symmetric(self, a, b, c, d, e, f, g, h):
        if (a, b) == (c, d) or (e, f) == (g, h):
            return
        s1, s2 = segment((a, b), (c, d)), segment((e, f), (g, h))
        assert segment_intersection(s1, s2).kind is segment_intersection(s2, s1).kind


class TestClassify:
    def test_truth_table_fixture(self):
        data = json.loads((FIXTURES / "hole_in_square.json").read_text())
        face = FaceWithHoles(Polygon(data["outer"]), tuple(Polygon(h) for h in data["holes"]))
        assert len(data["cases"]) == 12
        for case in data["cases"]:
            got = classify_segment_against_face(segment(case["a"], case["b"]), face)
            assert got.value == case["expect"], case["name"]

    @settings(max_examples=300)
    @given(st.floats(-0.3, 1.3), st.floats(-0.3, 1.3), st.floats(-0.3, 1.3), st.floats(-0.3, 1.3))
    def test_valid_implies_samples_inside(self, x0, y0, x1, y1):
        if math.hypot(x1 - x0, y1 - y0) < 1e-3:
            return
        face = unit_square_with_hole()
        s = segment((x0, y0), (x1, y1))
        if classify_segment_against_face(s, face) is SegmentClass.VALID:
            for k in range(1, 64):
                t = k / 64
                p = (x0 + t * (x1 - x0), y0 + t * (y1 - y0))
                assert point_in_face(p, face) in (Containment.NAVIGABLE, Containment.ON_BOUNDARY)

    tenth = st.integers(-3, 13).map(lambda v: v / 10)

    @settings(max_examples=400)
    @given(tenth, tenth, tenth, tenth)
    def test_agrees_with_dense_sampling(self, x0, y0, x1, y1):
        # On a 0.1 m lattice every non-degenerate piece spans many samples,
        # so runs of closed-region samples give the label; one-sample runs are
        # point contacts.
        if (x0, y0) == (x1, y1):
            return
        face = unit_square_with_hole()
        t = np.linspace(0, 1, 4001)
        inside = [is_inside((x0 + u * (x1 - x0), y0 + u * (y1 - y0)), face) for u in t]
        runs, k = [], 0
        while k < len(inside):
            if inside[k]:
                j = k
                while j + 1 < len(inside) and inside[j + 1]:
                    j += 1
                if j > k:
                    runs.append((k, j))
                k = j + 1
            else:
                k += 1
        got = classify_segment_against_face(segment((x0, y0), (x1, y1)), face)
        if runs == [(0, len(inside) - 1)]:
            assert got is SegmentClass.VALID
        elif not runs:
            assert got is SegmentClass.OUTSIDE
        else:
            assert got is SegmentClass.SPLIT


class TestOffset:
    def test_square_inward(self):
        sq = offset_polygon(rectangle(0, 0, 1, 1), 0.1, Side.INWARD)
        assert sorted(map(tuple, np.round(sq.vertices, 12))) == [(0.1, 0.1), (0.1, 0.9), (0.9, 0.1), (0.9, 0.9)]

    def test_hole_outward(self):
        sq = offset_polygon(rectangle(0.4, 0.4, 0.6, 0.6), 0.05, Side.OUTWARD)
        assert sq.bounds() == pytest.approx((0.35, 0.35, 0.65, 0.65))

    def test_triangle_edges_at_exact_distance(self):
        tri = Polygon([(0, 0), (4, 0), (0, 3)])
        inset = offset_polygon(tri, 0.5, Side.INWARD)
        src = list(tri.edges())
        out = list(inset.edges())
        assert len(out) == 3
        for (a, b), (p, q) in zip(src, out):
            # distance from each offset endpoint to the infinite source line
            nx, ny = b[1] - a[1], a[0] - b[0]
            norm = math.hypot(nx, ny)
            for v in (p, q):
                assert abs((v[0] - a[0]) * nx + (v[1] - a[1]) * ny) / norm == pytest.approx(0.5, abs=1e-12)

    def test_collapse(self):
        with pytest.raises(OffsetCollapse):
            offset_polygon(rectangle(0, 0, 1, 1), 0.6, Side.INWARD)

    @given(st.floats(0.5, 5), st.floats(0.5, 5), st.floats(0.01, 0.2))
    def test_round_trip_convex(self, w, h, d):
        rect = rectangle(0, 0, w, h)
        back = offset_polygon(offset_polygon(rect, d, Side.INWARD), d, Side.OUTWARD)
        assert len(back.vertices) == 4
        for u in rect.vertices:
            assert min(math.dist(u, v) for v in back.vertices) < 1e-6


class TestDelaunay:
    def test_single_triangle(self):
        assert delaunay_triangulate([(0, 0), (1, 0), (0, 1)]) == [(0, 1, 2)]

    def test_square_with_centre(self):
        tris = delaunay_triangulate([(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)])
        assert len(tris) == 4
        assert all(4 in t for t in tris)

    def test_cocircular_tie_break(self):
        # square corners are cocircular; the diagonal touching index 0 wins
        tris = delaunay_triangulate([(0, 0), (1, 0), (1, 1), (0, 1)])
        edges = delaunay_edges(tris)
        assert (0, 2) in edges and (1, 3) not in edges

    def test_degenerate_inputs(self):
        with pytest.raises(DegenerateInput):
            delaunay_triangulate([(0, 0), (1, 1), (2, 2)])
        with pytest.raises(DegenerateInput):
            delaunay_triangulate([(0, 0), (1, 0), (0, 0), (0, 1)])
        with pytest.raises(DegenerateInput):
            delaunay_triangulate([(0, 0), (1, 0)])

    @pytest.mark.parametrize("seed", range(20))
    def test_empty_circumcircle_and_euler(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 51))
        pts = [tuple(p) for p in rng.random((n, 2)) * 10]
        tris = delaunay_triangulate(pts)
        for a, b, c in tris:
            for k, p in enumerate(pts):
                if k not in (a, b, c):
                    assert not circumdisk_contains(pts[a], pts[b], pts[c], p)
        hull = convex_hull(pts)
        assert len(tris) == 2 * n - 2 - len(hull)

    def test_covers_hull_area(self):
        rng = np.random.default_rng(3)
        pts = [tuple(p) for p in rng.random((30, 2))]
        tris = delaunay_triangulate(pts)
        area = sum(abs(Polygon([pts[a], pts[b], pts[c]]).area) for a, b, c in tris)
        hull = [pts[i] for i in convex_hull(pts)]
        assert area == pytest.approx(Polygon(hull).area, rel=1e-12)


def test_point_segment_distance():
    assert point_segment_distance((0.5, 1), (0, 0), (1, 0)) == pytest.approx(1.0)
    assert point_segment_distance((2, 0), (0, 0), (1, 0)) == pytest.approx(1.0)
    assert point_segment_distance(Point2(0, 0), (0, 0), (0, 0)) == 0.0
