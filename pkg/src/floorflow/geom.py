"""Planar geometry for floor plans.

Everything here works in metres on the floor plane. Values are immutable
and every function is pure, so results can be shared freely between threads.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .errors import DegenerateInput, GeometryError, OffsetCollapse

EPS = 1e-9
MIN_SEGMENT_LENGTH = 1e-6


class Point2(NamedTuple):
    x: float
    y: float


class Segment(NamedTuple):
    a: Point2
    b: Point2

    @property
    def length(self) -> float:
        return dist(self.a, self.b)


def point(x, y) -> Point2:
    x, y = float(x), float(y)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise GeometryError(f"non-finite coordinate ({x}, {y})")
    return Point2(x, y)


def segment(a, b) -> Segment:
    a, b = point(*a), point(*b)
    if dist(a, b) <= MIN_SEGMENT_LENGTH:
        raise GeometryError(f"segment {a}-{b} is shorter than {MIN_SEGMENT_LENGTH} m")
    return Segment(a, b)


def dist(a, b) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def cross(o, a, b) -> float:
    """Twice the signed area of triangle o, a, b (positive when counter-clockwise)."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def signed_area(vertices: Sequence[Point2]) -> float:
    n = len(vertices)
    s = 0.0
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def point_segment_distance(p, a, b) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return dist(p, a)
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L2
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy))


def _edges(vertices):
    n = len(vertices)
    return [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]


@dataclass(frozen=True)
class Polygon:
    """Simple polygon; vertex order is normalised to counter-clockwise."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple(point(*v) for v in self.vertices)
        if len(verts) >= 2 and dist(verts[0], verts[-1]) <= EPS:
            verts = verts[:-1]
        if len(verts) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        area = signed_area(verts)
        if abs(area) <= EPS:
            raise GeometryError("polygon has zero area")
        if area < 0:
            verts = verts[::-1]
        if not _is_simple(verts):
            raise GeometryError("polygon is self-intersecting")
        object.__setattr__(self, "vertices", verts)

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    def edges(self):
        return _edges(self.vertices)

    def bounds(self):
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def contains(self, p) -> bool:
        """Crossing-number test; boundary points are not handled specially."""
        return _crossing_inside(p, self.vertices)

    def on_boundary(self, p, tol=EPS) -> bool:
        return any(point_segment_distance(p, a, b) <= tol for a, b in self.edges())


def rectangle(x0, y0, x1, y1) -> Polygon:
    return Polygon(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


def _crossing_inside(p, vertices) -> bool:
    x, y = p
    inside = False
    n = len(vertices)
    j = n - 1
    for i in range(n):
        xi, yi = vertices[i]
        xj, yj = vertices[j]
        if (yi > y) != (yj > y):
            xc = xi + (y - yi) * (xj - xi) / (yj - yi)
            if x < xc:
                inside = not inside
        j = i
    return inside


def _is_simple(verts) -> bool:
    edges = _edges(verts)
    n = len(edges)
    for i in range(n):
        for j in range(i + 1, n):
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            hit = segment_intersection(Segment(*edges[i]), Segment(*edges[j]))
            if hit.kind is IntersectionKind.NONE:
                continue
            if adjacent and hit.kind is IntersectionKind.TOUCH:
                continue
            return False
    return True


@dataclass(frozen=True)
class FaceWithHoles:
    outer: Polygon
    holes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        holes = tuple(self.holes)
        object.__setattr__(self, "holes", holes)
        for k, h in enumerate(holes):
            for v in h.vertices:
                if not self.outer.contains(v) or self.outer.on_boundary(v):
                    raise GeometryError(f"hole {k} is not strictly inside the outer boundary")
            for a, b in h.edges():
                for oa, ob in self.outer.edges():
                    if segment_intersection(Segment(a, b), Segment(oa, ob)).kind is not IntersectionKind.NONE:
                        raise GeometryError(f"hole {k} crosses the outer boundary")
        for i in range(len(holes)):
            for j in range(i + 1, len(holes)):
                if _interiors_overlap(holes[i], holes[j]):
                    raise GeometryError(f"holes {i} and {j} overlap")

    def boundary_edges(self):
        out = list(self.outer.edges())
        for h in self.holes:
            out.extend(h.edges())
        return out

    def bounds(self):
        return self.outer.bounds()


def _interiors_overlap(p: Polygon, q: Polygon) -> bool:
    for a, b in p.edges():
        for c, d in q.edges():
            if segment_intersection(Segment(a, b), Segment(c, d)).kind in (
                IntersectionKind.PROPER,
                IntersectionKind.COLLINEAR_OVERLAP,
            ):
                return True
    if any(q.contains(v) and not q.on_boundary(v) for v in p.vertices):
        return True
    return any(p.contains(v) and not p.on_boundary(v) for v in q.vertices)


class Containment(enum.Enum):
    NAVIGABLE = "navigable"
    IN_HOLE = "in_hole"
    OUTSIDE = "outside"
    ON_BOUNDARY = "on_boundary"


def point_in_face(p, face: FaceWithHoles) -> Containment:
    for a, b in face.boundary_edges():
        if point_segment_distance(p, a, b) <= EPS:
            return Containment.ON_BOUNDARY
    if not face.outer.contains(p):
        return Containment.OUTSIDE
    for h in face.holes:
        if h.contains(p):
            return Containment.IN_HOLE
    return Containment.NAVIGABLE


def is_inside(p, face: FaceWithHoles) -> bool:
    return point_in_face(p, face) in (Containment.NAVIGABLE, Containment.ON_BOUNDARY)


class IntersectionKind(enum.Enum):
    NONE = "none"
    PROPER = "proper"
    TOUCH = "touch"
    COLLINEAR_OVERLAP = "collinear_overlap"


class Intersection(NamedTuple):
    kind: IntersectionKind
    point: Point2 | None = None


_NO_HIT = Intersection(IntersectionKind.NONE)


def _line_offset(a, b, p) -> float:
    L = dist(a, b)
    return cross(a, b, p) / L


def segment_intersection(s1: Segment, s2: Segment, tol: float = EPS) -> Intersection:
    """Classify how two segments meet.

    PROPER means the interiors cross at a single point; TOUCH means contact
    happens only at an endpoint of one of them.
    """
    a, b = s1
    c, d = s2
    d1, d2 = _line_offset(a, b, c), _line_offset(a, b, d)
    d3, d4 = _line_offset(c, d, a), _line_offset(c, d, b)

    if (abs(d1) <= tol and abs(d2) <= tol) or (abs(d3) <= tol and abs(d4) <= tol):
        return _collinear_intersection(s1, s2, tol)

    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and (
        (d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)
    ):
        t = d3 / (d3 - d4)
        return Intersection(
            IntersectionKind.PROPER, Point2(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
        )

    best = None
    for p, (u, v) in ((c, (a, b)), (d, (a, b)), (a, (c, d)), (b, (c, d))):
        e = point_segment_distance(p, u, v)
        if e <= tol and (best is None or e < best[0]):
            best = (e, p)
    if best is not None:
        return Intersection(IntersectionKind.TOUCH, Point2(*best[1]))
    return _NO_HIT


def _collinear_intersection(s1, s2, tol):
    # project on the longer segment so the answer does not depend on argument order
    base, other = (s1, s2) if _seg_key(s1) >= _seg_key(s2) else (s2, s1)
    a, b = base
    L = dist(a, b)
    ux, uy = (b[0] - a[0]) / L, (b[1] - a[1]) / L

    def proj(p):
        return (p[0] - a[0]) * ux + (p[1] - a[1]) * uy

    t0, t1 = sorted((proj(other[0]), proj(other[1])))
    lo, hi = max(0.0, t0), min(L, t1)
    if hi - lo > tol:
        return Intersection(IntersectionKind.COLLINEAR_OVERLAP)
    if hi - lo >= -tol:
        t = 0.5 * (lo + hi)
        return Intersection(IntersectionKind.TOUCH, Point2(a[0] + t * ux, a[1] + t * uy))
    return _NO_HIT


def _seg_key(s):
    return (dist(s.a, s.b), tuple(sorted((tuple(s.a), tuple(s.b)))))


class SegmentClass(enum.Enum):
    VALID = "valid"
    OUTSIDE = "outside"
    SPLIT = "split"


def _param_on(seg, p) -> float:
    a, b = seg
    dx, dy = b[0] - a[0], b[1] - a[1]
    return ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)


def clip_to_face(seg: Segment, face: FaceWithHoles):
    """Return the parameter intervals of ``seg`` lying in the closed navigable region."""
    a, b = seg
    L = dist(a, b)
    cuts = [0.0, 1.0]
    for e in face.boundary_edges():
        edge = Segment(*e)
        hit = segment_intersection(seg, edge)
        if hit.kind in (IntersectionKind.PROPER, IntersectionKind.TOUCH):
            cuts.append(_param_on(seg, hit.point))
        elif hit.kind is IntersectionKind.COLLINEAR_OVERLAP:
            cuts.append(_param_on(seg, edge.a))
            cuts.append(_param_on(seg, edge.b))
    cuts = sorted(min(1.0, max(0.0, t)) for t in cuts)
    step = EPS / L
    ts = [cuts[0]]
    for t in cuts[1:]:
        if t - ts[-1] > step:
            ts.append(t)
    ts[-1] = 1.0

    pieces = []
    for t0, t1 in zip(ts, ts[1:]):
        tm = 0.5 * (t0 + t1)
        m = (a[0] + tm * (b[0] - a[0]), a[1] + tm * (b[1] - a[1]))
        if not is_inside(m, face):
            continue
        if pieces and abs(pieces[-1][1] - t0) <= step:
            pieces[-1] = (pieces[-1][0], t1)
        else:
            pieces.append((t0, t1))
    return pieces


def classify_segment_against_face(seg: Segment, face: FaceWithHoles) -> SegmentClass:
    pieces = clip_to_face(seg, face)
    if not pieces:
        return SegmentClass.OUTSIDE
    if len(pieces) == 1 and pieces[0][0] == 0.0 and pieces[0][1] == 1.0:
        return SegmentClass.VALID
    # a single clipped piece is treated like a split: the edge is not wholly navigable
    return SegmentClass.SPLIT


class Side(enum.Enum):
    INWARD = "inward"
    OUTWARD = "outward"


def offset_polygon(poly: Polygon, distance: float, side: Side) -> Polygon:
    """Translate every edge by ``distance`` along its normal and rejoin with miters."""
    if distance <= 0:
        raise GeometryError("offset distance must be positive")
    sign = 1.0 if side is Side.INWARD else -1.0
    verts = poly.vertices
    n = len(verts)
    lines = []
    for a, b in poly.edges():
        L = dist(a, b)
        # left normal points into a counter-clockwise polygon
        nx, ny = -(b[1] - a[1]) / L, (b[0] - a[0]) / L
        off = (sign * distance * nx, sign * distance * ny)
        lines.append(((a[0] + off[0], a[1] + off[1]), (b[0] + off[0], b[1] + off[1])))

    out = []
    for i in range(n):
        p0, p1 = lines[i - 1]
        q0, q1 = lines[i]
        rx, ry = p1[0] - p0[0], p1[1] - p0[1]
        sx, sy = q1[0] - q0[0], q1[1] - q0[1]
        denom = rx * sy - ry * sx
        if abs(denom) <= EPS * math.hypot(rx, ry) * math.hypot(sx, sy):
            out.append(Point2(*q0))
            continue
        t = ((q0[0] - p0[0]) * sy - (q0[1] - p0[1]) * sx) / denom
        out.append(Point2(p0[0] + t * rx, p0[1] + t * ry))

    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        c, d = out[i], out[(i + 1) % n]
        if (b[0] - a[0]) * (d[0] - c[0]) + (b[1] - a[1]) * (d[1] - c[1]) <= 0:
            raise OffsetCollapse(f"edge {i} flips direction at offset {distance}")
    if signed_area(out) <= 0 or not _is_simple(out):
        raise OffsetCollapse(f"offset by {distance} is not a simple polygon")
    return Polygon(tuple(out))


# --- Delaunay triangulation -------------------------------------------------

_GHOST = -1


def _incircle(a, b, c, p) -> float:
    adx, ady = a[0] - p[0], a[1] - p[1]
    bdx, bdy = b[0] - p[0], b[1] - p[1]
    cdx, cdy = c[0] - p[0], c[1] - p[1]
    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    return (
        adx * (bdy * cd - bd * cdy)
        - ady * (bdx * cd - bd * cdx)
        + ad * (bdx * cdy - bdy * cdx)
    )


def _incircle_tol(a, b, c, p) -> float:
    s = max(abs(q[k] - p[k]) for q in (a, b, c) for k in (0, 1))
    return 1e-12 * s**4


def in_circumcircle(a, b, c, p) -> bool:
    """Strict test: p inside the open circumdisk of counter-clockwise a, b, c."""
    return _incircle(a, b, c, p) > _incircle_tol(a, b, c, p)


def convex_hull(points) -> list:
    """Indices of the strict convex hull (no collinear points), counter-clockwise."""
    idx = sorted(range(len(points)), key=lambda i: (points[i][0], points[i][1]))

    def half(order):
        h = []
        for i in order:
            while len(h) >= 2 and cross(points[h[-2]], points[h[-1]], points[i]) <= EPS:
                h.pop()
            h.append(i)
        return h

    lower, upper = half(idx), half(idx[::-1])
    return lower[:-1] + upper[:-1]


def _check_delaunay_input(pts):
    n = len(pts)
    if n < 3:
        raise DegenerateInput("need at least 3 points")
    order = sorted(range(n), key=lambda i: pts[i])
    for k in range(n):
        i = order[k]
        for j in order[k + 1:]:
            if pts[j][0] - pts[i][0] > EPS:
                break
            if dist(pts[i], pts[j]) <= EPS:
                raise DegenerateInput(f"points {min(i, j)} and {max(i, j)} coincide")
    scale = max(max(abs(p[0] - pts[0][0]), abs(p[1] - pts[0][1])) for p in pts)
    for k in range(2, n):
        if abs(cross(pts[0], pts[1], pts[k])) > EPS * max(scale, 1.0):
            return k
    raise DegenerateInput("all points are collinear")


def delaunay_triangulate(points) -> list:
    """Bowyer-Watson triangulation of the convex hull of ``points``.

    Hull edges carry ghost triangles (one vertex at infinity) so the result
    covers the whole hull without a bounding super-triangle. Returns
    counter-clockwise index triples, each rotated to start at its smallest
    index, in sorted order. Cocircular quads take the diagonal whose smaller
    endpoint index is lowest.
    """
    pts = [point(*p) for p in points]
    k = _check_delaunay_input(pts)
    a, b, c = 0, 1, k
    if cross(pts[a], pts[b], pts[c]) < 0:
        a, b = b, a
    tris = {(a, b, c), (b, a, _GHOST), (c, b, _GHOST), (a, c, _GHOST)}

    for p in range(2, len(pts)):
        if p == k:
            continue
        P = pts[p]
        bad = [t for t in tris if _conflicts(t, P, pts)]
        edge_count = {}
        for t in bad:
            for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                edge_count[e] = t
        for t in bad:
            tris.discard(t)
        for (u, v) in edge_count:
            if (v, u) in edge_count:
                continue
            if u == _GHOST:
                tris.add((v, p, _GHOST))
            elif v == _GHOST:
                tris.add((p, u, _GHOST))
            else:
                tris.add((u, v, p))

    real = [t for t in tris if _GHOST not in t]
    real = _legalize(real, pts)
    return sorted(_canonical(t) for t in real)


def _conflicts(t, P, pts) -> bool:
    if t[2] == _GHOST:
        u, v = pts[t[0]], pts[t[1]]
        o = cross(u, v, P)
        L = dist(u, v)
        if o > EPS * L:
            return True
        if abs(o) <= EPS * L:
            s = ((P[0] - u[0]) * (v[0] - u[0]) + (P[1] - u[1]) * (v[1] - u[1])) / (L * L)
            return EPS / L < s < 1.0 - EPS / L
        return False
    return in_circumcircle(pts[t[0]], pts[t[1]], pts[t[2]], P)


def _canonical(t):
    i = t.index(min(t))
    return t[i:] + t[:i]


def _legalize(tris, pts, max_passes=1000):
    """Lawson flips until every interior edge is locally Delaunay and ties are canonical."""
    tris = {_canonical(t) for t in tris}
    for _ in range(max_passes):
        edge_tri = {}
        for t in tris:
            for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
                edge_tri[e] = t
        flipped = False
        for (a, b), t1 in sorted(edge_tri.items()):
            if a > b or (b, a) not in edge_tri:
                continue
            t2 = edge_tri[(b, a)]
            if t1 not in tris or t2 not in tris:
                continue
            c = next(v for v in t1 if v != a and v != b)
            d = next(v for v in t2 if v != a and v != b)
            A, B, C, D = pts[a], pts[b], pts[c], pts[d]
            val = _incircle(A, B, C, D)
            tol = _incircle_tol(A, B, C, D)
            illegal = val > tol
            tie = abs(val) <= tol and min(c, d) < min(a, b)
            if not (illegal or tie):
                continue
            if cross(C, A, D) <= 0 or cross(D, B, C) <= 0:
                continue
            tris.discard(t1)
            tris.discard(t2)
            tris.add(_canonical((c, a, d)))
            tris.add(_canonical((d, b, c)))
            flipped = True
        if not flipped:
            return tris
    return tris


def delaunay_edges(triangles) -> list:
    edges = set()
    for a, b, c in triangles:
        for u, v in ((a, b), (b, c), (c, a)):
            edges.add((min(u, v), max(u, v)))
    return sorted(edges)
