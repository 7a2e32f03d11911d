"""Navigation graphs over a floor plan and shortest-path queries."""
from __future__ import annotations

import bisect
import enum
import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .errors import NoPath, NoVertexInRange, PointOutsideFace
from .geom import (
    Containment,
    FaceWithHoles,
    IntersectionKind,
    Point2,
    Polygon,
    Segment,
    SegmentClass,
    classify_segment_against_face,
    delaunay_edges,
    delaunay_triangulate,
    dist,
    point_in_face,
    segment_intersection,
)


class VertexTag(enum.Enum):
    DESK = "desk"
    DOOR = "door"
    CORRIDOR = "corridor"
    ROOM_CENTER = "room_center"
    ACCESS = "access"
    CORE = "core"
    OTHER = "other"


@dataclass(frozen=True)
class NavVertex:
    id: int
    position: Point2
    tag: VertexTag = VertexTag.OTHER


@dataclass(frozen=True)
class NavGraph:
    """Undirected graph; ``edges`` maps (i, j) with i < j to Euclidean length."""

    vertices: tuple
    edges: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        for k, v in enumerate(self.vertices):
            if v.id != k:
                raise ValueError(f"vertex ids must be contiguous from 0; got {v.id} at {k}")

    @classmethod
    def from_pairs(cls, vertices: Sequence[NavVertex], pairs) -> "NavGraph":
        edges = {}
        for i, j in pairs:
            if i == j:
                continue
            i, j = min(i, j), max(i, j)
            edges[(i, j)] = dist(vertices[i].position, vertices[j].position)
        return cls(tuple(vertices), dict(sorted(edges.items())))

    @cached_property
    def adjacency(self):
        adj = [[] for _ in self.vertices]
        for (i, j), w in self.edges.items():
            adj[i].append((j, w))
            adj[j].append((i, w))
        for lst in adj:
            lst.sort()
        return adj

    def __len__(self):
        return len(self.vertices)


@dataclass(frozen=True)
class Path:
    waypoints: tuple
    length: float
    cumulative: tuple = ()

    @classmethod
    def from_points(cls, points) -> "Path":
        wps = []
        for p in points:
            p = Point2(float(p[0]), float(p[1]))
            if not wps or p != wps[-1]:
                wps.append(p)
        cum = [0.0]
        for a, b in zip(wps, wps[1:]):
            cum.append(cum[-1] + dist(a, b))
        return cls(tuple(wps), cum[-1], tuple(cum))


def _pair_chunks(n, workers):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    size = max(1, math.ceil(len(pairs) / workers))
    return [pairs[k:k + size] for k in range(0, len(pairs), size)]


def build_visibility_graph(
    face: FaceWithHoles, points: Sequence[NavVertex], tolerance: float = 1e-6, workers: int = 1
) -> NavGraph:
    """Connect every pair of points whose straight connector stays inside ``face``.

    Pairs no farther apart than ``tolerance`` are dropped. Pair checks may be
    spread over ``workers`` threads; the edge set does not depend on it.
    """
    for v in points:
        if point_in_face(v.position, face) in (Containment.OUTSIDE, Containment.IN_HOLE):
            raise PointOutsideFace(v.id)

    def check(chunk):
        kept = []
        for i, j in chunk:
            a, b = points[i].position, points[j].position
            if dist(a, b) <= tolerance:
                continue
            if classify_segment_against_face(Segment(a, b), face) is SegmentClass.VALID:
                kept.append((i, j))
        return kept

    chunks = _pair_chunks(len(points), max(1, workers))
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(check, chunks))
    else:
        results = [check(c) for c in chunks]
    return NavGraph.from_pairs(points, [e for r in results for e in r])


def _crosses_barrier(seg: Segment, barrier: Segment) -> bool:
    kind = segment_intersection(seg, barrier).kind
    return kind is IntersectionKind.PROPER or kind is IntersectionKind.COLLINEAR_OVERLAP


def _crosses_obstacle(seg: Segment, obstacle: Polygon) -> bool:
    for a, b in obstacle.edges():
        if segment_intersection(seg, Segment(a, b)).kind is IntersectionKind.PROPER:
            return True
    mid = Point2(0.5 * (seg.a.x + seg.b.x), 0.5 * (seg.a.y + seg.b.y))
    return obstacle.contains(mid) and not obstacle.on_boundary(mid)


def build_pruned_delaunay_graph(
    points: Sequence[NavVertex], barriers: Sequence[Segment] = (), obstacles: Sequence[Polygon] = ()
) -> NavGraph:
    """Delaunay triangulation of the points minus edges blocked by walls or obstacles."""
    positions = [v.position for v in points]
    kept = []
    for i, j in delaunay_edges(delaunay_triangulate(positions)):
        seg = Segment(positions[i], positions[j])
        if any(_crosses_barrier(seg, w) for w in barriers):
            continue
        if any(_crosses_obstacle(seg, o) for o in obstacles):
            continue
        kept.append((i, j))
    return NavGraph.from_pairs(points, kept)


def shortest_path_ids(graph: NavGraph, src: int, dst: int) -> list:
    """Dijkstra; among equal-cost routes the smaller predecessor id wins."""
    n = len(graph)
    for v in (src, dst):
        if not 0 <= v < n:
            raise IndexError(f"vertex {v} out of range")
    inf = math.inf
    best = [inf] * n
    pred = [-1] * n
    done = [False] * n
    best[src] = 0.0
    heap = [(0.0, src)]
    adj = graph.adjacency
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == dst:
            break
        for v, w in adj[u]:
            if done[v]:
                continue
            nd = d + w
            if nd < best[v]:
                best[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
            elif nd == best[v] and u < pred[v]:
                pred[v] = u
    if not done[dst]:
        raise NoPath(src, dst)
    route = [dst]
    while route[-1] != src:
        route.append(pred[route[-1]])
    return route[::-1]


def shortest_path(graph: NavGraph, src: int, dst: int) -> Path:
    ids = shortest_path_ids(graph, src, dst)
    return Path.from_points([graph.vertices[i].position for i in ids])


def point_at_distance(path: Path, d: float) -> Point2:
    """Point at arc length ``d`` along the path, clamped to its ends."""
    if d < 0:
        raise ValueError("distance must be non-negative")
    wps = path.waypoints
    if d >= path.length or len(wps) == 1:
        return wps[-1]
    cum = path.cumulative
    k = bisect.bisect_right(cum, d) - 1
    a, b = wps[k], wps[k + 1]
    seg = cum[k + 1] - cum[k]
    t = (d - cum[k]) / seg
    return Point2(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))


def nearest_vertex(graph: NavGraph, p, snap_radius: float = 0.5) -> int:
    best_id, best_d = -1, math.inf
    for v in graph.vertices:
        d = dist(p, v.position)
        # strict comparison keeps the smaller id on (near-)ties
        if d < best_d - 1e-12:
            best_id, best_d = v.id, d
    if best_id < 0:
        raise ValueError("graph has no vertices")
    if best_d > snap_radius:
        raise NoVertexInRange(best_d, snap_radius)
    return best_id


def has_barrier_between(a, b, barriers: Sequence[Segment]) -> bool:
    """True when a wall separates a and b (touching a wall end does not count)."""
    seg = Segment(Point2(*a), Point2(*b))
    return any(_crosses_barrier(seg, w) for w in barriers)
