"""Aerosol concentration on a masked uniform grid.

Concentration obeys dC/dt = D lap(C) - (decay + ach/3600) C with zero flux
through blocked cells, walls and the domain edge. Diffusion is the explicit
5-point stencil; decay is applied as an exact exponential factor.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import EmptyDomain, OutOfBounds, SourceInBlockedCell, UnstableStep
from .geom import FaceWithHoles, Point2, Segment, is_inside
from .schedule import Activity, MaskType

STABILITY_SAFETY = 0.9


def _default_emission():
    return {
        Activity.RESTING: 0.001,
        Activity.TALKING: 0.004,
        Activity.TALKING_LOUDLY: 0.012,
        Activity.WALKING: 0.02,
        Activity.MODERATE_EXERCISE: 0.03,
        Activity.VIGOROUS_EXERCISE: 0.06,
    }


def _default_breathing():
    return {
        Activity.RESTING: 1.5e-4,
        Activity.TALKING: 1.6e-4,
        Activity.TALKING_LOUDLY: 1.7e-4,
        Activity.WALKING: 3.8e-4,
        Activity.MODERATE_EXERCISE: 6.9e-4,
        Activity.VIGOROUS_EXERCISE: 8.6e-4,
    }


def _default_mask_exhale():
    return {MaskType.NONE: 0.0, MaskType.COTTON: 0.4, MaskType.SURGICAL: 0.6, MaskType.N95: 0.95}


def _default_mask_inhale():
    return {MaskType.NONE: 0.0, MaskType.COTTON: 0.3, MaskType.SURGICAL: 0.5, MaskType.N95: 0.9}


EMISSION_ORDER = (Activity.WALKING, Activity.TALKING_LOUDLY, Activity.TALKING, Activity.RESTING)


@dataclass
class PhysicsParams:
    """Physical constants for one run.

    Units: diffusion m^2/s, decay and emission per second, breathing m^3/s,
    dose_threshold in quanta. None of the defaults are measured values.
    """

    diffusion: float = 0.05
    decay: float = 1.7e-4
    ach: float = 0.12
    dose_threshold: float = 1.0
    emission: dict = field(default_factory=_default_emission)
    breathing: dict = field(default_factory=_default_breathing)
    mask_exhale: dict = field(default_factory=_default_mask_exhale)
    mask_inhale: dict = field(default_factory=_default_mask_inhale)
    superspreader_factor: float = 10.0

    @property
    def removal_rate(self) -> float:
        return self.decay + self.ach / 3600.0

    def problems(self) -> list:
        """Hard constraint violations, as human-readable strings."""
        out = []
        for name in ("diffusion", "decay", "ach"):
            if getattr(self, name) < 0:
                out.append(f"{name} must be >= 0")
        if self.dose_threshold <= 0:
            out.append("dose_threshold must be > 0")
        if self.superspreader_factor < 1:
            out.append("superspreader_factor must be >= 1")
        for table in ("emission", "breathing"):
            for k, v in getattr(self, table).items():
                if v < 0:
                    out.append(f"{table}[{k.value}] must be >= 0")
        for table in ("mask_exhale", "mask_inhale"):
            for k, v in getattr(self, table).items():
                if not 0.0 <= v <= 1.0:
                    out.append(f"{table}[{k.value}] must lie in [0, 1]")
        return out

    def ordering_warnings(self) -> list:
        e = self.emission
        msgs = []
        for hi, lo in zip(EMISSION_ORDER, EMISSION_ORDER[1:]):
            if e.get(hi, 0.0) < e.get(lo, 0.0):
                msgs.append(
                    f"emission[{lo.value}]={e.get(lo, 0.0)} exceeds emission[{hi.value}]={e.get(hi, 0.0)}; "
                    "expected walking >= talking_loudly >= talking >= resting"
                )
        return msgs

    def warn_ordering(self):
        for msg in self.ordering_warnings():
            warnings.warn(msg, stacklevel=2)


@dataclass
class GridField:
    """Cell-centred concentration field (quanta/m^3), indexed ``[row=y, col=x]``.

    ``link_x[j, i]`` is True when cells (j, i) and (j, i+1) exchange mass;
    ``link_y[j, i]`` likewise for (j, i) and (j+1, i). Links are closed at
    blocked cells and wherever a wall segment separates the two centres.
    """

    nx: int
    ny: int
    h: float
    origin: Point2
    height: float
    open: np.ndarray
    C: np.ndarray = None
    link_x: np.ndarray = None
    link_y: np.ndarray = None

    def __post_init__(self):
        if self.h <= 0 or self.height <= 0:
            raise ValueError("cell size and effective height must be positive")
        self.open = np.asarray(self.open, dtype=bool)
        if self.open.shape != (self.ny, self.nx):
            raise ValueError(f"mask shape {self.open.shape} != ({self.ny}, {self.nx})")
        if self.C is None:
            self.C = np.zeros((self.ny, self.nx))
        if self.link_x is None:
            self.link_x = np.ones((self.ny, self.nx - 1), dtype=bool)
        if self.link_y is None:
            self.link_y = np.ones((self.ny - 1, self.nx), dtype=bool)
        self.link_x = self.link_x & self.open[:, :-1] & self.open[:, 1:]
        self.link_y = self.link_y & self.open[:-1, :] & self.open[1:, :]
        self.C = np.where(self.open, self.C, 0.0)
        self._prepare()

    def _prepare(self):
        ny, nx = self.ny, self.nx
        e = np.zeros((ny, nx))
        w = np.zeros((ny, nx))
        n = np.zeros((ny, nx))
        s = np.zeros((ny, nx))
        e[:, :-1] = self.link_x
        w[:, 1:] = self.link_x
        n[:-1, :] = self.link_y
        s[1:, :] = self.link_y
        self._links = (e, w, n, s)
        self._pad = np.zeros((ny + 2, nx + 2))
        if self.open.any():
            _, (ri, ci) = ndimage.distance_transform_edt(~self.open, return_indices=True)
            self._nearest = (ri, ci)
        else:
            self._nearest = None

    @property
    def cell_volume(self) -> float:
        return self.h * self.h * self.height

    def total_mass(self) -> float:
        return float(self.C.sum()) * self.cell_volume

    def center(self, j: int, i: int) -> Point2:
        return Point2(self.origin.x + (i + 0.5) * self.h, self.origin.y + (j + 0.5) * self.h)

    def in_bounds(self, p) -> bool:
        x0, y0 = self.origin
        return x0 <= p[0] <= x0 + self.nx * self.h and y0 <= p[1] <= y0 + self.ny * self.h

    def cell_of(self, p):
        if not self.in_bounds(p):
            raise OutOfBounds(f"point {tuple(p)} outside grid")
        i = min(int(math.floor((p[0] - self.origin.x) / self.h)), self.nx - 1)
        j = min(int(math.floor((p[1] - self.origin.y) / self.h)), self.ny - 1)
        return j, i

    def nearest_open_cell(self, j: int, i: int):
        if self._nearest is None:
            raise EmptyDomain("grid has no open cell")
        ri, ci = self._nearest
        return int(ri[j, i]), int(ci[j, i])

    def open_cell_for(self, p):
        """Cell holding p, or the nearest open cell when that one is blocked."""
        j, i = self.cell_of(p)
        if self.open[j, i]:
            return j, i
        return self.nearest_open_cell(j, i)

    def copy(self) -> "GridField":
        g = GridField(self.nx, self.ny, self.h, self.origin, self.height, self.open.copy(),
                      self.C.copy(), self.link_x.copy(), self.link_y.copy())
        return g


def grid_dimensions(face: FaceWithHoles, h: float):
    x0, y0, x1, y1 = face.bounds()
    nx = max(1, int(math.ceil((x1 - x0) / h - 1e-9)))
    ny = max(1, int(math.ceil((y1 - y0) / h - 1e-9)))
    return nx, ny, Point2(x0, y0)


def rasterize_mask(face: FaceWithHoles, nx: int, ny: int, h: float, origin) -> np.ndarray:
    """Boolean mask, True where the cell centre lies in the navigable face."""
    ox, oy = origin
    mask = np.zeros((ny, nx), dtype=bool)
    for j in range(ny):
        y = oy + (j + 0.5) * h
        for i in range(nx):
            mask[j, i] = is_inside((ox + (i + 0.5) * h, y), face)
    if not mask.any():
        raise EmptyDomain("no grid cell centre lies inside the face")
    return mask


def _segments_hit(p0x, p0y, p1x, p1y, seg: Segment, tol=1e-9) -> np.ndarray:
    """Vectorised test: do segments p0-p1 touch ``seg`` at all (any contact counts)."""
    ax, ay = seg.a
    bx, by = seg.b

    def orient(ox, oy, qx, qy, rx, ry):
        return (qx - ox) * (ry - oy) - (qy - oy) * (rx - ox)

    L = math.hypot(bx - ax, by - ay)
    Lp = np.hypot(p1x - p0x, p1y - p0y)
    d1 = orient(ax, ay, bx, by, p0x, p0y) / L
    d2 = orient(ax, ay, bx, by, p1x, p1y) / L
    d3 = orient(p0x, p0y, p1x, p1y, ax, ay) / Lp
    d4 = orient(p0x, p0y, p1x, p1y, bx, by) / Lp
    straddle1 = (np.minimum(d1, d2) <= tol) & (np.maximum(d1, d2) >= -tol)
    straddle2 = (np.minimum(d3, d4) <= tol) & (np.maximum(d3, d4) >= -tol)
    # reject collinear-but-disjoint pairs through a bounding-box check
    bbox = (
        (np.minimum(p0x, p1x) <= max(ax, bx) + tol)
        & (np.maximum(p0x, p1x) >= min(ax, bx) - tol)
        & (np.minimum(p0y, p1y) <= max(ay, by) + tol)
        & (np.maximum(p0y, p1y) >= min(ay, by) - tol)
    )
    return straddle1 & straddle2 & bbox


def barrier_links(nx: int, ny: int, h: float, origin, barriers) -> tuple:
    """Open/closed state of every grid link given wall segments."""
    ox, oy = origin
    xs = ox + (np.arange(nx) + 0.5) * h
    ys = oy + (np.arange(ny) + 0.5) * h
    X, Y = np.meshgrid(xs, ys)
    link_x = np.ones((ny, max(nx - 1, 0)), dtype=bool)
    link_y = np.ones((max(ny - 1, 0), nx), dtype=bool)
    for seg in barriers:
        if nx > 1:
            link_x &= ~_segments_hit(X[:, :-1], Y[:, :-1], X[:, 1:], Y[:, 1:], seg)
        if ny > 1:
            link_y &= ~_segments_hit(X[:-1, :], Y[:-1, :], X[1:, :], Y[1:, :], seg)
    return link_x, link_y


def make_field(face: FaceWithHoles, h: float = 0.25, height: float = 3.0, barriers=()) -> GridField:
    nx, ny, origin = grid_dimensions(face, h)
    mask = rasterize_mask(face, nx, ny, h, origin)
    lx, ly = barrier_links(nx, ny, h, origin, barriers)
    return GridField(nx, ny, h, origin, height, mask, None, lx, ly)


def deposit_source(field: GridField, p, rate: float, dt: float) -> GridField:
    j, i = field.cell_of(p)
    if not field.open[j, i]:
        raise SourceInBlockedCell(f"source at {tuple(p)} falls in blocked cell ({j}, {i})")
    field.C[j, i] += rate * dt / field.cell_volume
    return field


def max_stable_dt(h: float, diffusion: float) -> float:
    if diffusion <= 0:
        return math.inf
    return STABILITY_SAFETY * h * h / (4.0 * diffusion)


def _diffuse_rows(field: GridField, r: float, j0: int, j1: int, out: np.ndarray):
    P = field._pad
    C = P[1 + j0:1 + j1, 1:-1]
    e, w, n, s = (a[j0:j1] for a in field._links)
    out[j0:j1] = C + r * (
        e * (P[1 + j0:1 + j1, 2:] - C)
        + w * (P[1 + j0:1 + j1, :-2] - C)
        + n * (P[2 + j0:2 + j1, 1:-1] - C)
        + s * (P[j0:j1, 1:-1] - C)
    )


def step_field(field: GridField, params: PhysicsParams, dt: float, threads: int = 1) -> GridField:
    """Advance the field by one explicit step of length ``dt`` (in place)."""
    if dt <= 0:
        raise UnstableStep("time step must be positive")
    limit = max_stable_dt(field.h, params.diffusion)
    if dt > limit * (1 + 1e-12):
        raise UnstableStep(f"dt={dt} exceeds stability limit {limit:.6g} s")
    if params.diffusion > 0:
        r = params.diffusion * dt / (field.h * field.h)
        field._pad[1:-1, 1:-1] = field.C
        out = np.empty_like(field.C)
        if threads > 1 and field.ny > 1:
            bands = np.array_split(np.arange(field.ny), min(threads, field.ny))
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(lambda b: _diffuse_rows(field, r, int(b[0]), int(b[-1]) + 1, out),
                              [b for b in bands if len(b)]))
        else:
            _diffuse_rows(field, r, 0, field.ny, out)
        field.C = out
    k = params.removal_rate
    if k > 0:
        field.C *= math.exp(-k * dt)
    return field


def _linked(field: GridField, a, b) -> bool:
    (j0, i0), (j1, i1) = a, b
    if j0 == j1:
        return bool(field.link_x[j0, min(i0, i1)])
    return bool(field.link_y[min(j0, j1), i0])


def _reachable(field: GridField, home, cell) -> bool:
    if cell == home:
        return True
    dj, di = cell[0] - home[0], cell[1] - home[1]
    if abs(dj) + abs(di) == 1:
        return _linked(field, home, cell)
    via_x, via_y = (home[0], cell[1]), (cell[0], home[1])
    return (field.open[via_x] and _linked(field, home, via_x) and _linked(field, via_x, cell)) or (
        field.open[via_y] and _linked(field, home, via_y) and _linked(field, via_y, cell)
    )


def sample_field(field: GridField, p) -> float:
    """Bilinear value at p using only open cells reachable from p's own cell."""
    home = field.cell_of(p)
    if not field.open[home]:
        return float(field.C[field.nearest_open_cell(*home)])
    fx = (p[0] - field.origin.x) / field.h - 0.5
    fy = (p[1] - field.origin.y) / field.h - 0.5
    i0, j0 = int(math.floor(fx)), int(math.floor(fy))
    tx, ty = fx - i0, fy - j0
    total = 0.0
    wsum = 0.0
    for dj, wy in ((0, 1.0 - ty), (1, ty)):
        for di, wx in ((0, 1.0 - tx), (1, tx)):
            wgt = wx * wy
            j, i = j0 + dj, i0 + di
            if wgt == 0.0 or not (0 <= j < field.ny and 0 <= i < field.nx):
                continue
            if not field.open[j, i] or not _reachable(field, home, (j, i)):
                continue
            total += wgt * field.C[j, i]
            wsum += wgt
    if wsum == 0.0:
        return float(field.C[home])
    return total / wsum
