"""Time-stepped simulation of agents, aerosol field and infection risk."""
from __future__ import annotations

import copy
import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .aerosol import PhysicsParams, make_field, max_stable_dt, sample_field, step_field
from .errors import NoSusceptibles, ScheduleError, UnstableConfig, WindowTooSmall
from .geom import FaceWithHoles, Point2, Polygon, Side, offset_polygon
from .navgraph import NavGraph, build_pruned_delaunay_graph, build_visibility_graph, has_barrier_between
from .risk import DoseState, average_risk, emission_rate, inhale, update_status
from .rng import SplitMix64
from .schedule import (
    Activity,
    Agent,
    Departed,
    Event,
    InfectionStatus,
    PathCache,
    Schedule,
    advance_agent,
    validate_schedule,
)

log = logging.getLogger(__name__)


class GraphMode(enum.Enum):
    VISIBILITY = "visibility"
    PRUNED_DELAUNAY = "pruned_delaunay"


@dataclass(frozen=True)
class RandomVisitSpec:
    """Seeded visits to other locations, e.g. 1-6 offices for 5-10 minutes each."""

    visitors: tuple
    min_count: int
    max_count: int
    min_stay: int
    max_stay: int
    candidates: tuple
    window_start: float
    window_end: float
    activity: Activity = Activity.TALKING

    def __post_init__(self):
        object.__setattr__(self, "visitors", tuple(self.visitors))
        object.__setattr__(self, "candidates", tuple(Point2(*c) for c in self.candidates))
        if self.min_count > self.max_count or self.min_stay > self.max_stay:
            raise ScheduleError("random visit ranges need min <= max")
        if self.min_count < 0 or self.min_stay <= 0:
            raise ScheduleError("visit counts must be >= 0 and stays > 0")
        if not self.candidates:
            raise ScheduleError("random visits need at least one candidate destination")


@dataclass(frozen=True)
class VisitPlan:
    events: tuple
    end_time: float


@dataclass
class GridSpec:
    h: float = 0.25
    height: float = 3.0
    max_substeps: int = 1000


@dataclass
class OutputOptions:
    frame_every: int = 60
    pgm: bool = False


@dataclass
class ScenarioConfig:
    face: FaceWithHoles
    nav_points: list
    agents: list
    physics: PhysicsParams = field(default_factory=PhysicsParams)
    barriers: list = field(default_factory=list)
    obstacles: list = field(default_factory=list)
    graph_mode: GraphMode = GraphMode.VISIBILITY
    nav_tolerance: float = 1e-6
    buffer_distance: float = 0.0
    random_visits: list = field(default_factory=list)
    grid: GridSpec = field(default_factory=GridSpec)
    dt: float = 1.0
    t_start: float = 0.0
    t_end: float = 3600.0
    seed: int = 0
    snap_radius: float = 0.5
    outputs: OutputOptions = field(default_factory=OutputOptions)
    name: str = "scenario"
    zones: dict = field(default_factory=dict)

    def problems(self) -> list:
        out = []
        if not self.t_start < self.t_end:
            out.append("t_start must be before t_end")
        if self.dt <= 0:
            out.append("dt must be positive")
        if not self.agents:
            out.append("at least one agent is required")
        if self.outputs.frame_every < 1:
            out.append("frame_every must be >= 1")
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            out.append("agent ids must be unique")
        out.extend(self.physics.problems())
        return out


def generate_random_visits(spec: RandomVisitSpec, seed: int | SplitMix64) -> dict:
    """Draw a visit plan per visitor: count, destinations (no repeats), stays.

    Visits run back to back from ``window_start``; each event's start is the
    arrival time at that destination.
    """
    rng = seed if isinstance(seed, SplitMix64) else SplitMix64(seed)
    plans = {}
    for vid in spec.visitors:
        count = rng.randint(spec.min_count, spec.max_count)
        if count > len(spec.candidates):
            raise WindowTooSmall(f"visitor {vid}: {count} visits but only {len(spec.candidates)} destinations")
        pool = list(spec.candidates)
        for k in range(count):
            j = rng.randint(k, len(pool) - 1)
            pool[k], pool[j] = pool[j], pool[k]
        stays = [rng.randint(spec.min_stay, spec.max_stay) for _ in range(count)]
        t = float(spec.window_start)
        events = []
        for dest, stay in zip(pool[:count], stays):
            events.append(Event(dest, t, spec.activity))
            t += stay
        if t > spec.window_end:
            raise WindowTooSmall(f"visitor {vid}: visits end at {t}, after window end {spec.window_end}")
        plans[vid] = VisitPlan(tuple(events), t)
    return plans


def merge_visits(schedule: Schedule, plan: VisitPlan) -> Schedule:
    """Insert a visit plan, then return to whatever the agent was doing beforehand."""
    if not plan.events:
        return schedule
    start = plan.events[0].start_time
    events = list(schedule.events)
    k = max((i for i, e in enumerate(events) if e.start_time <= start), default=None)
    if k is None:
        raise WindowTooSmall("visits start before the agent's first event")
    if events[k].start_time == start:
        raise WindowTooSmall(f"visits collide with the event at {start}")
    later = events[k + 1:]
    limit = later[0].start_time if later else schedule.day_end
    if plan.end_time > limit:
        raise WindowTooSmall(f"visits end at {plan.end_time}, after the next commitment at {limit}")
    merged = events[:k + 1] + list(plan.events)
    if plan.end_time < limit:
        merged.append(Event(events[k].location, plan.end_time, events[k].activity))
    return Schedule(tuple(merged + later), schedule.day_end)


def materialize_agents(config: ScenarioConfig) -> list:
    """Agents with random visits merged into their schedules (fresh copies)."""
    agents = {a.id: copy.deepcopy(a) for a in config.agents}
    rng = SplitMix64(config.seed)
    for spec in config.random_visits:
        for vid, plan in generate_random_visits(spec, rng).items():
            if vid not in agents:
                raise ScheduleError(f"random visits name unknown agent {vid}")
            a = agents[vid]
            a.schedule = merge_visits(a.schedule, plan)
    return [agents[a.id] for a in config.agents]


def navigation_face(config: ScenarioConfig) -> FaceWithHoles:
    """Navigable face with obstacles as holes and the optional clearance buffer applied."""
    d = config.buffer_distance
    holes = list(config.face.holes) + list(config.obstacles)
    if d > 0:
        outer = offset_polygon(config.face.outer, d, Side.INWARD)
        holes = [offset_polygon(h, d, Side.OUTWARD) for h in holes]
        return FaceWithHoles(outer, tuple(holes))
    return FaceWithHoles(config.face.outer, tuple(holes))


def build_navgraph(config: ScenarioConfig, threads: int = 1) -> NavGraph:
    if config.graph_mode is GraphMode.VISIBILITY:
        g = build_visibility_graph(navigation_face(config), config.nav_points, config.nav_tolerance, threads)
        if not config.barriers:
            return g
        # thin walls are not part of the face, so drop connectors that cross them
        pos = [v.position for v in g.vertices]
        kept = [e for e in g.edges if not has_barrier_between(pos[e[0]], pos[e[1]], config.barriers)]
        return NavGraph.from_pairs(g.vertices, kept)
    obstacles = list(config.obstacles) + list(config.face.holes)
    if config.buffer_distance > 0:
        obstacles = [offset_polygon(o, config.buffer_distance, Side.OUTWARD) for o in obstacles]
    return build_pruned_delaunay_graph(config.nav_points, config.barriers, obstacles)


@dataclass(frozen=True)
class AgentFrame:
    id: int
    position: Point2
    status: InfectionStatus
    activity: Activity
    risk: float
    departed: bool


@dataclass
class FrameRecord:
    t: float
    agents: tuple
    field: np.ndarray
    average_risk: float
    infected_count: int


@dataclass
class SimulationResult:
    config: ScenarioConfig
    graph: NavGraph
    open_mask: np.ndarray
    frames: list
    doses: list
    agents: list
    accounting: dict

    @property
    def times(self):
        return [f.t for f in self.frames]

    @property
    def risk_series(self):
        return [f.average_risk for f in self.frames]

    def final_counts(self) -> dict:
        counts = {s.value: 0 for s in InfectionStatus}
        for a in self.agents:
            counts[a.status.value] += 1
        return counts

    def summary(self) -> list:
        return [
            {"agent_id": a.id, "status": a.status.value, "dose": d.cumulative_dose, "P": d.risk}
            for a, d in zip(self.agents, self.doses)
        ]


@dataclass
class Prepared:
    graph: NavGraph
    agents: list
    resolved: list
    substeps: int
    paths: PathCache = None


def prepare(config: ScenarioConfig, threads: int = 1) -> Prepared:
    graph = build_navgraph(config, threads)
    agents = materialize_agents(config)
    resolved = [validate_schedule(a.schedule, graph, config.snap_radius) for a in agents]
    paths = PathCache(graph)
    for ids in resolved:
        for u, v in zip(ids, ids[1:]):
            paths.get(u, v)  # raises NoPath for unreachable legs
    dt_max = max_stable_dt(config.grid.h, config.physics.diffusion)
    substeps = 1 if math.isinf(dt_max) else max(1, math.ceil(config.dt / dt_max - 1e-12))
    if substeps > config.grid.max_substeps:
        raise UnstableConfig(
            f"dt={config.dt} s needs {substeps} diffusion sub-steps at h={config.grid.h} m "
            f"(limit {config.grid.max_substeps})"
        )
    return Prepared(graph, agents, resolved, substeps, paths)


def run_simulation(config: ScenarioConfig, threads: int = 1, accounting: bool = False) -> SimulationResult:
    """Run the scenario start to finish.

    Each step moves agents, deposits emissions, diffuses the field, then
    lets non-infectious agents inhale. Frames record the state at the start
    of a step. With ``accounting`` on, inhaled quanta are also removed from
    the air so the emitted total can be balanced exactly.
    """
    problems = config.problems()
    if problems:
        raise ScheduleError("; ".join(problems))
    prep = prepare(config, threads)
    graph, agents, resolved = prep.graph, prep.agents, prep.resolved
    params = config.physics
    fld = make_field(config.face, config.grid.h, config.grid.height, config.barriers)
    paths = prep.paths
    doses = [DoseState(a.id, initially_susceptible=a.status is InfectionStatus.SUSCEPTIBLE) for a in agents]
    if not any(d.initially_susceptible for d in doses):
        log.warning("scenario has no susceptible agents; average risk is reported as 0")

    dt = config.dt
    nsteps = int(round((config.t_end - config.t_start) / dt))
    sub_dt = dt / prep.substeps
    every = config.outputs.frame_every
    vol = fld.cell_volume
    books = {"emitted": 0.0, "removed": 0.0, "inhaled": 0.0}
    frames = []
    positions = [None] * len(agents)

    for k in range(nsteps + 1):
        t = config.t_start + k * dt
        for n, a in enumerate(agents):
            state, pos, act = advance_agent(a, t, graph, resolved[n], paths)
            a.movement, a.activity = state, act
            positions[n] = pos

        if k % every == 0 or k == nsteps:
            frames.append(_frame(t, agents, positions, doses, fld))
        if k == nsteps:
            break

        for n, a in enumerate(agents):
            if a.status is InfectionStatus.INFECTIOUS and not isinstance(a.movement, Departed):
                rate = emission_rate(a, params)
                if rate > 0:
                    fld.C[fld.open_cell_for(positions[n])] += rate * dt / vol
                    books["emitted"] += rate * dt

        before = fld.total_mass() if accounting else 0.0
        for _ in range(prep.substeps):
            step_field(fld, params, sub_dt, threads)
        if accounting:
            books["removed"] += before - fld.total_mass()

        for n, a in enumerate(agents):
            if a.status is InfectionStatus.INFECTIOUS or isinstance(a.movement, Departed):
                continue
            c = sample_field(fld, positions[n])
            d = doses[n]
            prev = d.cumulative_dose
            inhale(d, a, c, params, dt)
            update_status(d, a, params)
            if accounting:
                cell = fld.open_cell_for(positions[n])
                take = min((d.cumulative_dose - prev) / vol, fld.C[cell])
                fld.C[cell] -= take
                books["inhaled"] += float(take * vol)

    books["in_field"] = fld.total_mass()
    return SimulationResult(config, graph, fld.open.copy(), frames, doses, agents, books)


def _frame(t, agents, positions, doses, fld) -> FrameRecord:
    rows = tuple(
        AgentFrame(a.id, positions[n], a.status, a.activity, doses[n].risk, isinstance(a.movement, Departed))
        for n, a in enumerate(agents)
    )
    try:
        avg = average_risk(doses)
    except NoSusceptibles:
        avg = 0.0
    infected = sum(1 for a in agents if a.status is InfectionStatus.INFECTED)
    return FrameRecord(t, rows, fld.C.copy(), avg, infected)
