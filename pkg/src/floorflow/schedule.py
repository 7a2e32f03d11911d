"""Events, gap-free schedules, agents and their movement state machine."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union

from .errors import NonMonotoneSchedule, NoVertexInRange, ScheduleError
from .geom import Point2, point
from .navgraph import NavGraph, Path, nearest_vertex, point_at_distance, shortest_path

DAY_SECONDS = 86400


class Activity(enum.Enum):
    RESTING = "resting"
    TALKING = "talking"
    TALKING_LOUDLY = "talking_loudly"
    WALKING = "walking"
    MODERATE_EXERCISE = "moderate_exercise"
    VIGOROUS_EXERCISE = "vigorous_exercise"


class MaskType(enum.Enum):
    NONE = "none"
    COTTON = "cotton"
    SURGICAL = "surgical"
    N95 = "n95"


class InfectionStatus(enum.Enum):
    SUSCEPTIBLE = "susceptible"
    INFECTED = "infected"  # carrying, not yet emitting
    INFECTIOUS = "infectious"


@dataclass(frozen=True)
class Event:
    location: Point2
    start_time: float
    activity: Activity = Activity.RESTING

    def __post_init__(self):
        object.__setattr__(self, "location", point(*self.location))
        object.__setattr__(self, "start_time", float(self.start_time))
        if not 0 <= self.start_time < DAY_SECONDS:
            raise ScheduleError(f"start time {self.start_time} outside [0, {DAY_SECONDS})")


@dataclass(frozen=True)
class Schedule:
    events: tuple
    day_end: float

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if not self.events:
            raise ScheduleError("schedule has no events")

    def duration(self, i: int) -> float:
        end = self.events[i + 1].start_time if i + 1 < len(self.events) else self.day_end
        return end - self.events[i].start_time


@dataclass(frozen=True)
class AtEvent:
    index: int


@dataclass(frozen=True)
class Walking:
    path: Path
    depart_time: float
    target_index: int


@dataclass(frozen=True)
class Departed:
    pass


MovementState = Union[AtEvent, Walking, Departed]


@dataclass(frozen=True)
class Display:
    shape: str = "cylinder"
    radius: float = 0.25
    height: float = 1.7

    @staticmethod
    def color(status: InfectionStatus) -> str:
        return {
            InfectionStatus.SUSCEPTIBLE: "green",
            InfectionStatus.INFECTED: "orange",
            InfectionStatus.INFECTIOUS: "red",
        }[status]


@dataclass
class Agent:
    id: int
    walking_speed: float
    schedule: Schedule
    status: InfectionStatus = InfectionStatus.SUSCEPTIBLE
    superspreader: bool = False
    mask: MaskType = MaskType.NONE
    movement: MovementState = field(default_factory=lambda: AtEvent(0))
    activity: Activity = Activity.RESTING
    display: Display = field(default_factory=Display)

    def __post_init__(self):
        if self.walking_speed <= 0:
            raise ScheduleError(f"agent {self.id}: walking speed must be positive")
        if self.superspreader and self.status is not InfectionStatus.INFECTIOUS:
            raise ScheduleError(f"agent {self.id}: only infectious agents can be superspreaders")


def validate_schedule(s: Schedule, graph: NavGraph, snap_radius: float = 0.5) -> list:
    """Check start times increase strictly and snap each event to a graph vertex."""
    for i in range(1, len(s.events)):
        if s.events[i].start_time <= s.events[i - 1].start_time:
            raise NonMonotoneSchedule(i)
    if s.day_end <= s.events[-1].start_time:
        raise NonMonotoneSchedule(len(s.events))
    ids = []
    for i, ev in enumerate(s.events):
        try:
            ids.append(nearest_vertex(graph, ev.location, snap_radius))
        except NoVertexInRange as exc:
            raise NoVertexInRange(exc.distance, snap_radius, index=i) from None
    return ids


def time_to_leave(arrival: float, path_length: float, speed: float) -> float:
    """Latest departure that still reaches the next event on time."""
    return arrival - path_length / speed


def position_at(path: Path, depart_time: float, speed: float, now: float) -> Point2:
    return point_at_distance(path, (now - depart_time) * speed)


class PathCache:
    """Memoises shortest paths between vertex ids for one graph."""

    def __init__(self, graph: NavGraph):
        self.graph = graph
        self._paths = {}

    def get(self, src: int, dst: int) -> Path:
        key = (src, dst)
        path = self._paths.get(key)
        if path is None:
            path = shortest_path(self.graph, src, dst)
            self._paths[key] = path
        return path


def advance_agent(agent: Agent, now: float, graph: NavGraph, resolved_ids, paths: PathCache | None = None):
    """Move the agent's state machine to time ``now``.

    Returns ``(state, position, activity)``; the agent itself is not modified.
    """
    if paths is None:
        paths = PathCache(graph)
    events = agent.schedule.events
    state = agent.movement
    pos = None
    while True:
        if isinstance(state, Departed):
            pos = graph.vertices[resolved_ids[-1]].position
            return state, pos, events[-1].activity
        if isinstance(state, AtEvent):
            i = state.index
            pos = graph.vertices[resolved_ids[i]].position
            if i + 1 >= len(events):
                if now >= agent.schedule.day_end:
                    state = Departed()
                    continue
                return state, pos, events[i].activity
            path = paths.get(resolved_ids[i], resolved_ids[i + 1])
            leave = time_to_leave(events[i + 1].start_time, path.length, agent.walking_speed)
            if now < leave:
                return state, pos, events[i].activity
            # depart exactly at the time-to-leave so arrival is on time; a
            # path longer than the event itself starts when the event starts
            state = Walking(path, max(leave, events[i].start_time), i + 1)
            continue
        # walking
        travelled = (now - state.depart_time) * agent.walking_speed
        if travelled >= state.path.length:
            state = AtEvent(state.target_index)
            continue
        return state, point_at_distance(state.path, travelled), Activity.WALKING
