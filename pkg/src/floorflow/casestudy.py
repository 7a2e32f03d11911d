"""Bundled scenarios: a cellular and an open-plan office on a 40 m x 20 m plate.

Both layouts share the plate, the two lift cores, the furniture and the
significant points; they differ only in which partition walls exist. The
cellular plan walls every room, the open plan keeps walls around the two
conference rooms only.

Run ``python -m floorflow.casestudy OUTDIR`` to regenerate the JSON files.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

from .aerosol import PhysicsParams
from .engine import GraphMode, GridSpec, OutputOptions, RandomVisitSpec, ScenarioConfig
from .geom import FaceWithHoles, Point2, Polygon, rectangle, segment
from .navgraph import NavVertex, VertexTag
from .schedule import Activity, Agent, Event, InfectionStatus, Schedule

PLATE_W, PLATE_L = 40.0, 20.0
CORRIDOR = (8.0, 12.0)
DOOR_WIDTH = 1.0
N_AGENTS = 60
INFECTIOUS_IDS = (1, 10, 19, 28, 37, 46)
WALKING_SPEED = 1.5


def hms(h, m=0, s=0) -> float:
    return float(h * 3600 + m * 60 + s)


ARRIVE = hms(9)
AT_DESK = hms(9, 1)
VISITS_1 = (hms(9, 30), hms(11))
MEETING_1 = (hms(11), hms(11, 30))
LUNCH_A = (hms(13), hms(13, 30))
LUNCH_B = (hms(13, 30), hms(14))
MEETING_2 = (hms(15), hms(15, 30))
VISITS_2 = (hms(15, 30), hms(17))
LEAVE = hms(17)
DAY_END = hms(17, 5)
T_END = hms(17, 10)


@dataclass
class Room:
    name: str
    kind: str  # office, conference, lunch, core
    x0: float
    x1: float
    south: bool

    @property
    def y0(self):
        return 0.0 if self.south else CORRIDOR[1]

    @property
    def y1(self):
        return CORRIDOR[0] if self.south else PLATE_L

    @property
    def cx(self):
        return 0.5 * (self.x0 + self.x1)

    def y(self, depth):
        """Absolute y of a point ``depth`` metres in from the plate edge."""
        return depth if self.south else PLATE_L - depth

    @property
    def door_x(self):
        return self.x0 + 1.0

    @property
    def polygon(self) -> Polygon:
        return rectangle(self.x0, self.y0, self.x1, self.y1)


ROOMS = [
    Room("S1", "office", 0, 5, True),
    Room("S2", "office", 5, 10, True),
    Room("S3", "office", 10, 15, True),
    Room("confA", "conference", 15, 25, True),
    Room("lunchC", "lunch", 25, 30, True),
    Room("S4", "office", 30, 35, True),
    Room("S5", "office", 35, 40, True),
    Room("N1", "office", 0, 5, False),
    Room("N2", "office", 5, 10, False),
    Room("coreA", "core", 10, 14, False),
    Room("lunchA", "lunch", 14, 19, False),
    Room("confB", "conference", 19, 26, False),
    Room("coreB", "core", 26, 30, False),
    Room("lunchB", "lunch", 30, 35, False),
    Room("N3", "office", 35, 40, False),
]
ROOM = {r.name: r for r in ROOMS}
OFFICES = [ROOM[n] for n in ("S1", "S2", "S3", "S4", "S5", "N1", "N2", "N3")]
CONFERENCE = [ROOM["confA"], ROOM["confB"]]
LUNCH = [ROOM["lunchA"], ROOM["lunchB"], ROOM["lunchC"]]


def core_hole(room: Room) -> Polygon:
    return rectangle(room.x0 + 0.5, CORRIDOR[1] + 1.0, room.x1 - 0.5, PLATE_L - 0.5)


def core_point(room: Room) -> Point2:
    return Point2(room.cx, CORRIDOR[1] + 0.5)


class _Points:
    def __init__(self):
        self.items = []

    def add(self, x, y, tag) -> Point2:
        p = Point2(round(x, 6), round(y, 6))
        self.items.append(NavVertex(len(self.items), p, tag))
        return p


def _table(room: Room):
    """Table rectangle (depth range from the plate edge) for a room."""
    if room.kind == "conference":
        half = 0.5 * (room.x1 - room.x0) - 2.0
        return room.cx - half, room.cx + half, 2.5, 5.5
    return room.cx - 0.6, room.cx + 0.6, 2.0, 6.0


def _furnish(room: Room, pts: _Points):
    """Table obstacle, seats, access points and room-centre point."""
    tx0, tx1, d0, d1 = _table(room)
    ya, yb = sorted((room.y(d0), room.y(d1)))
    obstacle = rectangle(tx0, ya, tx1, yb)
    seats = []
    # long sides run along y
    n_side = int(round(d1 - d0))
    for k in range(n_side):
        d = d0 + (k + 0.5) * (d1 - d0) / n_side
        seats.append(pts.add(tx0 - 0.5, room.y(d), VertexTag.DESK))
        seats.append(pts.add(tx1 + 0.5, room.y(d), VertexTag.DESK))
    if room.kind != "office":
        n_end = max(1, int((tx1 - tx0) / 0.9))
        for k in range(n_end):
            x = tx0 + (k + 0.5) * (tx1 - tx0) / n_end
            seats.append(pts.add(x, room.y(d0 - 0.5), VertexTag.DESK))
            seats.append(pts.add(x, room.y(d1 + 0.5), VertexTag.DESK))
    for x in (tx0 - 0.7, tx1 + 0.7):
        for d in (d0 - 0.7, d1 + 0.7):
            pts.add(x, room.y(d), VertexTag.ACCESS)
    centre = pts.add(room.cx, room.y(7.2), VertexTag.ROOM_CENTER)
    return obstacle, seats, centre


def _door_points(room: Room, pts: _Points):
    pts.add(room.door_x, room.y(CORRIDOR[0] - 0.6), VertexTag.DOOR)
    pts.add(room.door_x, room.y(CORRIDOR[0] + 0.6), VertexTag.DOOR)


def _walls(cellular: bool) -> list:
    walled = [r for r in ROOMS if r.kind != "core"] if cellular else CONFERENCE
    walls = []
    side_x = set()
    for r in walled:
        yw = CORRIDOR[0] if r.south else CORRIDOR[1]
        g0, g1 = r.door_x - 0.5 * DOOR_WIDTH, r.door_x + 0.5 * DOOR_WIDTH
        if g0 > r.x0:
            walls.append(segment((r.x0, yw), (g0, yw)))
        walls.append(segment((g1, yw), (r.x1, yw)))
        for x in (r.x0, r.x1):
            if 0.0 < x < PLATE_W:
                side_x.add((x, r.south))
    for x, south in sorted(side_x):
        y0, y1 = (0.0, CORRIDOR[0]) if south else (CORRIDOR[1], PLATE_L)
        walls.append(segment((x, y0), (x, y1)))
    return walls


@dataclass
class Layout:
    points: list
    obstacles: list
    seats: dict
    centres: dict


def _layout() -> Layout:
    pts = _Points()
    obstacles, seats, centres = [], {}, {}
    for r in ROOMS:
        if r.kind == "core":
            pts.add(*core_point(r), VertexTag.CORE)
            continue
        obs, s, c = _furnish(r, pts)
        obstacles.append(obs)
        seats[r.name], centres[r.name] = s, c
        _door_points(r, pts)
    for k in range(20):
        pts.add(1.0 + 2.0 * k, 0.5 * sum(CORRIDOR), VertexTag.CORRIDOR)
    return Layout(pts.items, obstacles, seats, centres)


def _nearest_core(room: Room) -> Point2:
    return core_point(ROOM["coreA"] if room.cx < 0.5 * PLATE_W else ROOM["coreB"])


def _office_of_agents():
    owners = []
    for k, office in enumerate(OFFICES):
        n = 8 if k < 4 else 7
        owners += [office] * n
    return owners


def _seat_map(members, rooms, layout):
    out = {}
    per_room = {r.name: 0 for r in rooms}
    for rank, aid in enumerate(sorted(members)):
        room = rooms[rank % len(rooms)] if len(rooms) == 3 else rooms[0 if rank < len(members) // 2 else 1]
        seats = layout.seats[room.name]
        out[aid] = seats[per_room[room.name] % len(seats)]
        per_room[room.name] += 1
    return out


def _agents(layout: Layout) -> list:
    owners = _office_of_agents()
    desk_of = {}
    used = {o.name: 0 for o in OFFICES}
    for aid, office in enumerate(owners):
        desk_of[aid] = layout.seats[office.name][used[office.name]]
        used[office.name] += 1

    ids = range(N_AGENTS)
    meeting1 = _seat_map([i for i in ids if i % 3 != 2], CONFERENCE, layout)
    meeting2 = _seat_map([i for i in ids if i % 3 != 0], CONFERENCE, layout)
    lunch_a = _seat_map([i for i in ids if i % 2 == 0], LUNCH, layout)
    lunch_b = _seat_map([i for i in ids if i % 2 == 1], LUNCH, layout)

    agents = []
    for aid in ids:
        desk = desk_of[aid]
        ev = [Event(_nearest_core(owners[aid]), ARRIVE, Activity.RESTING),
              Event(desk, AT_DESK, Activity.RESTING)]
        if aid in meeting1:
            ev += [Event(meeting1[aid], MEETING_1[0], Activity.TALKING_LOUDLY),
                   Event(desk, MEETING_1[1], Activity.RESTING)]
        if aid in lunch_a:
            ev += [Event(lunch_a[aid], LUNCH_A[0], Activity.TALKING), Event(desk, LUNCH_A[1], Activity.RESTING)]
        else:
            ev += [Event(lunch_b[aid], LUNCH_B[0], Activity.TALKING), Event(desk, LUNCH_B[1], Activity.RESTING)]
        if aid in meeting2:
            ev += [Event(meeting2[aid], MEETING_2[0], Activity.TALKING_LOUDLY),
                   Event(desk, MEETING_2[1], Activity.RESTING)]
        ev.append(Event(_nearest_core(owners[aid]), LEAVE, Activity.RESTING))
        status = InfectionStatus.INFECTIOUS if aid in INFECTIOUS_IDS else InfectionStatus.SUSCEPTIBLE
        agents.append(Agent(aid, WALKING_SPEED, Schedule(tuple(ev), DAY_END), status=status))
    return agents


def _visits(layout: Layout) -> list:
    owners = _office_of_agents()
    specs = []
    for window, count, stay, pick in (
        (VISITS_1, (1, 6), (300, 600), 2),
        (VISITS_2, (1, 4), (300, 900), 0),
    ):
        for office in OFFICES:
            visitors = [i for i in range(N_AGENTS) if i % 3 == pick and owners[i] is office]
            if not visitors:
                continue
            others = [layout.centres[o.name] for o in OFFICES if o is not office]
            specs.append(RandomVisitSpec(tuple(visitors), count[0], count[1], stay[0], stay[1],
                                         tuple(others), window[0], window[1], Activity.TALKING))
    return specs


def office_scenario(cellular: bool, seed: int = 2024) -> ScenarioConfig:
    layout = _layout()
    face = FaceWithHoles(rectangle(0, 0, PLATE_W, PLATE_L),
                         tuple(core_hole(r) for r in ROOMS if r.kind == "core"))
    zones = {r.name: (r.kind, r.polygon) for r in ROOMS}
    zones["corridor"] = ("corridor", rectangle(0, CORRIDOR[0], PLATE_W, CORRIDOR[1]))
    return ScenarioConfig(
        face=face,
        nav_points=layout.points,
        agents=_agents(layout),
        physics=PhysicsParams(ach=0.12),
        barriers=_walls(cellular),
        obstacles=layout.obstacles,
        graph_mode=GraphMode.PRUNED_DELAUNAY,
        random_visits=_visits(layout),
        grid=GridSpec(h=0.5, height=3.0, max_substeps=1000),
        dt=1.0,
        t_start=ARRIVE,
        t_end=T_END,
        seed=seed,
        snap_radius=0.5,
        outputs=OutputOptions(frame_every=60, pgm=False),
        name="office_cellular" if cellular else "office_open",
        zones=zones,
    )


def minimal_scenario() -> ScenarioConfig:
    """One 10 m x 8 m room with a pillar; three agents for one hour."""
    pillar = rectangle(4.5, 3.5, 5.5, 4.5)
    face = FaceWithHoles(rectangle(0, 0, 10, 8), (pillar,))
    coords = [(1, 1), (5, 1), (9, 1), (1, 4), (9, 4), (1, 7), (5, 7), (9, 7), (3, 4), (7, 4)]
    points = [NavVertex(k, Point2(float(x), float(y)), VertexTag.OTHER) for k, (x, y) in enumerate(coords)]
    t0 = hms(9)
    agents = [
        Agent(0, 1.2, Schedule((Event(Point2(1, 1), t0, Activity.TALKING),
                                Event(Point2(9, 7), t0 + 1200, Activity.TALKING)), t0 + 3600),
              status=InfectionStatus.INFECTIOUS),
        Agent(1, 1.5, Schedule((Event(Point2(9, 1), t0, Activity.RESTING),
                                Event(Point2(1, 7), t0 + 1800, Activity.TALKING)), t0 + 3600)),
        Agent(2, 1.5, Schedule((Event(Point2(3, 4), t0, Activity.RESTING),
                                Event(Point2(7, 4), t0 + 900, Activity.RESTING),
                                Event(Point2(5, 7), t0 + 2400, Activity.TALKING)), t0 + 3600)),
    ]
    return ScenarioConfig(
        face=face,
        nav_points=points,
        agents=agents,
        physics=PhysicsParams(ach=1.0),
        graph_mode=GraphMode.VISIBILITY,
        grid=GridSpec(h=0.25, height=3.0),
        dt=1.0,
        t_start=t0,
        t_end=t0 + 3600,
        seed=7,
        outputs=OutputOptions(frame_every=300),
        name="minimal",
    )


BUNDLED = {
    "minimal.json": minimal_scenario,
    "office_cellular.json": lambda: office_scenario(True),
    "office_open.json": lambda: office_scenario(False),
}


def bundled_path(name: str) -> Path:
    return Path(__file__).with_name("scenarios") / name


def main(argv=None) -> int:
    from .scenario import dump_scenario

    argv = sys.argv[1:] if argv is None else argv
    out = Path(argv[0]) if argv else bundled_path("")
    out.mkdir(parents=True, exist_ok=True)
    for name, build in BUNDLED.items():
        dump_scenario(build(), out / name)
        print(out / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
