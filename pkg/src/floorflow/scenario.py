"""Reading and writing scenario documents (JSON, schema version 1).

The schema lives next to this module in ``scenario.schema.json``.
"""
from __future__ import annotations

import json
import logging
import warnings
from importlib import resources
from pathlib import Path

import jsonschema

from .aerosol import PhysicsParams
from .engine import GraphMode, GridSpec, OutputOptions, RandomVisitSpec, ScenarioConfig
from .errors import GeometryError, ParseError, ScheduleError, SchemaVersionMismatch, ValidationError
from .geom import Containment, FaceWithHoles, Polygon, point, point_in_face, segment
from .navgraph import NavVertex, VertexTag
from .schedule import Activity, Agent, Display, Event, InfectionStatus, MaskType, Schedule

SCHEMA_VERSION = 1
log = logging.getLogger(__name__)


def load_schema() -> dict:
    text = resources.files("floorflow").joinpath("scenario.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def parse_time(value) -> float:
    if isinstance(value, str):
        parts = [int(p) for p in value.split(":")]
        while len(parts) < 3:
            parts.append(0)
        return float(parts[0] * 3600 + parts[1] * 60 + parts[2])
    return float(value)


def _poly(coords) -> Polygon:
    return Polygon(tuple(point(*c) for c in coords))


def _table(raw, enum_cls, defaults):
    out = dict(defaults)
    for k, v in (raw or {}).items():
        out[enum_cls(k)] = float(v)
    return out


def loads(text: str, source: str = "<string>") -> ScenarioConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: {exc.msg}", line=exc.lineno) from None
    return from_document(doc)


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return loads(text, str(path))


def from_document(doc) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"schema_version {version!r} is not supported (expected {SCHEMA_VERSION})")
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ValidationError(f"{where}: {e.message}")
    try:
        config = _build(doc)
    except (GeometryError, ScheduleError, ValueError) as exc:
        raise ValidationError(str(exc)) from None
    _cross_validate(config)
    return config


def _build(doc) -> ScenarioConfig:
    geo = doc["geometry"]
    face = FaceWithHoles(_poly(geo["outer"]), tuple(_poly(h) for h in geo.get("holes", [])))
    barriers = [segment(*s) for s in geo.get("barriers", [])]
    obstacles = [_poly(o) for o in geo.get("obstacles", [])]
    zones = {z["name"]: (z["kind"], _poly(z["polygon"])) for z in geo.get("zones", [])}

    nav = doc["navigation"]
    points = [
        NavVertex(k, point(p["x"], p["y"]), VertexTag(p.get("tag", "other")))
        for k, p in enumerate(nav["points"])
    ]

    agents = []
    for a in doc["agents"]:
        sched = a["schedule"]
        events = tuple(
            Event(point(e["x"], e["y"]), parse_time(e["start"]), Activity(e.get("activity", "resting")))
            for e in sched["events"]
        )
        disp = a.get("display", {})
        agents.append(
            Agent(
                id=a["id"],
                walking_speed=float(a.get("walking_speed", 1.5)),
                schedule=Schedule(events, parse_time(sched["day_end"])),
                status=InfectionStatus(a.get("status", "susceptible")),
                superspreader=bool(a.get("superspreader", False)),
                mask=MaskType(a.get("mask", "none")),
                display=Display(disp.get("shape", "cylinder"), float(disp.get("radius", 0.25)),
                                float(disp.get("height", 1.7))),
            )
        )

    visits = []
    for v in doc.get("random_visits", []):
        visits.append(
            RandomVisitSpec(
                visitors=tuple(v["visitors"]),
                min_count=v["count"][0],
                max_count=v["count"][1],
                min_stay=v["stay"][0],
                max_stay=v["stay"][1],
                candidates=tuple(point(*c) for c in v["candidates"]),
                window_start=parse_time(v["window"][0]),
                window_end=parse_time(v["window"][1]),
                activity=Activity(v.get("activity", "talking")),
            )
        )

    ph = doc.get("physics", {})
    base = PhysicsParams()
    physics = PhysicsParams(
        diffusion=float(ph.get("diffusion", base.diffusion)),
        decay=float(ph.get("decay", base.decay)),
        ach=float(ph.get("ach", base.ach)),
        dose_threshold=float(ph.get("dose_threshold", base.dose_threshold)),
        superspreader_factor=float(ph.get("superspreader_factor", base.superspreader_factor)),
        emission=_table(ph.get("emission"), Activity, base.emission),
        breathing=_table(ph.get("breathing"), Activity, base.breathing),
        mask_exhale=_table(ph.get("mask_exhale"), MaskType, base.mask_exhale),
        mask_inhale=_table(ph.get("mask_inhale"), MaskType, base.mask_inhale),
    )
    g = doc.get("grid", {})
    grid = GridSpec(float(g.get("h", 0.25)), float(g.get("height", 3.0)), int(g.get("max_substeps", 1000)))
    run = doc.get("run", {})
    return ScenarioConfig(
        face=face,
        nav_points=points,
        agents=agents,
        physics=physics,
        barriers=barriers,
        obstacles=obstacles,
        graph_mode=GraphMode(nav.get("mode", "visibility")),
        nav_tolerance=float(nav.get("tolerance", 1e-6)),
        buffer_distance=float(nav.get("buffer_distance", 0.0)),
        random_visits=visits,
        grid=grid,
        dt=float(run.get("dt", 1.0)),
        t_start=parse_time(run.get("t_start", 0.0)),
        t_end=parse_time(run.get("t_end", 3600.0)),
        seed=int(run.get("seed", 0)),
        snap_radius=float(nav.get("snap_radius", 0.5)),
        outputs=OutputOptions(int(run.get("frame_every", 60)), bool(run.get("pgm", False))),
        name=doc.get("name", "scenario"),
        zones=zones,
    )


def _cross_validate(config: ScenarioConfig):
    problems = config.problems()
    for v in config.nav_points:
        where = point_in_face(v.position, config.face)
        if where in (Containment.OUTSIDE, Containment.IN_HOLE):
            problems.append(f"navigation point {v.id} at {tuple(v.position)} is {where.value}")
    for a in config.agents:
        ev = a.schedule.events
        for i in range(1, len(ev)):
            if ev[i].start_time <= ev[i - 1].start_time:
                problems.append(f"agent {a.id}: event {i} does not start after event {i - 1}")
        if a.schedule.day_end <= ev[-1].start_time:
            problems.append(f"agent {a.id}: day_end must follow the last event")
    known = {a.id for a in config.agents}
    for k, v in enumerate(config.random_visits):
        for vid in v.visitors:
            if vid not in known:
                problems.append(f"random_visits[{k}] names unknown agent {vid}")
    if problems:
        raise ValidationError("; ".join(problems))
    for msg in config.physics.ordering_warnings():
        log.warning(msg)
        warnings.warn(msg, stacklevel=3)


def _pts(poly):
    return [[v.x, v.y] for v in poly.vertices]


def to_document(config: ScenarioConfig) -> dict:
    ph = config.physics
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": config.name,
        "geometry": {
            "outer": _pts(config.face.outer),
            "holes": [_pts(h) for h in config.face.holes],
            "barriers": [[[s.a.x, s.a.y], [s.b.x, s.b.y]] for s in config.barriers],
            "obstacles": [_pts(o) for o in config.obstacles],
            "zones": [{"name": n, "kind": k, "polygon": _pts(p)} for n, (k, p) in config.zones.items()],
        },
        "navigation": {
            "mode": config.graph_mode.value,
            "tolerance": config.nav_tolerance,
            "buffer_distance": config.buffer_distance,
            "snap_radius": config.snap_radius,
            "points": [{"x": v.position.x, "y": v.position.y, "tag": v.tag.value} for v in config.nav_points],
        },
        "agents": [
            {
                "id": a.id,
                "walking_speed": a.walking_speed,
                "status": a.status.value,
                "superspreader": a.superspreader,
                "mask": a.mask.value,
                "display": {"shape": a.display.shape, "radius": a.display.radius, "height": a.display.height},
                "schedule": {
                    "day_end": a.schedule.day_end,
                    "events": [
                        {"x": e.location.x, "y": e.location.y, "start": e.start_time, "activity": e.activity.value}
                        for e in a.schedule.events
                    ],
                },
            }
            for a in config.agents
        ],
        "random_visits": [
            {
                "visitors": list(v.visitors),
                "count": [v.min_count, v.max_count],
                "stay": [v.min_stay, v.max_stay],
                "window": [v.window_start, v.window_end],
                "activity": v.activity.value,
                "candidates": [[c.x, c.y] for c in v.candidates],
            }
            for v in config.random_visits
        ],
        "physics": {
            "diffusion": ph.diffusion,
            "decay": ph.decay,
            "ach": ph.ach,
            "dose_threshold": ph.dose_threshold,
            "superspreader_factor": ph.superspreader_factor,
            "emission": {k.value: v for k, v in ph.emission.items()},
            "breathing": {k.value: v for k, v in ph.breathing.items()},
            "mask_exhale": {k.value: v for k, v in ph.mask_exhale.items()},
            "mask_inhale": {k.value: v for k, v in ph.mask_inhale.items()},
        },
        "grid": {"h": config.grid.h, "height": config.grid.height, "max_substeps": config.grid.max_substeps},
        "run": {
            "dt": config.dt,
            "t_start": config.t_start,
            "t_end": config.t_end,
            "seed": config.seed,
            "frame_every": config.outputs.frame_every,
            "pgm": config.outputs.pgm,
        },
    }
    return doc


def dumps(config: ScenarioConfig) -> str:
    return json.dumps(to_document(config), indent=1) + "\n"


def dump_scenario(config: ScenarioConfig, path):
    Path(path).write_text(dumps(config), encoding="utf-8", newline="\n")
