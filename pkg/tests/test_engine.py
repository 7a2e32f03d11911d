import dataclasses

import numpy as np
import pytest

from floorflow.aerosol import PhysicsParams
from floorflow.casestudy import minimal_scenario
from floorflow.engine import (
    GridSpec,
    RandomVisitSpec,
    ScenarioConfig,
    VisitPlan,
    build_navgraph,
    generate_random_visits,
    materialize_agents,
    merge_visits,
    prepare,
    run_simulation,
)
from floorflow.errors import NoPath, UnstableConfig, WindowTooSmall
from floorflow.geom import FaceWithHoles, Point2, rectangle, segment
from floorflow.navgraph import NavVertex
from floorflow.rng import SplitMix64
from floorflow.schedule import Activity, Agent, Departed, Event, InfectionStatus, Schedule

CANDIDATES = [(float(k), 0.0) for k in range(8)]


def visit_spec(**kw):
    base = dict(visitors=(3, 1, 2), min_count=1, max_count=6, min_stay=300, max_stay=600,
                candidates=CANDIDATES, window_start=1000.0, window_end=1000.0 + 6 * 600)
    base.update(kw)
    return RandomVisitSpec(**base)


def no_infectious(config):
    for a in config.agents:
        a.status = InfectionStatus.SUSCEPTIBLE
    return config


class TestRandomVisits:
    def test_ranges_and_distinct(self):
        plans = generate_random_visits(visit_spec(), 11)
        assert list(plans) == [3, 1, 2]
        for plan in plans.values():
            assert 1 <= len(plan.events) <= 6
            dests = [e.location for e in plan.events]
            assert len(set(dests)) == len(dests)
            stays = np.diff([e.start_time for e in plan.events] + [plan.end_time])
            assert ((stays >= 300) & (stays <= 600)).all()
            assert plan.events[0].start_time == 1000.0

    def test_seeded(self):
        assert generate_random_visits(visit_spec(), 5) == generate_random_visits(visit_spec(), 5)
        assert generate_random_visits(visit_spec(), 5) != generate_random_visits(visit_spec(), 6)

    def test_draw_order(self):
        # count, then the partial Fisher-Yates swaps, then the stays
        rng = SplitMix64(9)
        n = rng.randint(1, 6)
        pool = list(range(8))
        for k in range(n):
            j = rng.randint(k, 7)
            pool[k], pool[j] = pool[j], pool[k]
        stays = [rng.randint(300, 600) for _ in range(n)]
        (plan,) = generate_random_visits(visit_spec(visitors=(0,)), 9).values()
        assert [e.location for e in plan.events] == [Point2(*CANDIDATES[i]) for i in pool[:n]]
        assert plan.end_time == 1000.0 + sum(stays)

    def test_window_too_small(self):
        with pytest.raises(WindowTooSmall):
            generate_random_visits(visit_spec(min_count=6, window_end=2000.0), 1)

    def test_merge_returns_to_prior_event(self):
        s = Schedule((Event((0, 0), 0), Event((9, 9), 5000, Activity.TALKING)), 8000)
        plan = VisitPlan((Event((1, 0), 1000, Activity.TALKING), Event((2, 0), 1400, Activity.TALKING)), 1900)
        merged = merge_visits(s, plan)
        assert [e.start_time for e in merged.events] == [0, 1000, 1400, 1900, 5000]
        assert merged.events[3].location == (0, 0)

    def test_merge_collision(self):
        s = Schedule((Event((0, 0), 0), Event((9, 9), 1500)), 8000)
        plan = VisitPlan((Event((1, 0), 1000),), 1600)
        with pytest.raises(WindowTooSmall):
            merge_visits(s, plan)

    def test_materialize_leaves_config_untouched(self):
        cfg = minimal_scenario()
        cfg.random_visits = [visit_spec(visitors=(1,), candidates=[(5, 1), (9, 4)], max_count=2,
                                        window_start=33000.0, window_end=34100.0)]
        before = [a.schedule for a in cfg.agents]
        agents = materialize_agents(cfg)
        assert [a.schedule for a in cfg.agents] == before
        assert len(agents[1].schedule.events) > len(before[1].events)


class TestRun:
    def test_zero_infectious_has_zero_risk(self):
        res = run_simulation(no_infectious(minimal_scenario()))
        assert all(f.average_risk == 0.0 for f in res.frames)
        assert all((f.field == 0).all() for f in res.frames)

    def test_deterministic(self):
        a = run_simulation(minimal_scenario())
        b = run_simulation(minimal_scenario())
        assert a.risk_series == b.risk_series
        assert all(np.array_equal(x.field, y.field) for x, y in zip(a.frames, b.frames))

    def test_thread_invariant(self):
        a = run_simulation(minimal_scenario(), threads=1)
        b = run_simulation(minimal_scenario(), threads=4)
        assert a.risk_series == b.risk_series
        assert all(np.array_equal(x.field, y.field) for x, y in zip(a.frames, b.frames))

    def test_frames_monotone_and_cadence(self):
        cfg = minimal_scenario()
        res = run_simulation(cfg)
        assert res.times[0] == cfg.t_start and res.times[-1] == cfg.t_end
        assert np.all(np.diff(res.times) > 0)
        assert np.all(np.diff(res.risk_series) >= 0)
        assert res.frames[0].average_risk == 0.0

    def test_occupancy_sanity(self):
        cfg = minimal_scenario()
        res = run_simulation(cfg)
        first, last = res.frames[0], res.frames[-1]
        for a, fa in zip(cfg.agents, first.agents):
            assert fa.position == a.schedule.events[0].location
        for a, la in zip(res.agents, last.agents):
            assert la.departed or la.position == a.schedule.events[-1].location

    def test_departed_agents_stop(self):
        cfg = minimal_scenario()
        cfg.agents = [dataclasses.replace(a, schedule=Schedule(a.schedule.events, cfg.t_start + 2500))
                      for a in cfg.agents]
        res = run_simulation(cfg)
        assert all(isinstance(a.movement, Departed) for a in res.agents)
        late = [f for f in res.frames if f.t > cfg.t_start + 2500]
        assert late and all(fa.departed for f in late for fa in f.agents)
        assert late[-1].average_risk == late[0].average_risk

    def test_source_bookkeeping(self):
        cfg = minimal_scenario()
        cfg.physics = PhysicsParams(ach=0.0)
        res = run_simulation(cfg, accounting=True)
        b = res.accounting
        assert b["emitted"] > 0 and b["inhaled"] > 0
        balance = b["in_field"] + b["removed"] + b["inhaled"]
        assert abs(balance - b["emitted"]) / b["emitted"] < 1e-3

    def test_unstable_config(self):
        cfg = minimal_scenario()
        cfg.grid = GridSpec(h=0.01, max_substeps=10)
        with pytest.raises(UnstableConfig):
            prepare(cfg)


class TestGraphBuild:
    def config(self, coords, barriers=()):
        face = FaceWithHoles(rectangle(0, 0, 10, 8), (rectangle(4.5, 3.5, 5.5, 4.5),))
        pts = [NavVertex(k, Point2(float(x), float(y))) for k, (x, y) in enumerate(coords)]
        agent = Agent(0, 1.0, Schedule((Event(coords[0], 0), Event(coords[1], 600)), 1200))
        return ScenarioConfig(face, pts, [agent], barriers=[segment(*b) for b in barriers], t_end=1200)

    def test_unreachable_leg_fails_in_prepare(self):
        with pytest.raises(NoPath):
            prepare(self.config([(1, 1), (9, 7)]))
        prepare(self.config([(1, 1), (9, 7), (1, 7)]))

    def test_visibility_respects_barriers(self):
        cfg = self.config([(1, 1), (3, 1), (1, 3)], barriers=[((2, 0), (2, 2))])
        assert set(build_navgraph(cfg).edges) == {(0, 2), (1, 2)}
