import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from floorflow.aerosol import PhysicsParams
from floorflow.errors import NoSusceptibles, NotInfectious
from floorflow.risk import DoseState, average_risk, emission_rate, infection_probability, inhale, update_status
from floorflow.schedule import Activity, Agent, Event, InfectionStatus, MaskType, Schedule


def agent(status=InfectionStatus.SUSCEPTIBLE, **kw):
    return Agent(0, 1.0, Schedule((Event((0, 0), 0),), 100), status=status, **kw)


class TestProbability:
    def test_examples(self):
        assert infection_probability(0.0, 1.0) == 0.0
        assert infection_probability(1.0, 1.0) == pytest.approx(1 - math.exp(-1))
        assert infection_probability(2.0, 4.0) == pytest.approx(1 - math.exp(-0.5))

    @given(st.floats(0, 50), st.floats(0, 50), st.floats(0.1, 10))
    def test_monotone_and_bounded(self, a, b, d):
        lo, hi = sorted((a, b))
        assert 0.0 <= infection_probability(lo, d) <= infection_probability(hi, d) <= 1.0

    def test_tiny_dose_keeps_precision(self):
        assert infection_probability(1e-20, 1.0) == pytest.approx(1e-20, rel=1e-12)


class TestInhale:
    def test_dose_accumulates(self):
        p = PhysicsParams()
        s = DoseState(0)
        a = agent()
        for _ in range(10):
            inhale(s, a, 2.0, p, 1.0)
        assert s.cumulative_dose == pytest.approx(10 * 2.0 * p.breathing[Activity.RESTING])
        assert s.risk == pytest.approx(1 - math.exp(-s.cumulative_dose / p.dose_threshold))

    def test_mask_and_activity(self):
        p = PhysicsParams()
        s = DoseState(0)
        inhale(s, agent(mask=MaskType.N95), 1.0, p, 1.0, activity=Activity.WALKING)
        assert s.cumulative_dose == pytest.approx(p.breathing[Activity.WALKING] * 0.1)

    def test_status_flips_at_threshold(self):
        p = PhysicsParams(dose_threshold=1.0)
        a = agent()
        s = DoseState(0, cumulative_dose=0.999)
        update_status(s, a, p)
        assert a.status is InfectionStatus.SUSCEPTIBLE
        s.cumulative_dose = 1.0
        update_status(s, a, p)
        assert a.status is InfectionStatus.INFECTED


class TestEmission:
    def test_rates(self):
        p = PhysicsParams()
        a = agent(InfectionStatus.INFECTIOUS)
        assert emission_rate(a, p, Activity.TALKING) == p.emission[Activity.TALKING]
        a = agent(InfectionStatus.INFECTIOUS, superspreader=True, mask=MaskType.SURGICAL)
        assert emission_rate(a, p, Activity.TALKING) == pytest.approx(
            p.emission[Activity.TALKING] * 0.4 * p.superspreader_factor)

    def test_not_infectious(self):
        with pytest.raises(NotInfectious):
            emission_rate(agent(), PhysicsParams())


class TestAverage:
    def test_only_initial_susceptibles_count(self):
        states = [DoseState(0, risk=0.2), DoseState(1, risk=0.4), DoseState(2, risk=0.9, initially_susceptible=False)]
        assert average_risk(states) == pytest.approx(0.3)

    def test_none(self):
        with pytest.raises(NoSusceptibles):
            average_risk([DoseState(0, initially_susceptible=False)])


def test_scaling_double_concentration_half_time():
    p = PhysicsParams()
    a, b = DoseState(0), DoseState(1)
    for _ in range(100):
        inhale(a, agent(), 1.5, p, 1.0)
    for _ in range(50):
        inhale(b, agent(), 3.0, p, 1.0)
    assert a.cumulative_dose == pytest.approx(b.cumulative_dose, rel=1e-12)


def test_threshold_identity():
    p = PhysicsParams(dose_threshold=2.0)
    s = DoseState(0)
    inhale(s, agent(), 2.0 / p.breathing[Activity.RESTING], p, 1.0)
    assert s.risk == pytest.approx(1 - math.exp(-1))


def test_infected_keeps_accumulating():
    p = PhysicsParams()
    a = agent(InfectionStatus.INFECTED)
    s = DoseState(0, cumulative_dose=5.0)
    inhale(s, a, 1.0, p, 1.0)
    update_status(s, a, p)
    assert s.cumulative_dose > 5.0 and a.status is InfectionStatus.INFECTED
    with pytest.raises(NotInfectious):
        emission_rate(a, p)
