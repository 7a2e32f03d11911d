"""Inhaled dose, infection probability and the average-risk statistic.

Infection probability follows the exponential dose-response form
P = 1 - exp(-dose / d), with the dose integrated along each agent's path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .aerosol import PhysicsParams
from .errors import NoSusceptibles, NotInfectious
from .schedule import Activity, Agent, InfectionStatus


@dataclass
class DoseState:
    agent_id: int
    cumulative_dose: float = 0.0
    risk: float = 0.0
    initially_susceptible: bool = True


def infection_probability(dose: float, threshold: float) -> float:
    return -math.expm1(-dose / threshold)


def inhale(state: DoseState, agent: Agent, concentration: float, params: PhysicsParams, dt: float,
           activity: Activity | None = None) -> DoseState:
    """Add one step of inhaled quanta; ``activity`` defaults to the agent's current one."""
    act = agent.activity if activity is None else activity
    rate = params.breathing[act] * (1.0 - params.mask_inhale[agent.mask])
    state.cumulative_dose += rate * concentration * dt
    state.risk = infection_probability(state.cumulative_dose, params.dose_threshold)
    return state


def emission_rate(agent: Agent, params: PhysicsParams, activity: Activity | None = None) -> float:
    """Quanta per second shed by an infectious agent."""
    if agent.status is not InfectionStatus.INFECTIOUS:
        raise NotInfectious(f"agent {agent.id} is {agent.status.value}")
    act = agent.activity if activity is None else activity
    rate = params.emission[act] * (1.0 - params.mask_exhale[agent.mask])
    if agent.superspreader:
        rate *= params.superspreader_factor
    return rate


def update_status(state: DoseState, agent: Agent, params: PhysicsParams) -> Agent:
    if agent.status is InfectionStatus.SUSCEPTIBLE and state.cumulative_dose >= params.dose_threshold:
        agent.status = InfectionStatus.INFECTED
    return agent


def average_risk(states) -> float:
    """Mean risk over agents that started susceptible."""
    total = 0.0
    count = 0
    for s in states:
        if s.initially_susceptible:
            total += s.risk
            count += 1
    if count == 0:
        raise NoSusceptibles("no initially susceptible agents")
    return total / count
