"""Direct operating cost and the nominal per-flight estimates it is normalised with."""

from dataclasses import dataclass

import numpy as np

from src.constants import G0
from src.helpers import performance
from src.helpers.geodesy import haversine_distance
from src.models.aircraft import AtmosphereState
from src.models.mission import MissionScenario


def compute_doc(flight_time: float, fuel_burn: float, alpha_t: float, alpha_f: float) -> float:
    """alpha_t per second of flight time plus alpha_f per kg of fuel"""
    return alpha_t * flight_time + alpha_f * fuel_burn


def cruise_atmosphere(scenario: MissionScenario) -> AtmosphereState:
    return performance.isa_at_altitude(performance.altitude_for_pressure(scenario.cruise_level))


@dataclass(frozen=True)
class NominalEstimate:
    distance_m: float
    speed_ms: float
    time_s: float
    thrust_n: float
    lift_coefficient: float
    fuel_flow_kgs: float
    fuel_kg: float

    def doc(self, alpha_t: float, alpha_f: float) -> float:
        return compute_doc(self.time_s, self.fuel_kg, alpha_t, alpha_f)


def nominal_flight_estimate(scenario: MissionScenario, flight_id: str) -> NominalEstimate:
    """Great-circle distance flown at the mean boundary speed, in trimmed level flight at the initial mass"""
    flight = scenario.flight(flight_id)
    perf = scenario.performance(flight_id)
    atmos = cruise_atmosphere(scenario)
    env = performance.envelope_bounds(perf, atmos)
    speed = float(np.clip(0.5 * (flight.V_I + flight.V_F), *env['V']))
    distance = haversine_distance(flight.origin, flight.destination, scenario.earth_radius)
    time_s = distance / speed
    q_s = 0.5 * atmos.rho * speed * speed * perf.S
    cl = float(np.clip(flight.m_I * G0 / q_s, *env['CL']))
    thrust = float(np.clip(performance.drag(perf, atmos.rho, speed, cl), *env['T']))
    flow = thrust * float(performance.tsfc(perf, speed))
    fuel = min(flow * time_s, flight.m_I - perf.m_min)
    return NominalEstimate(distance, speed, time_s, thrust, cl, flow, fuel)
