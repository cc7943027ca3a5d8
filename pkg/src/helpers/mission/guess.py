"""Warm starts for the mission NLP.

``build_initial_guess`` flies every aircraft along its great circle at
nominal cruise conditions. ``build_formation_guess`` flies them to a common
rendezvous point, in formation to a splitting point and on to their
destinations; the two points come from a cheap surrogate of the DOC.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from src.constants import FORMATION_MAX_SPACING_B, FORMATION_MIN_SPACING_B, G0, MIN_SEGMENT_DURATION_S
from src.exceptions import GeometryError, TranscriptionError
from src.helpers import performance
from src.helpers.collocation.mission_transcription import (
    POLAR_LIMIT_DEG,
    MissionTranscription,
    initial_heading_deg,
    transcribe,
)
from src.helpers.collocation.radau import time_map
from src.helpers.geodesy import (
    bearing_rad,
    final_bearing,
    haversine_distance,
    interpolate_great_circle,
)
from src.helpers.mission.doc import NominalEstimate, cruise_atmosphere, nominal_flight_estimate
from src.models.geo import GeoPoint
from src.models.mission import MissionScenario, SegmentLayout

logger = logging.getLogger(__name__)

_END_FRACTION = 1.0 - 1e-9
_HEADING_STEP = 1e-4
# surrogate: seconds late are priced this many times the flight-time rate
_LATE_PENALTY = 100.0
_MIN_SHARED_M = 100e3
_FORMATION_SPACING_B = 0.5 * (FORMATION_MIN_SPACING_B + FORMATION_MAX_SPACING_B)


def guess_knots(scenario: MissionScenario, flight_ids) -> tuple:
    """Midpoints of the two halves of the span every flight is nominally airborne"""
    starts = [scenario.flight(fid).departure for fid in flight_ids]
    ends = [scenario.flight(fid).departure + nominal_flight_estimate(scenario, fid).time_s for fid in flight_ids]
    a, b = max(starts), min(ends)
    if b - a < 4 * MIN_SEGMENT_DURATION_S:
        b = min(scenario.flight(fid).scheduled_arrival + scenario.max_arrival_deviation for fid in flight_ids)
    if b - a < 4 * MIN_SEGMENT_DURATION_S:
        raise TranscriptionError(f'Flights {list(flight_ids)} are never airborne together; no knot window')
    middle = 0.5 * (a + b)
    return 0.5 * (a + middle), 0.5 * (middle + b)


def _near(angle_deg, reference_deg):
    """The representative of angle_deg within 180 degrees of reference_deg"""
    return reference_deg + (angle_deg - reference_deg + 180.0) % 360.0 - 180.0


def _headings(lat_deg, lon_deg, flight, chi_i_deg) -> np.ndarray:
    lat_d, lon_d = np.radians(flight.destination.lat), np.radians(flight.destination.lon)
    chi = np.degrees(bearing_rad(np.radians(lat_deg), np.radians(lon_deg), lat_d, lon_d))
    return _near(chi, chi_i_deg)


def _base_point(tr: MissionTranscription) -> np.ndarray:
    problem = tr.problem
    lower = np.where(np.isfinite(problem.lower), problem.lower, 0.0)
    upper = np.where(np.isfinite(problem.upper), problem.upper, 0.0)
    return 0.5 * (lower + upper)


def _segment_values(tr: MissionTranscription, fid: str, t, lat, lon, chi, speed, mass) -> tuple:
    """Normalised states and trimmed controls of one segment"""
    scenario = tr.scenario
    perf = scenario.performance(fid)
    atmos = cruise_atmosphere(scenario)
    env = tr.flights[fid].envelope
    mass = np.maximum(mass, perf.m_min)
    speed = np.clip(speed, *env['V'])
    states = np.column_stack([np.radians(lat), np.radians(lon), np.radians(chi),
                              speed / tr.scales.speed_scale, mass / tr.scales.mass_scale])
    q_s = 0.5 * atmos.rho * speed[1:] ** 2 * perf.S
    cl = np.clip(mass[1:] * G0 / q_s, *env['CL'])
    thrust = np.clip(performance.drag(perf, atmos.rho, speed[1:], cl), *env['T'])
    controls = np.column_stack([thrust / tr.thrust_scale, cl, np.zeros(t.size - 1)])
    return states, controls


def build_initial_guess(scenario: MissionScenario, layout: SegmentLayout,
                        transcription: Optional[MissionTranscription] = None) -> np.ndarray:
    """Normalised variable vector: great-circle positions and headings, constant
    cruise speed, mass burnt at the nominal fuel flow, trimmed controls, modes at 0.5"""
    tr = transcription or transcribe(scenario, layout)
    problem = tr.problem
    epoch = scenario.epoch
    k1, k2 = guess_knots(scenario, tr.flight_ids)
    values = {'knots': tr.normalised_time([k1 - epoch, k2 - epoch])}

    for fid, block in tr.flights.items():
        flight = scenario.flight(fid)
        nominal = nominal_flight_estimate(scenario, fid)
        t_i = flight.departure
        t_f = max(t_i + nominal.time_s, k2 + 2 * MIN_SEGMENT_DURATION_S)
        bounds = [t_i, k1, k2, t_f]
        if block.t_initial.index[0] >= 0:
            values[f'{fid}/tI'] = tr.normalised_time(t_i - epoch)
        values[f'{fid}/tF'] = tr.normalised_time(t_f - epoch)

        chi_i = initial_heading_deg(scenario, fid)
        for s, segment in enumerate(block.segments):
            t = time_map(bounds[s], bounds[s + 1], segment.nodes)
            fraction = np.clip((t - t_i) / (t_f - t_i), 0.0, 1.0)
            lat, lon = interpolate_great_circle(flight.origin, flight.destination, fraction)
            lon = _near(lon, flight.origin.lon)
            chi = _headings(lat, lon, flight, chi_i)
            arrived = fraction >= _END_FRACTION
            if np.any(arrived):
                chi[arrived] = _near(final_bearing(flight.origin, flight.destination), chi_i)
            mass = flight.m_I - nominal.fuel_flow_kgs * (t - t_i)
            speed = np.full_like(t, nominal.speed_ms)
            values[f'{fid}/x{s}'], values[f'{fid}/u{s}'] = _segment_values(tr, fid, t, lat, lon, chi, speed, mass)

    for name in tr.layout.names():
        if name.startswith(('alpha/', 'vE/')):
            values[name] = 0.5
    z = tr.layout.pack(values, _base_point(tr))
    logger.debug('Initial guess built', extra={'scenario': scenario.name, 'variables': z.size})
    return problem.clip(z)


# formation warm start

@dataclass(frozen=True)
class FormationPlan:
    """Rendezvous and splitting points with the surrogate's timetable, seconds since 1970"""
    rendezvous: GeoPoint
    splitting: GeoPoint
    departures: Dict[str, float]
    k1: float
    k2: float
    arrivals: Dict[str, float]
    cost: float


def _point(lat_deg: float, lon_deg: float) -> GeoPoint:
    return GeoPoint(lat=float(np.clip(lat_deg, -POLAR_LIMIT_DEG, POLAR_LIMIT_DEG)), lon=float(lon_deg))


def spherical_mean(points: Sequence[GeoPoint]) -> GeoPoint:
    lat = np.radians([p.lat for p in points])
    lon = np.radians([p.lon for p in points])
    v = np.column_stack([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)]).mean(axis=0)
    return _point(np.degrees(np.arctan2(v[2], np.hypot(v[0], v[1]))), np.degrees(np.arctan2(v[1], v[0])))


def _along(p: GeoPoint, q: GeoPoint, fraction: float) -> GeoPoint:
    """Point at a fraction of the great circle from p to q; negative fractions lie behind p"""
    lat, lon = interpolate_great_circle(p, q, np.array([fraction]))
    return _point(lat[0], lon[0])


def _timetable(scenario: MissionScenario, nominal: Dict[str, NominalEstimate], rendezvous: GeoPoint,
               splitting: GeoPoint) -> FormationPlan:
    radius = scenario.earth_radius
    flight_ids = list(nominal)
    speed = {fid: nominal[fid].speed_ms for fid in flight_ids}
    formation_speed = min(speed.values())
    window = {fid: scenario.flight(fid).departure_bounds(scenario.free_departure_window) for fid in flight_ids}
    reach = {fid: max(haversine_distance(scenario.flight(fid).origin, rendezvous, radius) / speed[fid],
                      2 * MIN_SEGMENT_DURATION_S) for fid in flight_ids}
    k1 = max(window[fid][0] + reach[fid] for fid in flight_ids)
    departures = {fid: float(np.clip(k1 - reach[fid], *window[fid])) for fid in flight_ids}
    shared = haversine_distance(rendezvous, splitting, radius)
    k2 = k1 + max(shared / formation_speed, 2 * MIN_SEGMENT_DURATION_S)

    cost = 0.0
    arrivals = {}
    for fid in flight_ids:
        flight = scenario.flight(fid)
        leave = haversine_distance(splitting, flight.destination, radius) / speed[fid]
        arrivals[fid] = k2 + max(leave, 2 * MIN_SEGMENT_DURATION_S)
        airborne = arrivals[fid] - departures[fid]
        fuel = nominal[fid].fuel_flow_kgs * (airborne - scenario.saving(fid) * (k2 - k1))
        late = max(0.0, arrivals[fid] - flight.scheduled_arrival - scenario.max_arrival_deviation)
        cost += scenario.alpha_t * (airborne + _LATE_PENALTY * late) + scenario.alpha_f * fuel
    return FormationPlan(rendezvous, splitting, departures, k1, k2, arrivals, cost)


def plan_formation(scenario: MissionScenario, flight_ids: Optional[Sequence[str]] = None) -> FormationPlan:
    """Rendezvous and splitting points minimising a straight-leg DOC surrogate.

    Every aircraft flies its nominal speed, the formation the slowest of them;
    free departures are timed to reach the rendezvous point together.
    """
    flight_ids = list(flight_ids or scenario.order.roles)
    flights = [scenario.flight(fid) for fid in flight_ids]
    nominal = {fid: nominal_flight_estimate(scenario, fid) for fid in flight_ids}

    def at(fraction):
        return spherical_mean([_along(f.origin, f.destination, fraction) for f in flights])

    r0, s0 = at(0.25), at(0.75)

    def cost(x):
        return _timetable(scenario, nominal, _point(x[0], x[1]), _point(x[2], x[3])).cost

    result = minimize(cost, np.array([r0.lat, r0.lon, s0.lat, s0.lon]), method='Nelder-Mead',
                      options={'xatol': 1e-3, 'fatol': 1e-3, 'maxiter': 4000})
    plan = _timetable(scenario, nominal, _point(result.x[0], result.x[1]), _point(result.x[2], result.x[3]))
    logger.debug('Formation planned', extra={'scenario': scenario.name, 'rendezvous': plan.rendezvous.as_tuple(),
                                             'splitting': plan.splitting.as_tuple(), 'surrogate_cost': plan.cost,
                                             'evaluations': result.nfev})
    return plan


def _leg(p: GeoPoint, q: GeoPoint, fractions: np.ndarray, fallback_chi: float) -> tuple:
    """Positions and courses (degrees) at fractions of the great circle from p to q"""
    try:
        lat, lon = interpolate_great_circle(p, q, fractions)
        ahead_lat, ahead_lon = interpolate_great_circle(p, q, fractions + _HEADING_STEP)
    except GeometryError:
        n = fractions.size
        return np.full(n, p.lat), np.full(n, p.lon), np.full(n, fallback_chi)
    chi = np.degrees(bearing_rad(np.radians(lat), np.radians(lon), np.radians(ahead_lat), np.radians(ahead_lon)))
    return lat, lon, chi


def build_formation_guess(scenario: MissionScenario, layout: SegmentLayout,
                          transcription: Optional[MissionTranscription] = None,
                          plan: Optional[FormationPlan] = None) -> np.ndarray:
    """Warm start flying the planned formation between the knots.

    Members sit ``15 b`` behind the aircraft ahead of them on the shared
    interval; modes start at 1.
    """
    tr = transcription or transcribe(scenario, layout)
    roles = scenario.order.roles
    if not set(roles) <= set(tr.flight_ids):
        raise TranscriptionError(f'Formation warm start needs every member of {roles}')
    plan = plan or plan_formation(scenario, roles)
    radius = scenario.earth_radius
    epoch = scenario.epoch

    rendezvous, splitting = plan.rendezvous, plan.splitting
    shared = haversine_distance(rendezvous, splitting, radius)
    if shared < _MIN_SHARED_M:
        leader = scenario.flight(scenario.order.leader)
        splitting = _along(rendezvous, leader.destination,
                           _MIN_SHARED_M / haversine_distance(rendezvous, leader.destination, radius))
        shared = haversine_distance(rendezvous, splitting, radius)
    spacing = _FORMATION_SPACING_B * scenario.performance(scenario.order.leader).b
    k1, k2 = plan.k1, plan.k2
    values = {'knots': tr.normalised_time([k1 - epoch, k2 - epoch])}

    for fid, block in tr.flights.items():
        flight = scenario.flight(fid)
        nominal = nominal_flight_estimate(scenario, fid)
        saving = scenario.saving(fid)
        behind = roles.index(fid) * spacing / shared
        start, end = _along(rendezvous, splitting, -behind), _along(rendezvous, splitting, 1.0 - behind)
        t_i, t_f = plan.departures[fid], plan.arrivals[fid]
        if block.t_initial.index[0] >= 0:
            values[f'{fid}/tI'] = tr.normalised_time(t_i - epoch)
        else:
            t_i = flight.departure
        values[f'{fid}/tF'] = tr.normalised_time(t_f - epoch)

        chi_i = initial_heading_deg(scenario, fid)
        legs = [(flight.origin, start), (start, end), (end, flight.destination)]
        bounds = [t_i, k1, k2, t_f]
        for s, segment in enumerate(block.segments):
            t = time_map(bounds[s], bounds[s + 1], segment.nodes)
            duration = max(bounds[s + 1] - bounds[s], MIN_SEGMENT_DURATION_S)
            p, q = legs[s]
            lat, lon, chi = _leg(p, q, (t - bounds[s]) / duration, chi_i)
            lon = _near(lon, flight.origin.lon)
            chi = _near(chi, chi_i)
            speed = np.full_like(t, haversine_distance(p, q, radius) / duration)
            formation_time = np.clip(t, k1, k2) - k1
            mass = flight.m_I - nominal.fuel_flow_kgs * ((t - t_i) - saving * formation_time)
            values[f'{fid}/x{s}'], values[f'{fid}/u{s}'] = _segment_values(tr, fid, t, lat, lon, chi, speed, mass)

    for name in tr.layout.names():
        if name.startswith(('alpha/', 'vE/')):
            values[name] = 1.0
    z = tr.layout.pack(values, _base_point(tr))
    logger.debug('Formation guess built', extra={'scenario': scenario.name, 'k1': k1 - epoch, 'k2': k2 - epoch})
    return tr.problem.clip(z)
