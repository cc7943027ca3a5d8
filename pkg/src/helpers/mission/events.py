"""Rendezvous and splitting events and the joint discrete states between them.

All times are seconds after the scenario epoch.
"""

from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.constants import MODE_THRESHOLD
from src.helpers.geodesy import central_angle_rad
from src.models.geo import GeoPoint
from src.models.mission import DiscreteState, FlightTrajectory, MissionEvent

Pair = Tuple[str, str]

_ROMAN = [(10, 'X'), (9, 'IX'), (5, 'V'), (4, 'IV'), (1, 'I')]


def roman(number: int) -> str:
    out = ''
    for value, symbol in _ROMAN:
        while number >= value:
            out += symbol
            number -= value
    return out


def _crossing(t0: float, t1: float, a0: float, a1: float, threshold: float) -> float:
    if a1 == a0:
        return 0.5 * (t0 + t1)
    return t0 + (threshold - a0) / (a1 - a0) * (t1 - t0)


def formation_runs(times: np.ndarray, alpha: np.ndarray, knots: Tuple[float, float],
                   threshold: float = MODE_THRESHOLD) -> List[Tuple[float, float]]:
    """(start, end) of each maximal run with alpha >= threshold.

    A run touching the first node starts at the first knot; one touching the
    last node ends at the second knot.
    """
    times = np.asarray(times, dtype=float)
    above = np.asarray(alpha, dtype=float) >= threshold
    runs = []
    i, n = 0, above.size
    while i < n:
        if not above[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and above[j + 1]:
            j += 1
        start = knots[0] if i == 0 else _crossing(times[i - 1], times[i], alpha[i - 1], alpha[i], threshold)
        end = knots[1] if j == n - 1 else _crossing(times[j], times[j + 1], alpha[j], alpha[j + 1], threshold)
        runs.append((float(start), float(end)))
        i = j + 1
    return runs


def position_at(trajectory: FlightTrajectory, t: float) -> GeoPoint:
    lat = float(np.interp(t, trajectory.t, trajectory.lat))
    lon = float(np.interp(t, trajectory.t, trajectory.lon))
    return GeoPoint(lat=lat, lon=lon)


def extract_events(alpha: Dict[Pair, Tuple[np.ndarray, np.ndarray]], knots: Tuple[float, float],
                   trajectories: Dict[str, FlightTrajectory],
                   threshold: float = MODE_THRESHOLD) -> List[MissionEvent]:
    """Events located on the trajectory of the aircraft behind, sorted by time"""
    events = []
    for pair, (times, values) in alpha.items():
        behind = trajectories[pair[1]]
        for start, end in formation_runs(times, values, knots, threshold):
            events.append(MissionEvent('rendezvous', start, position_at(behind, start), pair))
            events.append(MissionEvent('splitting', end, position_at(behind, end), pair))
    return sorted(events, key=lambda e: (e.time, e.kind != 'splitting'))


def _cumulative_distance(trajectory: FlightTrajectory, earth_radius: float) -> np.ndarray:
    lat, lon = np.radians(trajectory.lat), np.radians(trajectory.lon)
    steps = earth_radius * central_angle_rad(lat[:-1], lon[:-1], lat[1:], lon[1:])
    return np.concatenate([[0.0], np.cumsum(steps)])


def discrete_states(events: Sequence[MissionEvent], trajectories: Dict[str, FlightTrajectory],
                    earth_radius: float) -> List[DiscreteState]:
    """Intervals of constant joint formation mode from first departure to last arrival"""
    t_start = min(float(tr.t[0]) for tr in trajectories.values())
    t_end = max(float(tr.t[-1]) for tr in trajectories.values())
    cuts = sorted({t_start, t_end, *(min(max(e.time, t_start), t_end) for e in events)})
    cumulative = {fid: _cumulative_distance(tr, earth_radius) for fid, tr in trajectories.items()}

    def active(t: float) -> Tuple[Pair, ...]:
        pairs = set()
        for e in events:
            if e.kind == 'rendezvous' and e.time <= t:
                pairs.add(e.pair)
            elif e.kind == 'splitting' and e.time <= t:
                pairs.discard(e.pair)
        return tuple(sorted(pairs))

    spans: List[Tuple[float, float, Tuple[Pair, ...]]] = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        pairs = active(0.5 * (a + b))
        if spans and spans[-1][2] == pairs:
            spans[-1] = (spans[-1][0], b, pairs)
        else:
            spans.append((a, b, pairs))

    states = []
    for k, (a, b, pairs) in enumerate(spans, start=1):
        distance = {fid: float(np.interp(b, tr.t, cumulative[fid]) - np.interp(a, tr.t, cumulative[fid]))
                    for fid, tr in trajectories.items()}
        states.append(DiscreteState(label=roman(k), t_start=a, t_end=b, pairs=pairs, distance_m=distance))
    return states


def state_summary(states: Sequence[DiscreteState]) -> List[dict]:
    return [{'state': s.label, 't_start_s': s.t_start, 't_end_s': s.t_end, 'duration_s': s.duration,
             'pairs': ['-'.join(p) for p in s.pairs], 'distance_km': {k: v / 1000.0 for k, v in s.distance_m.items()}}
            for s in states]
