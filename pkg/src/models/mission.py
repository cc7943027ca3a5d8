from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.constants import (
    DEFAULT_ALPHA_F,
    DEFAULT_ALPHA_T,
    DEFAULT_CRUISE_LEVEL_HPA,
    DEFAULT_DEPARTURE_WINDOW_S,
    DEFAULT_MAX_ARRIVAL_DEVIATION_S,
    DEFAULT_N1,
    DEFAULT_N2,
    DEFAULT_N3,
    EARTH_RADIUS_M,
)
from src.models.aircraft import AircraftPerformance
from src.models.geo import GeoPoint
from src.models.solver import NlpSolution


def to_utc_seconds(value) -> float:
    """Accept POSIX seconds, a datetime or an ISO-8601 string; naive times are UTC"""
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        value = datetime.fromisoformat(value.replace('Z', '+00:00'))
    if isinstance(value, datetime):
        if value.tzinfo is None:
            value = value.replace(tzinfo=timezone.utc)
        return value.timestamp()
    raise ValueError(f'Cannot interpret {value!r} as a UTC time')


def format_utc(seconds: float) -> str:
    return datetime.fromtimestamp(seconds, tz=timezone.utc).strftime('%Y-%m-%dT%H:%M:%SZ')


class FlightSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    origin: GeoPoint
    destination: GeoPoint
    departure: float
    departure_free: bool = False
    departure_window: Optional[Tuple[float, float]] = None
    scheduled_arrival: float
    perf: str
    m_I: float
    V_I: float
    V_F: float
    chi_I: Optional[float] = None

    @field_validator('departure', 'scheduled_arrival', mode='before')
    def parse_time(cls, v):
        return to_utc_seconds(v)

    @field_validator('departure_window', mode='before')
    def parse_window(cls, v):
        if v is None:
            return v
        lo, hi = (to_utc_seconds(t) for t in v)
        if not lo < hi:
            raise ValueError(f'Departure window start must precede its end, got {v}')
        return (lo, hi)

    @field_validator('m_I', 'V_I', 'V_F')
    def validate_positive(cls, v, info):
        if not v > 0.0:
            raise ValueError(f'{info.field_name} must be positive, got {v}')
        return v

    @model_validator(mode='after')
    def validate_times(self):
        if not self.departure < self.scheduled_arrival:
            raise ValueError(f'Flight {self.id}: scheduled arrival must follow departure')
        if self.origin == self.destination:
            raise ValueError(f'Flight {self.id}: origin and destination coincide')
        return self

    def departure_bounds(self, default_window: float = DEFAULT_DEPARTURE_WINDOW_S) -> Tuple[float, float]:
        if not self.departure_free:
            return (self.departure, self.departure)
        if self.departure_window is not None:
            return self.departure_window
        return (self.departure - default_window, self.departure + default_window)


class FormationOrder(BaseModel):
    """Flight ids from leader to trailing aircraft"""
    model_config = ConfigDict(frozen=True)

    roles: List[str]

    @field_validator('roles')
    def validate_roles(cls, v):
        if not 2 <= len(v) <= 3:
            raise ValueError(f'Formation needs 2 or 3 aircraft, got {len(v)}')
        if len(set(v)) != len(v):
            raise ValueError(f'Formation order repeats an aircraft: {v}')
        return v

    @property
    def leader(self) -> str:
        return self.roles[0]

    @property
    def trailing(self) -> str:
        return self.roles[-1]

    @property
    def intermediate(self) -> Optional[str]:
        return self.roles[1] if len(self.roles) == 3 else None

    @property
    def benefiting(self) -> List[str]:
        return self.roles[1:]

    def adjacent_pairs(self) -> List[Tuple[str, str]]:
        """(ahead, behind) pairs that carry a disjunction variable"""
        return list(zip(self.roles[:-1], self.roles[1:]))

    def all_pairs(self) -> List[Tuple[str, str]]:
        return [(self.roles[i], self.roles[j])
                for i in range(len(self.roles)) for j in range(i + 1, len(self.roles))]


class MissionScenario(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = 'mission'
    flights: List[FlightSpec]
    order: FormationOrder
    savings: Dict[str, float]
    performances: Dict[str, AircraftPerformance]
    alpha_t: float = DEFAULT_ALPHA_T
    alpha_f: float = DEFAULT_ALPHA_F
    max_arrival_deviation: float = DEFAULT_MAX_ARRIVAL_DEVIATION_S
    free_departure_window: float = DEFAULT_DEPARTURE_WINDOW_S
    cruise_level: float = DEFAULT_CRUISE_LEVEL_HPA
    earth_radius: float = EARTH_RADIUS_M

    @field_validator('alpha_t', 'alpha_f')
    def validate_weight(cls, v):
        if v < 0.0:
            raise ValueError(f'Objective weights must be non-negative, got {v}')
        return v

    @field_validator('max_arrival_deviation', 'free_departure_window', 'cruise_level', 'earth_radius')
    def validate_positive(cls, v, info):
        if not v > 0.0:
            raise ValueError(f'{info.field_name} must be positive, got {v}')
        return v

    @field_validator('savings')
    def validate_savings(cls, v):
        for key, value in v.items():
            if not 0.0 <= value <= 0.2:
                raise ValueError(f'Fuel saving for {key} is {value}, outside [0, 0.2]')
        return v

    @model_validator(mode='after')
    def validate_consistency(self):
        ids = [f.id for f in self.flights]
        if len(set(ids)) != len(ids):
            raise ValueError(f'Duplicate flight ids: {ids}')
        if not 2 <= len(ids) <= 3:
            raise ValueError(f'A mission has 2 or 3 flights, got {len(ids)}')
        if sorted(ids) != sorted(self.order.roles):
            raise ValueError(f'Formation order {self.order.roles} does not match flights {ids}')
        missing = [fid for fid in self.order.benefiting if fid not in self.savings]
        if missing:
            raise ValueError(f'No fuel saving given for benefiting flights {missing}')
        if self.order.leader in self.savings and self.savings[self.order.leader] != 0.0:
            raise ValueError('The leader cannot have a fuel saving')
        for f in self.flights:
            if f.perf not in self.performances:
                raise ValueError(f'Flight {f.id} references unknown performance label {f.perf!r}')
        return self

    def flight(self, flight_id: str) -> FlightSpec:
        for f in self.flights:
            if f.id == flight_id:
                return f
        raise KeyError(flight_id)

    def performance(self, flight_id: str) -> AircraftPerformance:
        return self.performances[self.flight(flight_id).perf]

    def saving(self, flight_id: str) -> float:
        return self.savings.get(flight_id, 0.0)

    @property
    def flight_ids(self) -> List[str]:
        return [f.id for f in self.flights]

    @property
    def epoch(self) -> float:
        """Earliest scheduled departure; mission times are reported relative to it"""
        return min(f.departure for f in self.flights)


class SegmentLayout(BaseModel):
    """Collocation points per flight for the intervals before, between and after the knots"""
    model_config = ConfigDict(frozen=True)

    counts: Dict[str, Tuple[int, int, int]]

    @field_validator('counts')
    def validate_counts(cls, v):
        if not v:
            raise ValueError('Layout needs at least one flight')
        shared = {c[1] for c in v.values()}
        if len(shared) != 1:
            raise ValueError(f'N2 must be identical for all flights, got {sorted(shared)}')
        for fid, c in v.items():
            if min(c) < 2:
                raise ValueError(f'Flight {fid}: every interval needs at least 2 points, got {c}')
            if max(c) > 64:
                raise ValueError(f'Flight {fid}: at most 64 points per interval, got {c}')
        return v

    @classmethod
    def uniform(cls, flight_ids: List[str], n1: int = DEFAULT_N1, n2: int = DEFAULT_N2,
                n3: int = DEFAULT_N3) -> 'SegmentLayout':
        return cls(counts={fid: (n1, n2, n3) for fid in flight_ids})

    @property
    def n2(self) -> int:
        return next(iter(self.counts.values()))[1]

    def for_flight(self, flight_id: str) -> Tuple[int, int, int]:
        if flight_id not in self.counts:
            raise KeyError(f'Layout has no entry for flight {flight_id}')
        return self.counts[flight_id]

    def restricted(self, flight_ids: List[str]) -> 'SegmentLayout':
        return SegmentLayout(counts={fid: self.counts[fid] for fid in flight_ids})


@dataclass(frozen=True)
class FlightTrajectory:
    """Sampled trajectory: start node plus every collocation point, SI and degrees"""
    flight_id: str
    t: np.ndarray
    lat: np.ndarray
    lon: np.ndarray
    chi: np.ndarray
    V: np.ndarray
    m: np.ndarray
    T: np.ndarray
    CL: np.ndarray
    mu: np.ndarray
    vE: np.ndarray


@dataclass(frozen=True)
class FlightMetrics:
    flight_time_s: float
    fuel_burn_kg: float
    distance_m: float
    doc: float

    @property
    def flight_time_h(self) -> float:
        return self.flight_time_s / 3600.0

    @property
    def distance_km(self) -> float:
        return self.distance_m / 1000.0


@dataclass(frozen=True)
class MissionEvent:
    kind: Literal['rendezvous', 'splitting']
    time: float
    point: GeoPoint
    pair: Tuple[str, str]


@dataclass(frozen=True)
class DiscreteState:
    label: str
    t_start: float
    t_end: float
    pairs: Tuple[Tuple[str, str], ...]
    distance_m: Dict[str, float] = field(default_factory=dict)

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class MissionSolution:
    scenario_name: str
    epoch: float
    formation_enabled: bool
    trajectories: Dict[str, FlightTrajectory]
    alpha: Dict[Tuple[str, str], Tuple[np.ndarray, np.ndarray]]
    knots: Tuple[float, float]
    events: List[MissionEvent]
    metrics: Dict[str, FlightMetrics]
    total_doc: float
    objective: float
    nlp: NlpSolution
    mode_max_fraction: float = 0.0
    switched: bool = True
    refined: bool = False
    relaxed_objective: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.nlp.optimal

    @property
    def total_fuel(self) -> float:
        return sum(m.fuel_burn_kg for m in self.metrics.values())
