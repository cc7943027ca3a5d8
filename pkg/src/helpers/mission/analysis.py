"""Formation versus solo comparisons and parameter sweeps."""

import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

from src.exceptions import SolverError
from src.helpers.mission.solve import solve_mission, solve_solo_baseline
from src.models.mission import MissionScenario, MissionSolution, SegmentLayout
from src.models.solver import SolverConfig
from src.models.wind import RbfWindModel

logger = logging.getLogger(__name__)


def _pct(new: float, old: float) -> float:
    return 100.0 * (new - old) / old if old else 0.0


@dataclass(frozen=True)
class FlightComparison:
    flight_id: str
    time_pct: float
    fuel_pct: float
    doc_pct: float
    distance_km: float


@dataclass(frozen=True)
class SoloComparison:
    flights: Dict[str, FlightComparison]
    formation_doc: float
    solo_doc: float

    @property
    def doc_pct(self) -> float:
        return _pct(self.formation_doc, self.solo_doc)

    def as_dict(self) -> dict:
        return {'flights': {fid: asdict(c) for fid, c in self.flights.items()},
                'formation_doc': self.formation_doc, 'solo_doc': self.solo_doc, 'doc_pct': self.doc_pct}


def compare_with_solo(formation: MissionSolution, solo: Dict[str, MissionSolution]) -> SoloComparison:
    """Percent changes of time, fuel and DOC per flight, covered distance change in km"""
    flights = {}
    solo_total = 0.0
    for fid, metrics in formation.metrics.items():
        base = solo[fid].metrics[fid]
        solo_total += base.doc
        flights[fid] = FlightComparison(
            flight_id=fid,
            time_pct=_pct(metrics.flight_time_s, base.flight_time_s),
            fuel_pct=_pct(metrics.fuel_burn_kg, base.fuel_burn_kg),
            doc_pct=_pct(metrics.doc, base.doc),
            distance_km=(metrics.distance_m - base.distance_m) / 1000.0)
    return SoloComparison(flights=flights, formation_doc=formation.total_doc, solo_doc=solo_total)


@dataclass
class SweepCase:
    label: str
    parameter: float
    comparison: Optional[SoloComparison] = None
    formation: Optional[MissionSolution] = None
    error: Optional[str] = None
    notes: List[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {'label': self.label, 'parameter': self.parameter, 'error': self.error}
        if self.comparison is not None:
            out['comparison'] = self.comparison.as_dict()
        if self.formation is not None:
            out['events'] = [{'kind': e.kind, 'time_s': e.time, 'lat': e.point.lat, 'lon': e.point.lon,
                              'pair': list(e.pair)} for e in self.formation.events]
        return out


def _run_case(label: str, parameter: float, scenario: MissionScenario, layout: SegmentLayout,
              wind: Optional[RbfWindModel], config: Optional[SolverConfig], threads: Optional[int]) -> SweepCase:
    logger.info('Sweep case', extra={'case': label, 'parameter': parameter})
    try:
        formation = solve_mission(scenario, layout, wind, config)
        solo = solve_solo_baseline(scenario, layout, wind, config, threads)
    except SolverError as e:
        logger.warning('Sweep case failed', extra={'case': label, 'error': str(e)})
        return SweepCase(label, parameter, error=str(e))
    return SweepCase(label, parameter, compare_with_solo(formation, solo), formation, notes=list(formation.notes))


def delayed_scenario(scenario: MissionScenario, flight_ids: Sequence[str], delay_s: float) -> MissionScenario:
    """Shift departure, window and scheduled arrival of the given flights"""
    flights = []
    for flight in scenario.flights:
        if flight.id in flight_ids:
            update = {'departure': flight.departure + delay_s,
                      'scheduled_arrival': flight.scheduled_arrival + delay_s}
            if flight.departure_window is not None:
                update['departure_window'] = tuple(t + delay_s for t in flight.departure_window)
            flight = flight.model_copy(update=update)
        flights.append(flight)
    return scenario.model_copy(update={'flights': flights})


def sweep_departure_delays(scenario: MissionScenario, layout: SegmentLayout, delays_s: Sequence[float],
                           flight_ids: Sequence[str], wind: Optional[RbfWindModel] = None,
                           config: Optional[SolverConfig] = None, threads: Optional[int] = None) -> List[SweepCase]:
    unknown = set(flight_ids) - set(scenario.flight_ids)
    if unknown:
        raise ValueError(f'Unknown flights {sorted(unknown)}. Allowed: {scenario.flight_ids}')
    return [_run_case(f'delay {"+".join(flight_ids)} {delay:+.0f} s', delay,
                      delayed_scenario(scenario, flight_ids, delay), layout, wind, config, threads)
            for delay in delays_s]


def sweep_fuel_savings(scenario: MissionScenario, layout: SegmentLayout, savings: Sequence[float],
                       wind: Optional[RbfWindModel] = None, config: Optional[SolverConfig] = None,
                       threads: Optional[int] = None) -> List[SweepCase]:
    """Re-solve with every benefiting aircraft's saving set to each value"""
    cases = []
    for value in savings:
        updated = {fid: value for fid in scenario.order.benefiting}
        case_scenario = MissionScenario.model_validate({**scenario.model_dump(), 'savings': updated})
        cases.append(_run_case(f'saving {value:.3f}', value, case_scenario, layout, wind, config, threads))
    return cases
