from dataclasses import replace

import numpy as np
import pytest

from src.helpers.mission.analysis import SweepCase, compare_with_solo, delayed_scenario, sweep_departure_delays
from src.models.mission import FlightMetrics, MissionSolution
from src.models.solver import NlpSolution, NlpStatus


def solution(metrics) -> MissionSolution:
    nlp = NlpSolution(z=np.zeros(1), objective=0.0, eq_residual_inf=0.0, ineq_violation_inf=0.0,
                      kkt_stationarity_inf=0.0, status=NlpStatus.OPTIMAL, iterations=1)
    return MissionSolution(scenario_name='s', epoch=0.0, formation_enabled=True, trajectories={}, alpha={},
                           knots=(0.0, 1.0), events=[], metrics=metrics,
                           total_doc=sum(m.doc for m in metrics.values()), objective=0.0, nlp=nlp)


def test_compare_with_solo():
    formation = solution({'F1': FlightMetrics(25200.0, 38000.0, 5.80e6, 0.3 * 25200.0 + 0.7 * 38000.0),
                          'F2': FlightMetrics(24000.0, 40000.0, 5.00e6, 0.3 * 24000.0 + 0.7 * 40000.0)})
    solo = {'F1': solution({'F1': FlightMetrics(24000.0, 40000.0, 5.75e6, 0.3 * 24000.0 + 0.7 * 40000.0)}),
            'F2': solution({'F2': FlightMetrics(24000.0, 40000.0, 5.00e6, 0.3 * 24000.0 + 0.7 * 40000.0)})}
    comparison = compare_with_solo(formation, solo)
    f1 = comparison.flights['F1']
    assert f1.time_pct == pytest.approx(5.0)
    assert f1.fuel_pct == pytest.approx(-5.0)
    assert f1.distance_km == pytest.approx(50.0)
    assert comparison.flights['F2'].doc_pct == pytest.approx(0.0)
    assert comparison.solo_doc == pytest.approx(2 * (0.3 * 24000.0 + 0.7 * 40000.0))
    assert comparison.doc_pct == pytest.approx(100.0 * (formation.total_doc - comparison.solo_doc)
                                               / comparison.solo_doc)
    assert comparison.as_dict()['flights']['F1']['fuel_pct'] == pytest.approx(-5.0)


def test_delayed_scenario(scenario):
    delayed = delayed_scenario(scenario, ['F1'], 1800.0)
    assert delayed.flight('F1').departure == scenario.flight('F1').departure + 1800.0
    assert delayed.flight('F1').scheduled_arrival == scenario.flight('F1').scheduled_arrival + 1800.0
    assert delayed.flight('F2') == scenario.flight('F2')
    assert scenario.flight('F1').departure != delayed.flight('F1').departure


def test_delay_sweep_rejects_unknown_flights(scenario, small_layout):
    with pytest.raises(ValueError, match='Unknown flights'):
        sweep_departure_delays(scenario, small_layout, [0.0], ['F9'])


def test_failed_sweep_case_row():
    case = SweepCase('delay F1 +600 s', 600.0, error='solver stopped')
    assert case.as_dict() == {'label': 'delay F1 +600 s', 'parameter': 600.0, 'error': 'solver stopped'}
    done = replace(case, error=None, formation=solution({}))
    assert done.as_dict()['events'] == []
