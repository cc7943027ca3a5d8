import json

import numpy as np
import pandas as pd
import pytest

from src.models.geo import GeoPoint
from src.models.mission import FlightMetrics, FlightTrajectory, MissionEvent, MissionSolution, to_utc_seconds
from src.models.solver import NlpSolution, NlpStatus
from src.utils.artifacts import (
    FAILED_MARKER,
    TRAJECTORY_COLUMNS,
    create_comparison_text,
    create_geojson,
    create_summary,
    create_summary_text,
    dump_json,
    write_artifacts,
)

R_E = 6371.0e3
EPOCH = to_utc_seconds('2026-03-01T10:15:00Z')


def trajectory(fid: str, lat: float) -> FlightTrajectory:
    t = np.linspace(0.0, 20000.0, 21)
    zeros = np.zeros_like(t)
    return FlightTrajectory(flight_id=fid, t=t, lat=np.full_like(t, lat), lon=np.linspace(-70.0, -10.0, t.size),
                            chi=np.full_like(t, 90.0), V=np.full_like(t, 235.0),
                            m=np.linspace(2.2e5, 1.8e5, t.size), T=np.full_like(t, 1.2e5), CL=np.full_like(t, 0.5),
                            mu=zeros, vE=zeros)


def make_solution(status: NlpStatus = NlpStatus.OPTIMAL, formation: bool = True) -> MissionSolution:
    trajectories = {'F2': trajectory('F2', 50.0), 'F1': trajectory('F1', 48.0)}
    metrics = {'F1': FlightMetrics(20000.0, 40000.0, 4.5e6, 0.3 * 20000.0 + 0.7 * 40000.0),
               'F2': FlightMetrics(20000.0, 42000.0, 4.6e6, 0.3 * 20000.0 + 0.7 * 42000.0)}
    events = [MissionEvent('rendezvous', 5000.0, GeoPoint(lat=48.0, lon=-55.0), ('F2', 'F1')),
              MissionEvent('splitting', 15000.0, GeoPoint(lat=48.0, lon=-25.0), ('F2', 'F1'))] if formation else []
    nlp = NlpSolution(z=np.zeros(3), objective=1.0, eq_residual_inf=1e-8, ineq_violation_inf=0.0,
                      kkt_stationarity_inf=1e-6, status=status, iterations=42, message='done')
    return MissionSolution(scenario_name='demo', epoch=EPOCH, formation_enabled=formation,
                           trajectories=trajectories, alpha={}, knots=(3000.0, 17000.0), events=events,
                           metrics=metrics, total_doc=sum(m.doc for m in metrics.values()), objective=1.0, nlp=nlp,
                           notes=['example note'])


def test_csv_columns_and_rows(tmp_path):
    written = write_artifacts(make_solution(), tmp_path, ['csv'], R_E)
    assert sorted(p.name for p in written) == ['trajectory_F1.csv', 'trajectory_F2.csv']
    frame = pd.read_csv(tmp_path / 'trajectory_F1.csv')
    assert list(frame.columns) == TRAJECTORY_COLUMNS
    assert len(frame) == 21
    assert frame['lat_deg'].iloc[0] == pytest.approx(48.0)
    assert frame['m_kg'].is_monotonic_decreasing


def test_geojson_uses_lon_lat_order():
    body = create_geojson(make_solution())
    assert body['type'] == 'FeatureCollection'
    lines = [f for f in body['features'] if f['geometry']['type'] == 'LineString']
    points = [f for f in body['features'] if f['geometry']['type'] == 'Point']
    assert len(lines) == 2 and len(points) == 2
    assert lines[0]['geometry']['coordinates'][0] == [-70.0, 50.0]
    assert points[0]['geometry']['coordinates'] == [-55.0, 48.0]
    assert points[0]['properties']['time'] == '2026-03-01T11:38:20Z'


def test_summary_totals_are_consistent():
    summary = create_summary(make_solution(), R_E)
    assert summary['status'] == 'OK'
    assert summary['total_doc'] == pytest.approx(sum(f['doc'] for f in summary['flights'].values()))
    assert summary['total_fuel_kg'] == pytest.approx(82000.0)
    for f in summary['flights'].values():
        assert f['doc'] == pytest.approx(0.3 * f['flight_time_h'] * 3600.0 + 0.7 * f['fuel_burn_kg'])
    assert summary['knots'] == ['2026-03-01T11:05:00Z', '2026-03-01T14:58:20Z']
    assert [s['state'] for s in summary['states']] == ['I', 'II', 'III']
    assert summary['solver']['status'] == 'optimal'


def test_solo_summary_has_no_states():
    summary = create_summary(make_solution(formation=False), R_E)
    assert 'states' not in summary
    assert 'Knots' not in create_summary_text(summary)


def test_summary_text_table():
    text = create_summary_text(create_summary(make_solution(), R_E))
    assert text.startswith('Scenario demo (formation)')
    assert 'Covered Distance [km]' in text
    assert 'rendezvous' in text and 'splitting' in text
    assert 'Note: example note' in text


def test_failed_run_is_marked(tmp_path):
    solution = make_solution(status=NlpStatus.MAX_ITER)
    written = write_artifacts(solution, tmp_path, ['summary', 'json'], R_E, prefix='solo_F1_', failed=True,
                              message='iteration limit')
    assert {p.name for p in written} == {'solo_F1_summary.txt', 'solo_F1_summary.json', f'solo_F1_{FAILED_MARKER}'}
    assert (tmp_path / f'solo_F1_{FAILED_MARKER}').read_text(encoding='utf-8') == 'iteration limit\n'
    assert (tmp_path / 'solo_F1_summary.txt').read_text(encoding='utf-8').startswith('FAILED: solver status max_iter')
    assert json.loads((tmp_path / 'solo_F1_summary.json').read_text(encoding='utf-8'))['status'] == FAILED_MARKER


def test_dump_json_handles_numpy():
    body = json.loads(dump_json({'a': np.float64(1.5), 'b': np.arange(3), 'c': np.int32(7)}))
    assert body == {'a': 1.5, 'b': [0, 1, 2], 'c': 7}


def test_comparison_text():
    rows = [{'label': 'delay 0 min',
             'comparison': {'flights': {'F1': {'time_pct': 1.0, 'fuel_pct': -5.0, 'doc_pct': -3.2,
                                               'distance_km': 12.5}},
                            'doc_pct': -1.6}},
            {'label': 'delay 30 min', 'error': 'solver did not converge'}]
    text = create_comparison_text('Departure delay sweep', rows)
    assert text.splitlines()[0] == 'Departure delay sweep'
    assert '-3.20' in text and '-1.60' in text
    assert f'{FAILED_MARKER}: solver did not converge' in text
