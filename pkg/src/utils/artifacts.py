"""Run artifacts: trajectory CSV, GeoJSON, text summary and JSON summary."""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from src.helpers.mission.events import discrete_states, state_summary
from src.models.mission import FlightTrajectory, MissionSolution, format_utc

TRAJECTORY_COLUMNS = ['t_s', 'lat_deg', 'lon_deg', 'chi_deg', 'V_ms', 'm_kg', 'T_N', 'CL', 'mu_deg', 'vE']
FAILED_MARKER = 'FAILED'


def trajectory_frame(trajectory: FlightTrajectory) -> pd.DataFrame:
    return pd.DataFrame({
        't_s': trajectory.t,
        'lat_deg': trajectory.lat,
        'lon_deg': trajectory.lon,
        'chi_deg': trajectory.chi,
        'V_ms': trajectory.V,
        'm_kg': trajectory.m,
        'T_N': trajectory.T,
        'CL': trajectory.CL,
        'mu_deg': trajectory.mu,
        'vE': trajectory.vE,
    }, columns=TRAJECTORY_COLUMNS)


def write_trajectory_csv(trajectory: FlightTrajectory, path: Path) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        trajectory_frame(trajectory).to_csv(handle, index=False, float_format='%.9g', lineterminator='\n')


def create_geojson(solution: MissionSolution) -> Dict[str, Any]:
    """FeatureCollection: one LineString per flight, one Point per event"""
    features = []
    for fid, tr in solution.trajectories.items():
        features.append({
            'type': 'Feature',
            'geometry': {'type': 'LineString',
                         'coordinates': [[float(lon), float(lat)] for lat, lon in zip(tr.lat, tr.lon)]},
            'properties': {'flight_id': fid, 'departure': format_utc(solution.epoch + float(tr.t[0])),
                           'arrival': format_utc(solution.epoch + float(tr.t[-1]))},
        })
    for event in solution.events:
        features.append({
            'type': 'Feature',
            'geometry': {'type': 'Point', 'coordinates': [event.point.lon, event.point.lat]},
            'properties': {'kind': event.kind, 'time': format_utc(solution.epoch + event.time),
                           'pair': list(event.pair)},
        })
    return {'type': 'FeatureCollection', 'features': features}


def create_summary(solution: MissionSolution, earth_radius: float, failed: bool = False) -> Dict[str, Any]:
    nlp = solution.nlp
    summary = {
        'status': FAILED_MARKER if failed else 'OK',
        'scenario': solution.scenario_name,
        'epoch': format_utc(solution.epoch),
        'formation_enabled': solution.formation_enabled,
        'flights': {fid: {'flight_time_h': m.flight_time_h, 'fuel_burn_kg': m.fuel_burn_kg,
                          'distance_km': m.distance_km, 'doc': m.doc}
                    for fid, m in solution.metrics.items()},
        'total_doc': solution.total_doc,
        'total_fuel_kg': solution.total_fuel,
        'knots': [format_utc(solution.epoch + k) for k in solution.knots],
        'events': [{'kind': e.kind, 'time': format_utc(solution.epoch + e.time), 'lat': e.point.lat,
                    'lon': e.point.lon, 'pair': list(e.pair)} for e in solution.events],
        'modes': {'max_fraction': solution.mode_max_fraction, 'switched': solution.switched,
                  'refined': solution.refined, 'relaxed_objective': solution.relaxed_objective},
        'solver': {'status': nlp.status.value, 'iterations': nlp.iterations, 'objective': solution.objective,
                   'eq_residual_inf': nlp.eq_residual_inf, 'ineq_violation_inf': nlp.ineq_violation_inf,
                   'stationarity_inf': nlp.kkt_stationarity_inf, 'message': nlp.message},
        'notes': list(solution.notes),
    }
    if solution.formation_enabled and solution.trajectories:
        summary['states'] = state_summary(discrete_states(solution.events, solution.trajectories, earth_radius))
    return summary


def create_summary_text(summary: Dict[str, Any]) -> str:
    lines = []
    if summary['status'] == FAILED_MARKER:
        lines.append(f'{FAILED_MARKER}: solver status {summary["solver"]["status"]} - {summary["solver"]["message"]}')
    mode = 'formation' if summary['formation_enabled'] else 'solo'
    lines.append(f'Scenario {summary["scenario"]} ({mode}), epoch {summary["epoch"]}')
    lines.append('')
    lines.append(f'{"Flight":<10}{"Flight Time [h]":>18}{"Fuel Burn [kg]":>18}{"Covered Distance [km]":>24}'
                 f'{"DOC [mu]":>14}')
    for fid, m in summary['flights'].items():
        lines.append(f'{fid:<10}{m["flight_time_h"]:>18.2f}{m["fuel_burn_kg"]:>18.2f}{m["distance_km"]:>24.2f}'
                     f'{m["doc"]:>14.2f}')
    lines.append(f'{"Total":<10}{"":>18}{summary["total_fuel_kg"]:>18.2f}{"":>24}{summary["total_doc"]:>14.2f}')
    if summary['formation_enabled']:
        lines.append('')
        lines.append(f'Knots: {summary["knots"][0]} / {summary["knots"][1]}')
        if summary['events']:
            lines.append('Formation events:')
            for e in summary['events']:
                lines.append(f'  {e["kind"]:<11}{e["time"]}  lat {e["lat"]:8.3f}  lon {e["lon"]:9.3f}  '
                             f'{"-".join(e["pair"])}')
        else:
            lines.append('Formation events: none')
        if len(summary['flights']) == 3 and summary.get('states'):
            lines.append('Discrete states:')
            for s in summary['states']:
                pairs = ', '.join(s['pairs']) or 'solo'
                lines.append(f'  State {s["state"]:<5}{s["duration_s"] / 3600.0:8.2f} h  {pairs}')
    modes = summary['modes']
    lines.append('')
    lines.append(f'Mode max fraction {modes["max_fraction"]:.2e}, switched {modes["switched"]}, '
                 f'refined {modes["refined"]}')
    solver = summary['solver']
    lines.append(f'Solver {solver["status"]} after {solver["iterations"]} iterations, '
                 f'eq {solver["eq_residual_inf"]:.2e}, ineq {solver["ineq_violation_inf"]:.2e}, '
                 f'stationarity {solver["stationarity_inf"]:.2e}')
    lines.extend(f'Note: {n}' for n in summary['notes'])
    return '\n'.join(lines) + '\n'


def dump_json(body: Any) -> str:
    def default(value):
        if isinstance(value, np.generic):
            return value.item()
        if isinstance(value, np.ndarray):
            return value.tolist()
        return str(value)

    return json.dumps(body, indent=2, sort_keys=True, default=default) + '\n'


def write_artifacts(solution: MissionSolution, output_dir: Path, formats: Iterable[str], earth_radius: float,
                    prefix: str = '', failed: bool = False, message: Optional[str] = None) -> List[Path]:
    """Write the requested artifacts; a failed run also gets a FAILED marker file"""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    formats = set(formats)
    written = []
    if 'csv' in formats:
        for fid, tr in solution.trajectories.items():
            path = output_dir / f'{prefix}trajectory_{fid}.csv'
            write_trajectory_csv(tr, path)
            written.append(path)
    if 'geojson' in formats:
        path = output_dir / f'{prefix}routes.geojson'
        path.write_text(dump_json(create_geojson(solution)), encoding='utf-8')
        written.append(path)
    summary = create_summary(solution, earth_radius, failed)
    if 'summary' in formats:
        path = output_dir / f'{prefix}summary.txt'
        path.write_text(create_summary_text(summary), encoding='utf-8')
        written.append(path)
    if 'json' in formats:
        path = output_dir / f'{prefix}summary.json'
        path.write_text(dump_json(summary), encoding='utf-8')
        written.append(path)
    if failed:
        path = output_dir / f'{prefix}{FAILED_MARKER}'
        path.write_text((message or solution.nlp.message) + '\n', encoding='utf-8')
        written.append(path)
    return written


def create_comparison_text(title: str, rows: List[Dict[str, Any]]) -> str:
    """Table of formation-versus-solo changes, one block per case"""
    lines = [title, '']
    for row in rows:
        lines.append(f'{row["label"]}')
        if row.get('error'):
            lines.append(f'  {FAILED_MARKER}: {row["error"]}')
            continue
        comparison = row['comparison']
        lines.append(f'  {"Flight":<10}{"dTime [%]":>12}{"dFuel [%]":>12}{"dDOC [%]":>12}{"dDist [km]":>13}')
        for fid, c in comparison['flights'].items():
            lines.append(f'  {fid:<10}{c["time_pct"]:>12.2f}{c["fuel_pct"]:>12.2f}{c["doc_pct"]:>12.2f}'
                         f'{c["distance_km"]:>13.1f}')
        lines.append(f'  {"Total":<10}{"":>12}{"":>12}{comparison["doc_pct"]:>12.2f}')
    return '\n'.join(lines) + '\n'
