"""Scenario and run configuration files (TOML).

Scenario grammar::

    name = "experiment-a"              # optional
    alpha_t = 0.3                      # cost per second of flight time
    alpha_f = 0.7                      # cost per kg of fuel
    max_arrival_deviation = 2700       # s, optional
    free_departure_window = 7200       # s, optional
    cruise_level = 200                 # hPa, optional
    order = ["F1", "F2"]               # leader first

    [savings]
    F2 = 0.10

    [[flights]]
    id = "F1"
    origin = { lat = 40.64, lon = -73.78 }
    destination = { lat = 40.48, lon = -3.57 }
    departure = "2026-03-01T10:15:00Z"
    scheduled_arrival = "2026-03-01T17:55:00Z"
    departure_free = false             # optional
    departure_window = ["...", "..."]  # optional, free departures only
    perf = "a330"                      # label of a coefficient file of the run
    m_I = 220000
    V_I = 240
    V_F = 220
    chi_I = 52.0                       # degrees, optional
"""

import logging

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

from pydantic import ValidationError

from src.exceptions import InputError
from src.helpers.performance import load_performance_file
from src.helpers.windfield import fit_rbf, load_rbf_model, load_wind_grid
from src.models.aircraft import AircraftPerformance
from src.models.mission import MissionScenario, SegmentLayout
from src.models.run_config import RunConfig
from src.models.solver import SolverConfig
from src.models.wind import RbfWindModel

logger = logging.getLogger(__name__)


def read_toml(path: Union[str, Path]) -> dict:
    path = Path(path)
    if not path.is_file():
        raise InputError(f'File not found: {path}')
    try:
        with path.open('rb') as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise InputError(f'{path}: invalid TOML. Details - {str(e)}')


def scenario_from_dict(data: dict, performances: Dict[str, AircraftPerformance],
                       source: str = '<scenario>') -> MissionScenario:
    data = dict(data)
    if 'order' in data and isinstance(data['order'], list):
        data['order'] = {'roles': data['order']}
    data['performances'] = performances
    try:
        return MissionScenario(**data)
    except ValidationError as e:
        raise InputError(f'{source}: invalid scenario. Details - {str(e)}')


def load_scenario(path: Union[str, Path], performances: Dict[str, AircraftPerformance]) -> MissionScenario:
    scenario = scenario_from_dict(read_toml(path), performances, str(path))
    logger.info('Loaded scenario', extra={'file': str(path), 'scenario': scenario.name,
                                          'flights': scenario.flight_ids})
    return scenario


def load_run_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    data = read_toml(path)
    data['base_dir'] = path.resolve().parent
    try:
        return RunConfig(**data)
    except ValidationError as e:
        raise InputError(f'{path}: invalid run configuration. Details - {str(e)}')


@dataclass
class RunInputs:
    config: RunConfig
    scenario: MissionScenario
    layout: SegmentLayout
    wind: Optional[RbfWindModel]
    solver: SolverConfig


def load_run_inputs(path: Union[str, Path]) -> RunInputs:
    """Parse every file a run needs before anything is solved"""
    config = load_run_config(path)
    performances = {label: load_performance_file(p) for label, p in config.run.coefficients.items()}
    scenario = load_scenario(config.run.scenario, performances)
    try:
        layout = config.layout.for_flights(scenario.flight_ids)
    except ValidationError as e:
        raise InputError(f'{path}: invalid layout. Details - {str(e)}')
    wind = None
    if config.run.wind_model is not None:
        wind = load_rbf_model(config.run.wind_model)
    elif config.run.wind_grid is not None:
        grid = load_wind_grid(config.run.wind_grid, pressure_level=config.wind.pressure_level)
        wind = fit_rbf(grid, shape=config.wind.shape, ridge=config.wind.ridge,
                       center_stride=config.wind.center_stride)
    return RunInputs(config=config, scenario=scenario, layout=layout, wind=wind, solver=config.solver)
