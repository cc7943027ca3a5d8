from pathlib import Path

import pytest

from src.helpers.mission.scenario import scenario_from_dict
from src.helpers.performance import load_performance_file
from src.models.mission import SegmentLayout

DATA_DIR = Path(__file__).parent / 'data'


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='run full mission solves')


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full NLP solves, skipped unless --runslow is given')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope='session')
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope='session')
def a330():
    return load_performance_file(DATA_DIR / 'a330_like.coeff')


def two_flight_dict(**overrides) -> dict:
    """JFK-MAD trailing YUL-LHR, the shipped demo mission"""
    data = {
        'name': 'jfk-mad-yul-lhr',
        'alpha_t': 0.3,
        'alpha_f': 0.7,
        'order': ['F2', 'F1'],
        'savings': {'F1': 0.10},
        'flights': [
            {'id': 'F1', 'origin': {'lat': 40.64, 'lon': -73.78}, 'destination': {'lat': 40.48, 'lon': -3.57},
             'departure': '2026-03-01T10:15:00Z', 'scheduled_arrival': '2026-03-01T17:50:00Z',
             'perf': 'a330', 'm_I': 220000, 'V_I': 240, 'V_F': 220, 'chi_I': 66.51},
            {'id': 'F2', 'origin': {'lat': 45.47, 'lon': -73.74}, 'destination': {'lat': 51.47, 'lon': -0.45},
             'departure': '2026-03-01T10:50:00Z', 'departure_free': True,
             'scheduled_arrival': '2026-03-01T17:15:00Z',
             'perf': 'a330', 'm_I': 215000, 'V_I': 240, 'V_F': 220, 'chi_I': 55.70},
        ],
    }
    data.update(overrides)
    return data


def three_flight_dict(**overrides) -> dict:
    """The demo mission joined by BOS-CDG in the middle of the formation"""
    data = two_flight_dict()
    data['name'] = 'three-flight'
    data['order'] = ['F2', 'F3', 'F1']
    data['savings'] = {'F3': 0.10, 'F1': 0.10}
    data['flights'].append(
        {'id': 'F3', 'origin': {'lat': 42.36, 'lon': -71.06}, 'destination': {'lat': 48.85, 'lon': 2.35},
         'departure': '2026-03-01T10:30:00Z', 'scheduled_arrival': '2026-03-01T17:25:00Z',
         'perf': 'a330', 'm_I': 210000, 'V_I': 240, 'V_F': 220, 'chi_I': 56.46})
    data.update(overrides)
    return data


@pytest.fixture
def scenario(a330):
    return scenario_from_dict(two_flight_dict(), {'a330': a330})


@pytest.fixture
def solo_departures(a330):
    """Same mission with both departures fixed"""
    data = two_flight_dict()
    data['flights'] = [{**f, 'departure_free': False} for f in data['flights']]
    return scenario_from_dict(data, {'a330': a330})


@pytest.fixture
def small_layout(scenario):
    return SegmentLayout.uniform(scenario.flight_ids, 4, 6, 4)


@pytest.fixture
def three_scenario(a330):
    return scenario_from_dict(three_flight_dict(), {'a330': a330})
