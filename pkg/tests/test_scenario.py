import pytest

from conftest import two_flight_dict
from src.exceptions import InputError
from src.helpers.mission.scenario import load_run_config, load_run_inputs, read_toml, scenario_from_dict
from src.models.mission import to_utc_seconds


def test_demo_run_inputs(data_dir):
    inputs = load_run_inputs(data_dir / 'demo_run.toml')
    assert inputs.scenario.name == 'demo-jfk-mad-yul-lhr'
    assert inputs.scenario.order.roles == ['F2', 'F1']
    assert inputs.scenario.saving('F1') == pytest.approx(0.10)
    assert inputs.scenario.saving('F2') == 0.0
    assert inputs.layout.for_flight('F1') == (6, 10, 6)
    assert inputs.wind is not None
    assert inputs.solver.max_iter == 1500
    assert inputs.config.run.threads == 2
    assert inputs.config.run.output_dir.resolve() == (data_dir / '../out/demo').resolve()


def test_three_flight_demo_inputs(data_dir):
    inputs = load_run_inputs(data_dir / 'demo_run_three.toml')
    scenario = inputs.scenario
    assert scenario.order.roles == ['F2', 'F3', 'F1']
    assert scenario.order.intermediate == 'F3'
    assert scenario.order.adjacent_pairs() == [('F2', 'F3'), ('F3', 'F1')]
    assert scenario.saving('F3') == scenario.saving('F1') == pytest.approx(0.10)
    assert scenario.flight('F3').m_I == 210000.0
    assert inputs.layout.for_flight('F3') == (6, 10, 6)
    assert inputs.config.run.threads == 3


def test_scenario_times_and_defaults(scenario):
    f2 = scenario.flight('F2')
    assert f2.departure == to_utc_seconds('2026-03-01T10:50:00Z')
    assert f2.departure_bounds(scenario.free_departure_window) == (f2.departure - 7200.0, f2.departure + 7200.0)
    f1 = scenario.flight('F1')
    assert f1.departure_bounds() == (f1.departure, f1.departure)
    assert scenario.epoch == f1.departure
    assert scenario.order.benefiting == ['F1']


def test_missing_file(tmp_path):
    with pytest.raises(InputError, match='not found'):
        read_toml(tmp_path / 'absent.toml')


def test_invalid_toml(tmp_path):
    path = tmp_path / 'bad.toml'
    path.write_text('name = \n', encoding='utf-8')
    with pytest.raises(InputError, match='invalid TOML'):
        read_toml(path)


@pytest.mark.parametrize('mutate', [
    lambda d: d['flights'][0].update(perf='b777'),
    lambda d: d['savings'].update(F1=0.25),
    lambda d: d['savings'].update(F2=0.05),
    lambda d: d.update(order=['F1', 'F3']),
    lambda d: d.update(order=['F1']),
    lambda d: d.update(savings={}),
    lambda d: d['flights'][1].update(id='F1'),
    lambda d: d['flights'][0].update(scheduled_arrival='2026-03-01T09:00:00Z'),
    lambda d: d['flights'][0].update(m_I=-1.0),
    lambda d: d.update(alpha_t=-0.3),
])
def test_invalid_scenarios(a330, mutate):
    data = two_flight_dict()
    data['flights'] = [dict(f) for f in data['flights']]
    data['savings'] = dict(data['savings'])
    mutate(data)
    with pytest.raises(InputError):
        scenario_from_dict(data, {'a330': a330})


def write_run(tmp_path, data_dir, extra: str = '') -> str:
    path = tmp_path / 'run.toml'
    path.write_text(f'[run]\nscenario = "{data_dir / "demo_scenario.toml"}"\n{extra}'
                    f'[run.coefficients]\na330 = "{data_dir / "a330_like.coeff"}"\n', encoding='utf-8')
    return path


def test_run_config_defaults(tmp_path, data_dir):
    config = load_run_config(write_run(tmp_path, data_dir))
    assert config.run.wind_grid is None and config.run.wind_model is None
    assert config.run.output_dir.resolve() == (tmp_path / 'out').resolve()
    assert config.solver.backend == 'interior-point'
    assert 'base_dir' not in config.to_dict()


@pytest.mark.parametrize('extra', [
    'colour = "red"\n',
    f'wind_grid = "{__file__}"\nwind_model = "{__file__}"\n',
    'wind_grid = "absent.csv"\n',
    'threads = 0\n',
])
def test_invalid_run_configs(tmp_path, data_dir, extra):
    with pytest.raises(InputError):
        load_run_config(write_run(tmp_path, data_dir, extra))
