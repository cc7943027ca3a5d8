import numpy as np
import pytest
import scipy.linalg

from src.exceptions import InputError, WindModelError
from src.helpers.windfield import (
    eval_wind,
    eval_wind_array,
    eval_wind_dual,
    fit_rbf,
    generate_wind_grid,
    kernel_matrix,
    load_rbf_model,
    load_wind_grid,
    save_rbf_model,
    write_wind_grid,
)
from src.models.geo import GeoPoint
from src.models.wind import WindGrid, WindSample, WindSynthesisConfig
from src.utils import dual as dn


def make_grid(fn, lats, lons) -> WindGrid:
    samples = []
    for lat in lats:
        for lon in lons:
            u, v = fn(lat, lon)
            samples.append(WindSample(point=GeoPoint(lat=lat, lon=lon), u=u, v=v))
    return WindGrid(points=samples)


def dense_oracle(grid: WindGrid, shape: float, lats, lons) -> np.ndarray:
    """Bordered interpolation system solved independently of fit_rbf"""
    m = len(grid.points)
    a = np.zeros((m + 1, m + 1))
    a[:m, :m] = kernel_matrix(grid.lats, grid.lons, grid.lats, grid.lons, shape)
    a[:m, m] = a[m, :m] = 1.0
    rhs = np.vstack([np.column_stack([grid.u, grid.v]), np.zeros((1, 2))])
    sol = scipy.linalg.solve(a, rhs)
    k = kernel_matrix(lats, lons, grid.lats, grid.lons, shape)
    return k @ sol[:m] + sol[m]


def test_load_grid_from_bytes():
    grid = load_wind_grid(b'# comment\nlat,lon,u,v\n40,-70,10,1\n40,-65,12,0\n45,-70,8,-1\n45,-65,9,2\n')
    assert len(grid.points) == 4
    assert grid.u.tolist() == [10.0, 12.0, 8.0, 9.0]


@pytest.mark.parametrize('body', [
    b'lat,lon,u\n1,2,3\n',
    b'lat,lon,u,v\n91.0,0.0,1.0,1.0\n0,1,0,0\n1,0,0,0\n1,1,0,0\n',
    b'lat,lon,u,v\n0,0,x,1\n0,1,0,0\n1,0,0,0\n1,1,0,0\n',
    b'lat,lon,u,v\n0,0,1,1\n0,0,2,2\n1,0,0,0\n1,1,0,0\n',
])
def test_malformed_grids_rejected(body):
    with pytest.raises(InputError):
        load_wind_grid(body)


def test_missing_grid_file(tmp_path):
    with pytest.raises(InputError):
        load_wind_grid(tmp_path / 'nope.csv')


def test_constant_field_reproduced():
    grid = make_grid(lambda lat, lon: (5.0, 0.0), [40, 45, 50], [-70, -60, -50])
    model = fit_rbf(grid, ridge=0.0)
    values = eval_wind_array(model, grid.lats, grid.lons)
    assert np.allclose(values[:, 0], 5.0, atol=1e-9)
    assert np.allclose(values[:, 1], 0.0, atol=1e-9)


def test_interpolates_centers_without_ridge():
    fn = lambda lat, lon: (np.sin(np.radians(lat)) * np.cos(np.radians(lon)), 0.5)
    grid = make_grid(fn, np.linspace(30, 60, 9), np.linspace(-80, 0, 9))
    model = fit_rbf(grid, ridge=0.0)
    residual = eval_wind_array(model, grid.lats, grid.lons) - np.column_stack([grid.u, grid.v])
    assert np.max(np.abs(residual)) < 1e-8


def test_off_grid_matches_dense_oracle():
    fn = lambda lat, lon: (20.0 * np.exp(-((lat - 45) / 6) ** 2), 0.1 * lon)
    grid = make_grid(fn, np.linspace(30, 60, 9), np.linspace(-80, 0, 9))
    model = fit_rbf(grid, ridge=0.0)
    rng = np.random.default_rng(7)
    lats, lons = rng.uniform(30, 60, 50), rng.uniform(-80, 0, 50)
    assert np.allclose(eval_wind_array(model, lats, lons), dense_oracle(grid, model.shape, lats, lons),
                       rtol=0.0, atol=1e-10)


def test_cell_midpoint_matches_dense_oracle():
    grid = make_grid(lambda lat, lon: (lat / 10.0, -lon / 10.0), [40, 45], [-70, -65])
    model = fit_rbf(grid, shape=0.2, ridge=0.0)
    u, v = eval_wind(model, GeoPoint(lat=42.5, lon=-67.5))
    expected = dense_oracle(grid, 0.2, [42.5], [-67.5])[0]
    assert u == pytest.approx(expected[0], abs=1e-10)
    assert v == pytest.approx(expected[1], abs=1e-10)


def test_far_field_is_the_bias():
    grid = make_grid(lambda lat, lon: (lat, lon), [40, 45], [-70, -65])
    model = fit_rbf(grid, ridge=1e-6)
    far = GeoPoint(lat=-40.0, lon=170.0)
    assert eval_wind(model, far) == pytest.approx((model.bias_u, model.bias_v), abs=1e-9)


def test_fit_is_order_independent():
    grid = make_grid(lambda lat, lon: (lat - 45, lon / 20), np.linspace(40, 50, 4), np.linspace(-70, -50, 4))
    shuffled = WindGrid(points=list(reversed(grid.points)))
    a, b = fit_rbf(grid, ridge=0.0), fit_rbf(shuffled, ridge=0.0)
    lats, lons = np.array([41.3, 47.9]), np.array([-66.2, -52.5])
    assert np.allclose(eval_wind_array(a, lats, lons), eval_wind_array(b, lats, lons), atol=1e-12)


def test_invalid_fit_parameters():
    grid = make_grid(lambda lat, lon: (1.0, 1.0), [40, 45], [-70, -65])
    with pytest.raises(WindModelError):
        fit_rbf(grid, ridge=-1.0)
    with pytest.raises(WindModelError):
        fit_rbf(grid, center_stride=0)


def test_strided_centers_fit_by_least_squares():
    fn = lambda lat, lon: (10.0 + 0.1 * lat, 0.0)
    grid = make_grid(fn, np.linspace(30, 60, 7), np.linspace(-80, 0, 7))
    model = fit_rbf(grid, center_stride=2, ridge=1e-8)
    assert len(model.center_lats) == 25
    residual = eval_wind_array(model, grid.lats, grid.lons)[:, 0] - grid.u
    assert np.max(np.abs(residual)) < 0.5



def test_larger_ridge_trades_residual_for_smoothness():
    rng = np.random.default_rng(3)
    fn = lambda lat, lon: (25.0 * np.exp(-((lat - 45) / 5) ** 2) + rng.normal(0.0, 2.0), rng.normal(0.0, 2.0))
    grid = make_grid(fn, np.linspace(30, 60, 8), np.linspace(-80, -10, 8))
    observed = np.column_stack([grid.u, grid.v])
    residuals, energies = [], []
    for ridge in (0.0, 1e-4, 1e-2, 1e-1, 1.0):
        model = fit_rbf(grid, ridge=ridge)
        residuals.append(np.linalg.norm(eval_wind_array(model, grid.lats, grid.lons) - observed))
        k = kernel_matrix(grid.lats, grid.lons, grid.lats, grid.lons, model.shape)
        w = model.weight_array
        energies.append(float(np.trace(w.T @ k @ w)))
    assert residuals[0] < 1e-6
    assert np.all(np.diff(residuals) >= -1e-9)
    assert np.all(np.diff(energies) <= 1e-9 * energies[0])


def test_field_stays_bounded_inside_the_grid():
    fn = lambda lat, lon: (40.0 * np.exp(-((lat - 48) / 6) ** 2), 8.0 * np.sin(np.radians(4 * lon)))
    grid = make_grid(fn, np.linspace(30, 60, 11), np.linspace(-80, -10, 11))
    model = fit_rbf(grid)
    largest = np.max(np.hypot(grid.u, grid.v))
    rng = np.random.default_rng(5)
    lats, lons = rng.uniform(30, 60, 500), rng.uniform(-80, -10, 500)
    speed = np.linalg.norm(eval_wind_array(model, lats, lons), axis=1)
    assert np.max(speed) <= 1.5 * largest + np.hypot(model.bias_u, model.bias_v)

def test_dual_evaluation_matches_finite_differences():
    grid = make_grid(lambda lat, lon: (30 * np.exp(-((lat - 47) / 6) ** 2), 0.05 * lon),
                     np.linspace(35, 60, 6), np.linspace(-70, -20, 6))
    model = fit_rbf(grid)
    lat, lon = dn.Dual.variables([46.3, -41.7])
    u, v = eval_wind_dual(model, lat, lon)
    h = 1e-6
    for k, (dlat, dlon) in enumerate(((h, 0.0), (0.0, h))):
        plus = eval_wind_array(model, 46.3 + dlat, -41.7 + dlon)
        minus = eval_wind_array(model, 46.3 - dlat, -41.7 - dlon)
        fd = (plus - minus) / (2 * h)
        assert u.partials[k] == pytest.approx(fd[0], rel=1e-6, abs=1e-9)
        assert v.partials[k] == pytest.approx(fd[1], rel=1e-6, abs=1e-9)


def test_model_file_round_trip(tmp_path):
    grid = make_grid(lambda lat, lon: (lat / 3, lon / 7), np.linspace(40, 50, 4), np.linspace(-70, -40, 4))
    model = fit_rbf(grid)
    path = tmp_path / 'wind.rbf'
    save_rbf_model(model, path)
    loaded = load_rbf_model(path)
    rng = np.random.default_rng(11)
    lats, lons = rng.uniform(40, 50, 100), rng.uniform(-70, -40, 100)
    assert np.allclose(eval_wind_array(loaded, lats, lons), eval_wind_array(model, lats, lons),
                       rtol=0.0, atol=1e-12)


def test_malformed_model_file(tmp_path):
    path = tmp_path / 'bad.rbf'
    path.write_text('# rbf-wind-model v1\nshape 1.0\n', encoding='utf-8')
    with pytest.raises(InputError):
        load_rbf_model(path)


def test_generator_is_deterministic(tmp_path):
    config = WindSynthesisConfig(noise=2.0, seed=42, meander_amplitude=3.0)
    a, b = tmp_path / 'a.csv', tmp_path / 'b.csv'
    write_wind_grid(generate_wind_grid(config), a, comment='seed 42')
    write_wind_grid(generate_wind_grid(config), b, comment='seed 42')
    assert a.read_bytes() == b.read_bytes()
    assert load_wind_grid(a).points


def test_calm_generator_gives_zero_wind():
    frame = generate_wind_grid(WindSynthesisConfig(jet_speed=0.0, noise=0.0))
    assert np.all(frame['u'] == 0.0)
    assert np.all(frame['v'] == 0.0)


def test_jet_peaks_at_its_latitude():
    config = WindSynthesisConfig(jet_lat=50.0, resolution=2.5)
    frame = generate_wind_grid(config)
    peak_lat = frame.loc[frame['u'].idxmax(), 'lat']
    assert abs(peak_lat - config.jet_lat) <= config.resolution


def test_shipped_demo_grid_loads(data_dir):
    grid = load_wind_grid(data_dir / 'demo_wind.csv')
    assert max(grid.u) == pytest.approx(45.0 * np.exp(-(2 / 6) ** 2), rel=1e-5)
