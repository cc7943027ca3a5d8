"""Wind-grid ingestion and the Gaussian RBF interpolant.

Basis: phi(r) = exp(-(shape * r)^2), r the Euclidean distance in
(lat, lon) degrees. The fit solves the saddle-point system

    [[Phi + ridge*I, 1], [1^T, 0]] [c; c0] = [y; 0]

which interpolates exactly with ridge = 0 and reproduces constants for any
ridge. With a center subset the penalised least-squares form is used.
"""

import io
import logging
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd
import scipy.linalg
from pydantic import ValidationError
from scipy.spatial import cKDTree

from src.constants import DEFAULT_RBF_RIDGE
from src.exceptions import InputError, WindModelError
from src.models.geo import GeoPoint
from src.models.wind import RbfWindModel, WindGrid, WindSample, WindSynthesisConfig
from src.utils import dual as dn

logger = logging.getLogger(__name__)

WIND_COLUMNS = ['lat', 'lon', 'u', 'v']
_MODEL_HEADER = '# rbf-wind-model v1'
_CONDITION_LIMIT = 1e14


def load_wind_grid(source: Union[str, Path, bytes, io.IOBase], pressure_level: float = 200.0,
                   timestamp: str = '') -> WindGrid:
    """Parse the ``lat,lon,u,v`` CSV format; '#' lines are comments"""
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.is_file():
            raise InputError(f'Wind grid file not found: {path}')
        source = path.read_bytes()
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    try:
        frame = pd.read_csv(source, comment='#', dtype=str, skipinitialspace=True)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise InputError(f'Unreadable wind grid. Details - {str(e)}')
    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in WIND_COLUMNS if c not in frame.columns]
    if missing:
        raise InputError(f'Wind grid header is missing columns {missing}; expected {",".join(WIND_COLUMNS)}')

    samples = []
    for row_number, row in enumerate(frame[WIND_COLUMNS].itertuples(index=False), start=1):
        try:
            lat, lon, u, v = (float(x) for x in row)
        except (TypeError, ValueError):
            raise InputError(f'Wind grid row {row_number}: non-numeric field in {tuple(row)}')
        if not np.all(np.isfinite([lat, lon, u, v])):
            raise InputError(f'Wind grid row {row_number}: non-finite field in {tuple(row)}')
        try:
            samples.append(WindSample(point=GeoPoint(lat=lat, lon=lon), u=u, v=v))
        except ValidationError as e:
            raise InputError(f'Wind grid row {row_number}: {e.errors()[0]["msg"]}')
    try:
        grid = WindGrid(points=samples, pressure_level=pressure_level, timestamp=timestamp)
    except ValidationError as e:
        raise InputError(f'Invalid wind grid: {e.errors()[0]["msg"]}')
    logger.info('Loaded wind grid', extra={'points': len(samples), 'pressure_level': pressure_level})
    return grid


def kernel_matrix(lats_a, lons_a, lats_b, lons_b, shape: float) -> np.ndarray:
    da = np.subtract.outer(np.asarray(lats_a, dtype=float), np.asarray(lats_b, dtype=float))
    do = np.subtract.outer(np.asarray(lons_a, dtype=float), np.asarray(lons_b, dtype=float))
    return np.exp(-(shape * shape) * (da * da + do * do))


def default_shape(lats, lons) -> float:
    """Inverse of the median nearest-neighbour spacing of the centers (1/degrees)"""
    coords = np.column_stack([lats, lons])
    distances, _ = cKDTree(coords).query(coords, k=2)
    spacing = float(np.median(distances[:, 1]))
    if not spacing > 0.0:
        raise WindModelError('Cannot derive an RBF shape from coincident centers')
    return 1.0 / spacing


def fit_rbf(grid: WindGrid, shape: Optional[float] = None, ridge: float = DEFAULT_RBF_RIDGE,
            center_stride: int = 1) -> RbfWindModel:
    if ridge < 0.0:
        raise WindModelError(f'ridge must be non-negative, got {ridge}')
    if center_stride < 1:
        raise WindModelError(f'center_stride must be at least 1, got {center_stride}')
    lats, lons = grid.lats, grid.lons
    y = np.column_stack([grid.u, grid.v])
    c_lats, c_lons = lats[::center_stride], lons[::center_stride]
    if shape is None:
        shape = default_shape(c_lats, c_lons)
    if not shape > 0.0:
        raise WindModelError(f'shape must be positive, got {shape}')
    m = len(c_lats)

    if center_stride == 1:
        system = np.zeros((m + 1, m + 1))
        system[:m, :m] = kernel_matrix(lats, lons, lats, lons, shape) + ridge * np.eye(m)
        system[:m, m] = 1.0
        system[m, :m] = 1.0
        rhs = np.vstack([y, np.zeros((1, 2))])
        cond = np.linalg.cond(system)
        if ridge == 0.0 and not cond < _CONDITION_LIMIT:
            raise WindModelError(
                f'RBF system is ill-conditioned (condition estimate {cond:.3e}); use ridge > 0')
        try:
            solution = scipy.linalg.solve(system, rhs, assume_a='sym')
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
            raise WindModelError(f'RBF system is singular; use ridge > 0. Details - {str(e)}')
        weights, bias = solution[:m], solution[m]
    else:
        phi = kernel_matrix(lats, lons, c_lats, c_lons, shape)
        design = np.hstack([phi, np.ones((len(lats), 1))])
        penalty = np.sqrt(ridge) * np.hstack([np.eye(m), np.zeros((m, 1))])
        a = np.vstack([design, penalty])
        b = np.vstack([y, np.zeros((m, 2))])
        solution, _, rank, _ = scipy.linalg.lstsq(a, b)
        if ridge == 0.0 and rank < m + 1:
            raise WindModelError(f'RBF least-squares system is rank deficient ({rank} < {m + 1}); use ridge > 0')
        weights, bias = solution[:m], solution[m]

    if not np.all(np.isfinite(weights)):
        raise WindModelError('RBF fit produced non-finite coefficients; use ridge > 0')
    model = RbfWindModel(center_lats=c_lats.tolist(), center_lons=c_lons.tolist(),
                         coeffs_u=weights[:, 0].tolist(), coeffs_v=weights[:, 1].tolist(),
                         bias_u=float(bias[0]), bias_v=float(bias[1]), shape=float(shape), ridge=float(ridge))
    logger.info('Fitted RBF wind model', extra={'centers': m, 'shape': shape, 'ridge': ridge})
    return model


def eval_wind_array(model: RbfWindModel, lats, lons) -> np.ndarray:
    """(..., 2) array of (V_WE, V_WN) at arrays of positions in degrees"""
    lats = np.asarray(lats, dtype=float)
    lons = np.asarray(lons, dtype=float)
    c = model.center_array
    k = kernel_matrix(lats.ravel(), lons.ravel(), c[:, 0], c[:, 1], model.shape)
    out = k @ model.weight_array + model.bias
    return out.reshape(lats.shape + (2,))


def eval_wind(model: RbfWindModel, at: GeoPoint) -> Tuple[float, float]:
    u, v = eval_wind_array(model, at.lat, at.lon)
    return float(u), float(v)


def eval_wind_dual(model: RbfWindModel, lat_deg, lon_deg):
    """Wind components at positions that may carry derivatives"""
    lat_v, lon_v = dn.value_of(lat_deg), dn.value_of(lon_deg)
    lat_v, lon_v = np.broadcast_arrays(lat_v, lon_v)
    c = model.center_array
    da = np.subtract.outer(lat_v, c[:, 0])
    do = np.subtract.outer(lon_v, c[:, 1])
    k = np.exp(-(model.shape ** 2) * (da * da + do * do))
    w = model.weight_array
    value = k @ w + model.bias
    if not isinstance(lat_deg, dn.Dual) and not isinstance(lon_deg, dn.Dual):
        return value[..., 0], value[..., 1]
    # d/dlat of exp(-s^2 r^2) = -2 s^2 (lat - c_lat) * k
    factor = -2.0 * model.shape ** 2
    dk_dlat = factor * (da * k) @ w
    dk_dlon = factor * (do * k) @ w
    components = []
    for j in range(2):
        components.append(dn.Dual.chain(value[..., j], [dk_dlat[..., j], dk_dlon[..., j]], [lat_deg, lon_deg]))
    return components[0], components[1]


def save_rbf_model(model: RbfWindModel, path: Union[str, Path]) -> None:
    """Text format: header, scalar ``key value`` lines, then ``lat lon cu cv`` per center"""
    lines = [_MODEL_HEADER,
             f'shape {model.shape!r}',
             f'ridge {model.ridge!r}',
             f'bias_u {model.bias_u!r}',
             f'bias_v {model.bias_v!r}',
             f'centers {len(model.center_lats)}']
    for lat, lon, cu, cv in zip(model.center_lats, model.center_lons, model.coeffs_u, model.coeffs_v):
        lines.append(f'{lat!r} {lon!r} {cu!r} {cv!r}')
    Path(path).write_text('\n'.join(lines) + '\n', encoding='utf-8')


def load_rbf_model(path: Union[str, Path]) -> RbfWindModel:
    path = Path(path)
    if not path.is_file():
        raise InputError(f'Wind model file not found: {path}')
    lines = [l for l in path.read_text(encoding='utf-8').splitlines() if l.strip()]
    if not lines or lines[0].strip() != _MODEL_HEADER:
        raise InputError(f'{path}: not an RBF wind model file')
    try:
        scalars = {}
        for line in lines[1:6]:
            key, value = line.split()
            scalars[key] = float(value)
        count = int(scalars['centers'])
        rows = np.array([[float(x) for x in line.split()] for line in lines[6:6 + count]])
        if rows.shape != (count, 4):
            raise ValueError(f'expected {count} center rows of 4 values')
        return RbfWindModel(center_lats=rows[:, 0].tolist(), center_lons=rows[:, 1].tolist(),
                            coeffs_u=rows[:, 2].tolist(), coeffs_v=rows[:, 3].tolist(),
                            bias_u=scalars['bias_u'], bias_v=scalars['bias_v'],
                            shape=scalars['shape'], ridge=scalars['ridge'])
    except (KeyError, ValueError, ValidationError) as e:
        raise InputError(f'{path}: malformed wind model. Details - {str(e)}')


def generate_wind_grid(config: WindSynthesisConfig) -> pd.DataFrame:
    """Synthetic jet stream: Gaussian band of eastward wind around a meandering axis"""
    lats = np.arange(config.lat_min, config.lat_max + 0.5 * config.resolution, config.resolution)
    lons = np.arange(config.lon_min, config.lon_max + 0.5 * config.resolution, config.resolution)
    lat_grid, lon_grid = np.meshgrid(lats, lons, indexing='ij')
    k = 2.0 * np.pi / config.meander_wavelength
    axis = config.jet_lat + config.meander_amplitude * np.sin(k * (lon_grid - config.lon_min))
    profile = config.jet_speed * np.exp(-((lat_grid - axis) / config.jet_width) ** 2)
    # the flow follows the local slope of the jet axis
    slope = config.meander_amplitude * k * np.cos(k * (lon_grid - config.lon_min))
    u = config.background_u + profile
    v = profile * slope
    if config.noise > 0.0:
        rng = np.random.default_rng(config.seed)
        u = u + rng.normal(0.0, config.noise, u.shape)
        v = v + rng.normal(0.0, config.noise, v.shape)
    frame = pd.DataFrame({'lat': lat_grid.ravel(), 'lon': lon_grid.ravel(), 'u': u.ravel(), 'v': v.ravel()})
    logger.info('Generated synthetic wind grid', extra={'points': len(frame), 'seed': config.seed})
    return frame


def write_wind_grid(frame: pd.DataFrame, path: Union[str, Path], comment: Optional[str] = None) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        if comment:
            handle.write(f'# {comment}\n')
        frame[WIND_COLUMNS].to_csv(handle, index=False, float_format='%.6f', lineterminator='\n')
