from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, PrivateAttr, field_validator, model_validator

from src.constants import DEFAULT_CRUISE_LEVEL_HPA, MAX_WIND_COMPONENT_MS
from src.models.geo import GeoPoint


class WindSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    point: GeoPoint
    u: float
    v: float

    @field_validator('u', 'v')
    def validate_component(cls, v):
        if not np.isfinite(v) or abs(v) > MAX_WIND_COMPONENT_MS:
            raise ValueError(f'Wind component {v} m/s exceeds the {MAX_WIND_COMPONENT_MS} m/s sanity bound')
        return float(v)


class WindGrid(BaseModel):
    """Gridded horizontal wind at a single pressure level"""
    model_config = ConfigDict(frozen=True)

    points: List[WindSample]
    pressure_level: float = DEFAULT_CRUISE_LEVEL_HPA
    timestamp: str = ''

    @field_validator('points')
    def validate_points(cls, v):
        if len(v) < 4:
            raise ValueError(f'Wind grid needs at least 4 points, got {len(v)}')
        seen = {}
        for i, sample in enumerate(v):
            key = sample.point.as_tuple()
            if key in seen:
                raise ValueError(f'Duplicate grid coordinate {key} in rows {seen[key]} and {i}')
            seen[key] = i
        return v

    @field_validator('pressure_level')
    def validate_pressure_level(cls, v):
        if not v > 0.0:
            raise ValueError(f'Pressure level must be positive, got {v}')
        return v

    @property
    def lats(self) -> np.ndarray:
        return np.array([s.point.lat for s in self.points])

    @property
    def lons(self) -> np.ndarray:
        return np.array([s.point.lon for s in self.points])

    @property
    def u(self) -> np.ndarray:
        return np.array([s.u for s in self.points])

    @property
    def v(self) -> np.ndarray:
        return np.array([s.v for s in self.points])


class RbfWindModel(BaseModel):
    """Gaussian RBF interpolant of both wind components over shared centers.

    Immutable once built; the numpy views used by the evaluators are cached
    at construction.
    """
    model_config = ConfigDict(frozen=True)

    center_lats: List[float]
    center_lons: List[float]
    coeffs_u: List[float]
    coeffs_v: List[float]
    bias_u: float
    bias_v: float
    shape: float
    ridge: float = 0.0

    _centers: np.ndarray = PrivateAttr()
    _weights: np.ndarray = PrivateAttr()

    @field_validator('shape')
    def validate_shape(cls, v):
        if not v > 0.0:
            raise ValueError(f'RBF shape must be positive, got {v}')
        return v

    @field_validator('ridge')
    def validate_ridge(cls, v):
        if v < 0.0:
            raise ValueError(f'RBF ridge must be non-negative, got {v}')
        return v

    @model_validator(mode='after')
    def validate_lengths(self):
        n = len(self.center_lats)
        if n == 0:
            raise ValueError('RBF model needs at least one center')
        lengths = {len(self.center_lons), len(self.coeffs_u), len(self.coeffs_v)}
        if lengths != {n}:
            raise ValueError('centers, coeffs_u and coeffs_v must have the same length')
        return self

    def model_post_init(self, __context) -> None:
        self._centers = np.column_stack([self.center_lats, self.center_lons])
        self._weights = np.column_stack([self.coeffs_u, self.coeffs_v])

    @property
    def centers(self) -> List[GeoPoint]:
        return [GeoPoint(lat=a, lon=o) for a, o in zip(self.center_lats, self.center_lons)]

    @property
    def center_array(self) -> np.ndarray:
        """(M, 2) array of (lat, lon) in degrees"""
        return self._centers

    @property
    def weight_array(self) -> np.ndarray:
        """(M, 2) array of (u, v) weights"""
        return self._weights

    @property
    def bias(self) -> np.ndarray:
        return np.array([self.bias_u, self.bias_v])


class WindSynthesisConfig(BaseModel):
    """Synthetic jet-stream grid: eastward Gaussian jet, optional meander and noise"""
    lat_min: float = 30.0
    lat_max: float = 65.0
    lon_min: float = -80.0
    lon_max: float = 10.0
    resolution: float = 2.5
    jet_lat: float = 47.0
    jet_width: float = 6.0
    jet_speed: float = 45.0
    meander_amplitude: float = 0.0
    meander_wavelength: float = 60.0
    background_u: float = 0.0
    noise: float = 0.0
    seed: int = 0
    pressure_level: float = DEFAULT_CRUISE_LEVEL_HPA
    timestamp: Optional[str] = None

    @field_validator('resolution', 'jet_width', 'meander_wavelength')
    def validate_positive(cls, v):
        if not v > 0.0:
            raise ValueError(f'Value must be positive, got {v}')
        return v

    @field_validator('noise')
    def validate_noise(cls, v):
        if v < 0.0:
            raise ValueError(f'Noise standard deviation must be non-negative, got {v}')
        return v

    @model_validator(mode='after')
    def validate_bbox(self):
        if not -90.0 <= self.lat_min < self.lat_max <= 90.0:
            raise ValueError(f'Invalid latitude range [{self.lat_min}, {self.lat_max}]')
        if not -180.0 <= self.lon_min < self.lon_max <= 180.0:
            raise ValueError(f'Invalid longitude range [{self.lon_min}, {self.lon_max}]')
        return self
