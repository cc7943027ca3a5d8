from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.constants import DEFAULT_SPEED_SCALE_MS, EARTH_RADIUS_M


class GeoPoint(BaseModel):
    """Latitude/longitude in decimal degrees"""
    model_config = ConfigDict(frozen=True)

    lat: float
    lon: float

    @field_validator('lat')
    def validate_lat(cls, v):
        if not -90.0 <= v <= 90.0:
            raise ValueError(f'Latitude {v} outside [-90, 90]')
        return float(v)

    @field_validator('lon')
    def wrap_lon(cls, v):
        if -180.0 <= v <= 180.0:
            return float(v)
        return float((v + 180.0) % 360.0 - 180.0)

    def as_tuple(self) -> tuple:
        return (self.lat, self.lon)


class NormalizationScales(BaseModel):
    """Reference magnitudes that bring every NLP variable to O(1)"""
    model_config = ConfigDict(frozen=True)

    length_scale: float
    time_scale: float
    mass_scale: float
    speed_scale: float

    @field_validator('length_scale', 'time_scale', 'mass_scale', 'speed_scale')
    def validate_positive(cls, v):
        if not v > 0.0:
            raise ValueError(f'Scale must be strictly positive, got {v}')
        return float(v)

    @model_validator(mode='after')
    def validate_speed(self):
        expected = self.length_scale / self.time_scale
        if abs(self.speed_scale - expected) > 1e-12 * expected:
            raise ValueError(
                f'speed_scale {self.speed_scale} must equal length_scale/time_scale = {expected}')
        return self

    @classmethod
    def for_mission(cls, heaviest_mass: float, earth_radius: float = EARTH_RADIUS_M,
                    speed_scale: float = DEFAULT_SPEED_SCALE_MS) -> 'NormalizationScales':
        time_scale = earth_radius / speed_scale
        return cls(length_scale=earth_radius, time_scale=time_scale,
                   mass_scale=heaviest_mass, speed_scale=earth_radius / time_scale)

    def _scale(self, kind: str) -> float:
        scales = {
            'length': self.length_scale,
            'time': self.time_scale,
            'mass': self.mass_scale,
            'speed': self.speed_scale,
        }
        if kind not in scales:
            raise ValueError(f'Unknown quantity kind {kind!r}. Allowed: {sorted(scales)}')
        return scales[kind]

    def normalize(self, value, kind: str):
        return value / self._scale(kind)

    def denormalize(self, value, kind: str):
        return value * self._scale(kind)
