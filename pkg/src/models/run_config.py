from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.constants import DEFAULT_N1, DEFAULT_N2, DEFAULT_N3, DEFAULT_RBF_RIDGE
from src.models.mission import SegmentLayout
from src.models.solver import SolverConfig

ArtifactFormat = Literal['csv', 'geojson', 'summary', 'json']
ALL_FORMATS: List[str] = ['csv', 'geojson', 'summary', 'json']


class RunSettings(BaseModel):
    model_config = ConfigDict(extra='forbid')

    scenario: Path
    wind_grid: Optional[Path] = None
    wind_model: Optional[Path] = None
    output_dir: Path = Path('out')
    formats: List[ArtifactFormat] = ALL_FORMATS
    threads: Optional[int] = None
    coefficients: Dict[str, Path]

    @field_validator('threads')
    def validate_threads(cls, v):
        if v is not None and v < 1:
            raise ValueError(f'threads must be at least 1, got {v}')
        return v

    @field_validator('coefficients')
    def validate_coefficients(cls, v):
        if not v:
            raise ValueError('At least one coefficient file is required')
        return v

    @model_validator(mode='after')
    def validate_wind_source(self):
        if self.wind_grid is not None and self.wind_model is not None:
            raise ValueError('Give either wind_grid or wind_model, not both')
        return self


class WindSettings(BaseModel):
    model_config = ConfigDict(extra='forbid')

    shape: Optional[float] = None
    ridge: float = DEFAULT_RBF_RIDGE
    center_stride: int = 1
    pressure_level: float = 200.0

    @field_validator('shape')
    def validate_shape(cls, v):
        if v is not None and not v > 0.0:
            raise ValueError(f'RBF shape must be positive, got {v}')
        return v

    @field_validator('ridge')
    def validate_ridge(cls, v):
        if v < 0.0:
            raise ValueError(f'RBF ridge must be non-negative, got {v}')
        return v

    @field_validator('center_stride')
    def validate_stride(cls, v):
        if v < 1:
            raise ValueError(f'center_stride must be at least 1, got {v}')
        return v


class LayoutSettings(BaseModel):
    model_config = ConfigDict(extra='forbid')

    n1: int = DEFAULT_N1
    n2: int = DEFAULT_N2
    n3: int = DEFAULT_N3
    flights: Dict[str, Tuple[int, int, int]] = {}

    def for_flights(self, flight_ids: List[str]) -> SegmentLayout:
        counts = {fid: self.flights.get(fid, (self.n1, self.n2, self.n3)) for fid in flight_ids}
        return SegmentLayout(counts=counts)


class RunConfig(BaseModel):
    """A run configuration file; relative paths are resolved against ``base_dir``"""
    model_config = ConfigDict(extra='forbid')

    run: RunSettings
    wind: WindSettings = WindSettings()
    layout: LayoutSettings = LayoutSettings()
    solver: SolverConfig = SolverConfig()
    base_dir: Path = Path('.')

    @model_validator(mode='after')
    def resolve_and_check_paths(self):
        run = self.run

        def resolve(p: Optional[Path]) -> Optional[Path]:
            if p is None:
                return None
            return p if p.is_absolute() else (self.base_dir / p)

        run.scenario = resolve(run.scenario)
        run.wind_grid = resolve(run.wind_grid)
        run.wind_model = resolve(run.wind_model)
        run.output_dir = resolve(run.output_dir)
        run.coefficients = {label: resolve(p) for label, p in run.coefficients.items()}
        required = [run.scenario, run.wind_grid, run.wind_model, *run.coefficients.values()]
        missing = [str(p) for p in required if p is not None and not p.is_file()]
        if missing:
            raise ValueError(f'Referenced files do not exist: {missing}')
        return self

    def to_dict(self) -> dict:
        """Plain-typed view, as recorded next to the run artifacts"""
        data = self.model_dump(mode='json')
        data.pop('base_dir')
        return data
