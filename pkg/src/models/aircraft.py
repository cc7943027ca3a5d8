from dataclasses import dataclass
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.constants import FT_TO_M, KN_TO_N, KT_TO_MS, MIN_TO_S, R_AIR


class AircraftPerformance(BaseModel):
    """Cruise performance coefficients, stored in the units of the coefficient file.

    Speeds are knots, altitudes feet and TSFC kg/(min*kN); the ``*_si``
    properties convert at the boundary so every law works in SI.
    """
    model_config = ConfigDict(frozen=True)

    name: str
    S: float
    b: float
    CD0: float
    K: float
    Cf1: float
    Cf2: float
    CTcr: float
    CTC1: float
    CTC2: float
    CTC3: float
    CVmin: float
    m_min: float
    m_max: float
    VMO: float
    MMO: float
    CL_min: float
    CL_max: float
    mu_max: float

    @field_validator('S', 'b', 'CD0', 'K', 'Cf1', 'Cf2', 'CTcr', 'CTC1', 'CTC2', 'CTC3',
                     'CVmin', 'm_min', 'm_max', 'VMO', 'MMO', 'CL_max')
    def validate_positive(cls, v, info):
        if not v > 0.0:
            raise ValueError(f'{info.field_name} must be positive, got {v}')
        return float(v)

    @field_validator('mu_max')
    def validate_mu_max(cls, v):
        if not 0.0 < v < 90.0:
            raise ValueError(f'mu_max must lie in (0, 90) degrees, got {v}')
        return float(v)

    @model_validator(mode='after')
    def validate_ranges(self):
        if not self.m_min < self.m_max:
            raise ValueError(f'm_min {self.m_min} must be below m_max {self.m_max}')
        if not self.CL_min < self.CL_max:
            raise ValueError(f'CL_min {self.CL_min} must be below CL_max {self.CL_max}')
        return self

    @property
    def cf1_si(self) -> float:
        """Cf1 in kg/(s*N)"""
        return self.Cf1 / (MIN_TO_S * KN_TO_N)

    @property
    def cf2_si(self) -> float:
        """Cf2 in m/s"""
        return self.Cf2 * KT_TO_MS

    @property
    def ctc2_si(self) -> float:
        return self.CTC2 * FT_TO_M

    @property
    def vmo_si(self) -> float:
        """VMO as a calibrated airspeed in m/s"""
        return self.VMO * KT_TO_MS

    @property
    def mu_max_rad(self) -> float:
        return float(np.radians(self.mu_max))


class AtmosphereState(BaseModel):
    model_config = ConfigDict(frozen=True)

    h: float
    T: float
    p: float
    rho: float
    a: float

    @field_validator('T', 'p', 'rho', 'a')
    def validate_positive(cls, v, info):
        if not v > 0.0:
            raise ValueError(f'{info.field_name} must be positive, got {v}')
        return v

    @field_validator('h')
    def validate_altitude(cls, v):
        if v < 0.0:
            raise ValueError(f'Altitude must be non-negative, got {v}')
        return v

    @model_validator(mode='after')
    def validate_state_equation(self):
        expected = self.p / (R_AIR * self.T)
        if abs(self.rho - expected) > 1e-9 * expected:
            raise ValueError(f'rho {self.rho} inconsistent with p/(R*T) = {expected}')
        return self


# Dynamics containers: fields may be floats, arrays or dual numbers.

@dataclass
class AircraftState:
    phi: Any
    lam: Any
    chi: Any
    V: Any
    m: Any

    def as_tuple(self) -> tuple:
        return (self.phi, self.lam, self.chi, self.V, self.m)


@dataclass
class AircraftControl:
    T: Any
    CL: Any
    mu: Any

    def as_tuple(self) -> tuple:
        return (self.T, self.CL, self.mu)
