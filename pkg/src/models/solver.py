from dataclasses import dataclass, field
from enum import Enum
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, field_validator, model_validator


class SolverConfig(BaseModel):
    tol_feas: float = 1e-6
    tol_opt: float = 1e-4
    max_iter: int = 3000
    mu_init: float = 0.1
    mu_min: Optional[float] = None
    penalty_init: float = 1.0
    bound_push: float = 1e-2
    scaling: bool = True
    scaling_max_gradient: float = 100.0
    linear_solver: Literal['dense', 'sparse'] = 'dense'
    hessian: Literal['exact', 'bfgs'] = 'exact'
    backend: Literal['interior-point', 'scipy-trust-constr', 'file-exchange'] = 'interior-point'
    external_command: Optional[List[str]] = None
    exchange_dir: Optional[str] = None

    @field_validator('tol_feas', 'tol_opt', 'mu_init', 'penalty_init', 'bound_push', 'scaling_max_gradient')
    def validate_positive(cls, v, info):
        if not v > 0.0:
            raise ValueError(f'{info.field_name} must be positive, got {v}')
        return v

    @field_validator('max_iter')
    def validate_max_iter(cls, v):
        if v < 1:
            raise ValueError(f'max_iter must be at least 1, got {v}')
        return v

    @model_validator(mode='after')
    def validate_backend(self):
        if self.backend == 'file-exchange' and not self.external_command:
            raise ValueError('file-exchange backend requires external_command')
        return self

    @property
    def barrier_floor(self) -> float:
        if self.mu_min is not None:
            return self.mu_min
        return min(self.tol_feas, self.tol_opt) / 10.0


class NlpStatus(str, Enum):
    OPTIMAL = 'optimal'
    MAX_ITER = 'max_iter'
    INFEASIBLE = 'infeasible'
    NUMERICAL_FAILURE = 'numerical_failure'


@dataclass
class NlpMultipliers:
    """Lagrange multipliers in the sign convention of the unscaled problem.

    ``y_ineq`` and the bound multipliers are non-negative at a KKT point.
    """
    y_eq: np.ndarray
    y_ineq: np.ndarray
    z_lower: np.ndarray
    z_upper: np.ndarray

    @classmethod
    def zeros(cls, n: int, m_eq: int, m_ineq: int) -> 'NlpMultipliers':
        return cls(np.zeros(m_eq), np.zeros(m_ineq), np.zeros(n), np.zeros(n))


@dataclass
class KktReport:
    stationarity_inf: float
    eq_residual_inf: float
    ineq_violation_inf: float
    complementarity_inf: float
    wrong_sign: List[str] = field(default_factory=list)

    def satisfied(self, tol_feas: float, tol_opt: float) -> bool:
        return (self.eq_residual_inf <= tol_feas
                and self.ineq_violation_inf <= tol_feas
                and self.stationarity_inf <= tol_opt
                and self.complementarity_inf <= tol_opt
                and not self.wrong_sign)


@dataclass
class NlpSolution:
    z: np.ndarray
    objective: float
    eq_residual_inf: float
    ineq_violation_inf: float
    kkt_stationarity_inf: float
    status: NlpStatus
    iterations: int
    multipliers: Optional[NlpMultipliers] = None
    complementarity_inf: float = float('nan')
    message: str = ''
    failed_constraint: Optional[int] = None
    # (mu, penalty, merit before, merit after) per accepted step
    history: List[Tuple[float, float, float, float]] = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == NlpStatus.OPTIMAL
