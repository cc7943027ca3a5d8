"""Point-mass cruise dynamics with the embedded formation mode on the mass flow.

Only the mass equation depends on the mode:

    m' = (1 - vE) * (-T * eta) + vE * (-(1 - R) * T * eta)

the kinematic and force rows are mode independent.
"""

from typing import Tuple, Union

import numpy as np

from src.constants import EARTH_RADIUS_M, G0
from src.exceptions import DynamicsError
from src.helpers import performance
from src.helpers.windfield import eval_wind_dual
from src.models.aircraft import AircraftControl, AircraftPerformance, AircraftState, AtmosphereState
from src.models.wind import RbfWindModel
from src.utils import dual as dn

_POLE_GUARD = 1e-9

Wind = Union[Tuple[float, float], RbfWindModel]


def _wind_components(wind: Wind, phi, lam):
    if isinstance(wind, RbfWindModel):
        return eval_wind_dual(wind, phi * (180.0 / np.pi), lam * (180.0 / np.pi))
    return wind


def state_derivative(x: AircraftState, u: AircraftControl, wind: Wind, vE, R: float,
                     perf: AircraftPerformance, atmos: AtmosphereState,
                     earth_radius: float = EARTH_RADIUS_M) -> AircraftState:
    """Time derivative of (phi, lambda, chi, V, m).

    ``wind`` is either a fixed (V_WE, V_WN) pair or an RBF model evaluated
    at the current position.
    """
    cos_phi = dn.cos(x.phi)
    if np.any(np.abs(dn.value_of(cos_phi)) < _POLE_GUARD):
        raise DynamicsError('Latitude too close to a pole for the spherical kinematics')
    w_east, w_north = _wind_components(wind, x.phi, x.lam)
    radius = earth_radius + atmos.h
    rho = atmos.rho

    lift = performance.lift(perf, rho, x.V, u.CL)
    drag = performance.drag(perf, rho, x.V, u.CL)
    fuel_flow = u.T * performance.tsfc(perf, x.V)

    phi_dot = (x.V * dn.cos(x.chi) + w_north) / radius
    lam_dot = (x.V * dn.sin(x.chi) + w_east) / (cos_phi * radius)
    chi_dot = lift * dn.sin(u.mu) / (x.V * x.m)
    v_dot = (u.T - drag) / x.m
    m_dot = (1.0 - vE) * (-fuel_flow) + vE * (-(1.0 - R) * fuel_flow)
    return AircraftState(phi=phi_dot, lam=lam_dot, chi=chi_dot, V=v_dot, m=m_dot)


def state_derivative_jacobians(x: AircraftState, u: AircraftControl, wind: Wind, vE, R: float,
                               perf: AircraftPerformance, atmos: AtmosphereState,
                               earth_radius: float = EARTH_RADIUS_M) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact (df/dx, df/du, df/dvE) for scalar inputs: shapes (5, 5), (5, 3), (5,)"""
    seeds = dn.Dual.variables([*x.as_tuple(), *u.as_tuple(), vE])
    xs = AircraftState(*seeds[:5])
    us = AircraftControl(*seeds[5:8])
    f = state_derivative(xs, us, wind, seeds[8], R, perf, atmos, earth_radius)
    jac = np.vstack([dn.partials_of(row, 9) for row in f.as_tuple()])
    return jac[:, :5], jac[:, 5:8], jac[:, 8]


def lift_balance_residual(x: AircraftState, u: AircraftControl, perf: AircraftPerformance,
                          atmos: AtmosphereState):
    """L*cos(mu)/(m*g) - 1: zero in level flight"""
    lift = performance.lift(perf, atmos.rho, x.V, u.CL)
    return lift * dn.cos(u.mu) / (x.m * G0) - 1.0
