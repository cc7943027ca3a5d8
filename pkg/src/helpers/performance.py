"""Cruise performance laws: ISA atmosphere, drag polar, TSFC, thrust and envelope.

The laws accept floats, arrays or dual numbers for their continuous
arguments so the transcription can differentiate through them.
"""

import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np
from pydantic import ValidationError

from src.constants import (
    FT_TO_M,
    G0,
    GAMMA_AIR,
    ISA_LAPSE_RATE,
    ISA_MAX_ALTITUDE_M,
    ISA_P0,
    ISA_RHO0,
    ISA_T0,
    ISA_T_TROPOPAUSE,
    ISA_TROPOPAUSE_M,
    R_AIR,
)
from src.exceptions import EnvelopeError, InputError
from src.models.aircraft import AircraftPerformance, AtmosphereState
from src.utils import dual as dn

logger = logging.getLogger(__name__)

_P_TROPOPAUSE = ISA_P0 * (ISA_T_TROPOPAUSE / ISA_T0) ** (-G0 / (ISA_LAPSE_RATE * R_AIR))


def isa_at_altitude(h: float) -> AtmosphereState:
    if not 0.0 <= h <= ISA_MAX_ALTITUDE_M:
        raise EnvelopeError(f'Altitude {h} m outside the ISA model range [0, {ISA_MAX_ALTITUDE_M}]')
    if h <= ISA_TROPOPAUSE_M:
        T = ISA_T0 + ISA_LAPSE_RATE * h
        p = ISA_P0 * (T / ISA_T0) ** (-G0 / (ISA_LAPSE_RATE * R_AIR))
    else:
        T = ISA_T_TROPOPAUSE
        p = _P_TROPOPAUSE * np.exp(-G0 * (h - ISA_TROPOPAUSE_M) / (R_AIR * T))
    rho = p / (R_AIR * T)
    return AtmosphereState(h=float(h), T=float(T), p=float(p), rho=float(rho),
                           a=float(np.sqrt(GAMMA_AIR * R_AIR * T)))


def altitude_for_pressure(p_hpa: float) -> float:
    """Geopotential altitude of an ISA pressure level given in hPa"""
    p = p_hpa * 100.0
    if not p > 0.0:
        raise EnvelopeError(f'Pressure level must be positive, got {p_hpa} hPa')
    if p >= _P_TROPOPAUSE:
        h = ISA_T0 / ISA_LAPSE_RATE * ((p / ISA_P0) ** (-ISA_LAPSE_RATE * R_AIR / G0) - 1.0)
    else:
        h = ISA_TROPOPAUSE_M - R_AIR * ISA_T_TROPOPAUSE / G0 * np.log(p / _P_TROPOPAUSE)
    if not 0.0 <= h <= ISA_MAX_ALTITUDE_M:
        raise EnvelopeError(f'Pressure level {p_hpa} hPa lies outside the ISA model range')
    return float(h)


def tsfc(perf: AircraftPerformance, V):
    """Thrust specific fuel consumption in kg/(s*N) at true airspeed V (m/s)"""
    return perf.cf1_si * (1.0 + V / perf.cf2_si)


def max_thrust(perf: AircraftPerformance, Hp: float) -> float:
    """Maximum cruise thrust in N at pressure altitude Hp (ft)"""
    if Hp < 0.0:
        raise EnvelopeError(f'Pressure altitude must be non-negative, got {Hp} ft')
    thrust = perf.CTcr * perf.CTC1 * (1.0 - Hp / perf.CTC2 + perf.CTC3 * Hp * Hp)
    if not thrust > 0.0:
        raise EnvelopeError(f'{perf.name}: maximum thrust is not positive at {Hp} ft')
    return float(thrust)


def drag(perf: AircraftPerformance, rho, V, CL):
    return 0.5 * rho * V * V * perf.S * (perf.CD0 + perf.K * CL * CL)


def lift(perf: AircraftPerformance, rho, V, CL):
    return 0.5 * rho * V * V * perf.S * CL


def stall_speed(perf: AircraftPerformance, m, rho):
    return dn.sqrt(2.0 * m * G0 / (rho * perf.S * perf.CL_max))


def _impact_pressure_ratio(V, T, p):
    """Compressible impact pressure over static pressure for true airspeed V"""
    mu = (GAMMA_AIR - 1.0) / GAMMA_AIR
    rho = p / (R_AIR * T)
    return (1.0 + mu / 2.0 * rho / p * V * V) ** (1.0 / mu) - 1.0


def cas_from_tas(V_tas: float, atmos: AtmosphereState) -> float:
    if not 0.0 < V_tas < 0.95 * atmos.a:
        raise EnvelopeError(f'TAS {V_tas} m/s outside the subsonic conversion range at h = {atmos.h} m')
    mu = (GAMMA_AIR - 1.0) / GAMMA_AIR
    ratio = _impact_pressure_ratio(V_tas, atmos.T, atmos.p)
    inner = (1.0 + atmos.p / ISA_P0 * ratio) ** mu - 1.0
    return float(np.sqrt(2.0 / mu * ISA_P0 / ISA_RHO0 * inner))


def tas_from_cas(V_cas: float, atmos: AtmosphereState) -> float:
    if not V_cas > 0.0:
        raise EnvelopeError(f'CAS must be positive, got {V_cas}')
    mu = (GAMMA_AIR - 1.0) / GAMMA_AIR
    qc_over_p0 = (1.0 + mu / 2.0 * ISA_RHO0 / ISA_P0 * V_cas * V_cas) ** (1.0 / mu) - 1.0
    inner = (1.0 + ISA_P0 / atmos.p * qc_over_p0) ** mu - 1.0
    return float(np.sqrt(2.0 / mu * atmos.p / atmos.rho * inner))


def envelope_bounds(perf: AircraftPerformance, atmos: AtmosphereState) -> Dict[str, tuple]:
    """Box bounds on (V, m, T, CL, mu) at a fixed cruise atmosphere.

    The V lower bound is the minimum speed at the lightest admissible mass;
    the mass-dependent minimum speed is a path constraint of the transcription.
    """
    v_min = perf.CVmin * float(stall_speed(perf, perf.m_min, atmos.rho))
    v_vmo = tas_from_cas(perf.vmo_si, atmos)
    v_mmo = perf.MMO * atmos.a
    v_max = min(v_vmo, v_mmo)
    if not v_min < v_max:
        raise EnvelopeError(
            f'{perf.name}: empty speed envelope at h = {atmos.h:.0f} m '
            f'(V_min {v_min:.1f} m/s, V_max {v_max:.1f} m/s)')
    t_max = max_thrust(perf, atmos.h / FT_TO_M)
    mu_max = perf.mu_max_rad
    bounds = {
        'V': (v_min, v_max),
        'm': (perf.m_min, perf.m_max),
        'T': (0.0, t_max),
        'CL': (perf.CL_min, perf.CL_max),
        'mu': (-mu_max, mu_max),
        'mach_cap': v_mmo,
    }
    logger.debug('Envelope bounds', extra={'aircraft': perf.name, 'altitude_m': atmos.h,
                                           'V_min': v_min, 'V_max': v_max, 'T_max': t_max})
    return bounds


def load_performance_file(path: Union[str, Path]) -> AircraftPerformance:
    """Parse a ``key = value  # comment`` coefficient file"""
    path = Path(path)
    if not path.is_file():
        raise InputError(f'Coefficient file not found: {path}')
    allowed = set(AircraftPerformance.model_fields)
    values = {}
    for lineno, raw in enumerate(path.read_text(encoding='utf-8').splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise InputError(f'{path}:{lineno}: expected "key = value", got {raw!r}')
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in allowed:
            raise InputError(f'{path}:{lineno}: unknown coefficient {key!r}')
        if key in values:
            raise InputError(f'{path}:{lineno}: duplicate coefficient {key!r}')
        if key == 'name':
            values[key] = value
            continue
        try:
            values[key] = float(value)
        except ValueError:
            raise InputError(f'{path}:{lineno}: {key} is not a number: {value!r}')
    missing = sorted(allowed - set(values))
    if missing:
        raise InputError(f'{path}: missing coefficients {missing}')
    try:
        perf = AircraftPerformance(**values)
    except ValidationError as e:
        raise InputError(f'{path}: invalid coefficients. Details - {str(e)}')
    logger.info('Loaded performance coefficients', extra={'file': str(path), 'aircraft': perf.name})
    return perf
