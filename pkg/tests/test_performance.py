import numpy as np
import pytest

from src.constants import FT_TO_M, G0, GAMMA_AIR, ISA_P0, ISA_RHO0, KT_TO_MS, R_AIR
from src.exceptions import EnvelopeError, InputError
from src.helpers.performance import (
    altitude_for_pressure,
    cas_from_tas,
    drag,
    envelope_bounds,
    isa_at_altitude,
    lift,
    load_performance_file,
    max_thrust,
    tas_from_cas,
    tsfc,
)
from src.utils import dual as dn


@pytest.fixture(scope='module')
def cruise():
    return isa_at_altitude(altitude_for_pressure(200.0))


def test_isa_reference_points():
    sea = isa_at_altitude(0.0)
    assert sea.T == pytest.approx(288.15)
    assert sea.rho == pytest.approx(1.225, rel=1e-4)
    assert ISA_RHO0 == pytest.approx(sea.rho, rel=1e-12)
    assert isa_at_altitude(11000.0).T == pytest.approx(216.65)
    for h in (0.0, 5000.0, 11000.0, 15000.0):
        atmos = isa_at_altitude(h)
        assert atmos.rho == pytest.approx(atmos.p / (R_AIR * atmos.T), rel=1e-9)


def test_isa_range_checked():
    with pytest.raises(EnvelopeError):
        isa_at_altitude(-1.0)
    with pytest.raises(EnvelopeError):
        isa_at_altitude(25000.0)


def test_200_hpa_level():
    h = altitude_for_pressure(200.0)
    assert h == pytest.approx(11784.0, abs=5.0)
    assert isa_at_altitude(h).p == pytest.approx(20000.0, rel=1e-9)


def test_tsfc_is_affine(a330):
    assert tsfc(a330, 0.0) == pytest.approx(a330.Cf1 / 60000.0, rel=1e-12)
    v = 200.0
    assert tsfc(a330, 2 * v) - tsfc(a330, v) == pytest.approx(tsfc(a330, 3 * v) - tsfc(a330, 2 * v), rel=1e-12)


def test_tsfc_unit_conversion(a330):
    perf = a330.model_copy(update={'Cf1': 0.6, 'Cf2': 1000.0})
    expected = 0.6 / 60.0 / 1000.0 * (1.0 + 250.0 / (1000.0 * 1852.0 / 3600.0))
    assert tsfc(perf, 250.0) == pytest.approx(expected, rel=1e-12)


def test_max_thrust(a330):
    assert max_thrust(a330, 0.0) == pytest.approx(a330.CTcr * a330.CTC1, rel=1e-12)
    hp = 36000.0
    expected = a330.CTcr * a330.CTC1 * (1.0 - hp / a330.CTC2 + a330.CTC3 * hp * hp)
    assert max_thrust(a330, hp) == pytest.approx(expected, rel=1e-12)
    samples = [max_thrust(a330, h) for h in (0.0, 10000.0, 20000.0)]
    coeffs = np.polyfit([0.0, 10000.0, 20000.0], samples, 2)
    assert np.polyval(coeffs, 30000.0) == pytest.approx(max_thrust(a330, 30000.0), rel=1e-9)


def test_max_thrust_domain(a330):
    with pytest.raises(EnvelopeError):
        max_thrust(a330, -100.0)
    with pytest.raises(EnvelopeError):
        max_thrust(a330.model_copy(update={'CTC3': 0.0}), 60000.0)


def test_drag_and_lift(a330):
    rho, v = 0.32, 230.0
    assert drag(a330, rho, v, 0.0) == pytest.approx(0.5 * rho * v * v * a330.S * a330.CD0, rel=1e-12)
    assert drag(a330, rho, 2 * v, 0.5) == pytest.approx(4 * drag(a330, rho, v, 0.5), rel=1e-12)
    rng = np.random.default_rng(5)
    for _ in range(20):
        r, s, cl = rng.uniform(0.2, 1.2), rng.uniform(100, 260), rng.uniform(0.1, 1.4)
        q = 0.5 * r * s * s * a330.S
        assert drag(a330, r, s, cl) == pytest.approx(q * (a330.CD0 + a330.K * cl * cl), rel=1e-12)
        assert lift(a330, r, s, cl) == pytest.approx(q * cl, rel=1e-12)


def test_cas_equals_tas_at_sea_level():
    sea = isa_at_altitude(0.0)
    assert cas_from_tas(150.0, sea) == pytest.approx(150.0, rel=1e-9)


def test_cas_conversion_at_cruise(cruise):
    # independent form: impact pressure from the isentropic relation, then back at sea level
    v = 240.0
    mach = v / cruise.a
    qc = cruise.p * ((1.0 + 0.2 * mach * mach) ** 3.5 - 1.0)
    expected = np.sqrt(2.0 * GAMMA_AIR / (GAMMA_AIR - 1.0) * ISA_P0 / ISA_RHO0
                       * ((qc / ISA_P0 + 1.0) ** ((GAMMA_AIR - 1.0) / GAMMA_AIR) - 1.0))
    assert cas_from_tas(v, cruise) == pytest.approx(expected, rel=1e-9)
    assert tas_from_cas(cas_from_tas(v, cruise), cruise) == pytest.approx(v, rel=1e-9)


def test_cas_monotone(cruise):
    speeds = np.linspace(60.0, 0.9 * cruise.a, 100)
    cas = [cas_from_tas(v, cruise) for v in speeds]
    assert np.all(np.diff(cas) > 0.0)
    with pytest.raises(EnvelopeError):
        cas_from_tas(cruise.a, cruise)


def test_envelope(a330, cruise):
    env = envelope_bounds(a330, cruise)
    assert env['mu'] == pytest.approx((-np.radians(a330.mu_max), np.radians(a330.mu_max)))
    assert env['m'] == (a330.m_min, a330.m_max)
    v_max = min(tas_from_cas(a330.VMO * KT_TO_MS, cruise), a330.MMO * cruise.a)
    assert env['V'][1] == pytest.approx(v_max, rel=1e-12)
    stall = np.sqrt(2.0 * a330.m_min * G0 / (cruise.rho * a330.S * a330.CL_max))
    assert env['V'][0] == pytest.approx(a330.CVmin * stall, rel=1e-12)
    assert env['T'][1] == pytest.approx(max_thrust(a330, cruise.h / FT_TO_M), rel=1e-12)
    for key in ('V', 'm', 'T', 'CL', 'mu'):
        lo, hi = env[key]
        assert np.isfinite(lo) and np.isfinite(hi) and lo < hi


def test_empty_envelope_rejected(a330, cruise):
    with pytest.raises(EnvelopeError):
        envelope_bounds(a330.model_copy(update={'CVmin': 3.0}), cruise)


def test_laws_differentiate_with_duals(a330):
    v, cl = dn.Dual.variables([230.0, 0.55])
    d = drag(a330, 0.32, v, cl)
    h = 1e-5
    fd_v = (drag(a330, 0.32, 230.0 + h, 0.55) - drag(a330, 0.32, 230.0 - h, 0.55)) / (2 * h)
    fd_cl = (drag(a330, 0.32, 230.0, 0.55 + h) - drag(a330, 0.32, 230.0, 0.55 - h)) / (2 * h)
    assert d.partials[0] == pytest.approx(fd_v, rel=1e-6)
    assert d.partials[1] == pytest.approx(fd_cl, rel=1e-6)
    eta = tsfc(a330, v)
    assert eta.partials[0] == pytest.approx(a330.cf1_si / a330.cf2_si, rel=1e-12)


def test_coefficient_file(tmp_path, a330):
    assert a330.b == pytest.approx(60.3)
    bad = tmp_path / 'bad.coeff'
    bad.write_text('name = x\nS = 10\nwingspan = 3\n', encoding='utf-8')
    with pytest.raises(InputError):
        load_performance_file(bad)
    with pytest.raises(InputError):
        load_performance_file(tmp_path / 'missing.coeff')
