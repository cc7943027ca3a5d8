import numpy as np
import pytest

from src.constants import G0
from src.exceptions import DynamicsError
from src.helpers.dynamics import lift_balance_residual, state_derivative, state_derivative_jacobians
from src.helpers.performance import altitude_for_pressure, isa_at_altitude, lift, tsfc
from src.helpers.windfield import fit_rbf
from src.models.aircraft import AircraftControl, AircraftState
from src.models.geo import GeoPoint
from src.models.wind import WindGrid, WindSample

R_E = 6371.0e3


@pytest.fixture(scope='module')
def atmos():
    return isa_at_altitude(altitude_for_pressure(200.0))


@pytest.fixture(scope='module')
def jet():
    samples = [WindSample(point=GeoPoint(lat=lat, lon=lon), u=40.0 * np.exp(-((lat - 47.0) / 6.0) ** 2),
                          v=0.1 * (lon + 40.0))
               for lat in np.arange(30.0, 66.0, 5.0) for lon in np.arange(-80.0, 11.0, 10.0)]
    return fit_rbf(WindGrid(points=samples))


def random_point(rng):
    x = AircraftState(np.radians(rng.uniform(35, 55)), np.radians(rng.uniform(-70, -10)),
                      np.radians(rng.uniform(20, 110)), rng.uniform(200, 250), rng.uniform(150e3, 220e3))
    u = AircraftControl(rng.uniform(8e4, 1.5e5), rng.uniform(0.3, 0.9), np.radians(rng.uniform(-20, 20)))
    return x, u, rng.uniform(0.0, 1.0)


def finite_difference(x, u, vE, wind, R, perf, atmos, steps):
    point = np.array([*x.as_tuple(), *u.as_tuple(), vE], dtype=float)

    def f(p):
        out = state_derivative(AircraftState(*p[:5]), AircraftControl(*p[5:8]), wind, p[8], R, perf, atmos, R_E)
        return np.array(out.as_tuple(), dtype=float)

    jac = np.zeros((5, 9))
    for k in range(9):
        e = np.zeros(9)
        e[k] = steps[k]
        jac[:, k] = (f(point + e) - f(point - e)) / (2 * steps[k])
    return jac


@pytest.mark.parametrize('use_jet', [False, True])
def test_jacobians_match_finite_differences(a330, atmos, jet, use_jet):
    rng = np.random.default_rng(17)
    wind = jet if use_jet else (12.0, -4.0)
    steps = [1e-7, 1e-7, 1e-7, 1e-4, 1e-1, 1e-1, 1e-7, 1e-7, 1e-7]
    for _ in range(20):
        x, u, vE = random_point(rng)
        jx, ju, jv = state_derivative_jacobians(x, u, wind, vE, 0.1, a330, atmos, R_E)
        exact = np.hstack([jx, ju, jv[:, None]])
        fd = finite_difference(x, u, vE, wind, 0.1, a330, atmos, steps)
        row_max = np.abs(exact).max(axis=1, keepdims=True)
        assert np.all(np.abs(exact - fd) <= 1e-5 * np.abs(exact) + 1e-6 * row_max)


def test_formation_fuel_flow(a330, atmos):
    x = AircraftState(np.radians(45.0), np.radians(-40.0), np.radians(70.0), 230.0, 200e3)
    u = AircraftControl(1.2e5, 0.6, 0.0)
    solo = state_derivative(x, u, (0.0, 0.0), 0.0, 0.1, a330, atmos, R_E)
    formation = state_derivative(x, u, (0.0, 0.0), 1.0, 0.1, a330, atmos, R_E)
    assert solo.m == pytest.approx(-u.T * tsfc(a330, x.V), rel=1e-12)
    assert formation.m == pytest.approx(-(1.0 - 0.1) * u.T * tsfc(a330, x.V), rel=1e-8)


def test_due_north_kinematics(a330, atmos):
    x = AircraftState(np.radians(10.0), 0.0, 0.0, 240.0, 200e3)
    u = AircraftControl(1e5, 0.5, 0.0)
    f = state_derivative(x, u, (0.0, 0.0), 0.0, 0.0, a330, atmos, R_E)
    assert f.phi == pytest.approx(240.0 / (R_E + atmos.h), rel=1e-12)
    assert f.lam == pytest.approx(0.0, abs=1e-15)
    assert f.chi == pytest.approx(0.0, abs=1e-15)


def test_bank_turns_towards_its_sign(a330, atmos):
    x = AircraftState(np.radians(45.0), 0.0, 1.0, 230.0, 200e3)
    f = state_derivative(x, AircraftControl(1e5, 0.6, np.radians(10.0)), (0.0, 0.0), 0.0, 0.0, a330, atmos, R_E)
    assert f.chi > 0.0


def test_pole_rejected(a330, atmos):
    x = AircraftState(np.pi / 2, 0.0, 0.0, 230.0, 200e3)
    with pytest.raises(DynamicsError):
        state_derivative(x, AircraftControl(1e5, 0.6, 0.0), (0.0, 0.0), 0.0, 0.0, a330, atmos, R_E)


def test_lift_balance_zero_in_trim(a330, atmos):
    m, v = 200e3, 230.0
    cl = m * G0 / (0.5 * atmos.rho * v * v * a330.S)
    x = AircraftState(0.0, 0.0, 0.0, v, m)
    assert lift_balance_residual(x, AircraftControl(0.0, cl, 0.0), a330, atmos) == pytest.approx(0.0, abs=1e-12)
    banked = lift_balance_residual(x, AircraftControl(0.0, cl, np.radians(20.0)), a330, atmos)
    assert banked == pytest.approx(np.cos(np.radians(20.0)) - 1.0, rel=1e-12)
    assert lift(a330, atmos.rho, v, cl) == pytest.approx(m * G0, rel=1e-12)


def test_tailwind_adds_to_ground_speed(a330, atmos):
    phi = np.radians(45.0)
    x = AircraftState(phi, 0.0, np.pi / 2, 230.0, 200e3)
    u = AircraftControl(1e5, 0.6, 0.0)
    calm = state_derivative(x, u, (0.0, 0.0), 0.0, 0.0, a330, atmos, R_E)
    tail = state_derivative(x, u, (30.0, 0.0), 0.0, 0.0, a330, atmos, R_E)
    radius = R_E + atmos.h
    assert calm.lam == pytest.approx(230.0 / (np.cos(phi) * radius), rel=1e-12)
    assert tail.lam == pytest.approx(260.0 / (np.cos(phi) * radius), rel=1e-12)
    assert tail.V == calm.V
    assert tail.m == calm.m
