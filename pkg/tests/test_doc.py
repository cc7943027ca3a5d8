import pytest

from src.constants import G0
from src.helpers import performance
from src.helpers.geodesy import haversine_distance
from src.helpers.mission.doc import compute_doc, cruise_atmosphere, nominal_flight_estimate


@pytest.mark.parametrize('hours, fuel, expected', [
    (7.68, 46543.93, 40875.15),
    (7.47, 48596.82, 42085.37),
    (6.19, 40130.77, 34776.74),
    (6.18, 39683.14, 34452.60),
])
def test_published_cost_rows(hours, fuel, expected):
    assert compute_doc(hours * 3600.0, fuel, 0.3, 0.7) == pytest.approx(expected, abs=0.5)


def test_cost_is_linear_in_its_weights():
    assert compute_doc(100.0, 50.0, 1.0, 0.0) == 100.0
    assert compute_doc(100.0, 50.0, 0.0, 1.0) == 50.0
    assert compute_doc(0.0, 0.0, 0.3, 0.7) == 0.0


def test_cruise_atmosphere(scenario):
    atmos = cruise_atmosphere(scenario)
    assert atmos.p == pytest.approx(20000.0, rel=1e-9)


def test_nominal_estimate(scenario):
    atmos = cruise_atmosphere(scenario)
    for fid in scenario.flight_ids:
        flight = scenario.flight(fid)
        perf = scenario.performance(fid)
        est = nominal_flight_estimate(scenario, fid)
        assert est.speed_ms == pytest.approx(0.5 * (flight.V_I + flight.V_F))
        assert est.distance_m == pytest.approx(haversine_distance(flight.origin, flight.destination))
        assert est.time_s == pytest.approx(est.distance_m / est.speed_ms)
        trimmed_cl = flight.m_I * G0 / (0.5 * atmos.rho * est.speed_ms ** 2 * perf.S)
        assert est.lift_coefficient == pytest.approx(trimmed_cl)
        assert est.thrust_n == pytest.approx(performance.drag(perf, atmos.rho, est.speed_ms, trimmed_cl))
        assert est.fuel_kg == pytest.approx(est.fuel_flow_kgs * est.time_s)
        assert 0.0 < est.fuel_kg < flight.m_I - perf.m_min
        assert est.doc(0.3, 0.7) == pytest.approx(0.3 * est.time_s + 0.7 * est.fuel_kg)
