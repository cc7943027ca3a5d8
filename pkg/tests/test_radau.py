import numpy as np
import pytest
from numpy.polynomial import legendre

from src.exceptions import TranscriptionError
from src.helpers.collocation.radau import (
    differentiation_matrix,
    flipped_radau_points,
    radau_quadrature,
    time_map,
)


def radau_oracle(n: int):
    """Standard Radau abscissae as roots of P_{n-1} + P_n, weights from the closed form"""
    if n == 1:
        return np.array([-1.0]), np.array([2.0])
    coeffs = np.zeros(n + 1)
    coeffs[n - 1] = coeffs[n] = 1.0
    x = np.sort(np.real(legendre.legroots(coeffs)))
    derivative = legendre.legder(coeffs)
    for _ in range(3):
        x = x - legendre.legval(x, coeffs) / legendre.legval(x, derivative)
    x[0] = -1.0
    p = legendre.legval(x, np.eye(n)[n - 1])
    w = (1.0 - x) / (n * p) ** 2
    w[0] = 2.0 / n ** 2
    return x, w


def test_single_point():
    seg = flipped_radau_points(1)
    assert seg.tau.tolist() == [1.0]
    assert seg.weights.tolist() == [2.0]


def test_two_points():
    seg = flipped_radau_points(2)
    assert seg.tau == pytest.approx([-1.0 / 3.0, 1.0], abs=1e-14)
    assert seg.weights == pytest.approx([1.5, 0.5], abs=1e-14)


@pytest.mark.parametrize('n', range(1, 21))
def test_matches_root_finding(n):
    seg = flipped_radau_points(n)
    x, w = radau_oracle(n)
    assert np.max(np.abs(seg.tau - (-x[::-1]))) < 1e-12
    assert np.max(np.abs(seg.weights - w[::-1])) < 1e-12


@pytest.mark.parametrize('n', range(1, 21))
def test_segment_structure(n):
    seg = flipped_radau_points(n)
    assert seg.tau[-1] == 1.0
    assert np.all(np.diff(seg.tau) > 0.0)
    assert seg.tau[0] > -1.0
    assert np.all(seg.weights > 0.0)
    assert seg.weights.sum() == pytest.approx(2.0, abs=1e-12)
    assert seg.D.shape == (n, n + 1)
    assert np.max(np.abs(seg.D.sum(axis=1))) < 1e-12
    assert seg.nodes[0] == -1.0


@pytest.mark.parametrize('n', range(1, 11))
def test_quadrature_exactness(n):
    seg = flipped_radau_points(n)
    for k in range(2 * n - 1):
        exact = (1.0 - (-1.0) ** (k + 1)) / (k + 1)
        assert abs(np.dot(seg.weights, seg.tau ** k) - exact) < 1e-12


@pytest.mark.parametrize('n', [2, 5, 10, 15, 20])
def test_differentiation_of_polynomials(n):
    seg = flipped_radau_points(n)
    d = differentiation_matrix(seg)
    assert np.max(np.abs(d @ np.full(n + 1, 3.0))) < 1e-10
    assert np.max(np.abs(d @ seg.nodes - 1.0)) < 1e-10
    rng = np.random.default_rng(n)
    coeffs = rng.normal(size=n + 1)
    values = np.polynomial.polynomial.polyval(seg.nodes, coeffs)
    derivative = np.polynomial.polynomial.polyval(seg.tau, np.polynomial.polynomial.polyder(coeffs))
    assert np.max(np.abs(d @ values - derivative)) < 1e-9


def test_time_map():
    assert time_map(2.0, 8.0, -1.0) == 2.0
    assert time_map(2.0, 8.0, 1.0) == 8.0
    assert time_map(2.0, 8.0, 0.0) == 5.0
    assert time_map(0.0, 6.0, 1.0 / 3.0) == pytest.approx(4.0, abs=1e-14)


def test_quadrature_on_physical_interval():
    seg = flipped_radau_points(4)
    t = time_map(10.0, 30.0, seg.tau)
    assert radau_quadrature(seg, t ** 2, 10.0, 30.0) == pytest.approx((30.0 ** 3 - 10.0 ** 3) / 3.0, rel=1e-12)


@pytest.mark.parametrize('n', [0, 65])
def test_point_count_checked(n):
    with pytest.raises(TranscriptionError):
        flipped_radau_points(n)


def test_segments_are_cached_and_read_only():
    seg = flipped_radau_points(6)
    assert flipped_radau_points(6) is seg
    with pytest.raises(ValueError):
        seg.tau[0] = 0.0
