"""Flipped Legendre-Gauss-Radau collocation on (-1, 1].

Each segment carries N collocation points ``tau`` (the last one is +1) and
the non-collocated initial point -1. State polynomials are interpolated on
the N + 1 nodes ``{-1} U tau``; the differentiation matrix maps those node
values to derivatives at the collocation points.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from src.exceptions import TranscriptionError

MAX_POINTS = 64


@dataclass(frozen=True)
class RadauSegment:
    N: int
    tau: np.ndarray
    weights: np.ndarray
    D: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return np.concatenate([[-1.0], self.tau])


def _standard_radau(n: int, tol: float = 1e-15):
    """Radau points on [-1, 1) with -1 included, by Newton iteration from Chebyshev-Radau guesses"""
    x = -np.cos(2.0 * np.pi * np.arange(n) / (2 * n - 1))
    previous = np.ones_like(x)
    free = np.arange(1, n)
    p = np.zeros((n, n + 1))
    for _ in range(100):
        if np.all(np.abs(x - previous) <= tol):
            break
        previous = x.copy()
        p[0, :] = (-1.0) ** np.arange(n + 1)
        p[free, 0] = 1.0
        p[free, 1] = x[free]
        for k in range(1, n):
            p[free, k + 1] = ((2 * k + 1) * x[free] * p[free, k] - k * p[free, k - 1]) / (k + 1)
        f = (1.0 - previous[free]) / n * (p[free, n - 1] + p[free, n])
        fprime = p[free, n - 1] - p[free, n]
        x[free] = previous[free] - f / fprime
    else:
        raise TranscriptionError(f'Radau points did not converge for N = {n}')
    # recompute P_{N-1} at the converged points for the weights
    p[free, 0] = 1.0
    p[free, 1] = x[free]
    for k in range(1, n):
        p[free, k + 1] = ((2 * k + 1) * x[free] * p[free, k] - k * p[free, k - 1]) / (k + 1)
    w = np.empty(n)
    w[0] = 2.0 / n ** 2
    w[free] = (1.0 - x[free]) / (n * p[free, n - 1]) ** 2
    return x, w


def _barycentric_derivative(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / np.prod(diff, axis=1)
    d = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


@lru_cache(maxsize=None)
def flipped_radau_points(N: int) -> RadauSegment:
    if not 1 <= N <= MAX_POINTS:
        raise TranscriptionError(f'Radau segments need 1 <= N <= {MAX_POINTS} points, got {N}')
    if N == 1:
        x, w = np.array([-1.0]), np.array([2.0])
    else:
        x, w = _standard_radau(N)
    tau = -x[::-1]
    weights = w[::-1].copy()
    tau[-1] = 1.0
    nodes = np.concatenate([[-1.0], tau])
    D = _barycentric_derivative(nodes)[1:, :]
    for array in (tau, weights, D):
        array.setflags(write=False)
    return RadauSegment(N=N, tau=tau, weights=weights, D=D)


def differentiation_matrix(segment: RadauSegment) -> np.ndarray:
    return segment.D


def time_map(t_start, t_end, tau):
    """Physical time of normalised time tau in [-1, 1]"""
    return 0.5 * (t_end - t_start) * tau + 0.5 * (t_end + t_start)


def radau_quadrature(segment: RadauSegment, values, t_start, t_end):
    """Integral over [t_start, t_end] of a function sampled at the collocation points"""
    return 0.5 * (t_end - t_start) * np.dot(segment.weights, values)
