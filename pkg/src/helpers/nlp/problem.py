"""Sparse NLP representation.

    minimize f(z)  subject to  c_eq(z) == 0,  c_ineq(z) <= 0,  lower <= z <= upper

Evaluation of every quantity goes through one callback returning an
``NlpEvaluation``; results are cached for the last point. A problem may also
supply the Hessian of its Lagrangian

    obj_factor * f(z) + y_eq . c_eq(z) + y_ineq . c_ineq(z)

for Newton steps; solvers fall back to quasi-Newton updates without it.
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from src.exceptions import TranscriptionError
from src.utils import dual as dn

HESSIAN_STEP = 6e-6

HessianCallback = Callable[[np.ndarray, float, np.ndarray, np.ndarray], sp.csr_matrix]


@dataclass
class NlpEvaluation:
    objective: float
    gradient: np.ndarray
    eq: np.ndarray
    eq_jacobian: sp.csr_matrix
    ineq: np.ndarray
    ineq_jacobian: sp.csr_matrix


class NlpProblem:
    def __init__(self, lower: np.ndarray, upper: np.ndarray, m_eq: int, m_ineq: int,
                 evaluate: Callable[[np.ndarray], NlpEvaluation],
                 eq_pattern: Tuple[np.ndarray, np.ndarray],
                 ineq_pattern: Tuple[np.ndarray, np.ndarray],
                 eq_labels: Optional[Sequence[str]] = None,
                 ineq_labels: Optional[Sequence[str]] = None,
                 variable_labels: Optional[Sequence[str]] = None,
                 hessian: Optional[HessianCallback] = None):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise TranscriptionError('Variable bounds must be 1-d arrays of equal length')
        if np.any(self.lower > self.upper):
            bad = int(np.argmax(self.lower > self.upper))
            raise TranscriptionError(f'Variable {bad} has lower bound above upper bound')
        self.n = self.lower.size
        self.m_eq = m_eq
        self.m_ineq = m_ineq
        self._evaluate = evaluate
        self.eq_pattern = eq_pattern
        self.ineq_pattern = ineq_pattern
        self.eq_labels = list(eq_labels) if eq_labels is not None else [f'eq[{i}]' for i in range(m_eq)]
        self.ineq_labels = list(ineq_labels) if ineq_labels is not None else [f'ineq[{i}]' for i in range(m_ineq)]
        self.variable_labels = (list(variable_labels) if variable_labels is not None
                                else [f'z[{i}]' for i in range(self.n)])
        self._hessian = hessian
        self._cache_z: Optional[np.ndarray] = None
        self._cache: Optional[NlpEvaluation] = None

    def evaluate(self, z: np.ndarray) -> NlpEvaluation:
        z = np.asarray(z, dtype=float)
        if self._cache_z is None or not np.array_equal(z, self._cache_z):
            self._cache = self._evaluate(z)
            self._cache_z = z.copy()
        return self._cache

    def objective(self, z) -> float:
        return self.evaluate(z).objective

    def gradient(self, z) -> np.ndarray:
        return self.evaluate(z).gradient

    def eq_residuals(self, z) -> np.ndarray:
        return self.evaluate(z).eq

    def eq_jacobian(self, z) -> sp.csr_matrix:
        return self.evaluate(z).eq_jacobian

    def ineq_residuals(self, z) -> np.ndarray:
        return self.evaluate(z).ineq

    def ineq_jacobian(self, z) -> sp.csr_matrix:
        return self.evaluate(z).ineq_jacobian

    @property
    def has_hessian(self) -> bool:
        return self._hessian is not None

    def lagrangian_hessian(self, z, obj_factor: float, y_eq, y_ineq) -> Optional[sp.csr_matrix]:
        """Symmetric (n, n) Hessian of the Lagrangian, or None when the problem supplies none"""
        if self._hessian is None:
            return None
        return self._hessian(np.asarray(z, dtype=float), float(obj_factor),
                             np.asarray(y_eq, dtype=float), np.asarray(y_ineq, dtype=float))

    def clip(self, z) -> np.ndarray:
        return np.clip(np.asarray(z, dtype=float), self.lower, self.upper)

    def bound_violation(self, z) -> float:
        z = np.asarray(z, dtype=float)
        below = np.maximum(self.lower - z, 0.0)
        above = np.maximum(z - self.upper, 0.0)
        return float(max(below.max(initial=0.0), above.max(initial=0.0)))

    @classmethod
    def from_functions(cls, lower, upper, objective: Callable,
                       eq: Optional[Callable] = None, ineq: Optional[Callable] = None,
                       m_eq: int = 0, m_ineq: int = 0) -> 'NlpProblem':
        """Dense problem from functions written against ``src.utils.dual``.

        Each function takes the variable vector (possibly a ``Dual``) and
        returns a scalar (objective) or a 1-d vector built with ``dual.stack``
        or matrix products.
        """
        lower = np.asarray(lower, dtype=float)
        n = lower.size

        def dense(fn, m, z):
            if fn is None or m == 0:
                return np.zeros(0), sp.csr_matrix((0, n))
            value, jac = dn.jacobian(fn, z)
            if value.size != m:
                raise TranscriptionError(f'Constraint function returned {value.size} rows, expected {m}')
            return value, sp.csr_matrix(jac)

        def evaluate(z):
            f, g = dn.jacobian(objective, z)
            c_eq, j_eq = dense(eq, m_eq, z)
            c_in, j_in = dense(ineq, m_ineq, z)
            return NlpEvaluation(float(f[0]), g[0].copy(), c_eq, j_eq, c_in, j_in)

        def full_pattern(m):
            rows, cols = np.meshgrid(np.arange(m), np.arange(n), indexing='ij')
            return rows.ravel(), cols.ravel()

        def hessian(z, obj_factor, y_eq, y_in):
            def lagrangian_gradient(x):
                ev = evaluate(x)
                return obj_factor * ev.gradient + ev.eq_jacobian.T @ y_eq + ev.ineq_jacobian.T @ y_in

            return difference_hessian(lagrangian_gradient, z)

        return cls(lower, upper, m_eq, m_ineq, evaluate, full_pattern(m_eq), full_pattern(m_ineq),
                   hessian=hessian)


@dataclass
class NlpLayout:
    """Named slices of the variable vector produced by a transcription"""
    index: dict

    def unpack(self, z: np.ndarray) -> dict:
        return {name: np.asarray(z)[idx] for name, idx in self.index.items()}

    def pack(self, values: dict, base: np.ndarray) -> np.ndarray:
        z = np.array(base, dtype=float)
        for name, value in values.items():
            if name in self.index:
                idx = self.index[name]
                z[idx] = np.broadcast_to(value, idx.shape)
        return z

    def names(self) -> List[str]:
        return list(self.index)


def difference_hessian(gradient: Callable[[np.ndarray], np.ndarray], z: np.ndarray) -> sp.csr_matrix:
    """Central differences of an exact gradient, one column per variable, symmetrised"""
    z = np.asarray(z, dtype=float)
    columns = []
    for j in range(z.size):
        h = HESSIAN_STEP * (1.0 + abs(z[j]))
        plus, minus = z.copy(), z.copy()
        plus[j] += h
        minus[j] -= h
        columns.append((np.asarray(gradient(plus)) - np.asarray(gradient(minus))) / (2.0 * h))
    hess = np.column_stack(columns) if columns else np.zeros((0, 0))
    return sp.csr_matrix(0.5 * (hess + hess.T))
