import numpy as np
import scipy.sparse.linalg as spla

from src.helpers.nlp.problem import NlpProblem
from src.models.solver import KktReport, NlpMultipliers

_SCALE_MAX = 100.0
_SIGN_TOL = 1e-10


def lagrangian_gradient(problem: NlpProblem, z: np.ndarray, multipliers: NlpMultipliers) -> np.ndarray:
    ev = problem.evaluate(z)
    grad = ev.gradient.copy()
    if problem.m_eq:
        grad += ev.eq_jacobian.T @ multipliers.y_eq
    if problem.m_ineq:
        grad += ev.ineq_jacobian.T @ multipliers.y_ineq
    return grad - multipliers.z_lower + multipliers.z_upper


def check_kkt(problem: NlpProblem, z: np.ndarray, multipliers: NlpMultipliers) -> KktReport:
    """Infinity norms of the first-order optimality conditions.

    Stationarity is divided by max(1, mean |multiplier| / 100) so large but
    consistent multipliers do not mask convergence.
    """
    z = np.asarray(z, dtype=float)
    ev = problem.evaluate(z)
    count = problem.m_eq + problem.m_ineq + 2 * problem.n
    total = (np.abs(multipliers.y_eq).sum() + np.abs(multipliers.y_ineq).sum()
             + np.abs(multipliers.z_lower).sum() + np.abs(multipliers.z_upper).sum())
    s_d = max(_SCALE_MAX, total / max(count, 1)) / _SCALE_MAX
    stationarity = float(np.max(np.abs(lagrangian_gradient(problem, z, multipliers)), initial=0.0)) / s_d

    eq_inf = float(np.max(np.abs(ev.eq), initial=0.0))
    ineq_inf = max(float(np.max(np.maximum(ev.ineq, 0.0), initial=0.0)), problem.bound_violation(z))

    has_l = np.isfinite(problem.lower)
    has_u = np.isfinite(problem.upper)
    gaps = [np.abs(multipliers.y_ineq * ev.ineq),
            np.abs(multipliers.z_lower[has_l] * (z[has_l] - problem.lower[has_l])),
            np.abs(multipliers.z_upper[has_u] * (problem.upper[has_u] - z[has_u]))]
    complementarity = max(float(np.max(g, initial=0.0)) for g in gaps)

    wrong = []
    for name, values in (('y_ineq', multipliers.y_ineq), ('z_lower', multipliers.z_lower),
                         ('z_upper', multipliers.z_upper)):
        wrong.extend(f'{name}[{i}]' for i in np.flatnonzero(values < -_SIGN_TOL))
    return KktReport(stationarity, eq_inf, ineq_inf, complementarity, wrong)


def estimate_multipliers(problem: NlpProblem, z: np.ndarray, active_tol: float = 1e-6) -> NlpMultipliers:
    """Least-squares multipliers for a primal point, for backends that return none.

    Inequalities and bounds count as active within ``active_tol``; negative
    estimates are clipped to zero.
    """
    z = np.asarray(z, dtype=float)
    ev = problem.evaluate(z)
    n = problem.n
    active_in = np.flatnonzero(ev.ineq >= -active_tol)
    active_l = np.flatnonzero(np.isfinite(problem.lower) & (z - problem.lower <= active_tol))
    active_u = np.flatnonzero(np.isfinite(problem.upper) & (problem.upper - z <= active_tol))
    columns = []
    if problem.m_eq:
        columns.append(ev.eq_jacobian.T.toarray())
    if active_in.size:
        columns.append(ev.ineq_jacobian[active_in].T.toarray())
    if active_l.size:
        columns.append(-np.eye(n)[:, active_l])
    if active_u.size:
        columns.append(np.eye(n)[:, active_u])
    result = NlpMultipliers.zeros(n, problem.m_eq, problem.m_ineq)
    if not columns:
        return result
    a = np.hstack(columns)
    sol = spla.lsqr(a, -ev.gradient, atol=1e-12, btol=1e-12)[0]
    k = problem.m_eq
    result.y_eq = sol[:k]
    result.y_ineq[active_in] = np.maximum(sol[k:k + active_in.size], 0.0)
    k += active_in.size
    result.z_lower[active_l] = np.maximum(sol[k:k + active_l.size], 0.0)
    k += active_l.size
    result.z_upper[active_u] = np.maximum(sol[k:k + active_u.size], 0.0)
    return result
