"""Reference primal-dual interior-point solver.

Inequalities get slacks (c_ineq + s == 0, s >= 0) and every finite bound a
log-barrier term. Each iteration solves the condensed primal-dual system

    [[B + Sx, 0,  Je^T, Ji^T],
     [0,      Ss, 0,    I   ],
     [Je,     0,  -dI,  0   ],
     [Ji,     I,  0,    -dI ]]

with B the Hessian of the Lagrangian when the problem supplies one, else a
Powell-damped BFGS approximation. An indefinite B is shifted by delta * I
until the matrix has n + m_ineq positive and m_eq + m_ineq negative
eigenvalues (read off an LDL^T factorisation; the sparse path tests the
curvature of the step instead). The step then backtracks on an l1
exact-penalty barrier merit (one second-order correction per iteration).
The barrier parameter follows a monotone schedule. Objective and constraint
rows are scaled so no gradient exceeds ``scaling_max_gradient``; termination
is decided on the unscaled problem.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from src.helpers.nlp.kkt import check_kkt
from src.helpers.nlp.problem import NlpProblem
from src.models.solver import NlpMultipliers, NlpSolution, NlpStatus, SolverConfig

logger = logging.getLogger(__name__)

_TAU_MIN = 0.99
_KAPPA_EPS = 10.0
_KAPPA_MU = 0.2
_THETA_MU = 1.5
_ARMIJO = 1e-4
_PENALTY_RHO = 0.1
_MAX_BACKTRACKS = 30
_CONSTRAINT_REG = 1e-9
_BOUND_RELAX = 1e-8
_KAPPA_SIGMA = 1e10
_MAX_PENALTY = 1e12
_MAX_FAILURES = 3
# Hessian shifts: first trial, growth without and with history, decay, range
_DELTA_FIRST = 1e-4
_DELTA_GROW_FIRST = 100.0
_DELTA_GROW = 8.0
_DELTA_DECAY = 1.0 / 3.0
_DELTA_MIN = 1e-20
_DELTA_MAX = 1e20
_CURVATURE_TOL = 1e-12


@dataclass
class _Iterate:
    x: np.ndarray
    s: np.ndarray
    y_eq: np.ndarray
    y_in: np.ndarray
    zl: np.ndarray
    zu: np.ndarray
    zs: np.ndarray


@dataclass
class _Point:
    f: float
    g: np.ndarray
    c_eq: np.ndarray
    j_eq: sp.csr_matrix
    c_in: np.ndarray
    j_in: sp.csr_matrix


def _fraction_to_boundary(values: np.ndarray, steps: np.ndarray, tau: float) -> float:
    neg = steps < 0.0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-tau * values[neg] / steps[neg])))


def inertia(K: np.ndarray) -> Tuple[int, int]:
    """(positive, negative) eigenvalue counts of a symmetric matrix, from its LDL^T factors"""
    _, d, _ = scipy.linalg.ldl(K, lower=True, hermitian=True, check_finite=False)
    diag, sub = np.diag(d), np.diag(d, -1)
    positive = negative = 0
    i = 0
    while i < diag.size:
        if i + 1 < diag.size and sub[i] != 0.0:
            # 2x2 pivot
            det = diag[i] * diag[i + 1] - sub[i] * sub[i]
            trace = diag[i] + diag[i + 1]
            if det < 0.0:
                positive, negative = positive + 1, negative + 1
            elif det > 0.0:
                if trace > 0.0:
                    positive += 2
                else:
                    negative += 2
            i += 2
            continue
        if diag[i] > 0.0:
            positive += 1
        elif diag[i] < 0.0:
            negative += 1
        i += 1
    return positive, negative


class InteriorPointSolver:
    def __init__(self, problem: NlpProblem, config: Optional[SolverConfig] = None):
        self.problem = problem
        self.config = config or SolverConfig()
        p = problem
        relax_l = _BOUND_RELAX * np.maximum(1.0, np.abs(p.lower))
        relax_u = _BOUND_RELAX * np.maximum(1.0, np.abs(p.upper))
        self.has_l = np.isfinite(p.lower)
        self.has_u = np.isfinite(p.upper)
        self.xl = np.where(self.has_l, p.lower - relax_l, 0.0)
        self.xu = np.where(self.has_u, p.upper + relax_u, 0.0)
        self.obj_scale = 1.0
        self.d_eq = np.ones(p.m_eq)
        self.d_in = np.ones(p.m_ineq)
        self.exact_hessian = self.config.hessian == 'exact' and p.has_hessian
        self._last_delta = 0.0

    # evaluation

    def _point(self, x: np.ndarray) -> _Point:
        ev = self.problem.evaluate(x)
        j_eq = sp.diags(self.d_eq) @ ev.eq_jacobian if self.problem.m_eq else ev.eq_jacobian
        j_in = sp.diags(self.d_in) @ ev.ineq_jacobian if self.problem.m_ineq else ev.ineq_jacobian
        return _Point(self.obj_scale * ev.objective, self.obj_scale * ev.gradient,
                      self.d_eq * ev.eq, sp.csr_matrix(j_eq), self.d_in * ev.ineq, sp.csr_matrix(j_in))

    def _first_non_finite(self, x: np.ndarray) -> Optional[Tuple[str, int]]:
        ev = self.problem.evaluate(x)
        if not np.isfinite(ev.objective) or not np.all(np.isfinite(ev.gradient)):
            return ('objective', -1)
        for name, values in (('eq', ev.eq), ('ineq', ev.ineq)):
            bad = np.flatnonzero(~np.isfinite(values))
            if bad.size:
                return (name, int(bad[0]))
        for name, jac in (('eq', ev.eq_jacobian), ('ineq', ev.ineq_jacobian)):
            coo = jac.tocoo()
            bad = np.flatnonzero(~np.isfinite(coo.data))
            if bad.size:
                return (name, int(coo.row[bad[0]]))
        return None

    def _compute_scaling(self, x: np.ndarray) -> None:
        if not self.config.scaling:
            return
        gmax = self.config.scaling_max_gradient
        ev = self.problem.evaluate(x)
        gnorm = float(np.max(np.abs(ev.gradient), initial=0.0))
        self.obj_scale = min(1.0, gmax / gnorm) if gnorm > 0.0 else 1.0
        for attr, jac, m in (('d_eq', ev.eq_jacobian, self.problem.m_eq),
                             ('d_in', ev.ineq_jacobian, self.problem.m_ineq)):
            if m == 0:
                continue
            row_max = np.asarray(abs(jac).max(axis=1).todense()).ravel()
            scale = np.ones(m)
            big = row_max > gmax
            scale[big] = gmax / row_max[big]
            setattr(self, attr, scale)

    # barrier helpers

    def _gaps(self, x):
        gl = np.where(self.has_l, x - self.xl, 1.0)
        gu = np.where(self.has_u, self.xu - x, 1.0)
        return gl, gu

    def _merit(self, pt: _Point, x, s, mu, nu) -> float:
        gl, gu = self._gaps(x)
        if np.any(gl[self.has_l] <= 0.0) or np.any(gu[self.has_u] <= 0.0) or np.any(s <= 0.0):
            return np.inf
        barrier = (pt.f - mu * np.sum(np.log(gl[self.has_l])) - mu * np.sum(np.log(gu[self.has_u]))
                   - mu * np.sum(np.log(s)))
        return float(barrier + nu * self._infeasibility_l1(pt, s))

    @staticmethod
    def _infeasibility_l1(pt: _Point, s) -> float:
        return float(np.sum(np.abs(pt.c_eq)) + np.sum(np.abs(pt.c_in + s)))

    def _barrier_gradient(self, pt: _Point, x, s, mu):
        gl, gu = self._gaps(x)
        gx = pt.g - np.where(self.has_l, mu / gl, 0.0) + np.where(self.has_u, mu / gu, 0.0)
        gs = -mu / s
        return gx, gs

    def _optimality_error(self, pt: _Point, it: _Iterate, mu: float) -> float:
        stationarity = pt.g - it.zl + it.zu
        if self.problem.m_eq:
            stationarity = stationarity + pt.j_eq.T @ it.y_eq
        if self.problem.m_ineq:
            stationarity = stationarity + pt.j_in.T @ it.y_in
        gl, gu = self._gaps(it.x)
        compl = [np.abs(gl[self.has_l] * it.zl[self.has_l] - mu),
                 np.abs(gu[self.has_u] * it.zu[self.has_u] - mu),
                 np.abs(it.s * it.zs - mu),
                 np.abs(it.y_in - it.zs)]
        feas = max(float(np.max(np.abs(pt.c_eq), initial=0.0)),
                   float(np.max(np.abs(pt.c_in + it.s), initial=0.0)))
        return max(float(np.max(np.abs(stationarity), initial=0.0)), feas,
                   max(float(np.max(c, initial=0.0)) for c in compl))

    # linear algebra

    def _hessian(self, x: np.ndarray, it: _Iterate) -> sp.csr_matrix:
        """Hessian of the scaled Lagrangian"""
        return self.problem.lagrangian_hessian(x, self.obj_scale, self.d_eq * it.y_eq, self.d_in * it.y_in)

    def _kkt_matrix(self, B, sigma_x, sigma_s, pt: _Point, delta_w: float):
        n, me, mi = self.problem.n, self.problem.m_eq, self.problem.m_ineq
        if self.config.linear_solver == 'dense':
            H = (B.toarray() if sp.issparse(B) else B) + np.diag(sigma_x + delta_w)
            size = n + 2 * mi + me
            K = np.zeros((size, size))
            K[:n, :n] = H
            K[n:n + mi, n:n + mi] = np.diag(sigma_s + delta_w)
            r0 = n + mi
            if me:
                je = pt.j_eq.toarray()
                K[r0:r0 + me, :n] = je
                K[:n, r0:r0 + me] = je.T
                K[r0:r0 + me, r0:r0 + me] = -_CONSTRAINT_REG * np.eye(me)
            r1 = r0 + me
            if mi:
                ji = pt.j_in.toarray()
                K[r1:, :n] = ji
                K[:n, r1:] = ji.T
                K[r1:, n:n + mi] = np.eye(mi)
                K[n:n + mi, r1:] = np.eye(mi)
                K[r1:, r1:] = -_CONSTRAINT_REG * np.eye(mi)
            return K
        H = sp.csr_matrix(B) + sp.diags(sigma_x + delta_w)
        eye_i = sp.identity(mi, format='csr')
        blocks = [[sp.csr_matrix(H), None, pt.j_eq.T if me else None, pt.j_in.T if mi else None],
                  [None, sp.diags(sigma_s + delta_w) if mi else None, None, eye_i if mi else None],
                  [pt.j_eq if me else None, None, -_CONSTRAINT_REG * sp.identity(me) if me else None, None],
                  [pt.j_in if mi else None, eye_i if mi else None, None,
                   -_CONSTRAINT_REG * sp.identity(mi) if mi else None]]
        keep = [0] + ([1] if mi else []) + ([2] if me else []) + ([3] if mi else [])
        blocks = [[blocks[i][j] for j in keep] for i in keep]
        if not mi and not me:
            return sp.csc_matrix(H)
        return sp.bmat(blocks, format='csc')

    def _factorize(self, K):
        if self.config.linear_solver == 'dense':
            factors = scipy.linalg.lu_factor(K, check_finite=False)
            return lambda rhs: scipy.linalg.lu_solve(factors, rhs, check_finite=False)
        lu = spla.splu(K)
        return lu.solve

    def _next_delta(self, delta_w: float) -> float:
        if delta_w == 0.0:
            if self._last_delta == 0.0:
                return _DELTA_FIRST
            return max(_DELTA_MIN, _DELTA_DECAY * self._last_delta)
        return delta_w * (_DELTA_GROW_FIRST if self._last_delta == 0.0 else _DELTA_GROW)

    def _inertia_ok(self, K) -> bool:
        """Dense KKT matrices with the exact Hessian must have the inertia of a minimiser"""
        if not self.exact_hessian or self.config.linear_solver != 'dense':
            return True
        n, me, mi = self.problem.n, self.problem.m_eq, self.problem.m_ineq
        return inertia(K) == (n + mi, me + mi)

    def _curvature_ok(self, B, sigma_x, sigma_s, delta_w, step) -> bool:
        """Sparse path with the exact Hessian: the step must see positive curvature"""
        if not self.exact_hessian or self.config.linear_solver == 'dense':
            return True
        n, mi = self.problem.n, self.problem.m_ineq
        dx, ds = step[:n], step[n:n + mi]
        curvature = float(dx @ (B @ dx) + dx @ ((sigma_x + delta_w) * dx) + ds @ ((sigma_s + delta_w) * ds))
        return curvature >= _CURVATURE_TOL * float(dx @ dx + ds @ ds)

    def _solve_direction(self, B, sigma_x, sigma_s, pt, rhs, min_delta: float = 0.0):
        """(solve, step) for the smallest Hessian shift giving an acceptable step, or None"""
        delta_w = min_delta
        while delta_w <= _DELTA_MAX:
            try:
                K = self._kkt_matrix(B, sigma_x, sigma_s, pt, delta_w)
                if self._inertia_ok(K):
                    solve = self._factorize(K)
                    step = solve(rhs)
                    if np.all(np.isfinite(step)) and self._curvature_ok(B, sigma_x, sigma_s, delta_w, step):
                        if delta_w > 0.0:
                            self._last_delta = delta_w
                        return solve, step
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, RuntimeError, ValueError):
                pass
            delta_w = self._next_delta(delta_w)
            logger.debug('Regularizing KKT system', extra={'delta_w': delta_w})
        return None

    def _split(self, vec):
        n, me, mi = self.problem.n, self.problem.m_eq, self.problem.m_ineq
        return vec[:n], vec[n:n + mi], vec[n + mi:n + mi + me], vec[n + mi + me:]

    # main loop

    def _initial_point(self, z0) -> np.ndarray:
        p = self.problem
        x = np.array(z0, dtype=float)
        x = np.where(self.has_l, np.maximum(x, self.xl), x)
        x = np.where(self.has_u, np.minimum(x, self.xu), x)
        push = self.config.bound_push
        both = self.has_l & self.has_u
        width = np.where(both, self.xu - self.xl, np.inf)
        pl = np.minimum(push * np.maximum(1.0, np.abs(self.xl)), push * width)
        pu = np.minimum(push * np.maximum(1.0, np.abs(self.xu)), push * width)
        x = np.where(self.has_l, np.maximum(x, self.xl + pl), x)
        x = np.where(self.has_u, np.minimum(x, self.xu - pu), x)
        if p.n and np.any(~np.isfinite(x)):
            x = np.where(np.isfinite(x), x, 0.0)
        return x

    def _unscaled_multipliers(self, it: _Iterate) -> NlpMultipliers:
        sf = self.obj_scale
        return NlpMultipliers(y_eq=it.y_eq * self.d_eq / sf,
                              y_ineq=it.y_in * self.d_in / sf,
                              z_lower=np.where(self.has_l, it.zl, 0.0) / sf,
                              z_upper=np.where(self.has_u, it.zu, 0.0) / sf)

    def _result(self, it, status, iterations, history, message='', failed=None) -> NlpSolution:
        p = self.problem
        x = np.clip(it.x, p.lower, p.upper)
        multipliers = self._unscaled_multipliers(it)
        report = check_kkt(p, x, multipliers)
        if status == NlpStatus.OPTIMAL and not report.satisfied(self.config.tol_feas, self.config.tol_opt):
            status = NlpStatus.MAX_ITER
        ev = p.evaluate(x)
        solution = NlpSolution(z=x, objective=float(ev.objective), eq_residual_inf=report.eq_residual_inf,
                               ineq_violation_inf=report.ineq_violation_inf,
                               kkt_stationarity_inf=report.stationarity_inf, status=status,
                               iterations=iterations, multipliers=multipliers,
                               complementarity_inf=report.complementarity_inf, message=message,
                               failed_constraint=failed, history=history)
        logger.info('Interior-point solve finished', extra={
            'status': status.value, 'iterations': iterations, 'objective': solution.objective,
            'eq_residual': report.eq_residual_inf, 'ineq_violation': report.ineq_violation_inf,
            'stationarity': report.stationarity_inf})
        return solution

    def _failure(self, x, iterations, where) -> NlpSolution:
        kind, index = where
        p = self.problem
        label = ''
        if kind == 'eq' and index >= 0:
            label = p.eq_labels[index]
        elif kind == 'ineq' and index >= 0:
            label = p.ineq_labels[index]
        message = f'Non-finite {kind} evaluation' + (f' at {label}' if label else '')
        logger.warning('Numerical failure', extra={'constraint': label or kind, 'index': index})
        return NlpSolution(z=np.array(x), objective=float('nan'), eq_residual_inf=float('inf'),
                           ineq_violation_inf=float('inf'), kkt_stationarity_inf=float('inf'),
                           status=NlpStatus.NUMERICAL_FAILURE, iterations=iterations,
                           message=message, failed_constraint=index)

    def solve(self, warm_start: np.ndarray) -> NlpSolution:
        p, cfg = self.problem, self.config
        n, me, mi = p.n, p.m_eq, p.m_ineq
        x = self._initial_point(warm_start)
        bad = self._first_non_finite(x)
        if bad is not None:
            return self._failure(x, 0, bad)
        self._compute_scaling(x)
        pt = self._point(x)

        mu = cfg.mu_init
        mu_floor = cfg.barrier_floor
        nu = cfg.penalty_init
        push = cfg.bound_push
        s = np.maximum(-pt.c_in, push)
        gl, gu = self._gaps(x)
        zl = np.where(self.has_l, mu / gl, 0.0)
        zu = np.where(self.has_u, mu / gu, 0.0)
        zs = mu / s
        y_in = zs.copy()
        y_eq = np.zeros(me)
        if me:
            rhs = -(pt.g + (pt.j_in.T @ y_in if mi else 0.0) - zl + zu)
            y_eq = spla.lsqr(pt.j_eq.T, rhs, atol=1e-10, btol=1e-10)[0]
            if not np.all(np.isfinite(y_eq)) or np.max(np.abs(y_eq), initial=0.0) > 1e3:
                y_eq = np.zeros(me)
        it = _Iterate(x, s, y_eq, y_in, zl, zu, zs)

        B = None if self.exact_hessian else np.eye(n)
        first_update = True
        history = []
        failures = 0
        min_delta = 0.0
        logger.info('Interior-point solve started', extra={'variables': n, 'equalities': me,
                                                            'inequalities': mi, 'obj_scale': self.obj_scale})

        for k in range(cfg.max_iter):
            report = check_kkt(p, np.clip(it.x, p.lower, p.upper), self._unscaled_multipliers(it))
            if report.satisfied(cfg.tol_feas, cfg.tol_opt):
                return self._result(it, NlpStatus.OPTIMAL, k, history)

            while mu > mu_floor and self._optimality_error(pt, it, mu) <= _KAPPA_EPS * mu:
                mu = max(mu_floor, min(_KAPPA_MU * mu, mu ** _THETA_MU))
            tau = max(_TAU_MIN, 1.0 - mu)

            gl, gu = self._gaps(it.x)
            sigma_l = np.where(self.has_l, it.zl / gl, 0.0)
            sigma_u = np.where(self.has_u, it.zu / gu, 0.0)
            sigma_s = it.zs / it.s

            gx, gs = self._barrier_gradient(pt, it.x, it.s, mu)
            r_x = gx + (pt.j_eq.T @ it.y_eq if me else 0.0) + (pt.j_in.T @ it.y_in if mi else 0.0)
            r_s = it.y_in - mu / it.s
            r_e = pt.c_eq
            r_i = pt.c_in + it.s
            W = self._hessian(it.x, it) if self.exact_hessian else B
            direction = self._solve_direction(W, sigma_l + sigma_u, sigma_s, pt,
                                              -np.concatenate([r_x, r_s, r_e, r_i]), min_delta)
            if direction is None:
                return self._result(it, NlpStatus.NUMERICAL_FAILURE, k, history, 'KKT system could not be factorized')
            solve, step = direction
            dx, ds, dy_eq, dy_in = self._split(step)
            if max(np.max(np.abs(dx), initial=0.0), np.max(np.abs(ds), initial=0.0)) <= 1e-14:
                if mu > mu_floor:
                    mu = max(mu_floor, _KAPPA_MU * mu)
                    continue
                break

            # penalty large enough for a descent direction of the merit
            infeas = self._infeasibility_l1(pt, it.s)
            slope_obj = float(gx @ dx + gs @ ds)
            curvature = float(dx @ (W @ dx) + dx @ ((sigma_l + sigma_u) * dx) + ds @ (sigma_s * ds))
            if infeas > 1e-14:
                needed = (slope_obj + 0.5 * max(curvature, 0.0)) / ((1.0 - _PENALTY_RHO) * infeas)
                if nu < needed:
                    nu = min(1.1 * needed + 1e-3, _MAX_PENALTY)
            slope = slope_obj - nu * infeas

            alpha_max = min(_fraction_to_boundary(gl[self.has_l], dx[self.has_l], tau),
                            _fraction_to_boundary(gu[self.has_u], -dx[self.has_u], tau),
                            _fraction_to_boundary(it.s, ds, tau))
            merit0 = self._merit(pt, it.x, it.s, mu, nu)

            accepted = None
            alpha = alpha_max
            if slope < 0.0 or np.max(np.abs(dx), initial=0.0) > 1e-14:
                for trial in range(_MAX_BACKTRACKS):
                    x_t, s_t = it.x + alpha * dx, it.s + alpha * ds
                    pt_t = self._safe_point(x_t)
                    merit_t = self._merit(pt_t, x_t, s_t, mu, nu) if pt_t is not None else np.inf
                    if merit_t <= merit0 + _ARMIJO * alpha * min(slope, 0.0) and merit_t < merit0:
                        accepted = (x_t, s_t, pt_t, alpha, dy_eq, dy_in, dx, ds, merit_t)
                        break
                    if trial == 0 and pt_t is not None and (me or mi):
                        soc = self._second_order_correction(solve, pt, pt_t, it, alpha, r_x, r_s, tau, gl, gu)
                        if soc is not None:
                            x_c, s_c, a_c, dxc, dsc, dyec, dyic = soc
                            pt_c = self._safe_point(x_c)
                            merit_c = self._merit(pt_c, x_c, s_c, mu, nu) if pt_c is not None else np.inf
                            if merit_c <= merit0 + _ARMIJO * alpha * min(slope, 0.0) and merit_c < merit0:
                                accepted = (x_c, s_c, pt_c, a_c, dyec, dyic, dxc, dsc, merit_c)
                                break
                    alpha *= 0.5

            if accepted is None:
                failures += 1
                logger.debug('Line search failed', extra={'iteration': k, 'mu': mu, 'nu': nu})
                if failures >= _MAX_FAILURES:
                    feas = max(float(np.max(np.abs(pt.c_eq), initial=0.0)),
                               float(np.max(np.maximum(pt.c_in, 0.0), initial=0.0)))
                    status = NlpStatus.INFEASIBLE if feas > cfg.tol_feas else NlpStatus.NUMERICAL_FAILURE
                    return self._result(it, status, k, history, 'Line search failed')
                if self.exact_hessian:
                    # retry with a stiffer shift
                    min_delta = max(_DELTA_FIRST, 100.0 * self._last_delta, 100.0 * min_delta)
                else:
                    B = np.eye(n)
                    first_update = True
                continue
            failures = 0
            min_delta = 0.0

            x_new, s_new, pt_new, alpha, dy_eq, dy_in, dx, ds, merit_new = accepted
            history.append((mu, nu, merit0, merit_new))

            gl_new = np.where(self.has_l, x_new - self.xl, 1.0)
            gu_new = np.where(self.has_u, self.xu - x_new, 1.0)
            dzl = np.where(self.has_l, mu / gl - it.zl - sigma_l * dx, 0.0)
            dzu = np.where(self.has_u, mu / gu - it.zu + sigma_u * dx, 0.0)
            dzs = mu / it.s - it.zs - sigma_s * ds
            alpha_z = min(_fraction_to_boundary(it.zl[self.has_l], dzl[self.has_l], tau),
                          _fraction_to_boundary(it.zu[self.has_u], dzu[self.has_u], tau),
                          _fraction_to_boundary(it.zs, dzs, tau))
            zl = np.clip(it.zl + alpha_z * dzl, mu / (_KAPPA_SIGMA * gl_new), _KAPPA_SIGMA * mu / gl_new)
            zu = np.clip(it.zu + alpha_z * dzu, mu / (_KAPPA_SIGMA * gu_new), _KAPPA_SIGMA * mu / gu_new)
            zl = np.where(self.has_l, zl, 0.0)
            zu = np.where(self.has_u, zu, 0.0)
            zs = np.clip(it.zs + alpha_z * dzs, mu / (_KAPPA_SIGMA * s_new), _KAPPA_SIGMA * mu / s_new)
            y_eq = it.y_eq + alpha * dy_eq
            y_in = it.y_in + alpha * dy_in

            if not self.exact_hessian:
                B, first_update = self._bfgs_update(B, first_update, it.x, x_new, pt, pt_new, y_eq, y_in)
            it = _Iterate(x_new, s_new, y_eq, y_in, zl, zu, zs)
            pt = pt_new
            logger.debug('Interior-point iteration', extra={
                'iteration': k, 'mu': mu, 'objective': pt.f, 'alpha': alpha,
                'primal_inf': max(float(np.max(np.abs(pt.c_eq), initial=0.0)),
                                  float(np.max(np.abs(pt.c_in + it.s), initial=0.0))),
                'merit': merit_new})
            if nu >= _MAX_PENALTY:
                return self._result(it, NlpStatus.INFEASIBLE, k + 1, history, 'Penalty parameter diverged')

        report = check_kkt(p, np.clip(it.x, p.lower, p.upper), self._unscaled_multipliers(it))
        status = NlpStatus.OPTIMAL if report.satisfied(cfg.tol_feas, cfg.tol_opt) else NlpStatus.MAX_ITER
        return self._result(it, status, cfg.max_iter, history)

    def _safe_point(self, x) -> Optional[_Point]:
        pt = self._point(x)
        if not (np.isfinite(pt.f) and np.all(np.isfinite(pt.c_eq)) and np.all(np.isfinite(pt.c_in))):
            return None
        return pt

    def _second_order_correction(self, solve, pt, pt_t, it, alpha, r_x, r_s, tau, gl, gu):
        c_e = alpha * pt.c_eq + pt_t.c_eq
        c_i = alpha * (pt.c_in + it.s) + (pt_t.c_in + it.s)
        step = solve(-np.concatenate([r_x, r_s, c_e, c_i]))
        dx, ds, dy_eq, dy_in = self._split(step)
        a = min(_fraction_to_boundary(gl[self.has_l], dx[self.has_l], tau),
                _fraction_to_boundary(gu[self.has_u], -dx[self.has_u], tau),
                _fraction_to_boundary(it.s, ds, tau))
        if a < 1.0:
            return None
        return it.x + dx, it.s + ds, 1.0, dx, ds, dy_eq, dy_in

    def _bfgs_update(self, B, first_update, x_old, x_new, pt_old: _Point, pt_new: _Point, y_eq, y_in):
        def lagrangian_grad(pt):
            g = pt.g.copy()
            if self.problem.m_eq:
                g = g + pt.j_eq.T @ y_eq
            if self.problem.m_ineq:
                g = g + pt.j_in.T @ y_in
            return g

        s_k = x_new - x_old
        y_k = lagrangian_grad(pt_new) - lagrangian_grad(pt_old)
        ss = float(s_k @ s_k)
        if ss < 1e-20:
            return B, first_update
        sy = float(s_k @ y_k)
        if first_update and sy > 0.0:
            B = (float(y_k @ y_k) / sy) * np.eye(B.shape[0])
            first_update = False
        Bs = B @ s_k
        sBs = float(s_k @ Bs)
        if sBs <= 0.0:
            return np.eye(B.shape[0]), True
        if sy < 0.2 * sBs:
            theta = 0.8 * sBs / (sBs - sy)
            r = theta * y_k + (1.0 - theta) * Bs
        else:
            r = y_k
        sr = float(s_k @ r)
        if sr <= 1e-16 * ss:
            return B, first_update
        B = B + np.outer(r, r) / sr - np.outer(Bs, Bs) / sBs
        return 0.5 * (B + B.T), first_update


def solve_nlp(problem: NlpProblem, config: Optional[SolverConfig] = None,
              warm_start: Optional[np.ndarray] = None) -> NlpSolution:
    if warm_start is None:
        warm_start = np.zeros(problem.n)
    return InteriorPointSolver(problem, config).solve(warm_start)
