"""Solver backends behind one contract.

Every backend returns an ``NlpSolution`` whose status is ``optimal`` only if
``check_kkt`` on the unscaled problem meets the configured tolerances.

File exchange grammar (UTF-8, one record per line, '#' starts a comment)::

    dimensions <n> <m_eq> <m_ineq>
    variables
    <index> <lower> <upper> <start>          n lines, bounds may be inf/-inf
    constraints
    <row> <eq|le> <label>                    m_eq + m_ineq lines, equalities first
    jacobian
    <row> <col> <value>                      declared pattern, values at start
    objective <value at start>
    gradient
    <index> <value>                          n lines
    end

The external command is called as ``<command...> <dump path> <solution path>``
and must write the solution as ``<index> <value>`` lines, one per variable.
"""

import logging
import subprocess
import tempfile
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.optimize import BFGS, Bounds, NonlinearConstraint, minimize

from src.exceptions import InputError, SolverError
from src.helpers.nlp.interior_point import solve_nlp
from src.helpers.nlp.kkt import check_kkt, estimate_multipliers
from src.helpers.nlp.problem import NlpProblem
from src.models.solver import NlpSolution, NlpStatus, SolverConfig

logger = logging.getLogger(__name__)


def _qualified(problem: NlpProblem, z: np.ndarray, config: SolverConfig, iterations: int,
               failed_status: NlpStatus, message: str) -> NlpSolution:
    z = problem.clip(z)
    multipliers = estimate_multipliers(problem, z, active_tol=max(config.tol_feas, 1e-8))
    report = check_kkt(problem, z, multipliers)
    status = NlpStatus.OPTIMAL if report.satisfied(config.tol_feas, config.tol_opt) else failed_status
    return NlpSolution(z=z, objective=problem.objective(z), eq_residual_inf=report.eq_residual_inf,
                       ineq_violation_inf=report.ineq_violation_inf,
                       kkt_stationarity_inf=report.stationarity_inf, status=status, iterations=iterations,
                       multipliers=multipliers, complementarity_inf=report.complementarity_inf, message=message)


def solve_trust_constr(problem: NlpProblem, config: SolverConfig, warm_start: np.ndarray) -> NlpSolution:
    constraints = []
    if problem.m_eq:
        constraints.append(NonlinearConstraint(problem.eq_residuals, 0.0, 0.0,
                                               jac=problem.eq_jacobian, hess=BFGS()))
    if problem.m_ineq:
        constraints.append(NonlinearConstraint(problem.ineq_residuals, -np.inf, 0.0,
                                               jac=problem.ineq_jacobian, hess=BFGS()))
    result = minimize(problem.objective, problem.clip(warm_start), jac=problem.gradient, hess=BFGS(),
                      method='trust-constr', constraints=constraints,
                      bounds=Bounds(problem.lower, problem.upper),
                      options={'maxiter': config.max_iter, 'gtol': config.tol_opt,
                               'xtol': 1e-12, 'verbose': 0})
    logger.info('trust-constr finished', extra={'status': int(result.status), 'iterations': int(result.nit)})
    failed = NlpStatus.MAX_ITER if result.status == 0 else NlpStatus.NUMERICAL_FAILURE
    return _qualified(problem, result.x, config, int(result.nit), failed, str(result.message))


def _fmt(value: float) -> str:
    return repr(float(value))


def write_problem_dump(problem: NlpProblem, warm_start: np.ndarray, path: Union[str, Path]) -> None:
    z = problem.clip(warm_start)
    ev = problem.evaluate(z)
    lines = ['# nlp-exchange v1', f'dimensions {problem.n} {problem.m_eq} {problem.m_ineq}', 'variables']
    lines += [f'{i} {_fmt(lo)} {_fmt(hi)} {_fmt(x)}'
              for i, (lo, hi, x) in enumerate(zip(problem.lower, problem.upper, z))]
    lines.append('constraints')
    lines += [f'{i} eq {label}' for i, label in enumerate(problem.eq_labels)]
    lines += [f'{problem.m_eq + i} le {label}' for i, label in enumerate(problem.ineq_labels)]
    lines.append('jacobian')
    for offset, jac, (rows, cols) in ((0, ev.eq_jacobian, problem.eq_pattern),
                                      (problem.m_eq, ev.ineq_jacobian, problem.ineq_pattern)):
        coo = jac.tocoo()
        values = dict(zip(zip(coo.row.tolist(), coo.col.tolist()), coo.data.tolist()))
        for r, c in sorted(set(zip(np.asarray(rows).tolist(), np.asarray(cols).tolist()))):
            lines.append(f'{offset + r} {c} {_fmt(values.get((r, c), 0.0))}')
    lines.append(f'objective {_fmt(ev.objective)}')
    lines.append('gradient')
    lines += [f'{i} {_fmt(g)}' for i, g in enumerate(ev.gradient)]
    lines.append('end')
    Path(path).write_text('\n'.join(lines) + '\n', encoding='utf-8')


def read_solution_file(path: Union[str, Path], n: int) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise InputError(f'Solution file not found: {path}')
    z = np.full(n, np.nan)
    for lineno, raw in enumerate(path.read_text(encoding='utf-8').splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f'{path}:{lineno}: expected "<index> <value>", got {raw!r}')
        try:
            index, value = int(parts[0]), float(parts[1])
        except ValueError:
            raise InputError(f'{path}:{lineno}: malformed record {raw!r}')
        if not 0 <= index < n:
            raise InputError(f'{path}:{lineno}: index {index} outside [0, {n})')
        if not np.isnan(z[index]):
            raise InputError(f'{path}:{lineno}: index {index} given twice')
        z[index] = value
    missing = np.flatnonzero(np.isnan(z))
    if missing.size:
        raise InputError(f'{path}: no value for {missing.size} variables (first: {int(missing[0])})')
    return z


def solve_file_exchange(problem: NlpProblem, config: SolverConfig, warm_start: np.ndarray) -> NlpSolution:
    workdir = Path(config.exchange_dir) if config.exchange_dir else Path(tempfile.mkdtemp(prefix='nlp-exchange-'))
    workdir.mkdir(parents=True, exist_ok=True)
    dump, solution = workdir / 'problem.txt', workdir / 'solution.txt'
    write_problem_dump(problem, warm_start, dump)
    command = [*config.external_command, str(dump), str(solution)]
    logger.info('Running external solver', extra={'command': ' '.join(command)})
    completed = subprocess.run(command, capture_output=True, text=True)
    if completed.returncode != 0:
        raise SolverError(f'External solver exited with {completed.returncode}: {completed.stderr.strip()}')
    z = read_solution_file(solution, problem.n)
    return _qualified(problem, z, config, 0, NlpStatus.MAX_ITER, 'external solver')


def solve(problem: NlpProblem, config: Optional[SolverConfig] = None,
          warm_start: Optional[np.ndarray] = None) -> NlpSolution:
    config = config or SolverConfig()
    if warm_start is None:
        warm_start = np.zeros(problem.n)
    if config.backend == 'interior-point':
        return solve_nlp(problem, config, warm_start)
    if config.backend == 'scipy-trust-constr':
        return solve_trust_constr(problem, config, warm_start)
    return solve_file_exchange(problem, config, warm_start)
