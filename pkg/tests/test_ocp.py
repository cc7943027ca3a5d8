from itertools import product

import numpy as np
import pytest

from src.exceptions import TranscriptionError
from src.helpers.collocation.ocp import OptimalControlProblem, round_modes, segment_times, transcribe_ocp
from src.helpers.collocation.radau import flipped_radau_points, time_map
from src.helpers.nlp.interior_point import solve_nlp
from src.models.solver import NlpStatus, SolverConfig
from src.utils import dual as dn

CONFIG = SolverConfig(tol_feas=1e-8, tol_opt=1e-6, max_iter=500)
TIGHT = SolverConfig(tol_feas=1e-9, tol_opt=1e-8, max_iter=500)


def double_integrator(points, times):
    return OptimalControlProblem(
        n_states=2, n_controls=1,
        dynamics=lambda xs, us, v, t: [xs[1], us[0]],
        points=points, times=times,
        state_lower=[-10.0, -10.0], state_upper=[10.0, 10.0],
        control_lower=[-20.0], control_upper=[20.0],
        initial_state=[0.0, 0.0], final_state=[1.0, 0.0],
        running_cost=lambda xs, us, v, t: us[0] * us[0],
    )


def node_times(ocp, layout, z):
    bounds = segment_times(ocp, layout, z)
    return [time_map(bounds[s], bounds[s + 1], flipped_radau_points(N).nodes) for s, N in enumerate(ocp.points)]


@pytest.mark.parametrize('points, times', [
    ([10], [(0.0, 0.0), (1.0, 1.0)]),
    ([5, 5], [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]),
])
def test_double_integrator_minimum_energy(points, times):
    """x'' = u, x(0)=0, x(1)=1, rest to rest: u = 6 - 12t, x = 3t^2 - 2t^3, cost 12"""
    ocp = double_integrator(points, times)
    problem, layout = transcribe_ocp(ocp)
    solution = solve_nlp(problem, CONFIG, np.zeros(problem.n))
    assert solution.status == NlpStatus.OPTIMAL
    assert solution.objective == pytest.approx(12.0, rel=1e-5)
    for s, t in enumerate(node_times(ocp, layout, solution.z)):
        x = solution.z[layout.index[f'x{s}']]
        u = solution.z[layout.index[f'u{s}']][:, 0]
        assert np.max(np.abs(x[:, 0] - (3 * t ** 2 - 2 * t ** 3))) < 1e-4
        assert np.max(np.abs(u - (6.0 - 12.0 * t[1:]))) < 1e-3


def test_exact_polynomial_has_zero_defects():
    """x' = 3t^2 on [0, 2]; x = t^3 sampled at the nodes satisfies every defect row"""
    ocp = OptimalControlProblem(
        n_states=1, n_controls=1, dynamics=lambda xs, us, v, t: [3.0 * t ** 2],
        points=[3], times=[(0.0, 0.0), (2.0, 2.0)],
        state_lower=[-100.0], state_upper=[100.0], control_lower=[-1.0], control_upper=[1.0],
    )
    problem, layout = transcribe_ocp(ocp)
    t = time_map(0.0, 2.0, flipped_radau_points(3).nodes)
    z = layout.pack({'x0': (t ** 3)[:, None], 'u0': 0.0}, np.zeros(problem.n))
    defects = problem.eq_residuals(z)
    assert defects.size == 3
    assert np.max(np.abs(defects)) < 1e-12
    z[layout.index['x0'][2, 0]] += 0.1
    assert np.max(np.abs(problem.eq_residuals(z))) > 1e-3


def test_free_boundary_time_and_segment_order():
    ocp = double_integrator([4, 4], [(0.0, 0.0), (0.2, 0.8), (1.0, 1.0)])
    ocp.min_segment_duration = 0.05
    problem, layout = transcribe_ocp(ocp)
    assert layout.index['t'].shape == (1,)
    assert problem.m_ineq == 2
    z = layout.pack({'t': 0.4}, np.zeros(problem.n))
    assert segment_times(ocp, layout, z).tolist() == [0.0, 0.4, 1.0]
    # t0 - t1 + min_duration <= 0 and t1 - t2 + min_duration <= 0
    assert problem.ineq_residuals(z) == pytest.approx([-0.35, -0.55], abs=1e-12)


def test_embedded_mode_variables():
    ocp = double_integrator([3, 5], [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)])
    ocp.modes = [None, 1.0]
    problem, layout = transcribe_ocp(ocp)
    assert layout.index['v0'].shape == (3,)
    assert 'v1' not in layout.index
    lower, upper = problem.lower[layout.index['v0']], problem.upper[layout.index['v0']]
    assert lower.tolist() == [0.0] * 3 and upper.tolist() == [1.0] * 3


def switched_toy(weight: float, mode):
    """Fuel-like state drained at 1 - 0.3v, with a running price on the mode"""
    return OptimalControlProblem(
        n_states=1, n_controls=1,
        dynamics=lambda xs, us, v, t: [-(1.0 - 0.3 * v) + us[0]],
        points=[6], times=[(0.0, 0.0), (1.0, 1.0)],
        state_lower=[-10.0], state_upper=[10.0], control_lower=[-5.0], control_upper=[5.0],
        initial_state=[1.0],
        running_cost=lambda xs, us, v, t: us[0] * us[0] + weight * v,
        terminal_cost=lambda xs, t: -xs[0],
        modes=[mode],
    )


@pytest.mark.parametrize('weight, best', [(0.1, 1.0), (0.5, 0.0)])
def test_relaxed_mode_matches_enumeration(weight, best):
    objectives = {}
    for mode in (0.0, 1.0):
        problem, _ = transcribe_ocp(switched_toy(weight, mode))
        solution = solve_nlp(problem, CONFIG, np.zeros(problem.n))
        assert solution.status == NlpStatus.OPTIMAL
        objectives[mode] = solution.objective
    assert min(objectives, key=objectives.get) == best

    problem, layout = transcribe_ocp(switched_toy(weight, None))
    z0 = layout.pack({'v0': 0.5}, np.zeros(problem.n))
    relaxed = solve_nlp(problem, CONFIG, z0)
    assert relaxed.status == NlpStatus.OPTIMAL
    assert relaxed.objective == pytest.approx(objectives[best], abs=1e-5)
    assert np.max(np.abs(relaxed.z[layout.index['v0']] - best)) < 1e-3


def test_problem_shape_checked():
    with pytest.raises(TranscriptionError):
        double_integrator([4], [(0.0, 0.0)])
    with pytest.raises(TranscriptionError):
        double_integrator([4], [(0.0, 0.0), (1.0, 0.5)])


def windowed_saving(modes, saving=0.3, price_outside=1.0, price_inside=0.0, spread=0.0):
    """Three one-hour phases; the mode cuts the fuel drain by ``saving`` and costs
    ``price_inside`` per unit time in the middle phase, ``price_outside`` elsewhere.
    ``spread`` adds a quadratic pull of the mode towards 0.5."""
    def price(t):
        t = dn.value_of(t)
        return np.where((t > 1.0) & (t <= 2.0), price_inside, price_outside)

    return OptimalControlProblem(
        n_states=1, n_controls=1,
        dynamics=lambda xs, us, v, t: [-(1.0 - saving * v) + us[0]],
        points=[4, 4, 4], times=[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)],
        state_lower=[-10.0], state_upper=[10.0], control_lower=[-5.0], control_upper=[5.0],
        initial_state=[1.0],
        running_cost=lambda xs, us, v, t: us[0] * us[0] + price(t) * v + spread * (v - 0.5) * (v - 0.5),
        terminal_cost=lambda xs, t: -xs[0],
        modes=list(modes),
    )


def test_windowed_saving_matches_phase_enumeration():
    """u = 1/2 throughout; J = 1.25 + sum over phases in mode of (price - 0.3)"""
    objectives = {}
    for sequence in product((0.0, 1.0), repeat=3):
        problem, _ = transcribe_ocp(windowed_saving(sequence))
        solution = solve_nlp(problem, CONFIG, np.zeros(problem.n))
        assert solution.status == NlpStatus.OPTIMAL
        objectives[sequence] = solution.objective
    best = min(objectives, key=objectives.get)
    assert best == (0.0, 1.0, 0.0)
    assert objectives[best] == pytest.approx(0.95, abs=1e-6)
    assert objectives[(1.0, 1.0, 1.0)] == pytest.approx(1.25 + 2 * 0.7 - 0.3, abs=1e-6)

    ocp = windowed_saving([None, None, None])
    problem, layout = transcribe_ocp(ocp)
    z0 = layout.pack({'v0': 0.5, 'v1': 0.5, 'v2': 0.5}, np.zeros(problem.n))
    relaxed = solve_nlp(problem, CONFIG, z0)
    assert relaxed.status == NlpStatus.OPTIMAL
    assert relaxed.objective == pytest.approx(objectives[best], abs=1e-5)
    for s, expected in enumerate(best):
        assert np.max(np.abs(relaxed.z[layout.index[f'v{s}']] - expected)) < 1e-3

    rounded = round_modes(ocp, layout, relaxed.z)
    assert [m.tolist() for m in rounded.modes] == [[s] * 4 for s in best]
    problem, _ = transcribe_ocp(rounded)
    refined = solve_nlp(problem, CONFIG, np.zeros(problem.n))
    assert refined.status == NlpStatus.OPTIMAL
    assert refined.objective == pytest.approx(relaxed.objective, abs=1e-5)


@pytest.mark.parametrize('seed', range(10))
def test_rounded_modes_never_beat_the_relaxation(seed):
    rng = np.random.default_rng(seed)
    ocp = windowed_saving([None, None, None], saving=rng.uniform(0.1, 0.5),
                          price_outside=rng.uniform(0.0, 1.0), price_inside=rng.uniform(0.0, 0.5),
                          spread=rng.uniform(0.0, 2.0))
    problem, layout = transcribe_ocp(ocp)
    z0 = layout.pack({'v0': 0.5, 'v1': 0.5, 'v2': 0.5}, np.zeros(problem.n))
    relaxed = solve_nlp(problem, TIGHT, z0)
    assert relaxed.status == NlpStatus.OPTIMAL

    rounded = round_modes(ocp, layout, relaxed.z)
    fixed_problem, _ = transcribe_ocp(rounded)
    refined = solve_nlp(fixed_problem, TIGHT, np.zeros(fixed_problem.n))
    assert refined.status == NlpStatus.OPTIMAL
    assert refined.objective >= relaxed.objective - 1e-6
    for mode in rounded.modes:
        assert set(np.unique(mode)) <= {0.0, 1.0}
