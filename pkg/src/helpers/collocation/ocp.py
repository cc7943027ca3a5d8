"""Multi-segment flipped-Radau transcription of a generic optimal control problem.

Segments are chained by soft knots (state continuity only). Each segment
may carry an embedded mode variable v in [0, 1] at its collocation points or
a fixed mode value. Used for analytic regressions and for small switched
problems solved next to their fixed-mode enumerations.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.exceptions import TranscriptionError
from src.helpers.collocation.blocks import EQ, INEQ, Arg, NlpBuilder
from src.helpers.collocation.radau import RadauSegment, flipped_radau_points, time_map
from src.helpers.nlp.problem import NlpLayout, NlpProblem


def add_collocation_defects(builder: NlpBuilder, segment: RadauSegment, state_index: np.ndarray,
                            args: Sequence[Arg], t_start: Arg, t_end: Arg, rhs: Callable,
                            label: str) -> np.ndarray:
    """Rows D @ X - (t_end - t_start)/2 * f(X_k, args_k, t_k) == 0 at every collocation point.

    ``state_index`` is (N + 1, n_states); ``rhs(states, args, t)`` gets
    per-point sequences and returns one derivative per state.
    """
    N, n_states = segment.N, state_index.shape[1]
    rows = builder.add_rows(EQ, N * n_states, label).reshape(N, n_states)
    for i in range(n_states):
        builder.add_linear(EQ, rows[:, i][:, None], state_index[None, :, i], segment.D)
    tau = segment.tau

    def defect(*inputs):
        states = inputs[:n_states]
        extra = inputs[n_states:-2]
        ts, te = inputs[-2], inputs[-1]
        half = 0.5 * (te - ts)
        derivatives = rhs(list(states), list(extra), time_map(ts, te, tau))
        return [-half * d for d in derivatives]

    state_args = [builder.var(state_index[1:, i]) for i in range(n_states)]
    builder.add_pointwise(EQ, [rows[:, i] for i in range(n_states)], defect,
                          [*state_args, *args, t_start, t_end])
    return rows


@dataclass
class OptimalControlProblem:
    n_states: int
    n_controls: int
    dynamics: Callable
    points: List[int]
    # bounds on the n_segments + 1 boundary times; lo == hi marks a fixed time
    times: List[Tuple[float, float]]
    state_lower: Sequence[float]
    state_upper: Sequence[float]
    control_lower: Sequence[float]
    control_upper: Sequence[float]
    initial_state: Sequence[Optional[float]] = ()
    final_state: Sequence[Optional[float]] = ()
    running_cost: Optional[Callable] = None
    terminal_cost: Optional[Callable] = None
    # per segment: None for an embedded mode variable, else the fixed mode value (scalar or per point)
    modes: List[Union[None, float, np.ndarray]] = field(default_factory=list)
    min_segment_duration: float = 0.0

    def __post_init__(self):
        if len(self.times) != len(self.points) + 1:
            raise TranscriptionError('Need one time bound per segment boundary')
        if not self.modes:
            self.modes = [0.0] * len(self.points)
        if len(self.modes) != len(self.points):
            raise TranscriptionError('Need one mode entry per segment')
        for lo, hi in self.times:
            if lo > hi:
                raise TranscriptionError(f'Time bound ({lo}, {hi}) is empty')


def transcribe_ocp(ocp: OptimalControlProblem) -> Tuple[NlpProblem, NlpLayout]:
    """Variables: x{s} (N+1, n_states), u{s} (N, n_controls), v{s} (N,) for embedded
    segments and t (free boundary times only)"""
    builder = NlpBuilder()
    free_times = [i for i, (lo, hi) in enumerate(ocp.times) if lo < hi]
    t_idx = builder.add_variables('t', len(free_times),
                                  [ocp.times[i][0] for i in free_times],
                                  [ocp.times[i][1] for i in free_times])
    time_of = {i: t_idx[k] for k, i in enumerate(free_times)}

    def time_arg(i, size):
        if i in time_of:
            return builder.var(time_of[i], size)
        return builder.const(ocp.times[i][0], size)

    states = []
    for s, N in enumerate(ocp.points):
        segment = flipped_radau_points(N)
        x = builder.add_variables(f'x{s}', (N + 1, ocp.n_states), ocp.state_lower, ocp.state_upper)
        u = builder.add_variables(f'u{s}', (N, ocp.n_controls), ocp.control_lower, ocp.control_upper)
        if ocp.modes[s] is None:
            v_arg = builder.var(builder.add_variables(f'v{s}', N, 0.0, 1.0))
        else:
            v_arg = builder.const(ocp.modes[s], N)
        states.append(x)
        control_args = [builder.var(u[:, j]) for j in range(ocp.n_controls)]
        t_start, t_end = time_arg(s, N), time_arg(s + 1, N)

        def rhs(xs, extra, t, _nc=ocp.n_controls):
            return ocp.dynamics(xs, extra[:_nc], extra[_nc], t)

        add_collocation_defects(builder, segment, x, [*control_args, v_arg], t_start, t_end, rhs, f'defect{s}')

        if ocp.running_cost is not None:
            weights, tau = segment.weights, segment.tau

            def cost(*inputs, _ns=ocp.n_states, _nc=ocp.n_controls, _w=weights, _tau=tau):
                xs = list(inputs[:_ns])
                us = list(inputs[_ns:_ns + _nc])
                v, ts, te = inputs[_ns + _nc:]
                integrand = ocp.running_cost(xs, us, v, time_map(ts, te, _tau))
                return 0.5 * (te - ts) * _w * integrand

            builder.add_objective_pointwise(
                cost, [*(builder.var(x[1:, i]) for i in range(ocp.n_states)), *control_args,
                       v_arg, t_start, t_end])

        if s > 0:
            prev = states[s - 1]
            rows = builder.add_rows(EQ, ocp.n_states, f'continuity{s}')
            builder.add_linear(EQ, rows, prev[-1, :], 1.0)
            builder.add_linear(EQ, rows, x[0, :], -1.0)

    for label, values, node in (('initial', ocp.initial_state, states[0][0]),
                                ('final', ocp.final_state, states[-1][-1])):
        for i, value in enumerate(values):
            if value is None:
                continue
            row = builder.add_rows(EQ, 1, f'{label}_x{i}')
            builder.add_linear(EQ, row, node[i], 1.0)
            builder.add_offset(EQ, row, -value)

    for s in range(len(ocp.points)):
        if s not in time_of and s + 1 not in time_of:
            continue
        row = builder.add_rows(INEQ, 1, f'order{s}')
        builder.add_arg_linear(INEQ, row, time_arg(s, 1), 1.0)
        builder.add_arg_linear(INEQ, row, time_arg(s + 1, 1), -1.0)
        builder.add_offset(INEQ, row, ocp.min_segment_duration)

    if ocp.terminal_cost is not None:
        last = states[-1][-1]
        n_seg = len(ocp.points)

        def terminal(*inputs, _ns=ocp.n_states):
            return ocp.terminal_cost(list(inputs[:_ns]), inputs[_ns])

        builder.add_objective_pointwise(
            terminal, [*(builder.var(last[i], 1) for i in range(ocp.n_states)), time_arg(n_seg, 1)])

    return builder.build()


def segment_times(ocp: OptimalControlProblem, layout: NlpLayout, z: np.ndarray) -> np.ndarray:
    """Boundary times at a solution, fixed and free alike"""
    free = [i for i, (lo, hi) in enumerate(ocp.times) if lo < hi]
    times = np.array([lo for lo, _ in ocp.times], dtype=float)
    times[free] = np.asarray(z)[layout.index['t']]
    return times


def round_modes(ocp: OptimalControlProblem, layout: NlpLayout, z: np.ndarray,
                threshold: float = 0.5) -> OptimalControlProblem:
    """The problem with every embedded mode fixed to its values at z rounded at threshold"""
    z = np.asarray(z)
    modes = [(z[layout.index[f'v{s}']] >= threshold).astype(float) if mode is None else mode
             for s, mode in enumerate(ocp.modes)]
    return replace(ocp, modes=modes)
