"""Knotted transcription of a formation mission into one sparse NLP.

Each flight's cruise is split by two soft knots shared by all flights into
I1 = [t_I, k1], I2 = [k1, k2] and I3 = [k2, t_F]. Formation is only possible
on I2, where every flight uses the same number of flipped-Radau points, so
the aircraft share their physical collocation times there.

Unknowns are normalised: angles in radians, V / 250 m/s, m / heaviest
initial mass, thrust / (0.1 * heaviest mass * g0) and time as
(t - epoch) / (R_E / 250 m/s).
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.constants import G0, MIN_SEGMENT_DURATION_S
from src.exceptions import EnvelopeError, TranscriptionError
from src.helpers import performance
from src.helpers.collocation.blocks import EQ, INEQ, Arg, NlpBuilder
from src.helpers.collocation.ocp import add_collocation_defects
from src.helpers.collocation.radau import RadauSegment, flipped_radau_points, time_map
from src.helpers.dynamics import lift_balance_residual, state_derivative
from src.helpers.geodesy import central_angle_rad, initial_bearing
from src.helpers.logic import coupled_modes, couple_modes, formation_band_residuals
from src.helpers.mission.doc import cruise_atmosphere, nominal_flight_estimate
from src.helpers.nlp.problem import NlpLayout, NlpProblem
from src.models.aircraft import AircraftControl, AircraftState
from src.models.geo import NormalizationScales
from src.models.mission import MissionScenario, SegmentLayout
from src.models.wind import RbfWindModel

logger = logging.getLogger(__name__)

N_STATES = 5
N_CONTROLS = 3
THRUST_SCALE_FRACTION = 0.1
LAT_MARGIN_DEG = 25.0
LON_MARGIN_DEG = 60.0
POLAR_LIMIT_DEG = 85.0
FINAL_TIME_SLACK_S = 3600.0

Pair = Tuple[str, str]


@dataclass
class SegmentSample:
    """One interval of one flight at a solution, in SI units and radians"""
    segment: RadauSegment
    t_start: float
    t_end: float
    states: np.ndarray
    controls: np.ndarray
    vE: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return time_map(self.t_start, self.t_end, self.segment.nodes)


@dataclass
class FlightBlock:
    flight_id: str
    counts: Tuple[int, int, int]
    segments: List[RadauSegment]
    states: List[np.ndarray]
    controls: List[np.ndarray]
    t_initial: Arg
    t_final: int
    mode: Arg
    envelope: dict


@dataclass
class MissionTranscription:
    problem: NlpProblem
    layout: NlpLayout
    scenario: MissionScenario
    segment_layout: SegmentLayout
    scales: NormalizationScales
    thrust_scale: float
    flights: Dict[str, FlightBlock]
    knots: np.ndarray
    pairs: List[Pair]
    alpha: Dict[Pair, Arg]
    formation_enabled: bool
    j_ref: float
    fixed_modes: bool = False
    wind: Optional[RbfWindModel] = None

    @property
    def flight_ids(self) -> List[str]:
        return list(self.flights)

    def seconds(self, t_hat) -> np.ndarray:
        """Normalised time to seconds after the scenario epoch"""
        return np.asarray(t_hat, dtype=float) * self.scales.time_scale

    def normalised_time(self, seconds) -> np.ndarray:
        return np.asarray(seconds, dtype=float) / self.scales.time_scale

    def knot_times(self, z: np.ndarray) -> Tuple[float, float]:
        k = self.seconds(np.asarray(z)[self.knots])
        return float(k[0]), float(k[1])

    def boundary_times(self, z: np.ndarray, flight_id: str) -> np.ndarray:
        """(t_I, k1, k2, t_F) in seconds after the epoch"""
        block = self.flights[flight_id]
        z = np.asarray(z)
        t_i = arg_values(block.t_initial, z)[0]
        return self.seconds([t_i, z[self.knots[0]], z[self.knots[1]], z[block.t_final]])

    def alpha_values(self, z: np.ndarray) -> Dict[Pair, np.ndarray]:
        return {pair: arg_values(arg, z) for pair, arg in self.alpha.items()}

    def mode_values(self, z: np.ndarray) -> Dict[str, np.ndarray]:
        return {fid: arg_values(block.mode, z) for fid, block in self.flights.items()}

    def doc_objective(self, z: np.ndarray) -> float:
        """The NLP objective in cost units"""
        return self.problem.objective(z) * self.j_ref

    def segments(self, z: np.ndarray, flight_id: str) -> List[SegmentSample]:
        block = self.flights[flight_id]
        z = np.asarray(z, dtype=float)
        times = self.boundary_times(z, flight_id)
        state_scale = np.array([1.0, 1.0, 1.0, self.scales.speed_scale, self.scales.mass_scale])
        control_scale = np.array([self.thrust_scale, 1.0, 1.0])
        out = []
        for s, segment in enumerate(block.segments):
            states = z[block.states[s]] * state_scale
            controls = z[block.controls[s]] * control_scale
            mode = arg_values(block.mode, z) if s == 1 else np.zeros(segment.N)
            out.append(SegmentSample(segment, times[s], times[s + 1], states, controls, mode))
        return out


def arg_values(arg: Arg, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z)
    return np.where(arg.index >= 0, z[np.where(arg.index >= 0, arg.index, 0)], arg.value)


def _unwrap_lon(lon_from: float, lon_to: float) -> float:
    return lon_from + (lon_to - lon_from + 180.0) % 360.0 - 180.0


def initial_heading_deg(scenario: MissionScenario, flight_id: str) -> float:
    flight = scenario.flight(flight_id)
    if flight.chi_I is not None:
        return flight.chi_I
    return initial_bearing(flight.origin, flight.destination)


def _check_boundary_values(flight_id: str, flight, perf, env) -> None:
    v_lo, v_hi = env['V']
    for name, value in (('V_I', flight.V_I), ('V_F', flight.V_F)):
        if not v_lo <= value <= v_hi:
            raise EnvelopeError(f'Flight {flight_id}: {name} = {value} m/s outside the envelope '
                                f'[{v_lo:.1f}, {v_hi:.1f}] m/s')
    if not perf.m_min < flight.m_I <= perf.m_max:
        raise EnvelopeError(f'Flight {flight_id}: m_I = {flight.m_I} kg outside ({perf.m_min}, {perf.m_max}]')


def _flight_rhs(scenario: MissionScenario, flight_id: str, atmos, wind: Optional[RbfWindModel],
                saving: float, scales: NormalizationScales, thrust_scale: float):
    perf = scenario.performance(flight_id)
    wind_arg = wind if wind is not None else (0.0, 0.0)
    t0, vs, ms = scales.time_scale, scales.speed_scale, scales.mass_scale

    def rhs(states, extra, t):
        phi, lam, chi, v_hat, m_hat = states
        thrust, cl, mu, mode = extra
        x = AircraftState(phi, lam, chi, v_hat * vs, m_hat * ms)
        u = AircraftControl(thrust * thrust_scale, cl, mu)
        f = state_derivative(x, u, wind_arg, mode, saving, perf, atmos, scenario.earth_radius)
        return [t0 * f.phi, t0 * f.lam, t0 * f.chi, (t0 / vs) * f.V, (t0 / ms) * f.m]

    return rhs


def transcribe(scenario: MissionScenario, layout: SegmentLayout, wind: Optional[RbfWindModel] = None, *,
               flight_ids: Optional[Sequence[str]] = None, formation_enabled: bool = True,
               fixed_modes: Optional[Dict[Pair, np.ndarray]] = None) -> MissionTranscription:
    """Build the NLP of the embedded mission problem.

    ``flight_ids`` restricts the problem to a subset of flights (a solo
    baseline transcribes one flight). Formation logic is only added when
    every formation member is present and ``formation_enabled`` is set.
    ``fixed_modes`` replaces the alpha variables by given per-node values.
    Band rows a fixed mode satisfies identically are left out.
    """
    flight_ids = list(flight_ids or scenario.flight_ids)
    for fid in flight_ids:
        try:
            layout.for_flight(fid)
        except KeyError as e:
            raise TranscriptionError(str(e.args[0]))
    formation = formation_enabled and set(scenario.order.roles) <= set(flight_ids)
    order = scenario.order

    heaviest = max(scenario.flight(fid).m_I for fid in flight_ids)
    scales = NormalizationScales.for_mission(heaviest, scenario.earth_radius)
    thrust_scale = THRUST_SCALE_FRACTION * heaviest * G0
    atmos = cruise_atmosphere(scenario)
    epoch = scenario.epoch
    n2 = layout.n2

    def t_hat(seconds: float) -> float:
        return (seconds - epoch) / scales.time_scale

    gap = MIN_SEGMENT_DURATION_S / scales.time_scale
    departures = {fid: scenario.flight(fid).departure_bounds(scenario.free_departure_window) for fid in flight_ids}
    latest_arrivals = {fid: scenario.flight(fid).scheduled_arrival + scenario.max_arrival_deviation
                       for fid in flight_ids}
    earliest_common = max(lo for lo, _ in departures.values())
    latest_common = min(latest_arrivals.values())
    if not earliest_common + 3 * MIN_SEGMENT_DURATION_S < latest_common:
        raise TranscriptionError(
            f'Knot window is empty: flights are only jointly airborne between '
            f'{earliest_common - epoch:.0f} s and {latest_common - epoch:.0f} s after the epoch')

    builder = NlpBuilder()
    knots = builder.add_variables('knots', 2, t_hat(min(lo for lo, _ in departures.values())),
                                  t_hat(max(latest_arrivals.values())))
    k1, k2 = int(knots[0]), int(knots[1])

    pairs: List[Pair] = order.adjacent_pairs() if formation else []
    alpha: Dict[Pair, Arg] = {}
    modes: Dict[str, Arg] = {}
    if formation:
        if fixed_modes is None:
            for ahead, behind in pairs:
                alpha[(ahead, behind)] = builder.var(builder.add_variables(f'alpha/{ahead}/{behind}', n2, 0.0, 1.0))
            for fid in order.benefiting:
                modes[fid] = builder.var(builder.add_variables(f'vE/{fid}', n2, 0.0, 1.0))
        else:
            missing = [p for p in pairs if p not in fixed_modes]
            if missing:
                raise TranscriptionError(f'No fixed mode values for pairs {missing}')
            for pair in pairs:
                values = np.clip(np.asarray(fixed_modes[pair], dtype=float), 0.0, 1.0)
                if values.shape != (n2,):
                    raise TranscriptionError(f'Fixed modes for {pair} need {n2} values, got {values.shape}')
                alpha[pair] = builder.const(values, n2)
            for fid, value in coupled_modes({p: alpha[p].value for p in pairs}, order).items():
                if fid != order.leader:
                    modes[fid] = builder.const(value, n2)

    lat_span = [f for fid in flight_ids for f in (scenario.flight(fid).origin.lat, scenario.flight(fid).destination.lat)]
    lat_lo = np.radians(max(-POLAR_LIMIT_DEG, min(lat_span) - LAT_MARGIN_DEG))
    lat_hi = np.radians(min(POLAR_LIMIT_DEG, max(lat_span) + LAT_MARGIN_DEG))

    j_ref = 0.0
    blocks: Dict[str, FlightBlock] = {}
    for fid in flight_ids:
        flight = scenario.flight(fid)
        perf = scenario.performance(fid)
        env = performance.envelope_bounds(perf, atmos)
        _check_boundary_values(fid, flight, perf, env)
        j_ref += nominal_flight_estimate(scenario, fid).doc(scenario.alpha_t, scenario.alpha_f)

        lon_f = _unwrap_lon(flight.origin.lon, flight.destination.lon)
        chi_i = np.radians(initial_heading_deg(scenario, fid))
        state_lo = [lat_lo, np.radians(min(flight.origin.lon, lon_f) - LON_MARGIN_DEG), chi_i - np.pi,
                    env['V'][0] / scales.speed_scale, perf.m_min / scales.mass_scale]
        state_hi = [lat_hi, np.radians(max(flight.origin.lon, lon_f) + LON_MARGIN_DEG), chi_i + np.pi,
                    env['V'][1] / scales.speed_scale, perf.m_max / scales.mass_scale]
        control_lo = [env['T'][0] / thrust_scale, env['CL'][0], env['mu'][0]]
        control_hi = [env['T'][1] / thrust_scale, env['CL'][1], env['mu'][1]]

        dep_lo, dep_hi = departures[fid]
        if dep_lo < dep_hi:
            t_initial = builder.var(builder.add_variables(f'{fid}/tI', 1, t_hat(dep_lo), t_hat(dep_hi)))
        else:
            t_initial = builder.const(t_hat(dep_lo), 1)
        t_final = int(builder.add_variables(f'{fid}/tF', 1, t_hat(dep_lo) + 3 * gap,
                                            t_hat(latest_arrivals[fid] + FINAL_TIME_SLACK_S))[0])

        mode = modes.get(fid, builder.const(0.0, n2))
        rhs = _flight_rhs(scenario, fid, atmos, wind, scenario.saving(fid) if formation else 0.0,
                          scales, thrust_scale)
        counts = layout.for_flight(fid)
        boundaries = [t_initial.index[0], k1, k2, t_final]
        fixed_start = t_initial.value[0]

        def time_arg(i, size, _b=boundaries, _t0=fixed_start):
            if _b[i] >= 0:
                return builder.var(_b[i], size)
            return builder.const(_t0, size)

        segments, states, controls = [], [], []
        for s, N in enumerate(counts):
            segment = flipped_radau_points(N)
            x = builder.add_variables(f'{fid}/x{s}', (N + 1, N_STATES), state_lo, state_hi)
            u = builder.add_variables(f'{fid}/u{s}', (N, N_CONTROLS), control_lo, control_hi)
            mode_arg = mode if s == 1 else builder.const(0.0, N)
            control_args = [builder.var(u[:, j]) for j in range(N_CONTROLS)]
            add_collocation_defects(builder, segment, x, [*control_args, mode_arg],
                                    time_arg(s, N), time_arg(s + 1, N), rhs, f'{fid}/defect{s}')
            _add_path_rows(builder, fid, s, x, u, perf, atmos, scales)
            if s > 0:
                rows = builder.add_rows(EQ, N_STATES, f'{fid}/continuity{s}')
                builder.add_linear(EQ, rows, states[-1][-1, :], 1.0)
                builder.add_linear(EQ, rows, x[0, :], -1.0)
            segments.append(segment)
            states.append(x)
            controls.append(u)

        initial = [np.radians(flight.origin.lat), np.radians(flight.origin.lon), chi_i,
                   flight.V_I / scales.speed_scale, flight.m_I / scales.mass_scale]
        rows = builder.add_rows(EQ, N_STATES, f'{fid}/initial')
        builder.add_linear(EQ, rows, states[0][0, :], 1.0)
        builder.add_offset(EQ, rows, -np.asarray(initial))
        final_cols = [0, 1, 3]
        final = [np.radians(flight.destination.lat), np.radians(lon_f), flight.V_F / scales.speed_scale]
        rows = builder.add_rows(EQ, len(final_cols), f'{fid}/final')
        builder.add_linear(EQ, rows, states[-1][-1, final_cols], 1.0)
        builder.add_offset(EQ, rows, -np.asarray(final))

        row = builder.add_rows(INEQ, 1, f'{fid}/knot1_after_departure')
        builder.add_arg_linear(INEQ, row, t_initial, 1.0)
        builder.add_linear(INEQ, row, k1, -1.0)
        builder.add_offset(INEQ, row, gap)
        row = builder.add_rows(INEQ, 1, f'{fid}/knot2_before_arrival')
        builder.add_linear(INEQ, row, k2, 1.0)
        builder.add_linear(INEQ, row, t_final, -1.0)
        builder.add_offset(INEQ, row, gap)
        row = builder.add_rows(INEQ, 1, f'{fid}/arrival_deviation')
        builder.add_linear(INEQ, row, t_final, 1.0)
        builder.add_offset(INEQ, row, -t_hat(latest_arrivals[fid]))

        time_weight = scenario.alpha_t * scales.time_scale
        fuel_weight = scenario.alpha_f * scales.mass_scale
        builder.add_objective_linear(t_final, time_weight)
        if t_initial.index[0] >= 0:
            builder.add_objective_linear(t_initial.index[0], -time_weight)
        else:
            builder.add_objective_constant(-time_weight * t_initial.value[0])
        builder.add_objective_linear(states[0][0, 4], fuel_weight)
        builder.add_objective_linear(states[-1][-1, 4], -fuel_weight)

        blocks[fid] = FlightBlock(fid, counts, segments, states, controls, t_initial, t_final, mode, env)

    row = builder.add_rows(INEQ, 1, 'knot_order')
    builder.add_linear(INEQ, row, k1, 1.0)
    builder.add_linear(INEQ, row, k2, -1.0)
    builder.add_offset(INEQ, row, gap)

    if formation:
        _add_formation_rows(builder, scenario, blocks, alpha, modes, pairs)

    builder.objective_scale = 1.0 / j_ref
    problem, nlp_layout = builder.build()
    logger.info('Transcribed mission', extra={'scenario': scenario.name, 'flights': len(flight_ids),
                                              'formation': formation, 'variables': problem.n,
                                              'equalities': problem.m_eq, 'inequalities': problem.m_ineq})
    return MissionTranscription(problem=problem, layout=nlp_layout, scenario=scenario, segment_layout=layout,
                                scales=scales, thrust_scale=thrust_scale, flights=blocks, knots=knots,
                                pairs=pairs, alpha=alpha, formation_enabled=formation, j_ref=j_ref,
                                fixed_modes=fixed_modes is not None, wind=wind)


def _add_path_rows(builder: NlpBuilder, fid: str, s: int, x: np.ndarray, u: np.ndarray, perf, atmos,
                   scales: NormalizationScales) -> None:
    """Level-flight lift balance and the mass-dependent minimum speed at the collocation points"""
    N = u.shape[0]
    vs, ms = scales.speed_scale, scales.mass_scale
    v_arg, m_arg = builder.var(x[1:, 3]), builder.var(x[1:, 4])

    def balance(v_hat, m_hat, cl, mu):
        state = AircraftState(0.0, 0.0, 0.0, v_hat * vs, m_hat * ms)
        return [lift_balance_residual(state, AircraftControl(0.0, cl, mu), perf, atmos)]

    rows = builder.add_rows(EQ, N, f'{fid}/lift_balance{s}')
    builder.add_pointwise(EQ, [rows], balance, [v_arg, m_arg, builder.var(u[:, 1]), builder.var(u[:, 2])])

    def min_speed(v_hat, m_hat):
        v_min = perf.CVmin * performance.stall_speed(perf, m_hat * ms, atmos.rho)
        return [(v_min - v_hat * vs) / vs]

    rows = builder.add_rows(INEQ, N, f'{fid}/min_speed{s}')
    builder.add_pointwise(INEQ, [rows], min_speed, [v_arg, m_arg])


def _add_formation_rows(builder: NlpBuilder, scenario: MissionScenario, blocks: Dict[str, FlightBlock],
                        alpha: Dict[Pair, Arg], modes: Dict[str, Arg], pairs: List[Pair]) -> None:
    order = scenario.order
    wingspan = scenario.performance(order.leader).b
    earth_radius = scenario.earth_radius

    def position(fid):
        x = blocks[fid].states[1]
        return builder.var(x[1:, 0]), builder.var(x[1:, 1])

    for ahead, behind in order.all_pairs():
        n = blocks[ahead].counts[1]
        pa, pb = position(ahead), position(behind)
        a_arg = alpha.get((ahead, behind))
        if a_arg is not None and np.all(a_arg.index < 0):
            _add_fixed_band_rows(builder, f'band/{ahead}/{behind}', pa, pb, a_arg.value, wingspan, earth_radius)
        elif a_arg is not None:
            def band(lat_a, lon_a, lat_b, lon_b, a):
                distance = earth_radius * central_angle_rad(lat_a, lon_a, lat_b, lon_b)
                rows = formation_band_residuals(distance, a, wingspan)
                return [rows[0], rows[1], rows[4]]

            rows = [builder.add_rows(INEQ, n, f'band/{ahead}/{behind}/{kind}')
                    for kind in ('upper', 'lower', 'floor')]
            builder.add_pointwise(INEQ, rows, band, [*pa, *pb, alpha[(ahead, behind)]])
        else:
            def floor(lat_a, lon_a, lat_b, lon_b):
                distance = earth_radius * central_angle_rad(lat_a, lon_a, lat_b, lon_b)
                return [formation_band_residuals(distance, 0.0, wingspan)[4]]

            rows = builder.add_rows(INEQ, n, f'band/{ahead}/{behind}/floor')
            builder.add_pointwise(INEQ, [rows], floor, [*pa, *pb])

    mode_args = [modes[fid] for fid in order.benefiting]
    alpha_args = [alpha[p] for p in pairs]
    if not any(np.any(a.index >= 0) for a in (*mode_args, *alpha_args)):
        return

    def coupling(*inputs):
        alphas = dict(zip(pairs, inputs[:len(pairs)]))
        vE = dict(zip(order.benefiting, inputs[len(pairs):]))
        return couple_modes(alphas, order, vE)

    n = len(alpha_args[0].index)
    rows = [builder.add_rows(EQ, n, f'coupling/{fid}') for fid in order.benefiting]
    builder.add_pointwise(EQ, rows, coupling, [*alpha_args, *mode_args])


def _add_fixed_band_rows(builder: NlpBuilder, label: str, pa, pb, alpha: np.ndarray, wingspan: float,
                         earth_radius: float) -> None:
    """Band rows for a fixed mode: upper rows where alpha > 0, lower rows where alpha < 1, floor everywhere"""
    def distance(lat_a, lon_a, lat_b, lon_b):
        return earth_radius * central_angle_rad(lat_a, lon_a, lat_b, lon_b)

    for kind, column, nodes in (('upper', 0, np.flatnonzero(alpha > 0.0)),
                                ('lower', 1, np.flatnonzero(alpha < 1.0)),
                                ('floor', 4, np.arange(alpha.size))):
        if nodes.size == 0:
            continue

        def row(lat_a, lon_a, lat_b, lon_b, a, _column=column):
            return [formation_band_residuals(distance(lat_a, lon_a, lat_b, lon_b), a, wingspan)[_column]]

        rows = builder.add_rows(INEQ, nodes.size, f'{label}/{kind}')
        args = [builder.var(p.index[nodes]) for p in (*pa, *pb)]
        builder.add_pointwise(INEQ, [rows], row, [*args, builder.const(alpha[nodes], nodes.size)])
