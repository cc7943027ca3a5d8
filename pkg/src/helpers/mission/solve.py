"""End-to-end mission solves: transcribe, warm start, solve, report.

A formation solve whose modes are not bang-bang within the mode tolerance is
refined: alpha is rounded at 0.5, fixed, and the NLP re-solved over the
continuous variables only.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Dict, Optional

import numpy as np

from src.constants import FORMATION_MIN_SPACING_B, MODE_THRESHOLD, MODE_TOLERANCE
from src.exceptions import InvariantViolation, SolverError
from src.helpers.collocation.mission_transcription import MissionTranscription, transcribe
from src.helpers.collocation.radau import radau_quadrature
from src.helpers.geodesy import central_angle_rad
from src.helpers.mission.doc import compute_doc
from src.helpers.mission.events import extract_events
from src.helpers.mission.guess import build_formation_guess, build_initial_guess
from src.helpers.nlp.backends import solve as solve_nlp
from src.helpers.performance import tsfc
from src.helpers.windfield import eval_wind_array
from src.models.mission import FlightMetrics, FlightTrajectory, MissionScenario, MissionSolution, SegmentLayout
from src.models.solver import SolverConfig
from src.models.wind import RbfWindModel

logger = logging.getLogger(__name__)

_FUEL_QUADRATURE_RTOL = 1e-4
_REFINE_TOL = 1e-6
_SPACING_RTOL = 1e-5
_FLOW_RTOL = 1e-3


def flight_trajectory(tr: MissionTranscription, z: np.ndarray, flight_id: str) -> FlightTrajectory:
    """Start node plus every collocation point, times in seconds after the epoch"""
    samples = tr.segments(z, flight_id)
    t = np.concatenate([samples[0].times[:1], *(s.times[1:] for s in samples)])
    states = np.vstack([samples[0].states[:1], *(s.states[1:] for s in samples)])
    controls = np.vstack([samples[0].controls[:1], *(s.controls for s in samples)])
    vE = np.concatenate([[0.0], *(s.vE for s in samples)])
    return FlightTrajectory(flight_id=flight_id, t=t, lat=np.degrees(states[:, 0]), lon=np.degrees(states[:, 1]),
                            chi=np.degrees(states[:, 2]), V=states[:, 3], m=states[:, 4], T=controls[:, 0],
                            CL=controls[:, 1], mu=np.degrees(controls[:, 2]), vE=vE)


def _ground_speed(wind: Optional[RbfWindModel], states: np.ndarray) -> np.ndarray:
    chi, V = states[:, 2], states[:, 3]
    east, north = V * np.sin(chi), V * np.cos(chi)
    if wind is not None:
        w = eval_wind_array(wind, np.degrees(states[:, 0]), np.degrees(states[:, 1]))
        east, north = east + w[:, 0], north + w[:, 1]
    return np.hypot(east, north)


def flight_metrics(tr: MissionTranscription, z: np.ndarray, flight_id: str) -> FlightMetrics:
    scenario = tr.scenario
    samples = tr.segments(z, flight_id)
    flight_time = float(samples[-1].t_end - samples[0].t_start)
    fuel = float(scenario.flight(flight_id).m_I - samples[-1].states[-1, 4])
    distance = sum(float(radau_quadrature(s.segment, _ground_speed(tr.wind, s.states[1:]), s.t_start, s.t_end))
                   for s in samples)
    doc = compute_doc(flight_time, fuel, scenario.alpha_t, scenario.alpha_f)
    return FlightMetrics(flight_time_s=flight_time, fuel_burn_kg=fuel, distance_m=distance, doc=doc)


def quadrature_fuel(tr: MissionTranscription, z: np.ndarray, flight_id: str) -> float:
    """Radau quadrature of the fuel flow, saving applied in formation"""
    perf = tr.scenario.performance(flight_id)
    saving = tr.scenario.saving(flight_id) if tr.formation_enabled else 0.0
    total = 0.0
    for s in tr.segments(z, flight_id):
        flow = s.controls[:, 0] * tsfc(perf, s.states[1:, 3]) * (1.0 - saving * s.vE)
        total += float(radau_quadrature(s.segment, flow, s.t_start, s.t_end))
    return total


def mode_max_fraction(tr: MissionTranscription, z: np.ndarray) -> float:
    """Largest distance of any mode value from {0, 1}"""
    values = [np.minimum(v, 1.0 - v) for v in tr.mode_values(z).values()]
    values += [np.minimum(a, 1.0 - a) for a in tr.alpha_values(z).values()]
    return float(max((np.max(v) for v in values if v.size), default=0.0))


def assemble_solution(tr: MissionTranscription, nlp) -> MissionSolution:
    z = nlp.z
    trajectories = {fid: flight_trajectory(tr, z, fid) for fid in tr.flight_ids}
    knots = tr.knot_times(z)
    alpha = {}
    if tr.pairs:
        shared_times = tr.segments(z, tr.pairs[0][1])[1].times[1:]
        alpha = {pair: (shared_times, values) for pair, values in tr.alpha_values(z).items()}
    metrics = {fid: flight_metrics(tr, z, fid) for fid in tr.flight_ids}
    fraction = mode_max_fraction(tr, z)
    return MissionSolution(
        scenario_name=tr.scenario.name, epoch=tr.scenario.epoch, formation_enabled=tr.formation_enabled,
        trajectories=trajectories, alpha=alpha, knots=knots,
        events=extract_events(alpha, knots, trajectories, MODE_THRESHOLD), metrics=metrics,
        total_doc=sum(m.doc for m in metrics.values()), objective=tr.doc_objective(z), nlp=nlp,
        mode_max_fraction=fraction, switched=fraction <= MODE_TOLERANCE)


def pair_spacing(tr: MissionTranscription, z: np.ndarray) -> Dict:
    """Distance in meters between every two formation members at the shared collocation points"""
    out = {}
    for ahead, behind in tr.scenario.order.all_pairs():
        a, b = tr.segments(z, ahead)[1].states[1:], tr.segments(z, behind)[1].states[1:]
        out[(ahead, behind)] = tr.scenario.earth_radius * central_angle_rad(a[:, 0], a[:, 1], b[:, 0], b[:, 1])
    return out


def formation_flow_error(tr: MissionTranscription, z: np.ndarray, flight_id: str) -> float:
    """Largest relative gap between the collocated fuel flow and the reduced flow at the points in formation"""
    segment = tr.segments(z, flight_id)[1]
    in_formation = segment.vE >= 1.0 - MODE_TOLERANCE
    if not np.any(in_formation):
        return 0.0
    perf = tr.scenario.performance(flight_id)
    rate = -(segment.segment.D @ segment.states[:, 4]) * 2.0 / (segment.t_end - segment.t_start)
    flow = segment.controls[:, 0] * tsfc(perf, segment.states[1:, 3])
    expected = (1.0 - tr.scenario.saving(flight_id) * segment.vE) * flow
    return float(np.max(np.abs(rate - expected)[in_formation] / flow[in_formation]))


def check_invariants(tr: MissionTranscription, solution: MissionSolution) -> None:
    scenario = tr.scenario
    for fid, m in solution.metrics.items():
        if m.doc != compute_doc(m.flight_time_s, m.fuel_burn_kg, scenario.alpha_t, scenario.alpha_f):
            raise InvariantViolation(f'Flight {fid}: reported DOC does not match its time and fuel')
        if m.fuel_burn_kg < 0.0:
            raise InvariantViolation(f'Flight {fid}: negative fuel burn {m.fuel_burn_kg:.3f} kg')
        integrated = quadrature_fuel(tr, solution.nlp.z, fid)
        if abs(integrated - m.fuel_burn_kg) > _FUEL_QUADRATURE_RTOL * max(m.fuel_burn_kg, 1.0):
            raise InvariantViolation(f'Flight {fid}: fuel burn {m.fuel_burn_kg:.3f} kg disagrees with the '
                                     f'integrated fuel flow {integrated:.3f} kg')
    if not tr.formation_enabled:
        return
    floor = FORMATION_MIN_SPACING_B * scenario.performance(scenario.order.leader).b
    for (ahead, behind), distance in pair_spacing(tr, solution.nlp.z).items():
        closest = float(np.min(distance))
        if closest < floor * (1.0 - _SPACING_RTOL):
            raise InvariantViolation(f'Flights {ahead} and {behind} come within {closest:.1f} m, '
                                     f'below the {floor:.1f} m separation')
    for fid in scenario.order.benefiting:
        error = formation_flow_error(tr, solution.nlp.z, fid)
        if error > _FLOW_RTOL:
            raise InvariantViolation(f'Flight {fid}: fuel flow in formation off the reduced flow by {error:.2e}')


def run_transcription(tr: MissionTranscription, config: SolverConfig, warm_start: np.ndarray) -> MissionSolution:
    """Solve and assemble without judging the status"""
    nlp = solve_nlp(tr.problem, config, warm_start)
    solution = assemble_solution(tr, nlp)
    logger.info('Mission solve finished', extra={'scenario': tr.scenario.name, 'status': nlp.status.value,
                                                 'iterations': nlp.iterations, 'doc': solution.total_doc,
                                                 'mode_fraction': solution.mode_max_fraction})
    return solution


def _require_optimal(tr: MissionTranscription, solution: MissionSolution) -> MissionSolution:
    if not solution.optimal:
        nlp = solution.nlp
        raise SolverError(f'Solver finished with status {nlp.status.value} after {nlp.iterations} iterations '
                          f'(eq {nlp.eq_residual_inf:.2e}, ineq {nlp.ineq_violation_inf:.2e}, '
                          f'stationarity {nlp.kkt_stationarity_inf:.2e}): {nlp.message}', solution)
    check_invariants(tr, solution)
    return solution


def transfer_point(source: MissionTranscription, z: np.ndarray, target: MissionTranscription) -> np.ndarray:
    """Carry the variables two transcriptions share from one solution to the other"""
    problem = target.problem
    lower = np.where(np.isfinite(problem.lower), problem.lower, 0.0)
    upper = np.where(np.isfinite(problem.upper), problem.upper, 0.0)
    return problem.clip(target.layout.pack(source.layout.unpack(z), 0.5 * (lower + upper)))


def _modes_set(tr: MissionTranscription, z: np.ndarray, value: float) -> np.ndarray:
    names = {name: value for name in tr.layout.names() if name.startswith(('alpha/', 'vE/'))}
    return tr.problem.clip(tr.layout.pack(names, z))


def _formation_candidate(scenario: MissionScenario, layout: SegmentLayout, wind, config: SolverConfig,
                         tr: MissionTranscription) -> Optional[MissionSolution]:
    """Relaxed solve started from the optimum of a mission flown in formation all along the shared interval"""
    fixed_tr = transcribe(scenario, layout, wind, formation_enabled=True,
                          fixed_modes={pair: np.ones(layout.n2) for pair in tr.pairs})
    anchored = run_transcription(fixed_tr, config, build_formation_guess(scenario, layout, fixed_tr))
    if not anchored.optimal:
        logger.warning('Formation start not solved to optimality', extra={'scenario': scenario.name,
                                                                          'status': anchored.nlp.status.value})
        return None
    return run_transcription(tr, config, _modes_set(tr, transfer_point(fixed_tr, anchored.nlp.z, tr), 1.0))


def _best_start(scenario: MissionScenario, layout: SegmentLayout, wind, config: SolverConfig,
                tr: MissionTranscription) -> MissionSolution:
    """Best of a solve started apart and one started in formation"""
    apart = run_transcription(tr, config, _modes_set(tr, build_initial_guess(scenario, layout, tr), 0.0))
    if not any(scenario.saving(fid) > 0.0 for fid in scenario.order.benefiting):
        return apart
    together = _formation_candidate(scenario, layout, wind, config, tr)
    candidates = [c for c in (together, apart) if c is not None and c.optimal]
    if not candidates:
        return apart
    best = min(candidates, key=lambda c: c.objective)
    start = 'formation' if best is together else 'apart'
    logger.info('Warm start selected', extra={'scenario': scenario.name, 'start': start, 'doc': best.total_doc})
    return replace(best, notes=[*best.notes, f'warm start: {start}'])


def solve_mission(scenario: MissionScenario, layout: SegmentLayout, wind: Optional[RbfWindModel] = None,
                  config: Optional[SolverConfig] = None, *, formation_enabled: bool = True, refine: bool = True,
                  warm_start: Optional[np.ndarray] = None) -> MissionSolution:
    """Solve the mission; without a warm start a formation mission is started both apart and in formation"""
    config = config or SolverConfig()
    tr = transcribe(scenario, layout, wind, formation_enabled=formation_enabled)
    if warm_start is not None:
        solution = run_transcription(tr, config, warm_start)
    elif tr.formation_enabled:
        solution = _best_start(scenario, layout, wind, config, tr)
    else:
        solution = run_transcription(tr, config, build_initial_guess(scenario, layout, tr))
    solution = _require_optimal(tr, solution)
    if solution.formation_enabled and not solution.switched:
        logger.warning('Modes are not bang-bang', extra={'scenario': scenario.name,
                                                         'mode_fraction': solution.mode_max_fraction,
                                                         'tolerance': MODE_TOLERANCE})
        if refine:
            return refine_modes(solution, scenario, layout, wind, config)
        return replace(solution, notes=[*solution.notes, 'modes fractional; refine_modes recommended'])
    return solution


def rounded_modes(solution: MissionSolution, threshold: float = MODE_THRESHOLD) -> Dict:
    return {pair: (np.asarray(values) >= threshold).astype(float) for pair, (_, values) in solution.alpha.items()}


def refine_modes(solution: MissionSolution, scenario: MissionScenario, layout: SegmentLayout,
                 wind: Optional[RbfWindModel] = None, config: Optional[SolverConfig] = None) -> MissionSolution:
    """Round alpha at 0.5, fix it and re-solve the continuous problem.

    If the rounded problem is not solved to optimality the relaxed solution
    is kept, with a note.
    """
    config = config or SolverConfig()
    relaxed_tr = transcribe(scenario, layout, wind, formation_enabled=True)
    fixed = rounded_modes(solution)
    fixed_tr = transcribe(scenario, layout, wind, formation_enabled=True, fixed_modes=fixed)
    # an already refined solution lives in the layout of its own fixed modes
    source_tr = fixed_tr if solution.refined else relaxed_tr
    refined = run_transcription(fixed_tr, config, transfer_point(source_tr, solution.nlp.z, fixed_tr))
    if not refined.optimal:
        logger.warning('Rounded modes not solved to optimality; keeping relaxed solution',
                       extra={'scenario': scenario.name, 'status': refined.nlp.status.value})
        return replace(solution, notes=[*solution.notes, f'refinement failed ({refined.nlp.status.value}); '
                                                         'relaxed solution kept'])
    check_invariants(fixed_tr, refined)

    relaxed_objective = solution.objective
    if solution.refined and solution.relaxed_objective is not None:
        relaxed_objective = solution.relaxed_objective
    notes = list(solution.notes)
    if refined.objective < relaxed_objective - _REFINE_TOL * abs(relaxed_objective):
        # the relaxed solve stopped at a worse local optimum; restart it from the refined point
        restart = run_transcription(relaxed_tr, config, transfer_point(fixed_tr, refined.nlp.z, relaxed_tr))
        if restart.optimal and restart.objective < relaxed_objective:
            relaxed_objective = restart.objective
        # the refined point is feasible for the relaxation
        relaxed_objective = min(relaxed_objective, refined.objective)
        notes.append('relaxed problem re-solved from the refined point')
    logger.info('Modes refined', extra={'scenario': scenario.name, 'relaxed': relaxed_objective,
                                        'refined': refined.objective})
    return replace(refined, refined=True, relaxed_objective=relaxed_objective, notes=notes)


def _solve_solo(scenario: MissionScenario, layout: SegmentLayout, wind, config, flight_id: str) -> MissionSolution:
    solo_layout = layout.restricted([flight_id])
    tr = transcribe(scenario, solo_layout, wind, flight_ids=[flight_id], formation_enabled=False)
    z0 = build_initial_guess(scenario, solo_layout, tr)
    return _require_optimal(tr, run_transcription(tr, config, z0))


def solve_solo_baseline(scenario: MissionScenario, layout: SegmentLayout, wind: Optional[RbfWindModel] = None,
                        config: Optional[SolverConfig] = None, threads: Optional[int] = None
                        ) -> Dict[str, MissionSolution]:
    """One single-aircraft solve per flight with the formation mode off"""
    config = config or SolverConfig()
    with ThreadPoolExecutor(max_workers=threads or len(scenario.flights)) as pool:
        futures = {fid: pool.submit(_solve_solo, scenario, layout, wind, config, fid) for fid in scenario.flight_ids}
        return {fid: future.result() for fid, future in futures.items()}
