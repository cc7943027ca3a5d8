import logging

from src.constants import EXIT_INPUT_ERROR, EXIT_INTERNAL_ERROR, EXIT_OK, EXIT_SOLVER_FAILURE
from src.exceptions import InvariantViolation, SolverError
from src.helpers.mission.scenario import load_run_inputs
from src.helpers.mission.solve import solve_solo_baseline
from src.utils.artifacts import write_artifacts

logger = logging.getLogger(__name__)


def handler(args) -> int:
    """Solve every flight alone and write one artifact set per flight, prefixed ``solo_<id>_``"""
    logger.info('Baseline command started', extra={'config': args.config})

    try:
        inputs = load_run_inputs(args.config)
        run = inputs.config.run
        scenario = inputs.scenario
        threads = getattr(args, 'threads', None) or run.threads

        try:
            solo = solve_solo_baseline(scenario, inputs.layout, inputs.wind, inputs.solver, threads)
        except SolverError as e:
            logger.error('Baseline solve failed', extra={'scenario': scenario.name, 'error': str(e)})
            if e.solution is not None:
                fid = next(iter(e.solution.trajectories))
                write_artifacts(e.solution, run.output_dir, run.formats, scenario.earth_radius,
                                prefix=f'solo_{fid}_', failed=True, message=str(e))
            return EXIT_SOLVER_FAILURE

        for fid, solution in solo.items():
            write_artifacts(solution, run.output_dir, run.formats, scenario.earth_radius, prefix=f'solo_{fid}_')
            logger.info('Baseline written', extra={'flight_id': fid, 'doc': solution.total_doc})
        return EXIT_OK

    except InvariantViolation as e:
        logger.error('Internal consistency check failed', extra={'error': str(e)})
        return EXIT_INTERNAL_ERROR

    except (ValueError, OSError) as e:
        logger.warning('Baseline input rejected', extra={'error': str(e)})
        return EXIT_INPUT_ERROR

    except Exception as e:
        logger.error('Unexpected error in baseline command', extra={'error': str(e)})
        return EXIT_INTERNAL_ERROR
