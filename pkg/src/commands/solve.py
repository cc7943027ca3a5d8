import logging
from pathlib import Path

from src.constants import EXIT_INPUT_ERROR, EXIT_INTERNAL_ERROR, EXIT_OK, EXIT_SOLVER_FAILURE
from src.exceptions import InvariantViolation, SolverError
from src.helpers.mission.analysis import compare_with_solo
from src.helpers.mission.scenario import load_run_inputs
from src.helpers.mission.solve import solve_mission, solve_solo_baseline
from src.utils.artifacts import create_comparison_text, dump_json, write_artifacts

logger = logging.getLogger(__name__)


def handler(args) -> int:
    """
    Solve the formation mission of a run configuration and write its artifacts.

    With ``--compare`` the solo baselines are solved too and a
    formation-versus-solo comparison is written next to the summary.
    """
    logger.info('Solve command started', extra={'config': args.config})

    try:
        inputs = load_run_inputs(args.config)
        run = inputs.config.run
        scenario = inputs.scenario

        try:
            solution = solve_mission(scenario, inputs.layout, inputs.wind, inputs.solver)
        except SolverError as e:
            logger.error('Mission solve failed', extra={'scenario': scenario.name, 'error': str(e)})
            if e.solution is not None:
                write_artifacts(e.solution, run.output_dir, run.formats, scenario.earth_radius,
                                failed=True, message=str(e))
            return EXIT_SOLVER_FAILURE

        written = write_artifacts(solution, run.output_dir, run.formats, scenario.earth_radius)

        if getattr(args, 'compare', False):
            threads = getattr(args, 'threads', None) or run.threads
            solo = solve_solo_baseline(scenario, inputs.layout, inputs.wind, inputs.solver, threads)
            comparison = compare_with_solo(solution, solo)
            row = {'label': scenario.name, 'comparison': comparison.as_dict()}
            Path(run.output_dir, 'comparison.json').write_text(dump_json(row), encoding='utf-8')
            Path(run.output_dir, 'comparison.txt').write_text(
                create_comparison_text('Formation versus solo', [row]), encoding='utf-8')

        logger.info('Solve completed', extra={'scenario': scenario.name, 'total_doc': solution.total_doc,
                                              'events': len(solution.events), 'artifacts': len(written)})
        return EXIT_OK

    except SolverError as e:
        logger.error('Baseline solve failed', extra={'error': str(e)})
        return EXIT_SOLVER_FAILURE

    except InvariantViolation as e:
        logger.error('Internal consistency check failed', extra={'error': str(e)})
        return EXIT_INTERNAL_ERROR

    except (ValueError, OSError) as e:
        logger.warning('Solve input rejected', extra={'error': str(e)})
        return EXIT_INPUT_ERROR

    except Exception as e:
        logger.error('Unexpected error in solve command', extra={'error': str(e)})
        return EXIT_INTERNAL_ERROR
