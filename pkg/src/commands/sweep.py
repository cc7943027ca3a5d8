import logging
from pathlib import Path

from src.constants import EXIT_INPUT_ERROR, EXIT_INTERNAL_ERROR, EXIT_OK, EXIT_SOLVER_FAILURE
from src.exceptions import InvariantViolation
from src.helpers.mission.analysis import sweep_departure_delays, sweep_fuel_savings
from src.helpers.mission.scenario import load_run_inputs
from src.utils.artifacts import create_comparison_text, dump_json

logger = logging.getLogger(__name__)


def handler(args) -> int:
    """
    Re-solve a scenario over departure delays (minutes) or fuel savings
    and write the formation-versus-solo table of every case.
    """
    logger.info('Sweep command started', extra={'config': args.config, 'kind': args.kind})

    try:
        if not args.values:
            raise ValueError('Sweep needs at least one value')
        inputs = load_run_inputs(args.config)
        run = inputs.config.run
        threads = getattr(args, 'threads', None) or run.threads
        common = dict(wind=inputs.wind, config=inputs.solver, threads=threads)

        if args.kind == 'delays':
            flights = args.flights or [inputs.scenario.order.trailing]
            cases = sweep_departure_delays(inputs.scenario, inputs.layout, [60.0 * v for v in args.values],
                                           flights, **common)
        else:
            cases = sweep_fuel_savings(inputs.scenario, inputs.layout, args.values, **common)

        rows = [case.as_dict() for case in cases]
        output_dir = Path(run.output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        (output_dir / f'sweep_{args.kind}.json').write_text(dump_json(rows), encoding='utf-8')
        (output_dir / f'sweep_{args.kind}.txt').write_text(
            create_comparison_text(f'Sweep over {args.kind} for {inputs.scenario.name}', rows), encoding='utf-8')

        failed = sum(1 for case in cases if case.error)
        logger.info('Sweep completed', extra={'cases': len(cases), 'failed': failed})
        return EXIT_SOLVER_FAILURE if failed else EXIT_OK

    except InvariantViolation as e:
        logger.error('Internal consistency check failed', extra={'error': str(e)})
        return EXIT_INTERNAL_ERROR

    except (ValueError, OSError) as e:
        logger.warning('Sweep input rejected', extra={'error': str(e)})
        return EXIT_INPUT_ERROR

    except Exception as e:
        logger.error('Unexpected error in sweep command', extra={'error': str(e)})
        return EXIT_INTERNAL_ERROR
