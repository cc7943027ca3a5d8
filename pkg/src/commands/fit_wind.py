import logging

import numpy as np

from src.constants import EXIT_INPUT_ERROR, EXIT_INTERNAL_ERROR, EXIT_OK
from src.helpers.windfield import eval_wind_array, fit_rbf, load_wind_grid, save_rbf_model

logger = logging.getLogger(__name__)


def handler(args) -> int:
    """Fit an RBF wind model to a grid CSV and save it in the text model format"""
    logger.info('Fit wind command started', extra={'grid': args.grid, 'out': args.out})

    try:
        grid = load_wind_grid(args.grid, pressure_level=args.pressure_level)
        model = fit_rbf(grid, shape=args.shape, ridge=args.ridge, center_stride=args.stride)
        fitted = eval_wind_array(model, grid.lats, grid.lons)
        residual = float(np.max(np.abs(fitted - np.column_stack([grid.u, grid.v]))))
        save_rbf_model(model, args.out)
        logger.info('Wind model saved', extra={'out': args.out, 'centers': len(model.center_lats),
                                               'shape': model.shape, 'max_residual': residual})
        return EXIT_OK

    except (ValueError, OSError) as e:
        logger.warning('Wind fit input rejected', extra={'error': str(e)})
        return EXIT_INPUT_ERROR

    except Exception as e:
        logger.error('Unexpected error in fit-wind command', extra={'error': str(e)})
        return EXIT_INTERNAL_ERROR
