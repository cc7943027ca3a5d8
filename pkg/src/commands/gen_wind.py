import logging

from pydantic import ValidationError

from src.constants import EXIT_INPUT_ERROR, EXIT_INTERNAL_ERROR, EXIT_OK
from src.helpers.windfield import generate_wind_grid, write_wind_grid
from src.models.wind import WindSynthesisConfig

logger = logging.getLogger(__name__)

SYNTHESIS_OPTIONS = ['lat_min', 'lat_max', 'lon_min', 'lon_max', 'resolution', 'jet_lat', 'jet_width', 'jet_speed',
                     'meander_amplitude', 'meander_wavelength', 'background_u', 'noise', 'seed']


def handler(args) -> int:
    """Write a deterministic synthetic jet-stream grid CSV"""
    logger.info('Generate wind command started', extra={'out': args.out, 'seed': args.seed})

    try:
        options = {k: getattr(args, k) for k in SYNTHESIS_OPTIONS if getattr(args, k, None) is not None}
        try:
            config = WindSynthesisConfig(**options)
        except ValidationError as e:
            raise ValueError(f'Invalid wind synthesis options. Details - {str(e)}')
        frame = generate_wind_grid(config)
        comment = ' '.join(f'{k}={v}' for k, v in config.model_dump(exclude={'timestamp'}).items())
        write_wind_grid(frame, args.out, comment=f'synthetic jet stream {comment}')
        logger.info('Wind grid written', extra={'out': args.out, 'points': len(frame)})
        return EXIT_OK

    except (ValueError, OSError) as e:
        logger.warning('Wind generation input rejected', extra={'error': str(e)})
        return EXIT_INPUT_ERROR

    except Exception as e:
        logger.error('Unexpected error in gen-wind command', extra={'error': str(e)})
        return EXIT_INTERNAL_ERROR
