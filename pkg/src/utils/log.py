import logging
import os
import sys
from typing import Optional

from src.constants import LOG_LEVEL_ENV

# attributes every LogRecord has; anything else came in through ``extra``
_RECORD_FIELDS = set(vars(logging.LogRecord('', 0, '', 0, '', (), None))) | {'message', 'asctime'}


class StructuredFormatter(logging.Formatter):
    """Appends the ``extra`` fields of a record as key=value pairs"""

    def format(self, record: logging.LogRecord) -> str:
        line = super().format(record)
        fields = {k: v for k, v in vars(record).items() if k not in _RECORD_FIELDS}
        if fields:
            line += ' | ' + ' '.join(f'{k}={_render(v)}' for k, v in sorted(fields.items()))
        return line


def _render(value) -> str:
    if isinstance(value, float):
        return f'{value:.6g}'
    text = str(value)
    return f'"{text}"' if ' ' in text else text


def configure_logging(verbose: bool = False, level: Optional[str] = None) -> None:
    if verbose:
        level = 'DEBUG'
    level = (level or os.environ.get(LOG_LEVEL_ENV, 'INFO')).upper()
    if level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR'):
        raise ValueError(f'Log level {level} not allowed. Allowed levels: DEBUG, INFO, WARNING, ERROR')
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(StructuredFormatter('%(asctime)s %(levelname)s %(name)s: %(message)s'))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level)
