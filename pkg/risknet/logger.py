import os
import logging
from logging.config import dictConfig

from pydantic import BaseModel

from risknet.configs import config

LOGS_DIR = config['base_dir'] / 'logs'
if not os.path.exists(LOGS_DIR):
    os.makedirs(LOGS_DIR)


class LogConfig(BaseModel):
    """Logging configuration used by the library and the CLI."""

    LOGGER_NAME: str = 'risknet'
    DEFAULT_LOG_FORMAT: str = '%(message)s'
    FILE_LOG_FORMAT: str = '%(asctime)s | %(levelname)s | %(name)s | %(message)s'
    LOG_LEVEL: str = config['log_level']
    MAX_FILE_SIZE: int = 1024 * 1024 * 100  # 100 MB

    version = 1
    disable_existing_loggers = False

    formatters = {
        'default': {
            'format': DEFAULT_LOG_FORMAT,
            'datefmt': '%Y-%m-%d %H:%M:%S',
        },
        'file_formatter': {
            'format': FILE_LOG_FORMAT,
            'datefmt': '%Y-%m-%d %H:%M:%S',
        },
    }
    handlers = {
        'estimation_file': {
            'formatter': 'file_formatter',
            'filename': LOGS_DIR / 'estimation.log',
            'class': 'logging.handlers.RotatingFileHandler',
            'maxBytes': MAX_FILE_SIZE,
            'backupCount': 3,
            'delay': True,
        },
        'file': {
            'formatter': 'file_formatter',
            'filename': LOGS_DIR / 'main.log',
            'class': 'logging.handlers.RotatingFileHandler',
            'maxBytes': MAX_FILE_SIZE,
            'backupCount': 3,
            'delay': True,
        },
        'default': {
            'formatter': 'default',
            'class': 'rich.logging.RichHandler',
            'show_path': False,
            'markup': False,
        },
    }
    loggers = {
        'risknet': {
            'handlers': ['default', 'file'],
            'level': LOG_LEVEL,
        },
        'estimation': {
            'handlers': ['estimation_file'],
            'level': LOG_LEVEL,
        },
    }


dictConfig(LogConfig().dict())
logger = logging.getLogger('risknet')
estimation_logger = logging.getLogger('estimation')


def set_level(level: str) -> None:
    config['log_level'] = level.upper()
    logger.setLevel(config['log_level'])
    estimation_logger.setLevel(config['log_level'])
