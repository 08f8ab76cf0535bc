"""
Centralized logging configuration for kaa
Structured (JSON) or colored console logging with rotating log files
"""

import json
import logging
import logging.handlers
import os
import sys
import traceback
from datetime import datetime, timezone

# extra fields copied into JSON records when present
CONTEXT_FIELDS = (
    'command', 'suite', 'seed', 'samples', 'step', 't', 'n_particles',
    'exit_code', 'duration_ms', 'max_residual',
)


class JSONFormatter(logging.Formatter):
    """JSON formatter for structured logging"""

    def format(self, record: logging.LogRecord) -> str:
        log_data = {
            'timestamp': datetime.now(timezone.utc).isoformat().replace('+00:00', 'Z'),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
            'module': record.module,
            'function': record.funcName,
            'line': record.lineno,
        }

        for name in CONTEXT_FIELDS:
            if hasattr(record, name):
                log_data[name] = getattr(record, name)

        if record.exc_info and record.exc_info[0] is not None:
            log_data['exception'] = {
                'type': record.exc_info[0].__name__,
                'message': str(record.exc_info[1]) if record.exc_info[1] else 'Unknown error',
                'traceback': traceback.format_exception(*record.exc_info)
            }

        return json.dumps(log_data, ensure_ascii=False, default=str)


class ColoredConsoleFormatter(logging.Formatter):
    """Colored formatter for console output (development)"""

    COLORS = {
        'DEBUG': '\033[36m',
        'INFO': '\033[32m',
        'WARNING': '\033[33m',
        'ERROR': '\033[31m',
        'CRITICAL': '\033[35m',
        'RESET': '\033[0m',
    }

    def format(self, record: logging.LogRecord) -> str:
        levelname = record.levelname
        if levelname in self.COLORS:
            record = logging.makeLogRecord(record.__dict__)
            record.levelname = f"{self.COLORS[levelname]}{levelname:8s}{self.COLORS['RESET']}"
        return super().format(record)


def setup_logger(
    name: str = 'kaa',
    log_level: str = None,
    log_dir: str = None,
    json_format: bool = False
) -> logging.Logger:
    """
    Setup and configure logger with console and file handlers

    Args:
        name: Logger name
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_dir: Directory for log files; empty string disables file logging
        json_format: Use JSON format for file logs

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    if logger.handlers:
        return logger

    level_name = log_level or os.getenv('LOG_LEVEL', 'INFO')
    level = getattr(logging, level_name.upper(), logging.INFO)
    logger.setLevel(level)

    # stdout is reserved for command payloads
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)

    if os.getenv('ENVIRONMENT') == 'production' or json_format:
        console_format = JSONFormatter() if json_format else logging.Formatter(
            '%(asctime)s | %(levelname)-8s | %(name)s | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
    else:
        console_format = ColoredConsoleFormatter(
            '%(asctime)s | %(levelname)s | %(name)s | %(message)s',
            datefmt='%H:%M:%S'
        )
    console_handler.setFormatter(console_format)
    logger.addHandler(console_handler)

    log_dir = os.getenv('LOG_DIR', 'logs') if log_dir is None else log_dir
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

        if json_format:
            file_formatter = JSONFormatter()
        else:
            file_formatter = logging.Formatter(
                '%(asctime)s | %(levelname)-8s | %(name)s | %(module)s:%(lineno)d | %(message)s',
                datefmt='%Y-%m-%d %H:%M:%S'
            )

        file_handler = logging.handlers.RotatingFileHandler(
            os.path.join(log_dir, 'app.log'),
            maxBytes=10 * 1024 * 1024,  # 10 MB
            backupCount=5,
            encoding='utf-8'
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(file_formatter)
        logger.addHandler(file_handler)

        error_handler = logging.handlers.RotatingFileHandler(
            os.path.join(log_dir, 'error.log'),
            maxBytes=10 * 1024 * 1024,  # 10 MB
            backupCount=5,
            encoding='utf-8'
        )
        error_handler.setLevel(logging.ERROR)
        error_handler.setFormatter(file_formatter)
        logger.addHandler(error_handler)

    logger.propagate = False

    logger.debug(f"Logger initialized: {name} (level={level_name}, json={json_format})")

    return logger


def get_logger(name: str = 'kaa') -> logging.Logger:
    """Get or create a logger; children of 'kaa' share its handlers"""
    root_name = name.split('.')[0]
    root = logging.getLogger(root_name)
    if not root.handlers:
        json_format = os.getenv('LOG_FORMAT', 'text').lower() == 'json'
        setup_logger(name=root_name, json_format=json_format)
    return logging.getLogger(name)


def set_console_level(level: str, name: str = 'kaa') -> None:
    """Change the logger and console threshold; file handlers keep DEBUG"""
    logger = get_logger(name)
    logger.setLevel(level)
    for handler in logger.handlers:
        if not isinstance(handler, logging.handlers.RotatingFileHandler):
            handler.setLevel(level)


def log_with_context(
    logger: logging.Logger,
    level: int,
    message: str,
    **kwargs
) -> None:
    """Log message with extra context fields"""
    extra = {k: v for k, v in kwargs.items() if v is not None}
    logger.log(level, message, extra=extra)


def log_command(
    logger: logging.Logger,
    command: str,
    exit_code: int,
    duration_ms: float,
    **kwargs
) -> None:
    """Log a finished CLI command with structured data"""
    log_with_context(
        logger,
        logging.INFO if exit_code == 0 else logging.WARNING,
        f"{command} - exit {exit_code} ({duration_ms:.1f}ms)",
        command=command,
        exit_code=exit_code,
        duration_ms=round(duration_ms, 3),
        **kwargs
    )


def log_error(
    logger: logging.Logger,
    message: str,
    exc_info: bool = True,
    **kwargs
) -> None:
    """Log error with exception details"""
    extra = {k: v for k, v in kwargs.items() if v is not None}
    logger.error(message, exc_info=exc_info, extra=extra)
