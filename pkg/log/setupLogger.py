import logging
import os
import sys
from pathlib import Path
from logging.handlers import RotatingFileHandler

# Track if root logger is configured
_root_configured = False

FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def _level_from_env(default: int) -> int:
    name = os.getenv("RLS_LOG_LEVEL")
    if not name:
        return default
    level = logging.getLevelName(name.upper())
    return level if isinstance(level, int) else default


def setup_logging(modules_with_files=None, log_level=logging.INFO, log_dir=None):
    """
    Setup logging with a stderr console handler and module-specific file handlers.

    stdout is kept free for machine-readable output (``list --machine``).

    Args:
        modules_with_files: List of logger names that should have separate log files
        log_level: Logging level (default: INFO, overridden by RLS_LOG_LEVEL)
        log_dir: Directory for the log files (default: RLS_LOG_DIR or log/log_files)
    """
    global _root_configured
    log_level = _level_from_env(log_level)
    log_dir = Path(log_dir or os.getenv("RLS_LOG_DIR", "log/log_files"))

    # Configure root logger only once (for console output)
    if not _root_configured:
        root_logger = logging.getLogger()
        root_logger.setLevel(logging.DEBUG)  # Set to DEBUG to allow all levels

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(log_level)
        console_handler.setFormatter(logging.Formatter(FORMAT, datefmt=DATE_FORMAT))
        root_logger.addHandler(console_handler)

        _root_configured = True

    # Add module-specific file handlers
    if modules_with_files:
        for module_name in modules_with_files:
            module_logger = logging.getLogger(module_name)
            module_logger.setLevel(log_level)

            has_file_handler = any(
                isinstance(h, RotatingFileHandler)
                for h in module_logger.handlers
            )

            if not has_file_handler:
                log_file = log_dir / f'{module_name}.log'
                log_file.parent.mkdir(parents=True, exist_ok=True)

                file_handler = RotatingFileHandler(
                    str(log_file),
                    maxBytes=10*1024*1024,
                    backupCount=5
                )
                file_handler.setLevel(log_level)
                file_handler.setFormatter(logging.Formatter(FORMAT, datefmt=DATE_FORMAT))
                module_logger.addHandler(file_handler)
