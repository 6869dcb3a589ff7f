"""
Logging setup for the command line.

Library modules only create ``logging.getLogger(__name__)`` loggers; the CLI
calls :func:`configure_logging` once to attach a rich handler to the package
logger.
"""

import logging
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

PACKAGE_LOGGER = "ssicert"


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Attach a stderr RichHandler to the ``ssicert`` logger.

    Args:
        level: Level name; defaults to SSICERT_LOG_LEVEL.

    Returns:
        The package logger.
    """
    if level is None:
        from ssicert.utils.config import load_settings
        level = load_settings().log_level
    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(level.upper())
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(console=Console(stderr=True), show_path=False,
                          rich_tracebacks=False, log_time_format="[%X]")
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    logger.addHandler(handler)
    logger.propagate = False
    logging.captureWarnings(True)
    return logger
