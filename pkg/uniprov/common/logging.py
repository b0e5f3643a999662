"""
Logging configuration for uniprov

This module provides logging utilities shared by the library and the CLI.
"""

import logging
import sys
from typing import Optional

DEFAULT_LOGGER_NAME = "uniprov"


def configure_logging(
    debug: bool = False, name: str = DEFAULT_LOGGER_NAME, use_stderr: bool = True
) -> logging.Logger:
    """Configure logging for uniprov.

    Args:
        debug: Enable debug logging
        name: Logger name
        use_stderr: Use stderr for logging (keeps command output on stdout clean)

    Returns:
        logging.Logger: Configured logger
    """
    log_level = logging.DEBUG if debug else logging.WARNING

    stream = sys.stderr if use_stderr else sys.stdout

    logging.basicConfig(
        level=log_level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(stream)],
    )

    # Lock acquisition is chatty at DEBUG
    logging.getLogger("filelock").setLevel(logging.WARNING)

    logger = logging.getLogger(name)
    logger.setLevel(log_level)

    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """Get a logger with the specified name.

    Args:
        name: Logger name (defaults to "uniprov")

    Returns:
        logging.Logger: Logger instance
    """
    logger_name = name if name else DEFAULT_LOGGER_NAME
    return logging.getLogger(logger_name)
