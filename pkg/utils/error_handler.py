"""
Error handler for gauge_sim
Maps failures to exit codes and one-line messages on standard error
"""

import logging
import sys
from typing import TextIO

from core.errors import ConfigError, GaugeSimError, LatticeTooLargeError, WaveInstabilityError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2


def exit_code_for(error: BaseException) -> int:
    """Exit status for a failed run: 1 for configuration errors, 2 for everything else."""
    if isinstance(error, ConfigError):
        return EXIT_CONFIG_ERROR
    return EXIT_RUNTIME_ERROR


def error_message(error: BaseException) -> str:
    """
    One-line description of an error for the terminal

    Args:
        error: The exception that ended the run

    Returns:
        Message text without a trailing newline
    """
    error_type = type(error).__name__
    if isinstance(error, ConfigError):
        key = f" [{error.key}]" if error.key else ""
        return f"config error ({error.kind}){key}: {error}"
    if isinstance(error, WaveInstabilityError):
        return f"numeric error: {error} (reduce the time step)"
    if isinstance(error, LatticeTooLargeError):
        return f"numeric error: {error} (use a smaller lattice)"
    if isinstance(error, GaugeSimError):
        return f"run error ({error_type}): {error}"
    if isinstance(error, (ArithmeticError, ValueError)):
        return f"numeric error ({error_type}): {error}"
    if isinstance(error, OSError):
        return f"i/o error: {error}"
    return f"unexpected error ({error_type}): {error}"


def handle_error(error: BaseException, stream: TextIO = None) -> int:
    """
    Log a failed run and report it on standard error

    Args:
        error: The exception that ended the run
        stream: Destination of the one-line message, standard error by default

    Returns:
        Process exit status
    """
    code = exit_code_for(error)
    if code == EXIT_CONFIG_ERROR:
        logger.error(f"Configuration rejected: {error}")
    else:
        logger.error("Run failed", exc_info=error)
    print(error_message(error).splitlines()[0], file=stream or sys.stderr)
    return code
