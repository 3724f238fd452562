"""Utility functions for the PGT toolkit."""

import logging
import os
import sys
import uuid
from typing import Optional

from .config import config

# Import rich console functionality
try:
    from .rich_console import RichConsole, get_rich_console
    RICH_AVAILABLE = True
except ImportError:
    RICH_AVAILABLE = False
    RichConsole = None

# Library modules log under this namespace via logging.getLogger(__name__)
LOGGER_NAMESPACE = "scripts"


def make_run_id() -> str:
    """Generate a short 8-character UUID for run tracking."""
    return str(uuid.uuid4())[:8]


def setup_logger(
    run_id: str,
    command: str = "pgt",
    use_rich: bool = True,
    enable_file_logging: Optional[bool] = None,
    level: Optional[str] = None,
) -> logging.Logger:
    """Set up the package logger for one CLI run.

    Args:
        run_id: Short id of this run
        command: Subcommand name, used for the log directory
        use_rich: Whether to use rich formatting for console output
        enable_file_logging: Write execution.log under the logs dir (default: config)
        level: Console level name (default: config)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(LOGGER_NAMESPACE)
    logger.setLevel(logging.DEBUG)
    # stdout is reserved for reports
    logger.propagate = False

    # Clear any existing handlers to avoid duplicates
    logger.handlers.clear()

    if use_rich and RICH_AVAILABLE:
        try:
            from rich.logging import RichHandler
            console_handler = RichHandler(
                console=get_rich_console().console,
                show_time=False,
                show_path=False,
                markup=False,
            )
        except ImportError:
            console_handler = logging.StreamHandler(sys.stderr)
    else:
        console_handler = logging.StreamHandler(sys.stderr)

    console_level = getattr(logging, (level or config.log_level).upper(), logging.INFO)
    console_handler.setLevel(console_level)
    console_handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(console_handler)

    if enable_file_logging is None:
        enable_file_logging = config.log_to_file

    if enable_file_logging:
        # {logs_dir}/{run_id}/{command}/execution.log
        log_dir = config.logs_dir / run_id / command
        os.makedirs(log_dir, exist_ok=True)
        log_file = log_dir / "execution.log"

        file_handler = logging.FileHandler(log_file, mode="a", encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(
            logging.Formatter(
                "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
            )
        )
        logger.addHandler(file_handler)
        logger.debug(f"Log file: {log_file}")

    logger.debug(f"PGT logger initialized - run: {run_id} ({command})")
    return logger


def get_rich_console_instance() -> Optional["RichConsole"]:
    """Get rich console instance if available, otherwise None."""
    if RICH_AVAILABLE:
        return get_rich_console()
    return None
