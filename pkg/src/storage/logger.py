"""
Logging setup for plotminer command runs.

All records go to a rotating file; the console (stderr) shows the requested
level so stdout stays free for JSON output. In the file, records of each CLI
invocation are grouped under a header naming the run.
"""

import logging
import logging.handlers
import os
import sys
from typing import Optional


class RunSeparatorFilter(logging.Filter):
    """
    Tag records with the run label and mark the first record of each run.

    Parameters
    ----------
    run_label : str
        Text identifying the invocation, e.g. ``"extract seed=42"``.
    """

    def __init__(self, run_label: str):
        super().__init__()
        self.run_label = run_label
        self.started = False

    def filter(self, record):
        record.run_label = self.run_label
        record.run_started = not self.started
        self.started = True
        return True


class RunGroupedFormatter(logging.Formatter):
    """Formatter that writes a separator block before the first record of a run."""

    def format(self, record):
        base_format = super().format(record)
        if getattr(record, "run_started", False):
            separator = "\n" + "=" * 80 + "\n"
            separator += f"RUN: {getattr(record, 'run_label', 'unknown')}\n" + "=" * 80 + "\n"
            return separator + base_format
        return base_format


class LoggerSetup:
    """
    Root logger configuration for one CLI invocation.

    Parameters
    ----------
    log_dir : str, optional
        Directory for ``plotminer.log`` (default ``'logs'``). ``None`` disables
        the file handler.
    log_level : int, optional
        Console level (default ``logging.WARNING``).
    run_label : str, optional

    Attributes
    ----------
    log_file : str or None
        Path of the rotating log file.
    """

    FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    DATEFMT = "%Y-%m-%d %H:%M:%S"

    def __init__(self, log_dir: Optional[str] = "logs", log_level: int = logging.WARNING, run_label: str = "plotminer"):
        self.log_dir = log_dir
        self.log_level = log_level
        self.run_label = run_label
        self.log_file = None
        if log_dir is not None:
            os.makedirs(log_dir, exist_ok=True)
            self.log_file = os.path.join(log_dir, "plotminer.log")

    def setup(self) -> logging.Logger:
        root_logger = logging.getLogger()
        root_logger.setLevel(logging.DEBUG)

        # Remove existing handlers to prevent duplicates
        for handler in root_logger.handlers[:]:
            root_logger.removeHandler(handler)
            handler.close()

        if self.log_file is not None:
            file_handler = logging.handlers.RotatingFileHandler(
                self.log_file,
                maxBytes=10 * 1024 * 1024,  # 10MB
                backupCount=5,
            )
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(RunGroupedFormatter(fmt=self.FORMAT, datefmt=self.DATEFMT))
            file_handler.addFilter(RunSeparatorFilter(self.run_label))
            root_logger.addHandler(file_handler)

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(self.log_level)
        console_handler.setFormatter(logging.Formatter(fmt=self.FORMAT, datefmt=self.DATEFMT))
        root_logger.addHandler(console_handler)

        root_logger.debug(f"Logging initialized - Log file: {self.log_file}")
        return root_logger


def setup_logging(log_dir: Optional[str] = "logs", log_level: int = logging.WARNING, run_label: str = "plotminer"):
    """
    Configure the root logger for a command run.

    Returns
    -------
    logging.Logger
        The configured root logger.
    """
    return LoggerSetup(log_dir=log_dir, log_level=log_level, run_label=run_label).setup()
