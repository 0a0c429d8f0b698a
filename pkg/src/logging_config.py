"""Logging configuration for emo-stargan."""

import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Any

import portalocker

NOISY_LOGGERS = (
    "numba",
    "numba.core",
    "matplotlib",
    "matplotlib.font_manager",
    "PIL",
    "librosa",
    "audioread",
    "urllib3.connectionpool",
    "h5py",
    "sklearn",
)


def _parse_log_level(log_level: str | int, default: int = logging.INFO) -> tuple[int, bool]:
    """
    Convert a log level name into a logging.* int.
    Falls back to INFO when the value is invalid.
    """
    if isinstance(log_level, int):
        return log_level, True

    level_name = str(log_level).upper()
    level = logging._nameToLevel.get(level_name)  # type: ignore[attr-defined]
    if isinstance(level, int) and level > 0:
        return level, True
    return default, False


class _NameRewriteFormatter(logging.Formatter):
    def __init__(
        self, *args, prefix_to_strip: str = "src.", replacement: str = "emo-stargan.", **kwargs
    ):
        super().__init__(*args, **kwargs)
        self._prefix_to_strip = prefix_to_strip
        self._replacement = replacement

    def format(self, record: logging.LogRecord) -> str:
        original_name = record.name
        if original_name.startswith(self._prefix_to_strip):
            record.name = f"{self._replacement}{original_name[len(self._prefix_to_strip):]}"
        try:
            return super().format(record)
        finally:
            record.name = original_name


class _ThirdPartyFilter(logging.Filter):
    def __init__(self, level: int):
        super().__init__()
        self._level = level

    def filter(self, record: logging.LogRecord) -> bool:
        if record.name.startswith(NOISY_LOGGERS):
            return record.levelno >= self._level
        return True


def setup_run_logging(
    log_dir: str = "logs",
    log_level: str = "INFO",
    silence_third_party: bool = True,
    third_party_level: str = "ERROR",
) -> Path:
    """
    Set up logging for a single run with timestamped log file.

    Args:
        log_dir: Directory to store log files
        log_level: Console logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)

    Returns:
        Path to the log file created
    """
    log_path = Path(log_dir)
    log_path.mkdir(parents=True, exist_ok=True)

    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    log_file = log_path / f"run_{timestamp}.log"

    log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    date_format = "%Y-%m-%d %H:%M:%S"

    root_logger = logging.getLogger()
    # root stays at DEBUG so the file handler sees everything
    root_logger.setLevel(logging.DEBUG)
    root_logger.handlers.clear()

    file_handler = logging.FileHandler(log_file, encoding="utf-8")
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(_NameRewriteFormatter(log_format, datefmt=date_format))
    root_logger.addHandler(file_handler)

    console_handler = logging.StreamHandler(sys.stdout)
    console_level, is_valid = _parse_log_level(log_level, default=logging.INFO)
    console_handler.setLevel(console_level)
    console_handler.setFormatter(_NameRewriteFormatter(log_format, datefmt=date_format))
    root_logger.addHandler(console_handler)

    if silence_third_party:
        third_party_level_value, _ = _parse_log_level(third_party_level, default=logging.ERROR)
        for logger_name in NOISY_LOGGERS:
            logger = logging.getLogger(logger_name)
            logger.setLevel(third_party_level_value)
            logger.handlers.clear()
            logger.propagate = True

        file_handler.addFilter(_ThirdPartyFilter(third_party_level_value))
        console_handler.addFilter(_ThirdPartyFilter(third_party_level_value))

    startup_logger = logging.getLogger("emo-stargan")
    startup_logger.info("=" * 80)
    startup_logger.info(f"Starting new run - Log file: {log_file}")
    if not is_valid:
        root_logger.warning(
            f"Invalid log_level={log_level!r} provided, using {logging.getLevelName(console_level)}"
        )
    startup_logger.info("=" * 80)

    return log_file


class StepLogWriter:
    """Appends one JSON record per line to a run's step log.

    The file is locked while writing so an evaluation callback reading the
    log never sees a half-written record.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def write(self, record: dict[str, Any]) -> None:
        line = json.dumps(record, sort_keys=True)
        with open(self.path, "a", encoding="utf-8") as f:
            portalocker.lock(f, portalocker.LOCK_EX)
            try:
                f.write(line + "\n")
                f.flush()
            finally:
                portalocker.unlock(f)

    def read(self) -> list[dict[str, Any]]:
        if not self.path.exists():
            return []
        with open(self.path, encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]

    def truncate_after(self, step: int) -> None:
        """Drop records past ``step`` (used when resuming from a checkpoint)."""
        records = [r for r in self.read() if int(r.get("step", 0)) <= step]
        with open(self.path, "w", encoding="utf-8") as f:
            portalocker.lock(f, portalocker.LOCK_EX)
            try:
                for record in records:
                    f.write(json.dumps(record, sort_keys=True) + "\n")
            finally:
                portalocker.unlock(f)


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger with the specified name.

    Returns a logger that uses the handlers configured by setup_run_logging().
    """
    return logging.getLogger(name)
