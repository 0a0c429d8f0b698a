"""Exception hierarchy for emo-stargan.

Each error carries a short ``category`` used by the CLI to print a
machine-readable failure line, and an ``exit_code``.
"""

from __future__ import annotations


class EmoStarGANError(Exception):
    """Base class for all domain errors."""

    category = "runtime"
    exit_code = 1


class ConfigError(EmoStarGANError):
    category = "config"
    exit_code = 3


class AudioFormatError(EmoStarGANError):
    category = "audio"


class ManifestError(EmoStarGANError):
    category = "manifest"

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class DatasetError(EmoStarGANError):
    category = "dataset"


class ShapeMismatchError(EmoStarGANError):
    category = "shape"


class DomainCodeError(EmoStarGANError):
    category = "domain_code"


class NonFiniteLossError(EmoStarGANError):
    category = "non_finite_loss"

    def __init__(self, message: str, snapshot_dir: str | None = None):
        self.snapshot_dir = snapshot_dir
        if snapshot_dir:
            message = f"{message} (diagnostic snapshot: {snapshot_dir})"
        super().__init__(message)


class CheckpointError(EmoStarGANError):
    category = "checkpoint"
