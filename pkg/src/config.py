"""Configuration management for emo-stargan."""

import hashlib
import json
import logging
import os
import threading
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError

# Load environment variables from .env file
try:
    from dotenv import find_dotenv, load_dotenv

    dotenv_path = find_dotenv(usecwd=True)
    load_dotenv(dotenv_path, override=False)
except ImportError:
    pass  # python-dotenv not available, skip loading

EMOTIONS: tuple[str, ...] = ("happy", "sad", "anger", "neutral", "surprise")

DescriptorName = Literal["spectral_centroid", "spectral_kurtosis", "loudness", "delta_f0"]


class MelConfig(BaseModel):
    """Front-end analysis parameters (rates in Hz, sizes in samples)."""

    sample_rate: int = Field(default=24000, gt=0)
    n_mels: int = Field(default=80, gt=0)
    win_length: int = Field(default=1200, gt=0)
    hop_length: int = Field(default=300, gt=0)
    n_fft: int = Field(default=2048, gt=0)
    f_min: float = Field(default=0.0, ge=0.0)
    f_max: float = Field(default=12000.0, gt=0.0)
    floor: float = Field(default=1e-5, gt=0.0)
    griffin_lim_iters: int = Field(default=60, ge=1)
    f0_min: float = Field(default=70.0, gt=0.0)
    f0_max: float = Field(default=400.0, gt=0.0)
    f0_frame_length: int = Field(default=2048, gt=0)

    @model_validator(mode="after")
    def _check_window(self) -> "MelConfig":
        if self.win_length > self.n_fft:
            raise ValueError("win_length must not exceed n_fft")
        if self.f_max > self.sample_rate / 2:
            raise ValueError("f_max must not exceed the Nyquist frequency")
        return self


class DescriptorConfig(BaseModel):
    """Configuration for the emotion-correlated acoustic descriptors."""

    window_len: int = Field(default=8, ge=2, description="Descriptor window in mel frames")
    conf_threshold: float = Field(default=0.5, gt=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)
    active_kinds: list[DescriptorName] = Field(default_factory=lambda: ["spectral_kurtosis"])

    @field_validator("window_len")
    @classmethod
    def _even(cls, value: int) -> int:
        if value % 2:
            raise ValueError("window_len must be even")
        return value


class ModelsConfig(BaseModel):
    """Desk-scale network widths."""

    generator_channels: int = Field(default=32, gt=0)
    n_down: int = Field(default=2, ge=1)
    style_dim: int = Field(default=64, gt=0)
    latent_dim: int = Field(default=16, gt=0)
    style_hidden: int = Field(default=128, gt=0)
    disc_channels: int = Field(default=64, gt=0)
    f0_channels: int = Field(default=64, gt=0)
    ling_channels: int = Field(default=64, gt=0)
    n_symbols: int = Field(default=12, gt=1)
    n_emotions: int = Field(default=len(EMOTIONS), gt=1)
    f0_scale: float = Field(default=100.0, gt=0.0)


class LossWeights(BaseModel):
    """Weights of the generator and discriminator objectives, with per-term toggles."""

    lambda_af: float = Field(default=2.0, ge=0.0)
    lambda_embed: float = Field(default=2.0, ge=0.0)
    lambda_emog: float = Field(default=0.01, ge=0.0)
    lambda_emod: float = Field(default=0.01, ge=0.0)
    lambda_aspk: float = Field(default=0.1, ge=0.0)
    lambda_spk: float = Field(default=0.1, ge=0.0)
    lambda_sty: float = Field(default=1.0, ge=0.0)
    lambda_ds: float = Field(default=1.0, ge=0.0)
    lambda_f0: float = Field(default=5.0, ge=0.0)
    lambda_asr: float = Field(default=1.0, ge=0.0)
    lambda_cyc: float = Field(default=1.0, ge=0.0)
    disabled: list[str] = Field(default_factory=list, description="Terms switched off")

    @field_validator("disabled")
    @classmethod
    def _known_terms(cls, value: list[str]) -> list[str]:
        known = sorted(n.removeprefix("lambda_") for n in cls.model_fields if n != "disabled")
        unknown = [term for term in value if term not in known]
        if unknown:
            raise ValueError(f"unknown loss terms {unknown} (expected any of {known})")
        return value

    def weight(self, term: str) -> float:
        """Effective weight of a term (0 when toggled off)."""
        if term in self.disabled:
            return 0.0
        return float(getattr(self, f"lambda_{term}"))

    def is_active(self, term: str) -> bool:
        return self.weight(term) > 0.0


class RunConfig(BaseModel):
    """Training schedule and optimizer settings."""

    learning_rate: float = Field(default=1e-4, gt=0.0)
    weight_decay: float = Field(default=1e-4, ge=0.0)
    betas: tuple[float, float] = Field(default=(0.9, 0.999))
    batch_size: int = Field(default=16, ge=1)
    segment_seconds: float = Field(default=2.0, gt=0.0)
    epochs: int = Field(default=100, ge=1)
    max_steps: int | None = Field(default=None, ge=1)
    seed: int = Field(default=1234)
    d_steps_per_g: int = Field(default=1, ge=1)
    checkpoint_every: int = Field(default=500, ge=1)
    log_every: int = Field(default=1, ge=1)
    eval_every: int = Field(default=1000, ge=1)
    grad_clip: float | None = Field(default=None, gt=0.0)
    deterministic: bool = Field(default=True)
    device: str = Field(default="cpu")
    f0_checkpoint: str | None = Field(default=None)
    ling_checkpoint: str | None = Field(default=None)
    extractor_checkpoint: str | None = Field(default=None)
    pretrain_steps: int = Field(default=1500, ge=1)


class EmbeddingConfig(BaseModel):
    """Two-stage emotion embedding training."""

    stage1_steps: int = Field(default=2000, ge=1)
    stage2_steps: int = Field(default=1000, ge=1)
    val_fraction: float = Field(default=0.1, gt=0.0, lt=1.0)
    eval_every: int = Field(default=100, ge=1)
    selection_criterion: Literal["val_ce", "val_embedding_mae", "val_recon_mae"] = Field(
        default="val_ce"
    )
    stage1_checkpoint: str | None = Field(default=None)


class EvaluationConfig(BaseModel):
    """Objective metric battery settings."""

    min_voiced_frames: int = Field(default=10, ge=2)
    svm_c: float = Field(default=10.0, gt=0.0)
    svm_gamma: str | float = Field(default="scale")
    percentiles: list[float] = Field(default_factory=lambda: [10.0, 50.0, 90.0])
    cer_reference: Literal["source", "transcript"] = Field(
        default="source",
        description="CER reference: recognition of the source clip, or the manifest transcript",
    )


class DataConfig(BaseModel):
    """Configuration for data sources."""

    manifest_path: str | None = Field(default=None)
    toy_speakers: int = Field(default=4, ge=1)
    toy_clips_per_pair: int = Field(default=5, ge=1)
    toy_duration_s: float = Field(default=2.5, ge=1.0, le=4.0)
    split_ratios: tuple[float, float, float] = Field(default=(0.8, 0.1, 0.1))


class LoggingConfig(BaseModel):
    """Configuration for logging."""

    level: str = Field(default="INFO")
    format: str = Field(default="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
    silence_third_party: bool = Field(default=True)
    third_party_level: str = Field(default="ERROR")
    log_dir: str = Field(default="logs")


class Config(BaseModel):
    """Main configuration class."""

    config_name: str = Field(default="default")
    audio: MelConfig = Field(default_factory=MelConfig)
    descriptors: DescriptorConfig = Field(default_factory=DescriptorConfig)
    models: ModelsConfig = Field(default_factory=ModelsConfig)
    losses: LossWeights = Field(default_factory=LossWeights)
    training: RunConfig = Field(default_factory=RunConfig)
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    out_dir: str = Field(default="runs/default")

    @property
    def segment_frames(self) -> int:
        samples = self.training.segment_seconds * self.audio.sample_rate
        frames = samples / self.audio.hop_length
        if abs(frames - round(frames)) > 1e-9:
            raise ConfigError(
                f"segment of {self.training.segment_seconds}s is not a whole number of frames"
            )
        return int(round(frames))


def config_hash(config: Config) -> str:
    """Stable hash of the sections that shape network parameters."""
    payload = {"audio": config.audio.model_dump(), "models": config.models.model_dump()}
    blob = json.dumps(payload, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def snapshot_config(config: Config, run_dir: str | Path) -> Path:
    """Write the effective configuration into a run directory."""
    path = Path(run_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / "config.yaml"
    with open(target, "w", encoding="utf-8") as f:
        yaml.safe_dump(config.model_dump(mode="json"), f, sort_keys=False)
    return target


def deep_merge(base: dict[str, Any], override: dict[str, Any]) -> dict[str, Any]:
    """Recursively merge ``override`` into a copy of ``base``."""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ConfigManager:
    """Manages configuration loading with environment variable override."""

    def __init__(self, config_path: Path | None = None):
        if config_path is None:
            project_root = Path(__file__).parent.parent
            config_path = project_root / "configs" / "config-default.yaml"
            self.config_file_name = "configs/config-default.yaml"
        else:
            self.config_file_name = config_path.name

        self.config_path = config_path
        self._config: Config | None = None

    def load_config(self, overrides: dict[str, Any] | None = None) -> Config:
        """Load configuration: defaults <- YAML file <- environment <- overrides."""
        if self._config is not None and overrides is None:
            return self._config

        config_data = self._load_yaml_config()
        config_data = self._apply_env_overrides(config_data)
        if overrides:
            config_data = deep_merge(config_data, overrides)

        try:
            self._config = Config(**config_data)
        except ValidationError as e:
            raise ConfigError(f"Invalid configuration in {self.config_path}: {e}") from e
        return self._config

    def _load_yaml_config(self) -> dict[str, Any]:
        """Load configuration from YAML file."""
        if not self.config_path.exists():
            raise FileNotFoundError(f"Configuration file not found: {self.config_path}")

        with open(self.config_path, encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ConfigError(f"Malformed YAML in {self.config_path}: {e}") from e
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError(f"Top-level YAML in {self.config_path} must be a mapping")
        return data

    def _apply_env_overrides(self, config_data: dict[str, Any]) -> dict[str, Any]:
        """Apply environment variable overrides to configuration."""
        seed = os.getenv("EMO_STARGAN_SEED")
        if seed:
            config_data.setdefault("training", {})["seed"] = int(seed)

        out_dir = os.getenv("EMO_STARGAN_OUT_DIR")
        if out_dir:
            config_data["out_dir"] = out_dir

        device = os.getenv("EMO_STARGAN_DEVICE")
        if device:
            config_data.setdefault("training", {})["device"] = device

        debug_enabled = os.getenv("DEBUG")
        if debug_enabled and debug_enabled.lower() in ("true", "1", "yes", "on"):
            config_data.setdefault("logging", {})["level"] = "DEBUG"

        return config_data

    @property
    def config(self) -> Config:
        """Get the loaded configuration."""
        if self._config is None:
            return self.load_config()
        return self._config


_global_config_manager: ConfigManager | None = None
_config_lock = threading.Lock()


def _resolve(config_file: str) -> Path:
    config_path = Path(config_file)
    if not config_path.is_absolute() and not config_path.exists():
        config_path = Path(__file__).parent.parent / config_path
    return config_path


def load_config(config_file: str | None = None, overrides: dict[str, Any] | None = None) -> Config:
    """Load a fresh configuration without touching the global singleton."""
    manager = ConfigManager(_resolve(config_file) if config_file else None)
    return manager.load_config(overrides)


def get_config(config_file: str | None = None) -> Config:
    """Get the global configuration instance (thread-safe singleton).

    Args:
        config_file: Optional path to configuration file. If None, uses default
            'configs/config-default.yaml'. A different file requested after
            initialisation is ignored with a warning.

    Returns:
        Config: The configuration instance.
    """
    global _global_config_manager

    logger = logging.getLogger("emo-stargan")

    if _global_config_manager is not None:
        if config_file is not None:
            requested = _resolve(config_file).resolve()
            current = _global_config_manager.config_path.resolve()
            if requested != current:
                logger.warning(
                    f"Configuration already initialised with '{current}', "
                    f"cannot load '{requested}'. Using the existing configuration."
                )
        return _global_config_manager.config

    with _config_lock:
        if _global_config_manager is None:
            if config_file is not None:
                _global_config_manager = ConfigManager(_resolve(config_file))
            else:
                _global_config_manager = ConfigManager()
            logger.info(
                f"Configuration initialised from: {_global_config_manager.config_file_name}"
            )

        return _global_config_manager.config
