"""Declarative pipeline configuration.

The config file is INI-style text (``key = value`` under ``[section]``
headers) read with :mod:`configparser`. Every key is typed and validated
against the component invariants before any work starts; unknown sections
or keys are rejected. Command-line flags override file values.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .dsp import StftConfig, WindowKind
from .image import NormalizeMode
from .ingest import SegmentationConfig, TaskScheme
from .models import BackboneKind

__all__ = ["ConfigError", "PipelineConfig", "load_config"]

_MODES = ("sonic", "plain", "residual")
_DTYPES = ("float32", "float64")


class ConfigError(ValueError):
    """Raised for unreadable, unknown, or invariant-violating configuration."""


@dataclass
class PipelineConfig:
    # [paths]
    data_dir: Path = Path("data")
    output_dir: Path = Path("out")
    # [stft]
    window_len: int = 256
    hop: int = 64
    nfft: int = 256
    window: str = "hann"
    # [segmentation]
    window_seconds: float = 5.0
    stride_seconds: float = 2.0
    sample_rate_hz: float = 700.0
    # [training]
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 1e-3
    dropout: float = 0.2
    # [run]
    task: str = "2class"
    mode: str = "sonic"
    seed: int = 0
    normalize: str = "log-minmax"
    folds: int = 5
    group_by_subject: bool = False
    header: bool = False
    dtype: str = "float32"

    def validate(self) -> "PipelineConfig":
        try:
            self.stft_config()
            self.segmentation_config()
            self.task_scheme()
            NormalizeMode(self.normalize)
            if self.mode not in _MODES:
                raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
            if self.dtype not in _DTYPES:
                raise ValueError(f"dtype must be one of {_DTYPES}, got {self.dtype!r}")
            if self.epochs < 1:
                raise ValueError(f"epochs must be >= 1, got {self.epochs}")
            if self.batch_size < 1:
                raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
            if not self.learning_rate > 0:
                raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
            if not 0 <= self.dropout < 1:
                raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
            if not self.sample_rate_hz > 0:
                raise ValueError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz}")
            if self.folds < 2:
                raise ValueError(f"folds must be >= 2, got {self.folds}")
            if self.seed < 0:
                raise ValueError(f"seed must be >= 0, got {self.seed}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def stft_config(self) -> StftConfig:
        return StftConfig(self.window_len, self.hop, self.nfft, WindowKind(self.window))

    def segmentation_config(self) -> SegmentationConfig:
        return SegmentationConfig(self.window_seconds, self.stride_seconds)

    def task_scheme(self) -> TaskScheme:
        return TaskScheme(self.task)

    def normalize_mode(self) -> NormalizeMode:
        return NormalizeMode(self.normalize)

    def backbone_kinds(self) -> tuple[BackboneKind, ...]:
        if self.mode == "sonic":
            return (BackboneKind.PLAIN, BackboneKind.RESIDUAL)
        return (BackboneKind(self.mode),)

    def echo_dict(self) -> dict:
        """Configuration snapshot embedded in every metrics report."""
        return {
            "paths": {"data_dir": str(self.data_dir), "output_dir": str(self.output_dir)},
            "stft": {
                "window_len": self.window_len,
                "hop": self.hop,
                "nfft": self.nfft,
                "window": self.window,
            },
            "segmentation": {
                "window_seconds": self.window_seconds,
                "stride_seconds": self.stride_seconds,
                "sample_rate_hz": self.sample_rate_hz,
            },
            "training": {
                "epochs": self.epochs,
                "batch_size": self.batch_size,
                "learning_rate": self.learning_rate,
                "dropout": self.dropout,
            },
            "run": {
                "task": self.task,
                "mode": self.mode,
                "seed": self.seed,
                "normalize": self.normalize,
                "folds": self.folds,
                "group_by_subject": self.group_by_subject,
                "header": self.header,
                "dtype": self.dtype,
            },
        }


_SCHEMA: dict[str, dict[str, tuple]] = {
    "paths": {"data_dir": (Path, "data_dir"), "output_dir": (Path, "output_dir")},
    "stft": {
        "window_len": (int, "window_len"),
        "hop": (int, "hop"),
        "nfft": (int, "nfft"),
        "window": (str, "window"),
    },
    "segmentation": {
        "window_seconds": (float, "window_seconds"),
        "stride_seconds": (float, "stride_seconds"),
        "sample_rate_hz": (float, "sample_rate_hz"),
    },
    "training": {
        "epochs": (int, "epochs"),
        "batch_size": (int, "batch_size"),
        "learning_rate": (float, "learning_rate"),
        "dropout": (float, "dropout"),
    },
    "run": {
        "task": (str, "task"),
        "mode": (str, "mode"),
        "seed": (int, "seed"),
        "normalize": (str, "normalize"),
        "folds": (int, "folds"),
        "group_by_subject": (bool, "group_by_subject"),
        "header": (bool, "header"),
        "dtype": (str, "dtype"),
    },
}

_BOOL_VALUES = {"true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}


def _convert(section: str, key: str, kind, raw: str):
    if key in ("group_by_subject", "header"):
        value = _BOOL_VALUES.get(raw.strip().lower())
        if value is None:
            raise ConfigError(f"[{section}] {key}: expected true/false, got {raw!r}")
        return value
    try:
        return kind(raw.strip())
    except (TypeError, ValueError):
        raise ConfigError(
            f"[{section}] {key}: cannot parse {raw!r} as {getattr(kind, '__name__', 'value')}"
        ) from None


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Read a config file (or return defaults) and validate everything."""
    cfg = PipelineConfig()
    if path is None:
        return cfg.validate()

    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            kind, attr = _SCHEMA[section][key]
            setattr(cfg, attr, _convert(section, key, kind, raw))
    return cfg.validate()
