# -*- coding: utf-8 -*-
"""
Run Config: strict JSON run configuration with named profiles
"""
import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..loss import LossConfig
from ..model import ModelConfig
from ..trainer import TrainConfig

PROFILES = ("desk", "full")
TOP_LEVEL_KEYS = ("profile", "model", "train", "loss")


@dataclass
class RunConfig:
    """Model, training and loss settings of one run."""

    model: ModelConfig = field(default_factory=ModelConfig.desk)
    train: TrainConfig = field(default_factory=TrainConfig.desk)
    loss: LossConfig = field(default_factory=LossConfig)
    profile: str = "desk"

    @classmethod
    def from_profile(cls, profile: str = "desk") -> "RunConfig":
        if profile == "desk":
            return cls(ModelConfig.desk(), TrainConfig.desk(), LossConfig(), "desk")
        if profile == "full":
            return cls(ModelConfig.full(), TrainConfig.full(), LossConfig(width_factor=1.0), "full")
        raise ConfigError(f"Unknown profile {profile!r}; available: {list(PROFILES)}")

    def validate(self) -> "RunConfig":
        self.model.validate()
        self.train.validate()
        self.loss.validate()
        return self

    def to_dict(self) -> dict:
        train = dataclasses.asdict(self.train)
        loss = dataclasses.asdict(self.loss)
        loss["lambda"] = train.pop("lam")
        return {
            "profile": self.profile,
            "model": dataclasses.asdict(self.model),
            "train": train,
            "loss": loss,
        }


def _reject_constant(token: str):
    raise ConfigError(f"Non-standard JSON constant {token} is not allowed")


def _coerce(value, default, key: str):
    if isinstance(default, bool) or isinstance(value, bool):
        if not isinstance(value, bool) or not isinstance(default, bool):
            raise ConfigError(f"{key}: expected {type(default).__name__}, got {value!r}")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            raise ConfigError(f"{key}: expected a list of integers, got {value!r}")
        return tuple(value)
    if isinstance(default, int) and not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if isinstance(default, float) and not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if isinstance(default, float):
        return float(value)
    if isinstance(default, str) and not isinstance(value, str):
        raise ConfigError(f"{key}: expected a string, got {value!r}")
    if default is None and value is not None and not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer or null, got {value!r}")
    return value


def _apply_section(base, section, name: str, exclude=(), handled=()):
    if not isinstance(section, dict):
        raise ConfigError(f"{name}: expected an object, got {type(section).__name__}")
    allowed = {f.name for f in dataclasses.fields(base)} - set(exclude)
    updates = {}
    for key, value in section.items():
        if key in handled:
            continue
        if key not in allowed:
            raise ConfigError(f"Unknown configuration key: {name}.{key}")
        updates[key] = _coerce(value, getattr(base, key), f"{name}.{key}")
    return dataclasses.replace(base, **updates)


def parse_run_config(document: dict) -> RunConfig:
    """
    Build a RunConfig from a decoded JSON document.

    Args:
        document: Top-level object with optional profile, model, train and loss

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: Unknown key (named by dotted path) or invalid value
    """
    if not isinstance(document, dict):
        raise ConfigError("Run configuration must be a JSON object")
    for key in document:
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError(f"Unknown configuration key: {key}")
    config = RunConfig.from_profile(document.get("profile", "desk"))

    config.model = _apply_section(config.model, document.get("model", {}), "model")
    config.train = _apply_section(config.train, document.get("train", {}), "train", exclude=("lam",))
    loss_section = document.get("loss", {})
    config.loss = _apply_section(config.loss, loss_section, "loss", handled=("lambda",))
    if isinstance(loss_section, dict) and "lambda" in loss_section:
        lam = _coerce(loss_section["lambda"], 0.0, "loss.lambda")
        config.train = dataclasses.replace(config.train, lam=lam)
    return config.validate()


def load_run_config(path=None) -> RunConfig:
    """
    Read a JSON run configuration; the desk profile when ``path`` is None.

    Args:
        path: JSON file (strict: no comments, no trailing commas)

    Returns:
        Validated RunConfig
    """
    if path is None:
        return RunConfig.from_profile("desk").validate()
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"), parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {path}: {e}") from e
    config = parse_run_config(document)
    logging.info("Loaded run configuration from %s (profile %s)", path, config.profile)
    return config
