# -*- coding: utf-8 -*-
"""
Train: end-to-end optimization of the style transformer on image pairs
"""
import json
import logging
import time
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..loss import LossConfig, LossNetwork, total_loss
from ..model import ModelConfig, StyleTransformer
from ..tensor import backward
from .adam import Adam
from .checkpoint import Checkpoint, save_checkpoint
from .data import PairLoader


@dataclass
class TrainConfig:
    """Optimization settings (the JSON ``train`` section)."""

    learning_rate: float = 1e-3
    lam: float = 10.0
    steps: int = 200
    image_size: int = 64
    seed: int = 0
    checkpoint_every: int = 0
    prefetch: int = 4

    @classmethod
    def desk(cls) -> "TrainConfig":
        return cls()

    @classmethod
    def full(cls) -> "TrainConfig":
        return cls(learning_rate=1e-5, image_size=512)

    def validate(self):
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if self.steps < 0:
            raise ConfigError(f"steps must be >= 0, got {self.steps}")
        if self.image_size < 32 or self.image_size % 32:
            raise ConfigError(f"image_size must be a positive multiple of 32, got {self.image_size}")
        if self.checkpoint_every < 0:
            raise ConfigError(f"checkpoint_every must be >= 0, got {self.checkpoint_every}")
        if self.prefetch < 1:
            raise ConfigError(f"prefetch must be >= 1, got {self.prefetch}")
        return self


@dataclass
class TrainResult:
    """Final weights and the per-step loss records."""

    checkpoint: Checkpoint
    loss_history: list = field(default_factory=list)

    @property
    def weights(self) -> dict:
        return self.checkpoint.entries


class Trainer:
    """Owns the model, the frozen loss network, the optimizer and the log sink."""

    def __init__(
        self,
        model_config: ModelConfig = None,
        train_config: TrainConfig = None,
        loss_config: LossConfig = None,
        log_stream=None,
        debug_mode: bool = False,
    ):
        """
        Initialize trainer.

        Args:
            model_config: Architecture (desk preset when None)
            train_config: Optimization settings (desk preset when None)
            loss_config: Loss-network settings
            log_stream: Text stream receiving one JSON record per step
            debug_mode: Enable debug mode
        """
        self.model_config = (model_config or ModelConfig.desk()).validate()
        self.train_config = (train_config or TrainConfig.desk()).validate()
        self.loss_config = (loss_config or LossConfig()).validate()
        self._debug_mode = debug_mode
        self._log_stream = log_stream

        self.model = StyleTransformer(self.model_config, seed=self.train_config.seed)
        self.loss_net = LossNetwork.from_config(self.loss_config)
        self.optimizer = Adam(self.model.named_parameters(), self.train_config.learning_rate)
        self.loss_history = []
        logging.info(
            "Trainer ready: %d trainable parameters, loss network %s",
            self.model.parameter_count(),
            self.loss_net.source,
        )

    def _debug_log(self, message, *args):
        """Debug log output."""
        if self._debug_mode:
            logging.info(f"[STTR DEBUG] {message}", *args)

    def step(self, content, style) -> dict:
        """
        One optimization step on a single pair.

        Args:
            content: Tensor[1, 3, S, S]
            style: Tensor[1, 3, S, S]

        Returns:
            dict with step, content, style, total, wall_ms
        """
        started = time.perf_counter()
        self.model.train()
        output = self.model(content, style)
        breakdown = total_loss(content, style, output, self.train_config.lam, self.loss_net)
        graph = backward(breakdown.total)
        self._debug_log("Backward through %d recorded operations", len(graph))
        self.optimizer.step()

        record = {"step": len(self.loss_history) + 1}
        record.update(breakdown.as_record())
        record["wall_ms"] = round((time.perf_counter() - started) * 1000.0, 3)
        self.loss_history.append(record)
        if self._log_stream is not None:
            self._log_stream.write(json.dumps(record) + "\n")
            self._log_stream.flush()
        self._debug_log(
            "Step %d: content=%.6f style=%.6f total=%.6f",
            record["step"],
            record["content"],
            record["style"],
            record["total"],
        )
        return record

    def checkpoint(self) -> Checkpoint:
        return Checkpoint(self.model.state_dict())

    def fit(self, content_dir, style_dir, checkpoint_path=None) -> TrainResult:
        """
        Train for ``steps`` randomly drawn pairs.

        Args:
            content_dir: Directory of content images
            style_dir: Directory of style images
            checkpoint_path: Where scheduled and final checkpoints are written

        Returns:
            TrainResult
        """
        cfg = self.train_config
        loader = PairLoader(content_dir, style_dir, cfg.steps, cfg.image_size, cfg.seed, cfg.prefetch)
        for step, content, style in loader:
            record = self.step(content, style)
            if step == 1 or step % 10 == 0:
                logging.info("Step %d/%d: total loss %.6f", step, cfg.steps, record["total"])
            if checkpoint_path and cfg.checkpoint_every and step % cfg.checkpoint_every == 0:
                save_checkpoint(checkpoint_path, self.model.state_dict())

        result = TrainResult(self.checkpoint(), list(self.loss_history))
        if checkpoint_path:
            save_checkpoint(checkpoint_path, result.weights)
        return result


def train(
    content_dir,
    style_dir,
    cfg: TrainConfig = None,
    model_config: ModelConfig = None,
    loss_config: LossConfig = None,
    checkpoint_path=None,
    log_stream=None,
) -> TrainResult:
    """Build a Trainer and run it; the result holds the final weights as a Checkpoint."""
    trainer = Trainer(model_config, cfg, loss_config, log_stream=log_stream)
    return trainer.fit(content_dir, style_dir, checkpoint_path)
