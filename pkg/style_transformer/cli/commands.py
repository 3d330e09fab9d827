# -*- coding: utf-8 -*-
"""
Commands: stylize, video, attention-dump, bench and train
"""
import json
import logging
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from ..errors import AttentionIndexError, DimensionError, ImageFormatError, UndecodableImageError
from ..imaging import ImageBuffer, crop_to_multiple, decode_image, encode_grayscale, encode_image
from ..model import AttentionRecorder, StyleTransformer, stylize
from ..trainer import Trainer, list_images, load_checkpoint
from .config import load_run_config

INPUT_MULTIPLE = 32


def load_model(checkpoint_path, model_config) -> StyleTransformer:
    """
    Build the configured model and load checkpoint weights into it.

    Args:
        checkpoint_path: Checkpoint file, or None for seeded initial weights
        model_config: ModelConfig the checkpoint must match

    Returns:
        StyleTransformer in eval mode
    """
    model = StyleTransformer(model_config)
    if checkpoint_path is not None:
        model.load_state_dict(load_checkpoint(checkpoint_path, expected_shapes=model.parameter_shapes()))
    return model.eval()


def read_image(path, label: str) -> ImageBuffer:
    """Decode an input image and center-crop it to multiples of 32, warning when cropped."""
    try:
        buffer = decode_image(path)
    except ImageFormatError as e:
        raise UndecodableImageError(path, str(e)) from e
    cropped = crop_to_multiple(buffer, INPUT_MULTIPLE)
    if (cropped.width, cropped.height) != (buffer.width, buffer.height):
        logging.warning(
            "%s image %s cropped from %dx%d to %dx%d",
            label,
            path,
            buffer.width,
            buffer.height,
            cropped.width,
            cropped.height,
        )
    return cropped


def stylize_buffers(model: StyleTransformer, content: ImageBuffer, style: ImageBuffer, recorder=None) -> ImageBuffer:
    output = stylize(model, content.to_tensor(), style.to_tensor(), recorder)
    return ImageBuffer.from_tensor(output)


def mean_abs_difference(a: ImageBuffer, b: ImageBuffer) -> float:
    if a.pixels.shape != b.pixels.shape:
        raise DimensionError(f"Frames differ in size: {a.pixels.shape} vs {b.pixels.shape}")
    return float(np.mean(np.abs(a.pixels.astype(np.float64) - b.pixels.astype(np.float64))))


def frame_report(inputs: list, outputs: list, names: list) -> list:
    """Per adjacent pair: mean absolute difference of input frames and of output frames."""
    rows = []
    for index in range(len(inputs) - 1):
        rows.append(
            {
                "pair": f"{names[index]}->{names[index + 1]}",
                "input_diff": mean_abs_difference(inputs[index], inputs[index + 1]),
                "output_diff": mean_abs_difference(outputs[index], outputs[index + 1]),
            }
        )
    return rows


def normalize_map(values: np.ndarray) -> np.ndarray:
    """Min-max scale to [0, 1]; a constant map becomes all ones (white)."""
    low, high = float(values.min()), float(values.max())
    if high == low:
        return np.ones_like(values, dtype=np.float32)
    return ((values - low) / (high - low)).astype(np.float32)


def parse_point(text: str) -> tuple:
    try:
        x, y = (int(part) for part in text.split(","))
    except ValueError as e:
        raise AttentionIndexError(f"Point must be 'x,y' integers, got {text!r}") from e
    return x, y


def run_stylize(args) -> int:
    config = load_run_config(args.config)
    model = load_model(args.checkpoint, config.model)
    content = read_image(args.content, "Content")
    style = read_image(args.style, "Style")
    output = stylize_buffers(model, content, style)
    encode_image(output, args.out)
    logging.info("Stylized %s (%dx%d) -> %s", args.content, output.width, output.height, args.out)
    return 0


def run_video(args) -> int:
    config = load_run_config(args.config)
    model = load_model(args.checkpoint, config.model)
    frame_paths = list_images(args.frames)
    if len(frame_paths) < 2:
        raise DimensionError(f"Video needs at least 2 frames, found {len(frame_paths)} in {args.frames}")
    frames = [read_image(path, "Frame") for path in frame_paths]
    style = read_image(args.style, "Style")

    workers = max(1, args.workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outputs = list(pool.map(lambda frame: stylize_buffers(model, frame, style), frames))

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path, output in zip(frame_paths, outputs):
        encode_image(output, out_dir / path.name)

    rows = frame_report(frames, outputs, [p.name for p in frame_paths])
    summary = {
        "summary": True,
        "pairs": len(rows),
        "mean_input_diff": float(np.mean([r["input_diff"] for r in rows])),
        "mean_output_diff": float(np.mean([r["output_diff"] for r in rows])),
    }
    with open(args.report, "w", encoding="utf-8") as f:
        for row in rows + [summary]:
            f.write(json.dumps(row) + "\n")
    logging.info("Stylized %d frames into %s; report %s", len(outputs), out_dir, args.report)
    return 0


def run_attention_dump(args) -> int:
    config = load_run_config(args.config)
    model = load_model(args.checkpoint, config.model)
    content = read_image(args.content, "Content")
    style = read_image(args.style, "Style")
    recorder = AttentionRecorder()
    stylize_buffers(model, content, style, recorder)

    grid_h, grid_w = recorder.query_grid(args.module)
    x, y = parse_point(args.point)
    if not (0 <= x < grid_w and 0 <= y < grid_h):
        raise AttentionIndexError(
            f"Point ({x},{y}) is outside the {args.module} query grid: x in 0..{grid_w - 1}, y in 0..{grid_h - 1}"
        )
    attention_map = recorder.capture(args.module, args.layer, y * grid_w + x, args.head)
    encode_grayscale(normalize_map(attention_map.as_grid()), args.out)
    text_path = Path(args.out).with_suffix(".txt")
    text_path.write_text("\n".join(f"{v:.9g}" for v in attention_map.weights) + "\n", encoding="utf-8")
    logging.info(
        "Attention map %s layer %d point (%d,%d) -> %s, %s",
        args.module,
        args.layer,
        x,
        y,
        args.out,
        text_path,
    )
    return 0


def time_stylization(model: StyleTransformer, size: int, repeats: int, seed: int = 0) -> list:
    """Seconds per stylization for ``repeats`` runs after one warm-up."""
    if size < INPUT_MULTIPLE or size % INPUT_MULTIPLE:
        raise DimensionError(f"Bench size must be a positive multiple of {INPUT_MULTIPLE}, got {size}")
    if repeats < 1:
        raise ValueError(f"repeats must be >= 1, got {repeats}")
    rng = np.random.default_rng(seed)
    content = ImageBuffer(size, size, rng.random((size, size, 3)))
    style = ImageBuffer(size, size, rng.random((size, size, 3)))
    stylize_buffers(model, content, style)
    timings = []
    for _ in range(repeats):
        started = time.perf_counter()
        stylize_buffers(model, content, style)
        timings.append(time.perf_counter() - started)
    return timings


def run_bench(args) -> int:
    config = load_run_config(args.config)
    model = load_model(args.checkpoint, config.model)
    timings = time_stylization(model, args.size, args.repeats)
    report = {
        "size": args.size,
        "repeats": args.repeats,
        "runs_s": timings,
        "median_s": statistics.median(timings),
        "parameters": model.parameter_count(),
    }
    print(json.dumps(report))
    return 0


def run_train(args) -> int:
    config = load_run_config(args.config)
    overrides = {"steps": args.steps, "lam": args.lam, "seed": args.seed}
    for name, value in overrides.items():
        if value is not None:
            setattr(config.train, name, value)
    config.validate()

    log_file = open(args.log, "w", encoding="utf-8") if args.log else None  # pylint: disable=consider-using-with
    try:
        trainer = Trainer(
            config.model,
            config.train,
            config.loss,
            log_stream=log_file if log_file is not None else sys.stdout,
            debug_mode=args.verbose,
        )
        result = trainer.fit(args.content_dir, args.style_dir, checkpoint_path=args.out)
    finally:
        if log_file is not None:
            log_file.close()
    if result.loss_history:
        logging.info(
            "Training done: total loss %.6f -> %.6f",
            result.loss_history[0]["total"],
            result.loss_history[-1]["total"],
        )
    return 0
