# -*- coding: utf-8 -*-
"""
Data: sorted image directories and a background pair loader
"""
import logging
import queue
import threading
from pathlib import Path

import numpy as np

from ..errors import EmptyDatasetError, ImageFormatError, UndecodableImageError
from ..imaging import center_crop, decode_image

IMAGE_SUFFIXES = (".ppm", ".png")


def list_images(directory) -> list:
    """
    Image files of a directory in sorted order.

    Raises:
        EmptyDatasetError: No .ppm/.png file present
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise EmptyDatasetError(f"Not a directory: {directory}")
    files = sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise EmptyDatasetError(f"No images found in {directory}")
    return files


def load_training_image(path, image_size: int):
    """Decode and center-crop one file to image_size x image_size, as Tensor[1, 3, S, S]."""
    try:
        buffer = decode_image(path)
    except ImageFormatError as e:
        raise UndecodableImageError(path, str(e)) from e
    if buffer.width < image_size or buffer.height < image_size:
        raise UndecodableImageError(
            path, f"{buffer.width}x{buffer.height} is smaller than {image_size}x{image_size}"
        )
    return center_crop(buffer, image_size, image_size).to_tensor()


def sample_pairs(content_count: int, style_count: int, steps: int, seed: int) -> list:
    """Pair indices for every step, drawn up front from a seeded generator."""
    rng = np.random.default_rng(seed)
    contents = rng.integers(0, content_count, size=steps)
    styles = rng.integers(0, style_count, size=steps)
    return list(zip(contents.tolist(), styles.tolist()))


_DONE = object()


class PairLoader:
    """
    Iterate (step, content, style) tensors decoded on a worker thread.

    The pair sequence is fixed before the thread starts, so decode timing
    never changes which images a step sees.
    """

    def __init__(self, content_dir, style_dir, steps: int, image_size: int, seed: int, prefetch: int = 4):
        self.content_files = list_images(content_dir)
        self.style_files = list_images(style_dir)
        self.pairs = sample_pairs(len(self.content_files), len(self.style_files), steps, seed)
        self._image_size = image_size
        self._queue = queue.Queue(maxsize=max(1, prefetch))
        self._cache = {}
        self._stop = threading.Event()
        self._thread = None
        logging.info(
            "Training data: %d content, %d style images, %d steps",
            len(self.content_files),
            len(self.style_files),
            steps,
        )

    def _load(self, path):
        if path not in self._cache:
            self._cache[path] = load_training_image(path, self._image_size)
        return self._cache[path]

    def _put(self, item) -> bool:
        while not self._stop.is_set():
            try:
                self._queue.put(item, timeout=0.1)
                return True
            except queue.Full:
                continue
        return False

    def _worker(self):
        try:
            for step, (ci, si) in enumerate(self.pairs, start=1):
                item = (step, self._load(self.content_files[ci]), self._load(self.style_files[si]))
                if not self._put(item):
                    return
        except Exception as e:  # pylint: disable=broad-except
            self._put(e)
            return
        self._put(_DONE)

    def __iter__(self):
        self._stop.clear()
        self._thread = threading.Thread(target=self._worker, name="pair-loader", daemon=True)
        self._thread.start()
        try:
            while True:
                item = self._queue.get()
                if item is _DONE:
                    return
                if isinstance(item, Exception):
                    raise item
                yield item
        finally:
            self.close()

    def close(self):
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None
        while not self._queue.empty():
            self._queue.get_nowait()

    def __len__(self):
        return len(self.pairs)
