"""
Synthetic Textures
Procedural texture patches and labeled mosaics for demos, benchmarks and tests.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InputError
from .imaging import ClassMap, GrayImage, LabelRaster

logger = logging.getLogger(__name__)

TEXTURE_KINDS = ("noise", "gradient", "checkerboard", "stripes")


def _noise(size: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, 256, size=(size, size)).astype(np.float64)


def _gradient(size: int, rng: np.random.Generator) -> np.ndarray:
    span = rng.uniform(120.0, 255.0)
    start = rng.uniform(0.0, 255.0 - span)
    ramp = start + span * np.linspace(0.0, 1.0, size)
    return np.tile(ramp, (size, 1)) + rng.normal(0.0, 1.5, size=(size, size))


def _checkerboard(size: int, rng: np.random.Generator) -> np.ndarray:
    cell = int(rng.integers(3, 7))
    low, high = rng.uniform(0.0, 80.0), rng.uniform(170.0, 255.0)
    phase_x, phase_y = rng.integers(0, cell, size=2)
    y, x = np.indices((size, size))
    board = ((y + phase_y) // cell + (x + phase_x) // cell) % 2
    return np.where(board == 1, high, low) + rng.normal(0.0, 2.0, size=(size, size))


def _stripes(size: int, rng: np.random.Generator) -> np.ndarray:
    band = int(rng.integers(2, 6))
    low, high = rng.uniform(0.0, 80.0), rng.uniform(170.0, 255.0)
    phase = int(rng.integers(0, band))
    rows = ((np.arange(size) + phase) // band) % 2
    column = np.where(rows == 1, high, low)
    return np.tile(column[:, None], (1, size)) + rng.normal(0.0, 2.0, size=(size, size))


_GENERATORS = {
    "noise": _noise,
    "gradient": _gradient,
    "checkerboard": _checkerboard,
    "stripes": _stripes,
}


def make_texture(kind: str, size: int, rng: np.random.Generator) -> np.ndarray:
    """
    One size x size texture patch with randomized parameters.

    Args:
        kind: One of TEXTURE_KINDS
        size: Patch side in pixels
        rng: Random generator

    Returns:
        np.ndarray: uint8 pixels
    """
    if kind not in _GENERATORS:
        raise InputError(f"Unknown texture kind '{kind}', expected one of {TEXTURE_KINDS}")
    patch = _GENERATORS[kind](size, rng)
    return np.clip(np.floor(patch + 0.5), 0, 255).astype(np.uint8)


def make_mosaic(
    kinds: Sequence[str] = TEXTURE_KINDS,
    tiles: Tuple[int, int] = (4, 4),
    size: int = 50,
    rng: Optional[np.random.Generator] = None,
    layout: Optional[np.ndarray] = None,
) -> Tuple[GrayImage, LabelRaster, ClassMap]:
    """
    Tile texture patches into a labeled image.

    Without an explicit layout, class ids are dealt out as evenly as possible
    and shuffled, so every kind covers tiles_x * tiles_y / len(kinds) tiles
    when that divides evenly.

    Args:
        kinds: Texture kind per class id
        tiles: (columns, rows) of tiles
        size: Tile side in pixels
        rng: Random generator (seeded default when omitted)
        layout: Optional (rows, columns) array of class ids

    Returns:
        Tuple of the gray image, its label raster and the class map
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    if layout is None:
        cols, rows = tiles
        layout = rng.permutation(np.resize(np.arange(len(kinds)), cols * rows)).reshape(rows, cols)
    layout = np.asarray(layout, dtype=np.int64)
    if layout.min() < 0 or layout.max() >= len(kinds):
        raise InputError(f"Layout references classes outside 0..{len(kinds) - 1}")

    rows, cols = layout.shape
    pixels = np.zeros((rows * size, cols * size), dtype=np.uint8)
    labels = np.zeros_like(pixels)
    for r in range(rows):
        for c in range(cols):
            cls = int(layout[r, c])
            block = (slice(r * size, (r + 1) * size), slice(c * size, (c + 1) * size))
            pixels[block] = make_texture(kinds[cls], size, rng)
            labels[block] = cls

    logger.debug(f"Built {cols}x{rows} mosaic of {size}px tiles over {len(kinds)} kinds")
    class_map = ClassMap(tuple(enumerate(kinds)))
    return GrayImage(pixels), LabelRaster(labels), class_map


def make_benchmark_image(side: int, seed: int = 0) -> GrayImage:
    """Large mixed-texture image for runtime benchmarks."""
    rng = np.random.default_rng(seed)
    tile = 100
    count = -(-side // tile)
    image, _, _ = make_mosaic(TEXTURE_KINDS, (count, count), tile, rng)
    return GrayImage(image.pixels[:side, :side])
