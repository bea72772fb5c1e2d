"""
Shared pytest fixtures: seeded generators, small canonical images and
synthetic texture tables.
"""

import numpy as np
import pytest

from modules.feature_table import build_table, extract_table
from modules.glcm import OffsetSpec
from modules.imaging import QuantizedImage, quantize, tile_windows, window_label
from modules.synthetic import TEXTURE_KINDS, make_mosaic
from modules.training_set import TrainingSet


@pytest.fixture
def rng():
    """Deterministic generator (seed=42)."""
    return np.random.default_rng(42)


@pytest.fixture
def canonical_window():
    """4x4 window with four gray levels, used by the hand-counted GLCM cases."""
    pixels = np.array(
        [
            [0, 0, 1, 1],
            [0, 0, 1, 1],
            [0, 2, 2, 2],
            [2, 2, 3, 3],
        ],
        dtype=np.uint8,
    )
    return QuantizedImage(pixels, 4)


@pytest.fixture
def checkerboard_image():
    """8x8 two-level checkerboard."""
    y, x = np.indices((8, 8))
    return QuantizedImage(((x + y) % 2).astype(np.uint8), 2)


@pytest.fixture
def mosaic(rng):
    """4-class 8x8 mosaic of 50px tiles: (gray image, label raster, class map)."""
    return make_mosaic(TEXTURE_KINDS, (8, 8), 50, rng)


def texture_training_set(per_class: int = 200, size: int = 50, seed: int = 7) -> TrainingSet:
    """Features of `per_class` windows for each synthetic texture kind at G=8."""
    rng = np.random.default_rng(seed)
    layout = np.repeat(np.arange(len(TEXTURE_KINDS)), per_class).reshape(-1, 20)
    image, labels, class_map = make_mosaic(TEXTURE_KINDS, size=size, rng=rng, layout=layout)
    quantized = quantize(image, 8)
    windows = tile_windows(quantized, size)
    features = extract_table(quantized, windows, OffsetSpec(), threads=4)
    truth = [window_label(labels, w) for w in windows]
    return build_table(windows, features, truth).training_set(class_map)


@pytest.fixture(scope="session")
def texture_set():
    """200 windows per texture kind at 50x50, G=8."""
    return texture_training_set()


@pytest.fixture
def make_blobs():
    """Factory for well separated unit-spread blobs; centers sit on the axes."""

    def build(rng, classes: int = 3, per_class: int = 30, separation: float = 10.0, features: int = 4):
        centers = separation * np.eye(classes, features)
        x = np.vstack([c + rng.normal(0.0, 1.0, size=(per_class, features)) for c in centers])
        y = np.repeat(np.arange(classes), per_class)
        return TrainingSet.from_arrays(x, y)

    return build
