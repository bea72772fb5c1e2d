"""
GLCM Module
Co-occurrence counting under an offset (d, r), normalization, and the four
texture features: homogeneity (IDM), contrast, energy (ASM) and entropy.
"""

import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import List, NamedTuple, Tuple

import numpy as np

from .errors import ComputationError, InputError
from .imaging import GrayImage, QuantizedImage, WindowSpec

logger = logging.getLogger(__name__)

DIRECTIONS = (0, 45, 90, 135)
FEATURE_NAMES = ("homogeneity", "contrast", "energy", "entropy")

# (dx, dy) per unit distance; y grows downward.
_UNIT_STEPS = {
    0: (1, 0),
    45: (1, -1),
    90: (0, -1),
    135: (-1, -1),
}


@dataclass(frozen=True)
class OffsetSpec:
    """Pixel-pair offset: distance d along direction r (degrees)."""

    distance: int = 1
    direction: int = 0
    symmetric: bool = True
    average_directions: bool = False

    def __post_init__(self):
        if self.distance < 1:
            raise InputError(f"GLCM distance must be >= 1, got {self.distance}")
        if self.direction not in _UNIT_STEPS:
            raise InputError(f"GLCM direction must be one of {DIRECTIONS}, got {self.direction}")

    def steps(self) -> List[Tuple[int, int]]:
        """Pixel steps to accumulate; all four directions when averaging."""
        directions = DIRECTIONS if self.average_directions else (self.direction,)
        return [(_UNIT_STEPS[r][0] * self.distance, _UNIT_STEPS[r][1] * self.distance) for r in directions]

    def canonical(self) -> "OffsetSpec":
        """Same pairs, with the unused direction pinned to 0 when averaging."""
        return replace(self, direction=0) if self.average_directions else self


@dataclass(frozen=True, eq=False)
class Glcm:
    """Integer co-occurrence counts, shaped (levels, levels)."""

    levels: int
    counts: np.ndarray
    offset: OffsetSpec

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True, eq=False)
class NormalizedGlcm:
    """Co-occurrence probabilities p(i, j) summing to 1."""

    levels: int
    p: np.ndarray
    offset: OffsetSpec


class FeatureVector(NamedTuple):
    """Texture features of one window, in frozen column order."""

    homogeneity: float
    contrast: float
    energy: float
    entropy: float


def _overlap(n: int, step: int) -> Tuple[slice, slice]:
    if step >= 0:
        return slice(0, n - step), slice(step, n)
    return slice(-step, n), slice(0, n + step)


def cooccurrence_counts(pixels: np.ndarray, levels: int, offset: OffsetSpec) -> np.ndarray:
    """
    Count ordered pixel pairs (p, p + step) over a 2-D bin array.

    Args:
        pixels: Bin indices, any rectangular shape
        levels: Number of bins
        offset: Distance, direction and accumulation flags

    Returns:
        np.ndarray: int64 counts shaped (levels, levels)
    """
    height, width = pixels.shape
    codes = pixels.astype(np.intp)
    counts = np.zeros(levels * levels, dtype=np.int64)

    for dx, dy in offset.steps():
        if abs(dx) >= width or abs(dy) >= height:
            continue
        src_x, dst_x = _overlap(width, dx)
        src_y, dst_y = _overlap(height, dy)
        pairs = codes[src_y, src_x] * levels + codes[dst_y, dst_x]
        counts += np.bincount(pairs.ravel(), minlength=levels * levels)

    counts = counts.reshape(levels, levels)
    if offset.symmetric:
        counts = counts + counts.T
    return counts


def compute_glcm(image: QuantizedImage, window: WindowSpec, offset: OffsetSpec) -> Glcm:
    """
    Co-occurrence matrix of one window.

    Args:
        image: Quantized image
        window: Window inside the image
        offset: Pair offset

    Returns:
        Glcm: Counts for the window

    Raises:
        InputError: Window outside the image, or too small to hold a pair at the offset
    """
    if not window.fits(image.width, image.height):
        raise InputError(f"Window {window} lies outside the {image.width}x{image.height} image")

    counts = cooccurrence_counts(window.cut(image.pixels), image.levels, offset)
    if counts.sum() == 0:
        raise InputError(f"Window of size {window.size} holds no pixel pair at distance {offset.distance}")
    return Glcm(image.levels, counts, offset)


def image_glcm(image: QuantizedImage, offset: OffsetSpec) -> Glcm:
    """Co-occurrence matrix over the whole image."""
    counts = cooccurrence_counts(image.pixels, image.levels, offset)
    if counts.sum() == 0:
        raise InputError(f"Image holds no pixel pair at distance {offset.distance}")
    return Glcm(image.levels, counts, offset)


def normalize(glcm: Glcm) -> NormalizedGlcm:
    """
    Divide counts by their total.

    Raises:
        ComputationError: All counts are zero
    """
    total = glcm.counts.sum()
    if total <= 0:
        raise ComputationError("Cannot normalize a GLCM with zero total count")
    return NormalizedGlcm(glcm.levels, glcm.counts / float(total), glcm.offset)


@lru_cache(maxsize=None)
def _squared_difference(levels: int) -> np.ndarray:
    i, j = np.indices((levels, levels))
    grid = ((i - j) ** 2).astype(np.float64)
    grid.setflags(write=False)
    return grid


def homogeneity(glcm: NormalizedGlcm) -> float:
    """Inverse difference moment: sum p(i,j) / (1 + (i-j)^2)."""
    return float(np.sum(glcm.p / (1.0 + _squared_difference(glcm.levels))))


def contrast(glcm: NormalizedGlcm) -> float:
    """sum (i-j)^2 p(i,j)."""
    return float(np.sum(_squared_difference(glcm.levels) * glcm.p))


def energy(glcm: NormalizedGlcm) -> float:
    """Angular second moment: sum p(i,j)^2."""
    return float(np.sum(glcm.p * glcm.p))


def entropy(glcm: NormalizedGlcm) -> float:
    """-sum p ln p in nats, with 0 ln 0 = 0."""
    nonzero = glcm.p[glcm.p > 0]
    return float(-np.sum(nonzero * np.log(nonzero))) + 0.0


def features_of(glcm: NormalizedGlcm) -> FeatureVector:
    return FeatureVector(homogeneity(glcm), contrast(glcm), energy(glcm), entropy(glcm))


def extract_features(image: QuantizedImage, window: WindowSpec, offset: OffsetSpec) -> FeatureVector:
    """
    Texture features of a window: compute_glcm -> normalize -> four features.

    Args:
        image: Quantized image
        window: Window inside the image
        offset: Pair offset

    Returns:
        FeatureVector: (homogeneity, contrast, energy, entropy)
    """
    return features_of(normalize(compute_glcm(image, window, offset)))


def render_glcm(glcm: Glcm, scale: int = 16) -> GrayImage:
    """
    Render a co-occurrence matrix as an image.

    Counts are log-scaled to 0..255 and each cell becomes a scale x scale block;
    row i of the matrix is image row block i.

    Args:
        glcm: Counts to render
        scale: Block side in pixels

    Returns:
        GrayImage: (levels * scale) square rendering
    """
    if scale < 1:
        raise InputError(f"Render scale must be >= 1, got {scale}")
    logged = np.log1p(glcm.counts.astype(np.float64))
    peak = logged.max()
    if peak > 0:
        shades = np.floor(logged / peak * 255.0 + 0.5)
    else:
        shades = np.zeros_like(logged)
    block = np.ones((scale, scale), dtype=np.uint8)
    return GrayImage(np.kron(shades.astype(np.uint8), block))
