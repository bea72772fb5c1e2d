"""
Runtime Benchmark
Wall-clock cost of tiling plus feature extraction per window size.
"""

import logging
import statistics
import time
from dataclasses import dataclass
from typing import Sequence, Tuple

from .errors import InputError
from .feature_table import extract_table
from .glcm import OffsetSpec
from .imaging import QuantizedImage, tile_windows, window_count

logger = logging.getLogger(__name__)

DEFAULT_REPEATS = 3


@dataclass(frozen=True)
class BenchRow:
    size: int
    windows: int
    seconds: float
    features_per_sec: float


@dataclass(frozen=True)
class BenchReport:
    rows: Tuple[BenchRow, ...]

    def to_text(self) -> str:
        lines = ["size,windows,seconds,features_per_sec"]
        for row in self.rows:
            lines.append(f"{row.size},{row.windows},{row.seconds:.6f},{row.features_per_sec:.1f}")
        return "\n".join(lines) + "\n"


def _time_once(image: QuantizedImage, size: int, offset: OffsetSpec, threads: int) -> Tuple[int, float]:
    start = time.perf_counter()
    windows = tile_windows(image, size)
    extract_table(image, windows, offset, threads)
    return len(windows), time.perf_counter() - start


def benchmark_runtime(
    image: QuantizedImage,
    sizes: Sequence[int],
    repeats: int = DEFAULT_REPEATS,
    offset: OffsetSpec = OffsetSpec(),
    threads: int = 1,
) -> BenchReport:
    """
    Median wall time of tile + extract over `repeats` serial runs per size.

    Sizes that admit no window yield a row with zero windows and zero time.

    Args:
        image: Quantized image
        sizes: Window sizes to compare
        repeats: Runs per size (>= 1)
        offset: Pair offset used for extraction
        threads: Extraction workers inside each run

    Returns:
        BenchReport: One row per size, in the given order
    """
    if repeats < 1:
        raise InputError(f"repeats must be >= 1, got {repeats}")

    rows = []
    for size in sizes:
        expected = window_count(image.width, image.height, size)
        if expected == 0:
            logger.warning(f"⚠️ Window size {size} does not fit the {image.width}x{image.height} image")
            rows.append(BenchRow(size, 0, 0.0, 0.0))
            continue

        timings = []
        for run in range(repeats):
            count, seconds = _time_once(image, size, offset, threads)
            timings.append(seconds)
            logger.debug(f"size {size} run {run + 1}/{repeats}: {seconds:.4f}s")

        median = statistics.median(timings)
        rate = count / median if median > 0 else 0.0
        rows.append(BenchRow(size, count, median, rate))
        logger.info(f"✅ size {size}: {count} windows, median {median:.3f}s ({rate:.0f} windows/s)")

    return BenchReport(tuple(rows))
