"""
Feature Table Module
Parallel per-window feature extraction and the text feature table
(`origin_x,origin_y,size,homogeneity,contrast,energy,entropy[,label]`).
"""

import logging
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, TextIO, Union

import numpy as np
import pandas as pd

from .errors import TableError
from .glcm import FEATURE_NAMES, FeatureVector, OffsetSpec, extract_features
from .imaging import UNLABELED, ClassMap, QuantizedImage, WindowSpec
from .training_set import TrainingSet

logger = logging.getLogger(__name__)

WINDOW_COLUMNS = ("origin_x", "origin_y", "size")
LABEL_COLUMN = "label"
FLOAT_FORMAT = "%.9g"
METADATA_TAG = "# texturemap-features"

_METADATA_RE = re.compile(
    r"^# texturemap-features levels=(\d+) distance=(\d+) direction=(\d+) "
    r"symmetric=([01]) average_directions=([01])\s*$"
)


@dataclass(frozen=True)
class TableMetadata:
    """Extraction settings recorded at the top of a feature table."""

    levels: int
    offset: OffsetSpec

    def header_line(self) -> str:
        return (
            f"{METADATA_TAG} levels={self.levels} distance={self.offset.distance} "
            f"direction={self.offset.direction} symmetric={int(self.offset.symmetric)} "
            f"average_directions={int(self.offset.average_directions)}"
        )

    @classmethod
    def parse(cls, line: str) -> Optional["TableMetadata"]:
        match = _METADATA_RE.match(line.rstrip("\r\n"))
        if not match:
            return None
        levels, distance, direction, symmetric, average = (int(g) for g in match.groups())
        offset = OffsetSpec(distance, direction, bool(symmetric), bool(average))
        return cls(levels, offset)


@dataclass(eq=False)
class FeatureTable:
    """One row per window; the label column is optional."""

    frame: pd.DataFrame
    metadata: Optional[TableMetadata] = None

    @property
    def has_labels(self) -> bool:
        return LABEL_COLUMN in self.frame.columns

    def __len__(self) -> int:
        return len(self.frame)

    def features(self) -> np.ndarray:
        return self.frame[list(FEATURE_NAMES)].to_numpy(dtype=np.float64)

    def windows(self) -> List[WindowSpec]:
        return [
            WindowSpec(int(x), int(y), int(s))
            for x, y, s in self.frame[list(WINDOW_COLUMNS)].itertuples(index=False)
        ]

    def window_size(self) -> int:
        sizes = self.frame["size"].unique()
        if len(sizes) != 1:
            raise TableError(f"Feature table mixes window sizes {sorted(int(s) for s in sizes)}")
        return int(sizes[0])

    def training_set(self, classes: Optional[ClassMap] = None) -> TrainingSet:
        """
        Labeled rows as a TrainingSet; UNLABELED rows are dropped.

        Raises:
            TableError: No label column, or no labeled rows
        """
        if not self.has_labels:
            raise TableError("Feature table has no label column")
        labeled = self.frame[self.frame[LABEL_COLUMN] != UNLABELED]
        if labeled.empty:
            raise TableError("Feature table has no labeled rows")
        labels = labeled[LABEL_COLUMN].to_numpy(dtype=np.int64)
        features = labeled[list(FEATURE_NAMES)].to_numpy(dtype=np.float64)
        try:
            return TrainingSet.from_arrays(features, labels, classes)
        except ValueError as e:
            raise TableError(str(e))


def _extract_chunk(image: QuantizedImage, windows: Sequence[WindowSpec], offset: OffsetSpec) -> List[FeatureVector]:
    return [extract_features(image, window, offset) for window in windows]


def extract_table(
    image: QuantizedImage,
    windows: Sequence[WindowSpec],
    offset: OffsetSpec,
    threads: int = 1,
) -> List[FeatureVector]:
    """
    Extract features for every window, preserving window order.

    Windows are split into contiguous chunks, one per worker; results are
    concatenated in chunk order, so output does not depend on `threads`.

    Args:
        image: Quantized image
        windows: Windows to process
        offset: Pair offset
        threads: Worker count (>= 1)

    Returns:
        List[FeatureVector]: One vector per window
    """
    windows = list(windows)
    start = time.perf_counter()

    if threads <= 1 or len(windows) < 2:
        features = _extract_chunk(image, windows, offset)
    else:
        workers = min(threads, len(windows))
        bounds = np.linspace(0, len(windows), workers + 1).astype(int)
        chunks = [windows[lo:hi] for lo, hi in zip(bounds[:-1], bounds[1:])]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(lambda chunk: _extract_chunk(image, chunk, offset), chunks)
            features = [vector for part in parts for vector in part]

    elapsed = time.perf_counter() - start
    logger.debug(f"Extracted {len(features)} feature vectors in {elapsed:.3f}s ({threads} threads)")
    return features


def build_table(
    windows: Sequence[WindowSpec],
    features: Sequence[FeatureVector],
    labels: Optional[Sequence[int]] = None,
    metadata: Optional[TableMetadata] = None,
) -> FeatureTable:
    """Assemble windows, features and optional labels into a FeatureTable."""
    if len(windows) != len(features):
        raise TableError(f"{len(windows)} windows but {len(features)} feature rows")
    frame = pd.DataFrame(
        {
            "origin_x": [w.origin_x for w in windows],
            "origin_y": [w.origin_y for w in windows],
            "size": [w.size for w in windows],
        },
        dtype=np.int64,
    )
    values = np.array(features, dtype=np.float64).reshape(len(features), len(FEATURE_NAMES))
    for column, name in enumerate(FEATURE_NAMES):
        frame[name] = values[:, column]
    if labels is not None:
        if len(labels) != len(windows):
            raise TableError(f"{len(windows)} windows but {len(labels)} labels")
        frame[LABEL_COLUMN] = np.asarray(labels, dtype=np.int64)
    return FeatureTable(frame, metadata)


def write_table(table: FeatureTable, target: Union[str, Path, TextIO]) -> None:
    """
    Write a feature table: optional metadata comment, header, then one row per
    window with reals at 9 significant digits.
    """
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="") as handle:
            write_table(table, handle)
        logger.info(f"✅ Wrote {len(table)} feature rows to {target}")
        return

    if table.metadata is not None:
        target.write(table.metadata.header_line() + "\n")
    table.frame.to_csv(target, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def read_table(path: Union[str, Path]) -> FeatureTable:
    """
    Read a feature table written by write_table.

    Raises:
        TableError: Missing file, missing columns or unparseable rows
    """
    path = Path(path)
    if not path.is_file():
        raise TableError(f"Cannot read feature table: {path}")

    with open(path, "r") as handle:
        first_line = handle.readline()
    metadata = TableMetadata.parse(first_line) if first_line.startswith(METADATA_TAG) else None

    try:
        frame = pd.read_csv(path, comment="#")
    except (ValueError, pd.errors.ParserError) as e:
        raise TableError(f"Malformed feature table {path}: {e}")

    required = list(WINDOW_COLUMNS) + list(FEATURE_NAMES)
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise TableError(f"Feature table {path} is missing columns {missing}")
    if frame[required].isna().any().any():
        raise TableError(f"Feature table {path} has empty cells")

    logger.info(f"Read {len(frame)} feature rows from {path}")
    return FeatureTable(frame, metadata)


def merge_tables(tables: Sequence[FeatureTable]) -> FeatureTable:
    """
    Concatenate tables extracted with identical settings.

    Raises:
        TableError: No tables, or tables with different metadata or label layout
    """
    if not tables:
        raise TableError("No feature tables given")
    first = tables[0]
    for other in tables[1:]:
        if other.metadata != first.metadata:
            raise TableError("Feature tables were extracted with different settings")
        if other.has_labels != first.has_labels:
            raise TableError("Cannot merge labeled and unlabeled feature tables")
    frame = pd.concat([t.frame for t in tables], ignore_index=True)
    return FeatureTable(frame, first.metadata)
