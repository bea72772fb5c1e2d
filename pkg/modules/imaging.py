"""
Imaging Module
Decodes PNG/PGM/PPM imagery, converts RGB to grayscale, reduces gray levels
and cuts non-overlapping windows with ground-truth labels from a label raster.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from PIL import Image, UnidentifiedImageError

from .errors import (
    CorruptImageError,
    ImageReadError,
    InputError,
    TableError,
    UnsupportedFormatError,
)

logger = logging.getLogger(__name__)

UNLABELED = 255
MAX_CLASS_ID = 254
DEFAULT_LEVELS = 8
DEFAULT_PURITY = 0.6

SUPPORTED_FORMATS = ("PNG", "PPM")
# Binary PGM/PPM only; ASCII variants (P2/P3) are rejected.
_PNM_MAGIC = (b"P5", b"P6")
_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def _frozen(pixels: np.ndarray, dtype=np.uint8) -> np.ndarray:
    """Copy pixels into a read-only contiguous array."""
    arr = np.array(pixels, dtype=dtype, copy=True, order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-bit RGB image, pixels shaped (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InputError(f"RGB pixels must be shaped (H, W, 3), got {arr.shape}")
        object.__setattr__(self, "pixels", _frozen(arr))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit intensity image, pixels shaped (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InputError(f"Gray pixels must be shaped (H, W), got {arr.shape}")
        object.__setattr__(self, "pixels", _frozen(arr))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class QuantizedImage:
    """Gray image reduced to `levels` bins; every pixel is a bin index."""

    pixels: np.ndarray
    levels: int

    def __post_init__(self):
        if not 2 <= self.levels <= 256:
            raise InputError(f"levels must be in 2..256, got {self.levels}")
        arr = np.asarray(self.pixels)
        if arr.ndim != 2:
            raise InputError(f"Quantized pixels must be shaped (H, W), got {arr.shape}")
        if arr.size and int(arr.max()) >= self.levels:
            raise InputError(f"Pixel bin {int(arr.max())} out of range for {self.levels} levels")
        object.__setattr__(self, "pixels", _frozen(arr))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class WindowSpec:
    """Square window anchored at its top-left pixel."""

    origin_x: int
    origin_y: int
    size: int

    def __post_init__(self):
        if self.size < 2:
            raise InputError(f"Window size must be >= 2, got {self.size}")
        if self.origin_x < 0 or self.origin_y < 0:
            raise InputError(f"Window origin must be non-negative, got ({self.origin_x}, {self.origin_y})")

    def fits(self, width: int, height: int) -> bool:
        return self.origin_x + self.size <= width and self.origin_y + self.size <= height

    def cut(self, pixels: np.ndarray) -> np.ndarray:
        """Return the window's view of a (H, W[, C]) pixel array."""
        return pixels[self.origin_y:self.origin_y + self.size, self.origin_x:self.origin_x + self.size]


@dataclass(frozen=True, eq=False)
class LabelRaster:
    """Per-pixel class ids aligned with an image; UNLABELED marks unknown pixels."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2:
            raise InputError(f"Label raster must be shaped (H, W), got {arr.shape}")
        object.__setattr__(self, "pixels", _frozen(arr))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class ClassMap:
    """Ordered (class id, class name) pairs with dense ids from 0."""

    entries: Tuple[Tuple[int, str], ...] = field(default_factory=tuple)

    def __post_init__(self):
        ids = [cid for cid, _ in self.entries]
        names = [name for _, name in self.entries]
        if ids != list(range(len(ids))):
            raise TableError(f"Class ids must be dense from 0, got {ids}")
        if len(ids) > MAX_CLASS_ID + 1:
            raise TableError(f"At most {MAX_CLASS_ID + 1} classes are supported")
        if len(set(names)) != len(names):
            raise TableError("Class names must be unique")

    @classmethod
    def from_ids(cls, ids: Sequence[int]) -> "ClassMap":
        """Default map covering 0..max(ids) with generated names."""
        top = max(ids) if len(ids) else -1
        return cls(tuple((cid, f"class_{cid}") for cid in range(top + 1)))

    @property
    def ids(self) -> List[int]:
        return [cid for cid, _ in self.entries]

    def name(self, class_id: int) -> str:
        if 0 <= class_id < len(self.entries):
            return self.entries[class_id][1]
        return f"class_{class_id}"

    def __len__(self) -> int:
        return len(self.entries)


def _sniff(path: Path) -> bytes:
    with open(path, "rb") as handle:
        return handle.read(8)


def load_image(path: Union[str, Path]) -> Union[RgbImage, GrayImage]:
    """
    Decode a PNG (8-bit gray or RGB) or binary PGM/PPM image.

    Args:
        path: Image file path

    Returns:
        GrayImage for single-channel files, RgbImage otherwise

    Raises:
        ImageReadError: File missing or unreadable
        UnsupportedFormatError: Not PNG/P5/P6, or a pixel layout we do not handle
        CorruptImageError: Header recognized but data damaged or truncated
    """
    path = Path(path)
    if not path.is_file():
        raise ImageReadError(f"Cannot read image file: {path}")

    try:
        magic = _sniff(path)
    except OSError as e:
        raise ImageReadError(f"Cannot read image file: {path} ({e})")

    known_magic = magic.startswith(_PNG_SIGNATURE) or magic[:2] in _PNM_MAGIC
    if magic[:1] == b"P" and magic[:2] not in _PNM_MAGIC and magic[1:2].isdigit():
        raise UnsupportedFormatError(f"Only binary PGM/PPM (P5/P6) is supported: {path}")

    try:
        handle = Image.open(path)
    except UnidentifiedImageError:
        if known_magic:
            raise CorruptImageError(f"Corrupt image header: {path}")
        raise UnsupportedFormatError(f"Unsupported image format: {path}")
    except OSError as e:
        raise ImageReadError(f"Cannot read image file: {path} ({e})")

    with handle:
        if handle.format not in SUPPORTED_FORMATS:
            raise UnsupportedFormatError(f"Unsupported image format {handle.format}: {path}")
        try:
            handle.load()
        except Exception as e:
            raise CorruptImageError(f"Corrupt image data in {path}: {e}")

        mode = handle.mode
        if mode in ("L", "1", "LA"):
            image = GrayImage(np.asarray(handle.convert("L")))
        elif mode in ("RGB", "RGBA", "P"):
            image = RgbImage(np.asarray(handle.convert("RGB")))
        else:
            raise UnsupportedFormatError(f"Unsupported pixel mode {mode} (8-bit gray or RGB expected): {path}")

    logger.debug(f"Decoded {path}: {image.width}x{image.height} {type(image).__name__}")
    return image


def save_png(image: Union[RgbImage, GrayImage, LabelRaster], path: Union[str, Path]) -> Path:
    """
    Encode an image as an 8-bit PNG.

    Args:
        image: Gray, RGB or label image
        path: Output path

    Returns:
        Path: The written file
    """
    path = Path(path)
    try:
        Image.fromarray(np.ascontiguousarray(image.pixels, dtype=np.uint8)).save(path, format="PNG")
    except OSError as e:
        raise ImageReadError(f"Cannot write image file: {path} ({e})")
    return path


def to_grayscale(image: RgbImage) -> GrayImage:
    """
    Convert RGB to gray with BT.601 luma weights, rounding half up.

    Integer arithmetic keeps (v, v, v) -> v exact.
    """
    rgb = image.pixels.astype(np.int32)
    weighted = 299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]
    gray = np.clip((weighted + 500) // 1000, 0, 255)
    return GrayImage(gray.astype(np.uint8))


def as_gray(image: Union[RgbImage, GrayImage]) -> GrayImage:
    """Pass gray images through, convert RGB ones."""
    if isinstance(image, RgbImage):
        return to_grayscale(image)
    return image


def quantize(image: GrayImage, levels: int = DEFAULT_LEVELS) -> QuantizedImage:
    """
    Reduce a gray image to `levels` bins: bin = floor(value * levels / 256).

    Args:
        image: Gray image
        levels: Number of bins, 2..256

    Returns:
        QuantizedImage: Monotone bin map of the input
    """
    if not 2 <= levels <= 256:
        raise InputError(f"levels must be in 2..256, got {levels}")
    bins = (image.pixels.astype(np.int32) * levels) // 256
    return QuantizedImage(bins.astype(np.uint8), levels)


def window_count(width: int, height: int, size: int) -> int:
    """Number of non-overlapping tiles: floor(W/size) * floor(H/size)."""
    return (width // size) * (height // size)


def iter_windows(width: int, height: int, size: int) -> Iterator[WindowSpec]:
    """Row-major non-overlapping windows; partial edge tiles are dropped."""
    if size < 2:
        raise InputError(f"Window size must be >= 2, got {size}")
    for y in range(0, height - size + 1, size):
        for x in range(0, width - size + 1, size):
            yield WindowSpec(x, y, size)


def tile_windows(image, size: int) -> List[WindowSpec]:
    """
    Cut an image into non-overlapping size x size tiles in row-major order.

    Args:
        image: Any image exposing width and height
        size: Tile side in pixels (>= 2)

    Returns:
        List[WindowSpec]: floor(W/size) * floor(H/size) windows; empty when the
        image is smaller than one tile
    """
    return list(iter_windows(image.width, image.height, size))


def window_label(labels: LabelRaster, window: WindowSpec, purity: float = DEFAULT_PURITY) -> int:
    """
    Ground-truth class of a window.

    The modal labeled class wins when its share of all window pixels reaches
    `purity`; ties go to the smaller class id. Otherwise UNLABELED.

    Args:
        labels: Label raster aligned with the image
        window: Window inside the raster
        purity: Minimum share in (0, 1]

    Returns:
        int: Class id or UNLABELED
    """
    if not 0 < purity <= 1:
        raise InputError(f"purity must be in (0, 1], got {purity}")
    if not window.fits(labels.width, labels.height):
        raise InputError(f"Window {window} lies outside the {labels.width}x{labels.height} label raster")

    patch = window.cut(labels.pixels).ravel()
    counts = np.bincount(patch, minlength=256)[:UNLABELED]
    if counts.sum() == 0:
        return UNLABELED

    modal = int(np.argmax(counts))
    if counts[modal] / patch.size >= purity:
        return modal
    return UNLABELED


def load_label_raster(path: Union[str, Path], like=None) -> LabelRaster:
    """
    Decode an 8-bit gray label raster (pixel value = class id, 255 = unlabeled).

    Args:
        path: PNG or PGM file
        like: Optional image whose dimensions the raster must match

    Returns:
        LabelRaster: Decoded raster
    """
    decoded = load_image(path)
    if not isinstance(decoded, GrayImage):
        raise UnsupportedFormatError(f"Label raster must be single-channel: {path}")
    raster = LabelRaster(decoded.pixels)
    if like is not None and (raster.width, raster.height) != (like.width, like.height):
        raise InputError(
            f"Label raster {path} is {raster.width}x{raster.height}, "
            f"image is {like.width}x{like.height}"
        )
    return raster


def load_class_map(path: Union[str, Path]) -> ClassMap:
    """
    Parse a class map file with one `id,name` pair per line.

    Args:
        path: Text file; blank lines and `#` comments are ignored

    Returns:
        ClassMap: Entries ordered by id
    """
    path = Path(path)
    if not path.is_file():
        raise ImageReadError(f"Cannot read class map: {path}")
    try:
        df = pd.read_csv(
            path, header=None, names=["id", "name"], comment="#",
            skipinitialspace=True, skip_blank_lines=True, dtype={"name": str},
        )
        df["id"] = df["id"].astype(int)
    except (ValueError, pd.errors.ParserError) as e:
        raise TableError(f"Malformed class map {path}: {e}")

    if df["name"].isna().any():
        raise TableError(f"Class map {path} has an entry without a name")

    df = df.sort_values("id")
    entries = tuple((int(cid), str(name).strip()) for cid, name in zip(df["id"], df["name"]))
    class_map = ClassMap(entries)
    logger.info(f"Loaded class map {path}: {len(class_map)} classes")
    return class_map
