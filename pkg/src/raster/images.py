"""
Raster containers, image loading and binarization.

Every later stage consumes either a GrayImage (luminance 0..255) or a
BinaryImage (1 = ink). Both wrap read-only 2-D numpy arrays indexed
``[row, col]``.
"""

import logging
import re
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image, UnidentifiedImageError
from skimage.filters import threshold_otsu

from errors import CorruptHeader, DegenerateImage, UnreadableFile, UnsupportedFormat

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
PGM_MAGICS = (b"P2", b"P5")

_WHITESPACE = b" \t\r\n\x0b\x0c"


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


class GrayImage:
    """
    Immutable 8-bit grayscale raster.

    Parameters
    ----------
    data : array_like
        2-D array of luminance values in [0, 255], row-major.

    Attributes
    ----------
    data : numpy.ndarray
        Read-only ``uint8`` array of shape ``(height, width)``.
    """

    __slots__ = ("data",)

    def __init__(self, data):
        array = np.asarray(data)
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:
            raise ValueError(f"GrayImage needs a non-empty 2-D array, got shape {array.shape}")
        if array.dtype != np.uint8:
            if array.size and (array.min() < 0 or array.max() > 255):
                raise ValueError("GrayImage values must lie in [0, 255]")
            array = array.astype(np.uint8)
        object.__setattr__(self, "data", _frozen(array))

    def __setattr__(self, name, value):
        raise AttributeError("GrayImage is immutable")

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @classmethod
    def from_binary(cls, img: "BinaryImage") -> "GrayImage":
        """Render ink as black (0) on a white (255) background."""
        return cls(np.where(img.data, 0, 255).astype(np.uint8))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.data.shape, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"GrayImage(w={self.width}, h={self.height})"


class BinaryImage:
    """
    Immutable binary raster, ``True`` marking foreground (ink) pixels.

    Parameters
    ----------
    data : array_like
        2-D array whose elements are 0/1 or booleans.
    """

    __slots__ = ("data",)

    def __init__(self, data):
        array = np.asarray(data)
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:
            raise ValueError(f"BinaryImage needs a non-empty 2-D array, got shape {array.shape}")
        if array.dtype != np.bool_:
            if array.size and not np.isin(array, (0, 1)).all():
                raise ValueError("BinaryImage elements must be 0 or 1")
            array = array.astype(bool)
        object.__setattr__(self, "data", _frozen(array))

    def __setattr__(self, name, value):
        raise AttributeError("BinaryImage is immutable")

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    def count(self) -> int:
        """Number of foreground pixels."""
        return int(np.count_nonzero(self.data))

    @classmethod
    def zeros(cls, height: int, width: int) -> "BinaryImage":
        return cls(np.zeros((height, width), dtype=bool))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.data.shape, np.packbits(self.data).tobytes()))

    def __repr__(self) -> str:
        return f"BinaryImage(w={self.width}, h={self.height}, ink={self.count()})"


# Loading ----------------------------------------------------------------------

def _parse_pgm_header(raw: bytes, path: PathLike):
    """Return (magic, width, height, maxval, payload_offset)."""
    magic = raw[:2]
    pos = 2
    values = []
    while len(values) < 3:
        while pos < len(raw) and raw[pos] in _WHITESPACE:
            pos += 1
        if pos < len(raw) and raw[pos:pos + 1] == b"#":
            end = raw.find(b"\n", pos)
            pos = len(raw) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(raw) and raw[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise CorruptHeader("PGM header is missing width/height/maxval", path)
        values.append(int(raw[start:pos]))
    if pos >= len(raw) or raw[pos] not in _WHITESPACE:
        raise CorruptHeader("PGM header is not terminated by whitespace", path)
    width, height, maxval = values
    if width < 1 or height < 1:
        raise CorruptHeader(f"PGM dimensions must be positive, got {width}x{height}", path)
    if not 1 <= maxval <= 65535:
        raise CorruptHeader(f"PGM maxval {maxval} outside 1..65535", path)
    return magic, width, height, maxval, pos + 1


def _rescale(values: np.ndarray, maxval: int) -> np.ndarray:
    if maxval == 255:
        return values.astype(np.uint8)
    scaled = np.floor(np.clip(values, 0, maxval) * 255.0 / maxval + 0.5)
    return scaled.astype(np.uint8)


def _decode_pgm(raw: bytes, path: PathLike) -> np.ndarray:
    magic, width, height, maxval, offset = _parse_pgm_header(raw, path)
    count = width * height
    if magic == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        payload = raw[offset:]
        if len(payload) < count * dtype.itemsize:
            raise CorruptHeader(
                f"P5 payload holds {len(payload)} bytes, header promises {count * dtype.itemsize}", path
            )
        values = np.frombuffer(payload, dtype=dtype, count=count)
    else:
        body = re.sub(rb"#[^\n]*", b" ", raw[offset:])
        tokens = body.split()
        if len(tokens) < count:
            raise CorruptHeader(f"P2 raster holds {len(tokens)} samples, header promises {count}", path)
        try:
            values = np.array([int(t) for t in tokens[:count]], dtype=np.int64)
        except ValueError:
            raise CorruptHeader("P2 raster contains a non-integer sample", path)
    return _rescale(values.reshape(height, width), maxval)


def _luminance(rgb: np.ndarray) -> np.ndarray:
    rgb = rgb.astype(np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.floor(y + 0.5).clip(0, 255).astype(np.uint8)


def _decode_png(raw_path: Path) -> np.ndarray:
    try:
        with Image.open(raw_path) as im:
            im.load()
            mode = im.mode
            if mode == "L":
                return np.array(im, dtype=np.uint8)
            if mode in ("I", "I;16", "I;16B", "I;16L"):
                return _rescale(np.array(im, dtype=np.int64), 65535)
            if mode == "1":
                return np.array(im.convert("L"), dtype=np.uint8)
            return _luminance(np.array(im.convert("RGB")))
    except (UnidentifiedImageError, SyntaxError, ValueError, OSError) as e:
        raise CorruptHeader(f"PNG could not be decoded ({e})", raw_path)


def load_image(path: PathLike) -> GrayImage:
    """
    Load a PGM (P2/P5) or PNG file as a grayscale image.

    Color PNGs are reduced to luminance ``round(0.299R + 0.587G + 0.114B)``;
    16-bit samples are rescaled to 8 bits.

    Parameters
    ----------
    path : str or Path
        Image file to read.

    Returns
    -------
    GrayImage

    Raises
    ------
    UnreadableFile
        The file is missing or cannot be read.
    UnsupportedFormat
        The file is neither PGM nor PNG.
    CorruptHeader
        The header or payload is malformed.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise UnreadableFile(f"cannot read file ({e.strerror or e})", path)

    if raw[:2] in PGM_MAGICS:
        data = _decode_pgm(raw, path)
    elif raw.startswith(PNG_SIGNATURE):
        data = _decode_png(path)
    else:
        raise UnsupportedFormat("only PGM (P2/P5) and PNG images are supported", path)

    logger.debug(f"Loaded {path} ({data.shape[1]}x{data.shape[0]})")
    return GrayImage(data)


def write_pgm(img: Union[GrayImage, BinaryImage], path: PathLike) -> Path:
    """Write an image as binary 8-bit PGM (P5); binary images are drawn black on white."""
    if isinstance(img, BinaryImage):
        img = GrayImage.from_binary(img)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(img.data, dtype=np.uint8), mode="L").save(path, format="PPM")
    return path


# Binarization -----------------------------------------------------------------

def otsu_threshold(img: GrayImage) -> int:
    """
    Otsu threshold ``T`` for the ``< T`` ink rule.

    ``threshold_otsu`` returns the last level of the dark class, so the ink
    cut sits one level above it.

    Raises
    ------
    DegenerateImage
        All pixels share one value, so no threshold separates two classes.
    """
    data = img.data
    if data.min() == data.max():
        raise DegenerateImage("uniform image has no Otsu threshold")
    return int(threshold_otsu(data)) + 1


def binarize(img: GrayImage, threshold: Optional[int] = None, invert: bool = False) -> BinaryImage:
    """
    Mark dark pixels as ink.

    A pixel is foreground iff its luminance is below ``threshold``. Without an
    explicit threshold Otsu's method picks one; a uniform image then yields an
    all-background result.

    Parameters
    ----------
    img : GrayImage
    threshold : int, optional
        Level in [0, 255].
    invert : bool, optional
        Treat light pixels as ink (binarizes ``255 - luminance``).
    """
    data = img.data
    if invert:
        data = 255 - data
        img = GrayImage(data)
    if threshold is None:
        try:
            threshold = otsu_threshold(img)
        except DegenerateImage:
            logger.debug("Uniform image under auto-threshold; returning all background")
            return BinaryImage.zeros(img.height, img.width)
    elif not 0 <= threshold <= 255:
        raise ValueError(f"threshold {threshold} outside [0, 255]")
    return BinaryImage(data < threshold)
