"""Binary Netpbm (P5 grayscale, P6 color) reader and writer, maxval 255 only"""

from pathlib import Path
from typing import Tuple

import numpy as np

from ..core.types import Image
from ..errors import ImageFormatError, TruncatedImageError, UnsupportedFormatError
from ..utils.logger import get_logger
from .atomic import PathLike, atomic_write_bytes

logger = get_logger("io.netpbm")

_CHANNELS = {b"P5": 1, b"P6": 3}
_OTHER_NETPBM = {b"P1", b"P2", b"P3", b"P4", b"P7"}


def _parse_header(raw: bytes) -> Tuple[bytes, int, int, int]:
    """Return (magic, width, height, payload offset)."""
    magic = raw[:2]
    if magic in _OTHER_NETPBM:
        raise UnsupportedFormatError(f"unsupported Netpbm format {magic.decode()}; only P5/P6 are read")
    if magic not in _CHANNELS:
        raise ImageFormatError(f"bad magic {magic!r}; expected P5 or P6")

    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            end = raw.find(b"\n", pos)
            pos = len(raw) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace() and raw[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise TruncatedImageError("header ended before width, height and maxval")
        tokens.append(raw[start:pos])

    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as e:
        raise ImageFormatError(f"non-numeric header field in {tokens}") from e
    if maxval != 255:
        raise UnsupportedFormatError(f"maxval {maxval} not supported; expected 255")
    if width < 1 or height < 1:
        raise ImageFormatError(f"invalid dimensions {width}x{height}")

    # exactly one whitespace byte separates maxval from the payload
    return magic, width, height, pos + 1


def read_netpbm(path: PathLike) -> np.ndarray:
    """Read a P5/P6 file as uint8, shape (h, w) or (h, w, 3)."""
    raw = Path(path).read_bytes()
    magic, width, height, offset = _parse_header(raw)
    channels = _CHANNELS[magic]
    expected = width * height * channels
    actual = max(len(raw) - offset, 0)
    if actual < expected:
        raise TruncatedImageError(
            f"{path}: truncated payload, expected {expected} bytes, got {actual}"
        )

    pixels = np.frombuffer(raw, dtype=np.uint8, count=expected, offset=offset)
    shape = (height, width) if channels == 1 else (height, width, 3)
    logger.debug(f"Read {magic.decode()} {width}x{height} from {path}")
    return pixels.reshape(shape).copy()


def encode_netpbm(pixels: np.ndarray) -> bytes:
    """Serialize uint8 pixels (h, w) → P5 or (h, w, 3) → P6."""
    pixels = np.asarray(pixels)
    if pixels.dtype != np.uint8:
        raise ImageFormatError(f"pixels must be uint8, got {pixels.dtype}")
    if pixels.ndim == 2:
        magic = b"P5"
    elif pixels.ndim == 3 and pixels.shape[2] == 3:
        magic = b"P6"
    else:
        raise ImageFormatError(f"cannot encode pixel array of shape {pixels.shape}")
    height, width = pixels.shape[:2]
    header = magic + f"\n{width} {height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(pixels).tobytes()


def write_netpbm(path: PathLike, pixels: np.ndarray) -> Path:
    return atomic_write_bytes(path, encode_netpbm(pixels))


def read_pgm(path: PathLike) -> np.ndarray:
    pixels = read_netpbm(path)
    if pixels.ndim != 2:
        raise UnsupportedFormatError(f"{path}: expected a grayscale P5 file")
    return pixels


def read_image(path: PathLike) -> Image:
    """Read P5/P6 and scale to [0, 1]."""
    pixels = read_netpbm(path)
    if pixels.ndim == 2:
        data = pixels[np.newaxis, :, :]
    else:
        data = np.transpose(pixels, (2, 0, 1))
    return Image(data.astype(np.float64) / 255.0)


def image_to_pixels(image: Image) -> np.ndarray:
    quantized = np.rint(np.clip(image.data, 0.0, 1.0) * 255.0).astype(np.uint8)
    if image.channels == 1:
        return quantized[0]
    if image.channels == 3:
        return np.transpose(quantized, (1, 2, 0))
    raise UnsupportedFormatError(f"only 1- or 3-channel images can be written, got {image.channels}")


def write_image(path: PathLike, image: Image) -> Path:
    return write_netpbm(path, image_to_pixels(image))
