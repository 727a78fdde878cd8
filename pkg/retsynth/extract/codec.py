"""
Binary portable graymap (P5, FA) and pixmap (P6, CFP) files.

Pixels map to floats as 2 * (v / 255) - 1; saving inverts that with a
round-half-up clamp. Headers may carry comment lines, which are not kept, so
a save after a load reproduces the file byte for byte when its header is the
canonical "P6\\n<w> <h>\\n255\\n".
"""

import logging
from pathlib import Path
import numpy as np
from ..autodiff import Tensor
from ..shared.constants import MAX_IMAGE_DIM
from ..shared.errors import DimensionError, FormatError

logger = logging.getLogger(__name__)

MAGIC_CHANNELS = {b"P5": 1, b"P6": 3}
CHANNEL_MAGIC = {1: b"P5", 3: b"P6"}
WHITESPACE = b" \t\n\r\v\f"


def _next_token(data, offset):
    """skips whitespace and comments, returns (token, offset after token, token start)"""
    while offset < len(data):
        byte = data[offset : offset + 1]
        if byte == b"#":
            end = data.find(b"\n", offset)
            offset = len(data) if end < 0 else end + 1
        elif byte in WHITESPACE:
            offset += 1
        else:
            break
    start = offset
    while offset < len(data) and data[offset : offset + 1] not in WHITESPACE + b"#":
        offset += 1
    if start == offset:
        raise FormatError("header ends early", start)
    return data[start:offset], offset, start


def _header_int(data, offset, field):
    token, offset, start = _next_token(data, offset)
    if not token.isdigit():
        raise FormatError(f"{field} must be a decimal integer, got {token!r}", start)
    return int(token), offset, start


def decode_pnm(data):
    """parses P5/P6 bytes into a C x H x W uint8 array

    Raises:
        FormatError: bad magic, bad header, maxval != 255, dims over 1024 or a
            truncated payload; the message names the byte offset
    """
    magic = data[:2]
    if magic not in MAGIC_CHANNELS:
        raise FormatError(f"bad magic {magic!r}, expected P5 or P6", 0)
    channels = MAGIC_CHANNELS[magic]

    width, offset, start = _header_int(data, 2, "width")
    if not 1 <= width <= MAX_IMAGE_DIM:
        raise FormatError(f"width {width} outside [1, {MAX_IMAGE_DIM}]", start)
    height, offset, start = _header_int(data, offset, "height")
    if not 1 <= height <= MAX_IMAGE_DIM:
        raise FormatError(f"height {height} outside [1, {MAX_IMAGE_DIM}]", start)
    maxval, offset, start = _header_int(data, offset, "maxval")
    if maxval != 255:
        raise FormatError(f"maxval must be 255, got {maxval}", start)
    if offset >= len(data) or data[offset : offset + 1] not in WHITESPACE:
        raise FormatError("expected one whitespace byte after maxval", offset)
    offset += 1

    size = width * height * channels
    payload = data[offset : offset + size]
    if len(payload) < size:
        raise FormatError(f"payload truncated: expected {size} bytes, got {len(payload)}", len(data))
    if len(data) > offset + size:
        logger.debug("ignoring %s trailing bytes", len(data) - offset - size)
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return np.ascontiguousarray(pixels.transpose(2, 0, 1))


def encode_pnm(pixels):
    """C x H x W uint8 array to canonical P5/P6 bytes"""
    pixels = np.asarray(pixels, dtype=np.uint8)
    if pixels.ndim != 3 or pixels.shape[0] not in CHANNEL_MAGIC:
        raise DimensionError(f"image must be 1 x H x W or 3 x H x W, got {pixels.shape}")
    channels, height, width = pixels.shape
    if max(height, width) > MAX_IMAGE_DIM:
        raise DimensionError(f"image {height}x{width} exceeds {MAX_IMAGE_DIM}")
    header = CHANNEL_MAGIC[channels] + f"\n{width} {height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(pixels.transpose(1, 2, 0)).tobytes()


def to_float(pixels):
    return (2.0 * (pixels.astype(np.float64) / 255.0) - 1.0).astype(np.float32)


def to_pixels(values):
    """[-1, 1] floats to uint8 with round-half-up and clamping"""
    scaled = (np.asarray(values, dtype=np.float64) + 1.0) / 2.0 * 255.0
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def load_image(path):
    """reads a P5/P6 file as a C x H x W float32 array in [-1, 1]"""
    data = Path(path).read_bytes()
    try:
        return to_float(decode_pnm(data))
    except FormatError as exc:
        raise FormatError(f"{path}: {exc.detail}", exc.offset) from exc


def save_image(image, path):
    """writes a 1- or 3-channel image in [-1, 1] as P5 or P6

    Args:
        image (np.ndarray | Tensor): C x H x W or 1 x C x H x W
        path (str | Path): destination file

    Returns:
        Path: the written file
    """
    values = image.numpy() if isinstance(image, Tensor) else np.asarray(image)
    if values.ndim == 4 and values.shape[0] == 1:
        values = values[0]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_pnm(to_pixels(values)))
    return path


def image_suffix(channels):
    """file suffix for a channel count: .pgm (P5) or .ppm (P6)"""
    return ".pgm" if channels == 1 else ".ppm"
