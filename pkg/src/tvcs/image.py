"""Grayscale image I/O (binary PGM) and quality metrics.

Images are 2-D ``float64`` arrays on the unit intensity scale [0, 1].
Whenever an image is treated as a length-N vector it is flattened
row-major (C order).
"""

import math
import os

import numpy as np

__all__ = [
    "PgmError",
    "PgmFormatError",
    "PgmHeaderError",
    "PgmMaxvalError",
    "PgmTruncatedError",
    "load_pgm",
    "save_pgm",
    "psnr",
    "to_unit_range",
    "as_image",
    "center_crop",
]


class PgmError(ValueError):
    """Base class for PGM parse errors."""


class PgmFormatError(PgmError):
    """Magic number is not ``P5``."""


class PgmHeaderError(PgmError):
    """Header tokens are missing or not positive integers."""


class PgmMaxvalError(PgmError):
    """Maxval other than 255."""


class PgmTruncatedError(PgmError):
    """Payload shorter than width*height bytes."""


def as_image(u):
    """Validate and convert `u` to a finite 2-D float64 array."""
    arr = np.asarray(u, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    return arr


def _header_tokens(data, count):
    # Whitespace-separated tokens, '#' comments run to end of line.
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= n:
            raise PgmHeaderError("unexpected end of header")
        if data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    if pos >= n:
        raise PgmTruncatedError("missing raster data")
    return tokens, pos + 1


def load_pgm(path):
    """Read a binary (P5) PGM with maxval 255.

    Returns
    -------
    ndarray
        ``(height, width)`` array of ``byte / 255.0``.

    Raises
    ------
    PgmFormatError, PgmHeaderError, PgmMaxvalError, PgmTruncatedError
    """
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic != b"P5":
        if magic in (b"P1", b"P2", b"P3", b"P4", b"P6"):
            raise PgmFormatError(f"unsupported format {magic.decode()!r} (only binary P5)")
        raise PgmFormatError("unsupported format: not a PGM file")
    if len(data) < 3 or not data[2:3].isspace():
        raise PgmHeaderError("missing whitespace after magic number")
    tokens, offset = _header_tokens(data[2:], 3)
    offset += 2
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise PgmHeaderError(f"non-integer header field in {tokens!r}") from exc
    if width < 1 or height < 1:
        raise PgmHeaderError(f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise PgmMaxvalError(f"maxval {maxval} not supported (need 255)")
    raster = data[offset:offset + width * height]
    if len(raster) < width * height:
        raise PgmTruncatedError(
            f"expected {width * height} bytes of pixel data, found {len(raster)}"
        )
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return pixels.astype(np.float64) / 255.0


def save_pgm(img, path):
    """Write `img` as an 8-bit binary PGM, clamping to [0, 1] first."""
    arr = as_image(img)
    q = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    h, w = q.shape
    with open(os.fspath(path), "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(q.tobytes())


def psnr(reference, test):
    """Peak signal-to-noise ratio in dB with peak 1.

    Returns ``math.inf`` when the images are identical.
    """
    ref = np.asarray(reference, dtype=np.float64)
    tst = np.asarray(test, dtype=np.float64)
    if ref.shape != tst.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {tst.shape}")
    mse = float(np.mean((ref - tst) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def to_unit_range(img):
    """Divide byte-scaled input (max > 1.5) by 255; otherwise return as is."""
    arr = as_image(img)
    if arr.max() > 1.5:
        return arr / 255.0
    return arr


def center_crop(img, size):
    """Central ``size x size`` window of `img`."""
    arr = np.asarray(img)
    h, w = arr.shape
    if size > h or size > w:
        raise ValueError(f"crop {size} larger than image {h}x{w}")
    top, left = (h - size) // 2, (w - size) // 2
    return arr[top:top + size, left:left + size].copy()
