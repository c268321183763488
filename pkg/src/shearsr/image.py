"""Grayscale images: PGM I/O, PSNR, and synthetic cartoon-like test images.

Images are plain ``float64`` arrays of shape ``(M, N)`` with values in
``[0, 1]``.
"""
from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "PGMError",
    "as_image",
    "clamp",
    "load_pgm",
    "save_pgm",
    "psnr",
    "gen_half_plane",
    "gen_circle",
    "gen_parabola",
    "PRESETS",
    "make_preset",
]


class PGMError(ValueError):
    """Raised for unreadable or unsupported PGM files."""


class MalformedHeaderError(PGMError):
    pass


class TruncatedPayloadError(PGMError):
    pass


class UnsupportedFormatError(PGMError):
    pass


def as_image(a) -> np.ndarray:
    img = np.asarray(a, dtype=np.float64)
    if img.ndim != 2 or min(img.shape) < 1:
        raise ValueError(f"expected a non-empty 2-D array, got shape {img.shape}")
    return img


def clamp(img: np.ndarray) -> np.ndarray:
    return np.clip(img, 0.0, 1.0)


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        ch = data[pos : pos + 1]
        if ch == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise MalformedHeaderError("malformed header: unexpected end of header")
    return data[start:pos], pos


def load_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM file, scaling pixels by ``1/maxval``."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 2:
        raise MalformedHeaderError("malformed header: file too short")
    magic = data[:2]
    if magic in (b"P6", b"P3"):
        raise UnsupportedFormatError(
            f"unsupported magic number {magic.decode()!r}: color images are not accepted"
        )
    if magic != b"P5":
        raise UnsupportedFormatError(f"unsupported magic number {magic!r}")
    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_token(data, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise MalformedHeaderError(f"malformed header: bad field {tok!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise MalformedHeaderError("malformed header: non-positive dimensions")
    if not 0 < maxval < 65536:
        raise MalformedHeaderError(f"malformed header: maxval {maxval} out of range")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise MalformedHeaderError("malformed header: missing separator before raster")
    pos += 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = width * height * dtype.itemsize
    raster = data[pos : pos + need]
    if len(raster) < need:
        raise TruncatedPayloadError(
            f"truncated payload: expected {need} bytes, found {len(raster)}"
        )
    pix = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    return pix.astype(np.float64) / maxval


def save_pgm(img, path, maxval: int = 255) -> None:
    """Write ``img`` as binary PGM; values are clamped to [0, 1] and rounded."""
    img = as_image(img)
    if not 0 < maxval < 65536:
        raise ValueError("maxval must lie in 1..65535")
    q = np.rint(clamp(img) * maxval)
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode("ascii")
    directory = os.path.dirname(os.fspath(path))
    if directory and not os.path.isdir(directory):
        raise OSError(f"cannot write {path!s}: directory does not exist")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(q.astype(dtype).tobytes())


def psnr(reference, test) -> float:
    """Peak signal-to-noise ratio in dB for unit-peak images.

    Returns ``math.inf`` when the images are identical.
    """
    ref = as_image(reference)
    tst = as_image(test)
    if ref.shape != tst.shape:
        raise ValueError(f"dimension mismatch: {ref.shape} vs {tst.shape}")
    mse = float(np.mean((ref - tst) ** 2))
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)


def _centered_coords(size: int) -> tuple[np.ndarray, np.ndarray]:
    # x grows to the right, y grows upward; origin at the image midpoint
    idx = np.arange(size, dtype=np.float64)
    xc = idx - (size - 1) / 2.0
    yc = (size - 1) / 2.0 - idx
    return xc[None, :], yc[:, None]


def gen_half_plane(size: int, slope: float) -> np.ndarray:
    """Indicator of ``y > slope * x`` in centered coordinates."""
    if size < 2:
        raise ValueError("size must be at least 2")
    xc, yc = _centered_coords(size)
    return (yc > slope * xc).astype(np.float64)


def gen_circle(size: int, radius_fraction: float = 0.3) -> np.ndarray:
    """Disk of radius ``radius_fraction * size`` centered at the midpoint."""
    if size < 2:
        raise ValueError("size must be at least 2")
    if not 0.0 < radius_fraction < 0.5:
        raise ValueError("radius_fraction must lie in (0, 0.5)")
    xc, yc = _centered_coords(size)
    r = radius_fraction * size
    return (xc**2 + yc**2 < r * r).astype(np.float64)


def gen_parabola(size: int, curvature: float = 1.0 / 64.0) -> np.ndarray:
    """Indicator of ``y > curvature * x**2`` in centered coordinates."""
    if size < 2:
        raise ValueError("size must be at least 2")
    if curvature <= 0:
        raise ValueError("curvature must be positive")
    xc, yc = _centered_coords(size)
    return (yc > curvature * xc**2).astype(np.float64)


PRESETS = {
    "plane": lambda size: gen_half_plane(size, 5.0),
    "circle": lambda size: gen_circle(size, 0.3),
    "parabola": lambda size: gen_parabola(size, 1.0 / 64.0),
    "constant": lambda size: np.full((size, size), 0.5),
}


def make_preset(name: str, size: int = 256) -> np.ndarray:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return factory(size)
