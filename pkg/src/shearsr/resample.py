"""2x upsamplers (isotropic and directional) and the degradation operators.

All operators use periodic boundaries.  Upsampled outputs keep the input
samples at even ``(row, col)`` positions.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .image import as_image, clamp

# Keys cubic convolution (a = -0.5) weights for the midpoint between samples
# at offsets -1, 0, 1, 2 (equivalently line positions -3, -1, 1, 3 half-steps).
KEYS_HALF = np.array([-1.0, 9.0, 9.0, -1.0]) / 16.0

# noise streams: one PCG64 generator per image row, seeded by SeedSequence(seed, spawn_key=(row,))
NOISE_BITGEN = "PCG64"

# lattice directions as (dx, dy) with x to the right and y upward
SNAP_DIRECTIONS = ((1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2))


def downsample2(img) -> np.ndarray:
    x = as_image(img)
    if x.shape[0] % 2 or x.shape[1] % 2:
        raise ValueError(f"downsample2 needs even dimensions, got {x.shape}")
    return x[::2, ::2].copy()


def gaussian_kernel3(sigma: float) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    d = np.arange(-1, 2, dtype=np.float64)
    k = np.exp(-(d[:, None] ** 2 + d[None, :] ** 2) / (2.0 * sigma**2))
    return k / k.sum()


def gaussian_blur3(img, sigma: float = 0.5) -> np.ndarray:
    x = as_image(img)
    k = gaussian_kernel3(sigma)
    out = np.zeros_like(x)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            out += k[di + 1, dj + 1] * np.roll(x, (di, dj), axis=(0, 1))
    return out


def gaussian_noise(shape, sigma: float, seed: int) -> np.ndarray:
    rows = []
    for r in range(shape[0]):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(r,))))
        rows.append(rng.standard_normal(shape[1]))
    return sigma * np.array(rows).reshape(shape)


def add_gaussian_noise(img, sigma: float = 0.1, seed: int = 0) -> np.ndarray:
    x = as_image(img)
    if sigma == 0:
        return x.copy()
    return clamp(x + gaussian_noise(x.shape, sigma, seed))


def _midpoint(a, b, c, d):
    # Keys weights (-1, 9, 9, -1)/16 arranged so equal inputs give that value exactly
    inner = b + c
    return 0.5 * inner + (inner - (a + d)) / 16.0


def _keys_mid(x: np.ndarray, axis: int) -> np.ndarray:
    # value halfway between x[i] and x[i+1]
    return _midpoint(*(np.roll(x, -s, axis=axis) for s in (-1, 0, 1, 2)))


def bicubic_up2(img) -> np.ndarray:
    """Separable Keys cubic convolution doubling both dimensions."""
    x = as_image(img)
    m, n = x.shape
    rows = np.empty((2 * m, n))
    rows[::2] = x
    rows[1::2] = _keys_mid(x, 0)
    out = np.empty((2 * m, 2 * n))
    out[:, ::2] = rows
    out[:, 1::2] = _keys_mid(rows, 1)
    return out


def snap_direction(theta: float) -> tuple[int, int]:
    """Lattice direction ``(dx, dy)`` closest to angle ``theta`` (mod pi)."""
    best, best_d = None, math.inf
    for dx, dy in SNAP_DIRECTIONS:
        diff = (theta - math.atan2(dy, dx)) % math.pi
        d = min(diff, math.pi - diff)
        if d < best_d - 1e-12:
            best, best_d = (dx, dy), d
    return best


def directional_up2(img, theta: float) -> np.ndarray:
    """2x upsampling that interpolates along the lattice direction nearest ``theta``.

    A new pixel lying on a lattice line through known samples gets the 1-D
    Keys midpoint value from the four nearest of them; all other new pixels
    keep the bicubic value.
    """
    x = as_image(img)
    out = bicubic_up2(x)
    dx, dy = snap_direction(theta)
    dr, dc = -dy, dx
    cr, cc = dr % 2, dc % 2
    # pixel (2i + cr, 2j + cc) + t * (dr, dc) with t odd is the known sample
    # ((2i + cr + t dr) / 2, (2j + cc + t dc) / 2)
    taps = []
    for t in (-3, -1, 1, 3):
        si = (cr + t * dr) // 2
        sj = (cc + t * dc) // 2
        taps.append(np.roll(x, (-si, -sj), axis=(0, 1)))
    out[cr::2, cc::2] = _midpoint(*taps)
    return out


_DEGRADE_RE = re.compile(r"^ds(?P<blur>\+blur)?(?:\+noise:(?P<seed>\d+))?$")


@dataclass(frozen=True)
class DegradationSpec:
    """Downsample by 2, then optional 3x3 Gaussian blur, then optional noise."""

    blur: bool = False
    blur_sigma: float = 0.5
    noise: bool = False
    noise_sigma: float = 0.1
    seed: int = 0

    @classmethod
    def parse(cls, text: str) -> "DegradationSpec":
        m = _DEGRADE_RE.match(text.strip())
        if m is None:
            raise ValueError(
                f"bad degradation {text!r}; expected ds[+blur][+noise:SEED]"
            )
        seed = m.group("seed")
        return cls(blur=bool(m.group("blur")), noise=seed is not None, seed=int(seed or 0))

    @property
    def name(self) -> str:
        s = "ds"
        if self.blur:
            s += "+blur"
        if self.noise:
            s += f"+noise:{self.seed}"
        return s

    def apply(self, img) -> np.ndarray:
        y = downsample2(img)
        if self.blur:
            y = gaussian_blur3(y, self.blur_sigma)
        if self.noise:
            y = add_gaussian_noise(y, self.noise_sigma, self.seed)
        return y


def degrade(img, spec: DegradationSpec | str) -> np.ndarray:
    if isinstance(spec, str):
        spec = DegradationSpec.parse(spec)
    return spec.apply(img)
