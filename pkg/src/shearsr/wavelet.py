"""One-level separable orthonormal DWT with periodic extension (Daubechies D4)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_S3 = np.sqrt(3.0)
LOWPASS = np.array([1 + _S3, 3 + _S3, 3 - _S3, 1 - _S3]) / (4 * np.sqrt(2.0))
HIGHPASS = np.array([(-1) ** n * LOWPASS[len(LOWPASS) - 1 - n] for n in range(len(LOWPASS))])

CHANNELS = ("vertical", "horizontal", "diagonal")


@dataclass
class WaveletCoefficients:
    approx: np.ndarray
    vertical: np.ndarray
    horizontal: np.ndarray
    diagonal: np.ndarray

    @property
    def details(self) -> np.ndarray:
        """Detail planes stacked as channels 1, 2, 3."""
        return np.stack([self.vertical, self.horizontal, self.diagonal])

    def with_details(self, details, approx=None) -> "WaveletCoefficients":
        a = np.zeros_like(self.approx) if approx is None else approx
        return WaveletCoefficients(a, details[0], details[1], details[2])


def _analyze_axis(x: np.ndarray, filt: np.ndarray, axis: int) -> np.ndarray:
    # out[i] = sum_n filt[n] * x[2i + n], indices mod length
    x = np.moveaxis(x, axis, 0)
    n = x.shape[0]
    out = np.zeros((n // 2,) + x.shape[1:])
    for t, h in enumerate(filt):
        out += h * np.roll(x, -t, axis=0)[::2]
    return np.moveaxis(out, 0, axis)


def _synthesize_axis(y: np.ndarray, filt: np.ndarray, axis: int) -> np.ndarray:
    # adjoint of _analyze_axis
    y = np.moveaxis(y, axis, 0)
    up = np.zeros((2 * y.shape[0],) + y.shape[1:])
    up[::2] = y
    out = np.zeros_like(up)
    for t, h in enumerate(filt):
        out += h * np.roll(up, t, axis=0)
    return np.moveaxis(out, 0, axis)


def dwt2(img) -> WaveletCoefficients:
    x = np.asarray(img, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] % 2 or x.shape[1] % 2:
        raise ValueError(f"dwt2 needs even dimensions, got {x.shape}")
    lo = _analyze_axis(x, LOWPASS, 1)
    hi = _analyze_axis(x, HIGHPASS, 1)
    return WaveletCoefficients(
        approx=_analyze_axis(lo, LOWPASS, 0),
        vertical=_analyze_axis(hi, LOWPASS, 0),
        horizontal=_analyze_axis(lo, HIGHPASS, 0),
        diagonal=_analyze_axis(hi, HIGHPASS, 0),
    )


def idwt2(coeffs: WaveletCoefficients) -> np.ndarray:
    shapes = {p.shape for p in (coeffs.approx, coeffs.vertical, coeffs.horizontal, coeffs.diagonal)}
    if len(shapes) != 1:
        raise ValueError(f"plane dimension mismatch: {sorted(shapes)}")
    lo = _synthesize_axis(coeffs.approx, LOWPASS, 0) + _synthesize_axis(coeffs.horizontal, HIGHPASS, 0)
    hi = _synthesize_axis(coeffs.vertical, LOWPASS, 0) + _synthesize_axis(coeffs.diagonal, HIGHPASS, 0)
    return _synthesize_axis(lo, LOWPASS, 1) + _synthesize_axis(hi, HIGHPASS, 1)
