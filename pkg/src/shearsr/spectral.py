"""Centered 2-D DFT pair.

A spectrum of an ``M x N`` image is stored so that entry ``[a, b]`` holds the
frequency ``(a - M // 2, b - N // 2)``; rows run over
``-floor(M/2) .. ceil(M/2) - 1`` and likewise for columns.  The forward
transform is unnormalized, the inverse carries the ``1 / (M N)`` factor.
"""
from __future__ import annotations

import numpy as np

IMAG_TOL = 1e-10


class SymmetryError(ArithmeticError):
    """Inverse transform produced a non-negligible imaginary part."""


def frequencies(n: int) -> np.ndarray:
    """Integer frequencies ``-floor(n/2) .. ceil(n/2) - 1`` in storage order."""
    return np.arange(n) - n // 2


def frequency_grid(m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    w1, w2 = np.meshgrid(frequencies(m), frequencies(n), indexing="ij")
    return w1.astype(np.float64), w2.astype(np.float64)


def dft2(img) -> np.ndarray:
    x = np.asarray(img, dtype=np.float64)
    return np.fft.fftshift(np.fft.fft2(x))


def idft2(spec, tol: float = IMAG_TOL) -> np.ndarray:
    """Inverse of :func:`dft2`; returns the real part after checking the rest."""
    x = np.fft.ifft2(np.fft.ifftshift(np.asarray(spec)))
    check_real(x, tol)
    return x.real.copy()


def check_real(x: np.ndarray, tol: float = IMAG_TOL) -> None:
    scale = max(1.0, float(np.max(np.abs(x.real), initial=0.0)))
    resid = float(np.max(np.abs(x.imag), initial=0.0))
    if resid > tol * scale:
        raise SymmetryError(
            f"imaginary residue {resid:.3e} exceeds tolerance; filters are not symmetric"
        )
