"""Fast finite shearlet transform on a periodic ``M x N`` grid.

Filters are sampled directly in frequency from Meyer-type generators and form
a Parseval frame: at every grid frequency the squared filters sum to one, so
the adjoint (:func:`synthesize`) inverts the analysis exactly.

Frequency coordinates follow the image geometry: ``wx`` is the column
frequency and ``wy = -row frequency`` (rows run downward, ``y`` runs upward).
The cone ``"h"`` holds frequencies with ``|wy| <= |wx|`` (vertical-ish edges),
the cone ``"v"`` those with ``|wx| < |wy|``.  Band ``(cone, j, k)`` is centered
on the shear ``s = k / 2**j``; the seam bands ``|k| = 2**j`` straddle both
cones and are labelled ``"hv"``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .spectral import check_real, frequencies

__all__ = [
    "meyer_v",
    "meyer_b",
    "meyer_scaling",
    "psi1_hat",
    "psi2_hat",
    "phi_hat",
    "Band",
    "ShearletSystem",
    "ShearletCoefficients",
    "default_scales",
    "band_count",
    "build_system",
    "analyze",
    "synthesize",
    "SlopeEstimate",
    "shear_magnitudes",
    "detect_slope",
]


def meyer_v(x):
    """Auxiliary Meyer polynomial, 0 below 0 and 1 above 1."""
    x = np.asarray(x, dtype=np.float64)
    xc = np.clip(x, 0.0, 1.0)
    p = xc**4 * (35.0 - 84.0 * xc + 70.0 * xc**2 - 20.0 * xc**3)
    return np.where(x < 0, 0.0, np.where(x > 1, 1.0, p))


def meyer_b(w):
    a = np.abs(np.asarray(w, dtype=np.float64))
    rise = np.sin(0.5 * np.pi * meyer_v(a - 1.0))
    fall = np.cos(0.5 * np.pi * meyer_v(0.5 * a - 1.0))
    return np.where((a >= 1) & (a <= 2), rise, np.where((a > 2) & (a <= 4), fall, 0.0))


def _meyer_b_plateau(w):
    # b with the decaying half replaced by 1; closes the partition at the finest scale
    a = np.abs(np.asarray(w, dtype=np.float64))
    return np.where(a > 2, 1.0, meyer_b(a))


def meyer_scaling(w):
    """One-dimensional Meyer scaling function in frequency."""
    a = np.abs(np.asarray(w, dtype=np.float64))
    mid = np.cos(0.5 * np.pi * meyer_v(2.0 * a - 1.0))
    return np.where(a <= 0.5, 1.0, np.where(a < 1, mid, 0.0))


def psi1_hat(w):
    return np.sqrt(meyer_b(2.0 * np.asarray(w, dtype=np.float64)) ** 2 + meyer_b(w) ** 2)


def psi2_hat(w):
    w = np.asarray(w, dtype=np.float64)
    return np.sqrt(np.where(w <= 0, meyer_v(1.0 + w), meyer_v(1.0 - w)))


def phi_hat(w1, w2):
    """Low-pass generator: the Meyer scaling function of the dominant coordinate."""
    w1 = np.asarray(w1, dtype=np.float64)
    w2 = np.asarray(w2, dtype=np.float64)
    return np.where(np.abs(w2) <= np.abs(w1), meyer_scaling(w1), meyer_scaling(w2))


class Band(NamedTuple):
    cone: str  # "low", "h", "v" or "hv"
    j: int
    k: int


def default_scales(m: int, n: int) -> int:
    return max(1, int(math.floor(0.5 * math.log2(max(m, n)))))


def max_scales(m: int, n: int) -> int:
    return int(math.floor(math.log2(max(m, n))))


def band_count(J: int) -> int:
    return 1 + sum(2 * (2 ** (j + 1) - 1) + 2 for j in range(J))


def _band_table(J: int) -> list[Band]:
    bands = [Band("low", -1, 0)]
    for j in range(J):
        ks = range(-(2**j) + 1, 2**j)
        bands += [Band("h", j, k) for k in ks]
        bands += [Band("v", j, k) for k in ks]
        bands += [Band("hv", j, -(2**j)), Band("hv", j, 2**j)]
    return bands


@dataclass(frozen=True, eq=False)
class ShearletSystem:
    """Frequency filter bank for one grid size.

    ``filters[b]`` is band ``b`` in unshifted FFT order (``np.fft.fft2``
    layout), ready to multiply an ``fft2`` spectrum.
    """

    shape: tuple[int, int]
    scales: int
    bands: tuple[Band, ...]
    filters: np.ndarray = field(repr=False)

    @property
    def n_bands(self) -> int:
        return len(self.bands)

    def index(self, cone: str, j: int, k: int) -> int:
        return self._lookup()[(cone, j, k)]

    def _lookup(self):
        table = self.__dict__.get("_table")
        if table is None:
            table = {tuple(b): i for i, b in enumerate(self.bands)}
            object.__setattr__(self, "_table", table)
        return table

    def scale_bands(self, j: int) -> list[int]:
        return [i for i, b in enumerate(self.bands) if b.j == j]

    def centered_filter(self, b: int) -> np.ndarray:
        return np.fft.fftshift(self.filters[b])


@dataclass(eq=False)
class ShearletCoefficients:
    system: ShearletSystem
    planes: np.ndarray  # (len(bands), M, N)
    bands: tuple[int, ...]

    def __post_init__(self):
        if self.planes.shape[0] != len(self.bands):
            raise ValueError("plane count does not match band list")
        if self.planes.shape[1:] != self.system.shape:
            raise ValueError("plane shape does not match system")

    def plane(self, b: int) -> np.ndarray:
        return self.planes[self.bands.index(b)]


def _negation_index(n: int) -> np.ndarray:
    f = frequencies(n)
    return (-f + n // 2) % n


def build_system(M: int, N: int, J: int | None = None) -> ShearletSystem:
    """Sample the shearlet filter bank on the centered ``M x N`` frequency grid."""
    if M < 4 or N < 4:
        raise ValueError("grid must be at least 4 x 4")
    if J is None:
        J = default_scales(M, N)
    if not 1 <= J <= max_scales(M, N):
        raise ValueError(f"scale count J={J} outside 1..{max_scales(M, N)}")

    rows = frequencies(M).astype(np.float64)
    cols = frequencies(N).astype(np.float64)
    wy = -rows[:, None] * np.ones((1, N))
    wx = np.ones((M, 1)) * cols[None, :]
    ax, ay = np.abs(wx), np.abs(wy)
    t = np.maximum(ax, ay)
    in_h = (ay <= ax) & (t > 0)
    in_v = ax < ay
    with np.errstate(divide="ignore", invalid="ignore"):
        slope_h = np.where(in_h, wy / np.where(in_h, wx, 1.0), 0.0)
        slope_v = np.where(in_v, wx / np.where(in_v, wy, 1.0), 0.0)

    bands = _band_table(J)
    filt = np.empty((len(bands), M, N))
    filt[0] = phi_hat(wx, wy)
    radial = {}
    for j in range(J):
        s = t / 4.0**j
        tail = _meyer_b_plateau(s) if j == J - 1 else meyer_b(s)
        radial[j] = np.sqrt(meyer_b(2.0 * s) ** 2 + tail**2)

    for i, band in enumerate(bands[1:], start=1):
        j, k = band.j, band.k
        scale = 2.0**j
        ang = np.zeros((M, N))
        if band.cone in ("h", "hv"):
            ang = np.where(in_h, psi2_hat(k + scale * slope_h), ang)
        if band.cone in ("v", "hv"):
            ang = np.where(in_v, psi2_hat(k + scale * slope_v), ang)
        filt[i] = radial[j] * ang

    # pair every frequency with its negative (mod the grid) so outputs are real
    neg_r, neg_c = _negation_index(M), _negation_index(N)
    mirrored = filt[:, neg_r][:, :, neg_c]
    filt = np.sqrt(0.5 * (filt**2 + mirrored**2))

    filters = np.fft.ifftshift(filt, axes=(1, 2))
    filters.setflags(write=False)
    return ShearletSystem((M, N), J, tuple(bands), filters)


def _check_shape(img: np.ndarray, system: ShearletSystem) -> None:
    if img.shape != system.shape:
        raise ValueError(f"dimension mismatch: image {img.shape}, system {system.shape}")


def analyze(img, system: ShearletSystem, bands=None) -> ShearletCoefficients:
    """Shearlet coefficients ``ifft2(fft2(img) * filter)`` for each band."""
    x = np.asarray(img, dtype=np.float64)
    _check_shape(x, system)
    sel = tuple(range(system.n_bands)) if bands is None else tuple(int(b) for b in bands)
    spec = np.fft.fft2(x)
    planes = np.empty((len(sel),) + system.shape)
    for i, b in enumerate(sel):
        out = np.fft.ifft2(spec * system.filters[b])
        check_real(out)
        planes[i] = out.real
    return ShearletCoefficients(system, planes, sel)


def synthesize(coeffs: ShearletCoefficients, system: ShearletSystem | None = None) -> np.ndarray:
    """Adjoint of :func:`analyze`; inverts it when all bands are present."""
    system = coeffs.system if system is None else system
    if system is not coeffs.system and (
        system.shape != coeffs.system.shape or system.bands != coeffs.system.bands
    ):
        raise ValueError("band mismatch: coefficients belong to a different system")
    acc = np.zeros(system.shape, dtype=np.complex128)
    for plane, b in zip(coeffs.planes, coeffs.bands):
        acc += np.fft.fft2(plane) * system.filters[b]
    out = np.fft.ifft2(acc)
    check_real(out)
    return out.real


class SlopeEstimate(NamedTuple):
    k: int
    slope: float
    cone: str


def shear_magnitudes(coeffs: ShearletCoefficients, j: int, m: tuple[int, int]) -> dict[tuple[str, int], float]:
    """``|coefficient|`` at position ``m`` for every band of scale ``j``."""
    sys_ = coeffs.system
    if not 0 <= j < sys_.scales:
        raise ValueError(f"scale {j} not in system with J={sys_.scales}")
    r, c = m
    out = {}
    for pos, b in enumerate(coeffs.bands):
        band = sys_.bands[b]
        if band.j == j:
            out[(band.cone, band.k)] = abs(float(coeffs.planes[pos, r, c]))
    return out


def detect_slope(coeffs: ShearletCoefficients, j: int, m: tuple[int, int]) -> SlopeEstimate:
    """Dominant shear at position ``m`` and scale ``j``.

    A ``"v"`` winner estimates the edge slope ``r`` (``|r| <= 1``) directly; an
    ``"h"`` winner estimates ``1 / r``.  Seam bands count as ``"h"``.
    Ties go to the smallest ``|k|``, then to cone ``"h"``.
    """
    mags = shear_magnitudes(coeffs, j, m)
    if not mags:
        raise ValueError(f"no bands of scale {j} among the coefficients")
    cone_rank = {"h": 0, "hv": 0, "v": 1}
    top = max(mags.values())
    tol = 1e-12 * top
    best = min(
        (key for key, val in mags.items() if val >= top - tol),
        key=lambda key: (abs(key[1]), cone_rank[key[0]], key[1]),
    )
    cone, k = best
    return SlopeEstimate(k, k / 2.0**j, "v" if cone == "v" else "h")
