"""Sparse mixing estimators for 2x superresolution.

Given frame coefficients ``c`` of a low-resolution image ``y`` (channels x
grid), mixing weights ``a(B) >= 0`` are chosen per block to minimize::

    1/2 || c (1 - sum_B a(B) 1_B) ||^2  +  lam * sum_B a(B) ||c|_B - cbar|_B||^2

where ``cbar|_B`` replaces each coefficient by its mean along the block's
line through it.  The estimate is then::

    U y + sum_theta (U_theta - U) synth( sum_{B at theta} a(B) 1_B c )

with ``U`` the bicubic and ``U_theta`` the directional upsampler.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import ffst, kernels, wavelet
from .blocks import Block, BlockFamily, BlockShape, build_family
from .image import clamp
from .resample import bicubic_up2, directional_up2

log = logging.getLogger(__name__)

DEFAULT_LAMBDA = 0.1
DEFAULT_SWEEPS = 10
DEFAULT_SME_SCALES = 2
REL_TOL = 1e-8
PRUNE_REL = 1e-12
METHODS = ("bicubic", "sme-wavelet", "sme-shearlet")


def _block_values(c: np.ndarray, block: Block) -> tuple[np.ndarray, np.ndarray]:
    _, M, N = c.shape
    pos = block.positions(M, N)
    return c[:, pos[:, 0], pos[:, 1]], block.shape.lines


def directional_average(c: np.ndarray, block: Block) -> np.ndarray:
    """Line means of ``c`` over ``block``: array ``(channels, block size)``."""
    vals, lines = _block_values(np.asarray(c, dtype=np.float64), block)
    out = np.empty_like(vals)
    for line in np.unique(lines):
        sel = lines == line
        out[:, sel] = vals[:, sel].mean(axis=1, keepdims=True)
    return out


def regularizer(c: np.ndarray, block: Block) -> float:
    """``||c|_B - cbar|_B||^2`` summed over channels and block positions."""
    c = np.asarray(c, dtype=np.float64)
    vals, _ = _block_values(c, block)
    return float(((vals - directional_average(c, block)) ** 2).sum())


@dataclass(eq=False)
class _Problem:
    """Flattened shape table and candidate blocks handed to the kernels."""

    off_r: np.ndarray
    off_c: np.ndarray
    lines: np.ndarray
    ptr: np.ndarray
    nlines: np.ndarray
    cand_shape: np.ndarray
    cand_r: np.ndarray
    cand_c: np.ndarray
    cand_id: np.ndarray
    cand_angle: np.ndarray
    angles: list[float]

    @classmethod
    def from_shapes(cls, shapes: Sequence[BlockShape], cand_shape, cand_r, cand_c, cand_id, cand_angle, angles):
        sizes = [s.size for s in shapes]
        ptr = np.zeros(len(shapes) + 1, dtype=np.int64)
        ptr[1:] = np.cumsum(sizes)
        cat = lambda arrs: np.ascontiguousarray(np.concatenate(arrs).astype(np.int64)) if arrs else np.zeros(0, np.int64)
        return cls(
            off_r=cat([s.offsets[:, 0] for s in shapes]),
            off_c=cat([s.offsets[:, 1] for s in shapes]),
            lines=cat([s.lines for s in shapes]),
            ptr=ptr,
            nlines=np.array([s.n_lines for s in shapes], dtype=np.int64),
            cand_shape=np.ascontiguousarray(cand_shape, dtype=np.int64),
            cand_r=np.ascontiguousarray(cand_r, dtype=np.int64),
            cand_c=np.ascontiguousarray(cand_c, dtype=np.int64),
            cand_id=np.asarray(cand_id, dtype=np.int64),
            cand_angle=np.asarray(cand_angle, dtype=np.int64),
            angles=list(angles),
        )

    @classmethod
    def from_family(cls, family: BlockFamily) -> "_Problem":
        shapes = [sh for row in family.shapes for sh in row]
        M, N = family.M, family.N
        rr, cc = np.meshgrid(np.arange(M), np.arange(N), indexing="ij")
        rr, cc = rr.ravel(), cc.ravel()
        parts = []
        for a in range(family.n_angles):
            for s in family.distinct_shapes(a):
                t = a * family.n_shapes + s
                ids = (t * M + rr) * N + cc
                parts.append((np.full(M * N, t), rr, cc, ids, np.full(M * N, a)))
        cols = [np.concatenate([p[i] for p in parts]) for i in range(5)]
        return cls.from_shapes(shapes, *cols, family.angles)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Block]) -> "_Problem":
        angles = sorted({b.theta for b in blocks})
        amap = {th: i for i, th in enumerate(angles)}
        return cls.from_shapes(
            [b.shape for b in blocks],
            np.arange(len(blocks)),
            [b.anchor[0] for b in blocks],
            [b.anchor[1] for b in blocks],
            [b.id for b in blocks],
            [amap[b.theta] for b in blocks],
            angles,
        )

    def subset(self, keep: np.ndarray) -> "_Problem":
        return _Problem(
            self.off_r, self.off_c, self.lines, self.ptr, self.nlines,
            self.cand_shape[keep], self.cand_r[keep], self.cand_c[keep],
            self.cand_id[keep], self.cand_angle[keep], self.angles,
        )

    def accumulate(self, out: np.ndarray, weight: np.ndarray, backend) -> np.ndarray:
        backend.accumulate(out, np.ascontiguousarray(weight), self.off_r, self.off_c, self.ptr,
                           self.cand_shape, self.cand_r, self.cand_c)
        return out


@dataclass(eq=False)
class MixingWeights:
    """Nonzero mixing weights keyed by block id."""

    ids: np.ndarray
    values: np.ndarray
    lam: float
    objective: float
    history: list[float] = field(default_factory=list)
    _problem: _Problem | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.ids)

    def as_dict(self) -> dict[int, float]:
        return {int(i): float(v) for i, v in zip(self.ids, self.values)}

    def coverage(self, shape: tuple[int, int], backend=None) -> dict[int, np.ndarray]:
        """``sum_{B at angle} a(B) 1_B`` on the coefficient grid, per angle index."""
        backend = kernels.get(backend)
        out = {}
        if self._problem is None or not len(self.ids):
            return out
        for a in np.unique(self._problem.cand_angle):
            sel = self._problem.cand_angle == a
            sub = self._problem.subset(sel)
            out[int(a)] = sub.accumulate(np.zeros(shape), self.values[sel], backend)
        return out

    def angle(self, a: int) -> float:
        return self._problem.angles[a]

    def dump(self, fh) -> None:
        """Write ``block_id theta row col weight`` lines."""
        fh.write("# block_id theta row col weight\n")
        p = self._problem
        for i in range(len(self.ids)):
            fh.write(
                f"{int(self.ids[i])} {p.angles[int(p.cand_angle[i])]:.6f} "
                f"{int(p.cand_r[i])} {int(p.cand_c[i])} {self.values[i]:.10g}\n"
            )


def objective(energy: np.ndarray, cov: np.ndarray, a: np.ndarray, R: np.ndarray, lam: float) -> float:
    return 0.5 * float(np.sum(energy * (1.0 - cov) ** 2)) + lam * float(np.dot(a, R))


def solve_weights(
    c,
    family: BlockFamily | Sequence[Block],
    lam: float = DEFAULT_LAMBDA,
    sweeps: int = DEFAULT_SWEEPS,
    tol: float = REL_TOL,
    backend: str | None = None,
    threads: int | None = None,
) -> MixingWeights:
    """Approximate minimizer of the mixing objective by coordinate descent.

    Weights start at zero and blocks are visited in increasing order of
    ``R_B / ||c|_B||^2`` (most directionally regular first, ties by id); each
    visit applies the exact nonnegative one-dimensional minimizer.  Stops
    after ``sweeps`` passes or when a pass lowers the objective by less than
    ``tol`` relative.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    c = np.ascontiguousarray(c, dtype=np.float64)
    if c.ndim == 2:
        c = c[None]
    _, M, N = c.shape
    kern = kernels.get(backend)
    threads = kernels.thread_count() if threads is None else threads

    prob = _Problem.from_family(family) if isinstance(family, BlockFamily) else _Problem.from_blocks(family)
    energy = np.ascontiguousarray((c**2).sum(axis=0))
    total = float(energy.sum())
    S1, R = kern.block_stats(c, energy, prob.off_r, prob.off_c, prob.lines, prob.ptr, prob.nlines,
                             prob.cand_shape, prob.cand_r, prob.cand_c, threads)
    S1 = np.asarray(S1)
    R = np.maximum(np.asarray(R), 0.0)
    keep = S1 > PRUNE_REL * total if total > 0 else np.zeros(len(S1), bool)
    if lam > 0:
        # a block whose penalty exceeds its energy can never receive weight
        keep &= lam * R < S1
    prob = prob.subset(keep)
    S1, R = np.ascontiguousarray(S1[keep]), np.ascontiguousarray(R[keep])

    a = np.zeros(len(S1))
    cov = np.zeros((M, N))
    history = [objective(energy, cov, a, R, lam)]
    if len(S1):
        ratio = R / S1
        order = np.lexsort((prob.cand_id, ratio)).astype(np.int64)
        for sweep in range(sweeps):
            kern.bcd_sweep(energy, cov, prob.off_r, prob.off_c, prob.ptr, prob.cand_shape,
                           prob.cand_r, prob.cand_c, order, S1, R, a, float(lam))
            f = objective(energy, cov, a, R, lam)
            prev = history[-1]
            if f > prev + 1e-10 * max(abs(prev), 1e-300):
                raise RuntimeError(f"objective increased in sweep {sweep}: {prev!r} -> {f!r}")
            history.append(f)
            log.debug("sweep %d objective %.10g", sweep, f)
            if prev - f <= tol * abs(prev):
                break

    nz = a > 0
    sub = prob.subset(nz)
    values = a[nz]
    cov = sub.accumulate(np.zeros((M, N)), values, kern)
    final = objective(energy, cov, values, R[nz], lam)
    return MixingWeights(sub.cand_id.copy(), values, float(lam), final, history, sub)


class ShearletFrame:
    """Finest-scale shearlet bands of a fixed grid; coarser content is left to ``U``."""

    name = "shearlet"

    def __init__(self, shape: tuple[int, int], scales: int | None = None):
        M, N = shape
        self.system = ffst.build_system(M, N, scales)
        self.bands = tuple(self.system.scale_bands(self.system.scales - 1))
        self.grid = (M, N)

    def analyze(self, y) -> np.ndarray:
        return ffst.analyze(y, self.system, self.bands).planes

    def synthesize(self, c) -> np.ndarray:
        return ffst.synthesize(ffst.ShearletCoefficients(self.system, np.asarray(c), self.bands))


class WaveletFrame:
    """Detail channels (vertical, horizontal, diagonal) of a one-level DWT."""

    name = "wavelet"

    def __init__(self, shape: tuple[int, int]):
        M, N = shape
        if M % 2 or N % 2:
            raise ValueError("wavelet frame needs even dimensions")
        self.grid = (M // 2, N // 2)

    def analyze(self, y) -> np.ndarray:
        return wavelet.dwt2(y).details

    def synthesize(self, c) -> np.ndarray:
        c = np.asarray(c)
        return wavelet.idwt2(wavelet.WaveletCoefficients(np.zeros_like(c[0]), c[0], c[1], c[2]))


@dataclass
class Interpolators:
    """Isotropic upsampler plus directional ones.

    ``directional`` is either one callable taking ``(img, theta)`` or a
    mapping from angle to a callable taking ``img``.
    """

    isotropic: Callable[[np.ndarray], np.ndarray] = bicubic_up2
    directional: Callable[[np.ndarray, float], np.ndarray] | Mapping[float, Callable] = directional_up2

    def along(self, img: np.ndarray, theta: float) -> np.ndarray:
        if callable(self.directional):
            return self.directional(img, theta)
        for angle, fn in self.directional.items():
            if math.isclose(angle, theta, abs_tol=1e-12):
                return fn(img)
        raise ValueError(f"missing interpolator for angle {theta!r}")


def mix_and_reconstruct(y, c, weights: MixingWeights, frame, interpolators: Interpolators | None = None,
                        backend: str | None = None) -> np.ndarray:
    """Combine isotropic and directional upsampling according to ``weights``."""
    interp = Interpolators() if interpolators is None else interpolators
    y = np.asarray(y, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if c.ndim == 2:
        c = c[None]
    out = interp.isotropic(y)
    for a, mask in sorted(weights.coverage(c.shape[1:], backend).items()):
        theta = weights.angle(a)
        part = frame.synthesize(c * mask[None])
        out = out + (interp.along(part, theta) - interp.isotropic(part))
    return clamp(out)


def make_frame(method: str, shape: tuple[int, int], scales: int | None = None):
    if method == "sme-shearlet":
        return ShearletFrame(shape, sme_scales(shape) if scales is None else scales)
    if method == "sme-wavelet":
        return WaveletFrame(shape)
    raise ValueError(f"no frame for method {method!r}")


def sme_scales(shape: tuple[int, int]) -> int:
    """Default scale count for the mixing frame.

    With two scales the finest band holds everything above the coarse
    low-pass; finer splits leave only a thin top ring in the finest band,
    whose coefficients oscillate too fast to look regular along lines.
    """
    return min(DEFAULT_SME_SCALES, ffst.max_scales(*shape))


def superresolve(
    y,
    method: str = "sme-shearlet",
    lam: float = DEFAULT_LAMBDA,
    scales: int | None = None,
    sweeps: int = DEFAULT_SWEEPS,
    family_config: tuple | None = None,
    backend: str | None = None,
    return_weights: bool = False,
):
    """Upsample ``y`` by 2 with ``bicubic``, ``sme-wavelet`` or ``sme-shearlet``."""
    y = np.asarray(y, dtype=np.float64)
    if method == "bicubic":
        out = clamp(bicubic_up2(y))
        return (out, None) if return_weights else out
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    frame = make_frame(method, y.shape, scales)
    c = frame.analyze(y)
    shapes, angles = family_config if family_config else (None, None)
    fam = build_family(*frame.grid, channels=range(c.shape[0]), shapes=shapes, angles=angles)
    w = solve_weights(c, fam, lam, sweeps=sweeps, backend=backend)
    out = mix_and_reconstruct(y, c, w, frame, backend=backend)
    return (out, w) if return_weights else out
