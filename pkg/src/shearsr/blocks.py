"""Oriented block families for the mixing estimator.

A block is a rotated, rasterized rectangle anchored at a grid position.  Its
positions are split into digital lines running along the block angle; the
directional regularizer compares coefficients against their line averages.

The family combines every base rectangle with every angle and every anchor
(stride 1, periodic wrap).  It is never materialized: blocks are addressed by
``id = ((angle * n_shapes + shape) * M + row) * N + col``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

N_ANGLES = 20
AREA_RANGE = (12, 18)
# sub-pixel offset of the rectangle center from the anchor; avoids boundary ties
CENTER_EPS = (0.0137, 0.0071)


def base_shapes() -> list[tuple[int, int]]:
    """The 28 anisotropic ``(w, h)`` rectangles with area in [12, 18]."""
    lo, hi = AREA_RANGE
    shapes = [
        (w, h)
        for w in range(1, hi + 1)
        for h in range(1, hi + 1)
        if w != h and lo <= w * h <= hi
    ]
    assert len(shapes) == 28
    return shapes


def angle_set(n: int = N_ANGLES) -> list[float]:
    return [k * math.pi / n for k in range(n)]


@dataclass(frozen=True, eq=False)
class BlockShape:
    """Rasterized rectangle: side ``w`` along ``theta``, side ``h`` across it.

    ``offsets`` are ``(drow, dcol)`` pairs relative to the anchor, sorted;
    ``lines[i]`` labels the digital line at angle ``theta`` containing
    ``offsets[i]`` (labels are ``0 .. n_lines - 1``).
    """

    w: int
    h: int
    theta: float
    offsets: np.ndarray = field(repr=False)
    lines: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.offsets)

    @property
    def n_lines(self) -> int:
        return int(self.lines.max()) + 1 if self.size else 0

    @property
    def extent(self) -> tuple[int, int]:
        span = self.offsets.max(axis=0) - self.offsets.min(axis=0) + 1
        return int(span[0]), int(span[1])

    def key(self) -> bytes:
        return self.offsets.tobytes() + self.lines.tobytes()


def line_labels(dx: np.ndarray, dy: np.ndarray, theta: float) -> np.ndarray:
    """Digital-line index of points ``(dx, dy)`` for lines at angle ``theta``.

    Shallow lines (|slope| <= 1) hold one point per column, steep lines one
    point per row.
    """
    c, s = math.cos(theta), math.sin(theta)
    if abs(c) >= abs(s):
        raw = dy - dx * (s / c)
    else:
        raw = dx - dy * (c / s)
    return np.floor(raw + 0.5).astype(np.int64)


def _merge_singletons(raw: np.ndarray) -> np.ndarray:
    """Fold one-point lines into the nearest other line.

    A lone point always equals its own line mean, so it would make any
    isolated coefficient look perfectly regular.
    """
    raw = raw.copy()
    while True:
        labels, counts = np.unique(raw, return_counts=True)
        if len(labels) < 2 or counts.min() > 1:
            return raw
        lone = labels[np.argmin(counts)]
        others = labels[labels != lone]
        dist = np.abs(others - lone)
        raw[raw == lone] = others[np.argmin(dist)]  # ties go to the lower label


def _points_in_rect(w: float, h: float, theta: float):
    reach = int(math.ceil(0.5 * math.hypot(w, h))) + 2
    rng = np.arange(-reach, reach + 1)
    dr, dc = np.meshgrid(rng, rng, indexing="ij")
    dr, dc = dr.ravel(), dc.ravel()
    dx = dc - CENTER_EPS[0]
    dy = -dr - CENTER_EPS[1]
    c, s = math.cos(theta), math.sin(theta)
    u = dx * c + dy * s
    v = -dx * s + dy * c
    inside = (np.abs(u) <= 0.5 * w) & (np.abs(v) <= 0.5 * h)
    return dr[inside], dc[inside], dx[inside], dy[inside]


def rasterize(w: int, h: int, theta: float, line_theta: float | None = None) -> BlockShape:
    """Lattice points whose centers fall inside the rotated ``w x h`` rectangle."""
    dr, dc, dx, dy = _points_in_rect(w, h, theta)
    order = np.lexsort((dc, dr))
    dr, dc, dx, dy = dr[order], dc[order], dx[order], dy[order]
    raw = line_labels(dx, dy, theta if line_theta is None else line_theta)
    raw = _merge_singletons(raw)
    _, lines = np.unique(raw, return_inverse=True)
    offsets = np.stack([dr, dc], axis=1).astype(np.int64)
    return BlockShape(w, h, float(theta), offsets, lines.astype(np.int64).ravel())


def oriented_shape(w: int, h: int, theta: float) -> BlockShape:
    """Family member for base rectangle ``(w, h)`` at angle ``theta``.

    The long side is laid along ``theta`` so every block's lines run along its
    long axis; ``(w, h)`` and ``(h, w)`` therefore rasterize identically.
    """
    return rasterize(max(w, h), min(w, h), theta)


class Block(NamedTuple):
    id: int
    angle_index: int
    theta: float
    shape_index: int
    anchor: tuple[int, int]
    shape: BlockShape
    channels: tuple[int, ...]

    def positions(self, M: int, N: int) -> np.ndarray:
        """Covered ``(row, col)`` positions after periodic wrap."""
        pos = self.shape.offsets + np.asarray(self.anchor)
        pos[:, 0] %= M
        pos[:, 1] %= N
        return pos


@dataclass(eq=False)
class BlockFamily:
    M: int
    N: int
    channels: tuple[int, ...]
    angles: list[float]
    base: list[tuple[int, int]]
    shapes: list[list[BlockShape]]  # shapes[angle][shape]

    stride: int = 1

    @property
    def n_angles(self) -> int:
        return len(self.angles)

    @property
    def n_shapes(self) -> int:
        return len(self.base)

    def __len__(self) -> int:
        return self.n_angles * self.n_shapes * self.M * self.N

    def angle_size(self) -> int:
        return self.n_shapes * self.M * self.N

    def decode(self, block_id: int) -> tuple[int, int, int, int]:
        if not 0 <= block_id < len(self):
            raise IndexError(block_id)
        rest, col = divmod(int(block_id), self.N)
        rest, row = divmod(rest, self.M)
        a, s = divmod(rest, self.n_shapes)
        return a, s, row, col

    def encode(self, a: int, s: int, row: int, col: int) -> int:
        return ((a * self.n_shapes + s) * self.M + row) * self.N + col

    def block(self, block_id: int) -> Block:
        a, s, row, col = self.decode(block_id)
        return Block(block_id, a, self.angles[a], s, (row, col), self.shapes[a][s], self.channels)

    def __contains__(self, block) -> bool:
        bid = block.id if isinstance(block, Block) else block
        return isinstance(bid, (int, np.integer)) and 0 <= bid < len(self)

    def __iter__(self) -> Iterator[Block]:
        return self.iter_range(0, len(self))

    def iter_range(self, start: int, stop: int) -> Iterator[Block]:
        """Blocks with ids in ``[start, stop)``; disjoint ranges split the work."""
        for bid in range(max(0, start), min(stop, len(self))):
            yield self.block(bid)

    def angle_blocks(self, a: int) -> Iterator[Block]:
        size = self.angle_size()
        return self.iter_range(a * size, (a + 1) * size)

    def blocks_at(self, row: int, col: int) -> list[Block]:
        """All blocks anchored at ``(row, col)``."""
        return [
            self.block(self.encode(a, s, row, col))
            for a in range(self.n_angles)
            for s in range(self.n_shapes)
        ]

    def distinct_shapes(self, a: int) -> list[int]:
        """Shape indices at angle ``a`` whose rasterization is not a repeat."""
        seen, keep = set(), []
        for s, shape in enumerate(self.shapes[a]):
            k = shape.key()
            if k not in seen:
                seen.add(k)
                keep.append(s)
        return keep


def build_family(
    M: int,
    N: int,
    channels: Sequence[int],
    shapes: Sequence[tuple[int, int]] | None = None,
    angles: Sequence[float] | None = None,
) -> BlockFamily:
    base = list(base_shapes() if shapes is None else shapes)
    angs = list(angle_set() if angles is None else angles)
    table = [[oriented_shape(w, h, th) for (w, h) in base] for th in angs]
    need_r = max(sh.extent[0] for row in table for sh in row)
    need_c = max(sh.extent[1] for row in table for sh in row)
    if M < need_r or N < need_c:
        raise ValueError(f"grid {M}x{N} too small for blocks of extent {need_r}x{need_c}")
    return BlockFamily(M, N, tuple(channels), angs, base, table)


def read_block_config(path) -> tuple[list[tuple[int, int]] | None, list[float] | None]:
    """Parse a ``key = value`` block configuration file.

    Recognized keys: ``shapes`` (``w x h`` pairs separated by commas) and
    ``angles`` (an integer count of equally spaced angles in [0, pi), or a
    comma-separated list of radians).  ``#`` starts a comment.
    """
    shapes = angles = None
    with open(path) as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key = value")
            key, value = (p.strip() for p in line.split("=", 1))
            if key == "shapes":
                shapes = []
                for item in value.split(","):
                    w, h = item.lower().split("x")
                    shapes.append((int(w), int(h)))
            elif key == "angles":
                if "," in value or "." in value:
                    angles = [float(v) for v in value.split(",")]
                else:
                    angles = angle_set(int(value))
            else:
                raise ValueError(f"{path}:{n}: unknown key {key!r}")
    return shapes, angles
