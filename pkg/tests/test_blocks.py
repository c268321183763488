import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shearsr import blocks
from shearsr.blocks import angle_set, base_shapes, build_family, oriented_shape, rasterize


def test_base_shapes_enumeration():
    shapes = base_shapes()
    oracle = sorted({(w, h) for w in range(1, 19) for h in range(1, 19) if w != h and 12 <= w * h <= 18})
    assert sorted(shapes) == oracle
    assert len(shapes) == 28 == len(set(shapes))
    assert (1, 12) in shapes and (12, 1) in shapes
    assert all(w * h not in (11, 19) for w, h in shapes)


def test_angle_set():
    a = angle_set()
    assert len(a) == 20
    assert a[0] == 0.0 and a[10] == pytest.approx(math.pi / 2)
    assert all(v == pytest.approx(k * math.pi / 20) for k, v in enumerate(a))
    reduced = sorted(round(v % math.pi, 12) for v in a)
    assert len(set(reduced)) == 20


@pytest.mark.parametrize("w,h", [(3, 5), (4, 4), (12, 1), (2, 7)])
def test_axis_aligned(w, h):
    shape = rasterize(w, h, 0.0)
    rows = sorted({r for r, _ in shape.offsets})
    cols = sorted({c for _, c in shape.offsets})
    assert shape.size == w * h
    assert len(rows) == h and len(cols) == w
    assert rows == list(range(rows[0], rows[0] + h)) and cols == list(range(cols[0], cols[0] + w))


@pytest.mark.parametrize("w,h", base_shapes())
def test_quarter_turn(w, h):
    a = rasterize(w, h, math.pi / 2)
    b = rasterize(h, w, 0.0)
    assert {tuple(o) for o in a.offsets} == {tuple(o) for o in b.offsets}


def _brute_force(w, h, theta):
    # lattice points within the rotated rectangle, center at the anchor plus the tie-breaking offset
    ex, ey = blocks.CENTER_EPS
    pts = set()
    for r in range(-20, 21):
        for c in range(-20, 21):
            x, y = c - ex, -r - ey
            u = x * math.cos(theta) + y * math.sin(theta)
            v = -x * math.sin(theta) + y * math.cos(theta)
            if abs(u) <= w / 2 and abs(v) <= h / 2:
                pts.add((r, c))
    return pts


@pytest.mark.parametrize("w,h,theta", [(2, 7, math.pi / 4), (3, 6, 0.3), (12, 1, 2.0), (5, 3, math.pi)])
def test_rasterize_matches_brute_force(w, h, theta):
    shape = rasterize(w, h, theta)
    assert {tuple(o) for o in shape.offsets} == _brute_force(w, h, theta)


def test_area_tolerance_all_shapes():
    for w, h in base_shapes():
        for theta in angle_set():
            n = oriented_shape(w, h, theta).size
            assert abs(n - w * h) <= math.ceil(2 * (w + h)), (w, h, theta, n)


def test_line_labels_follow_rows_at_zero():
    shape = rasterize(6, 3, 0.0)
    for line in range(shape.n_lines):
        rows = {int(r) for r in shape.offsets[shape.lines == line, 0]}
        assert len(rows) == 1
    assert shape.n_lines == 3


@given(st.sampled_from(base_shapes()), st.integers(0, 19))
def test_lines_are_proper(wh, a):
    shape = oriented_shape(*wh, angle_set()[a])
    counts = np.bincount(shape.lines)
    assert counts.sum() == shape.size
    assert counts.min() >= 2  # one-point lines would make any coefficient look regular
    assert shape.n_lines == len(counts)


def test_orientation_ignores_side_order():
    for theta in angle_set():
        assert oriented_shape(2, 7, theta).key() == oriented_shape(7, 2, theta).key()


def test_family_counts():
    fam = build_family(32, 24, range(3))
    assert len(fam) == 20 * 28 * 32 * 24
    assert fam.angle_size() == 28 * 32 * 24
    assert sum(1 for _ in fam.angle_blocks(3)) == 28 * 32 * 24
    assert len(fam.blocks_at(5, 7)) == 20 * 28


def test_family_coverage():
    M = N = 32
    fam = build_family(M, N, range(2))
    for a in range(fam.n_angles):
        cover = np.zeros((M, N), bool)
        for s in fam.distinct_shapes(a):
            off = fam.shapes[a][s].offsets
            ar, ac = np.meshgrid(np.arange(M), np.arange(N), indexing="ij")
            rr = (ar.ravel()[:, None] + off[None, :, 0]) % M
            cc = (ac.ravel()[:, None] + off[None, :, 1]) % N
            cover[rr, cc] = True
        assert cover.all()


@given(st.integers(0, 20 * 28 * 20 * 18 - 1))
def test_id_round_trip(bid):
    fam = _small_family()
    a, s, r, c = fam.decode(bid)
    assert fam.encode(a, s, r, c) == bid
    b = fam.block(bid)
    assert b.id == bid and b.theta == b.shape.theta == fam.angles[a]
    pos = b.positions(fam.M, fam.N)
    assert pos[:, 0].min() >= 0 and pos[:, 0].max() < fam.M
    assert pos[:, 1].min() >= 0 and pos[:, 1].max() < fam.N
    assert b in fam


_FAM = {}


def _small_family():
    if "f" not in _FAM:
        _FAM["f"] = build_family(20, 18, (0,))
    return _FAM["f"]


def test_membership_and_ranges():
    fam = _small_family()
    assert -1 not in fam and len(fam) not in fam
    with pytest.raises(IndexError):
        fam.decode(len(fam))
    ids = [b.id for b in fam.iter_range(100, 110)] + [b.id for b in fam.iter_range(110, 125)]
    assert ids == list(range(100, 125))


def test_grid_too_small():
    with pytest.raises(ValueError, match="too small"):
        build_family(8, 8, (0,))


def test_deterministic():
    a = build_family(20, 20, (0,))
    b = build_family(20, 20, (0,))
    assert all(x.key() == y.key() for ra, rb in zip(a.shapes, b.shapes) for x, y in zip(ra, rb))


def test_distinct_shapes_are_distinct():
    fam = _small_family()
    for a in range(fam.n_angles):
        keep = fam.distinct_shapes(a)
        keys = [fam.shapes[a][s].key() for s in keep]
        assert len(set(keys)) == len(keys)
        assert {fam.shapes[a][s].key() for s in range(fam.n_shapes)} == set(keys)


def test_block_config(tmp_path):
    p = tmp_path / "blocks.cfg"
    p.write_text("# custom\nshapes = 2x6, 6x2 ,3x5\nangles = 4\n")
    shapes, angles = blocks.read_block_config(p)
    assert shapes == [(2, 6), (6, 2), (3, 5)]
    assert angles == pytest.approx([0, math.pi / 4, math.pi / 2, 3 * math.pi / 4])
    p.write_text("angles = 0.0, 1.5\n")
    assert blocks.read_block_config(p) == (None, [0.0, 1.5])
    p.write_text("colour = red\n")
    with pytest.raises(ValueError, match="unknown key"):
        blocks.read_block_config(p)
    fam = build_family(24, 24, (0,), shapes=[(2, 6)], angles=[0.0, 1.0])
    assert len(fam) == 2 * 24 * 24
