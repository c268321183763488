import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from shearsr import resample
from shearsr.image import gen_circle, gen_half_plane
from shearsr.resample import (
    DegradationSpec,
    add_gaussian_noise,
    bicubic_up2,
    degrade,
    directional_up2,
    downsample2,
    gaussian_blur3,
    gaussian_kernel3,
    gaussian_noise,
)

small_images = arrays(np.float64, st.tuples(st.integers(2, 7), st.integers(2, 7)), elements=st.floats(0, 1))
angles = st.floats(0, math.pi, exclude_max=True)


def test_downsample_examples():
    x = np.arange(16.0).reshape(4, 4)
    np.testing.assert_array_equal(downsample2(x), [[0, 2], [8, 10]])
    np.testing.assert_array_equal(downsample2(np.full((6, 4), 0.3)), np.full((3, 2), 0.3))
    with pytest.raises(ValueError):
        downsample2(np.zeros((5, 4)))


def test_downsample_circle_area():
    big = gen_circle(256, 0.3)
    assert abs(downsample2(big).sum() - big.sum() / 4) <= 0.03 * big.sum() / 4


def test_gaussian_kernel_values():
    k = gaussian_kernel3(0.5)
    z = 1 + 4 * math.exp(-2) + 4 * math.exp(-4)
    assert k.sum() == pytest.approx(1.0, abs=1e-15)
    assert k[1, 1] == pytest.approx(1 / z) and k[1, 1] == pytest.approx(0.619, abs=5e-4)
    assert k[0, 1] == pytest.approx(math.exp(-2) / z) and k[0, 1] == pytest.approx(0.0838, abs=5e-5)
    assert k[0, 0] == pytest.approx(math.exp(-4) / z) and k[0, 0] == pytest.approx(0.0113, abs=5e-5)


def test_blur_fixes_constants_and_preserves_mass(rng):
    np.testing.assert_allclose(gaussian_blur3(np.full((5, 6), 0.25)), 0.25, atol=1e-15)
    x = rng.random((9, 7))
    assert gaussian_blur3(x).sum() == pytest.approx(x.sum())


def test_noise_zero_sigma_is_identity(rng):
    x = rng.random((5, 5))
    np.testing.assert_array_equal(add_gaussian_noise(x, 0.0, 3), x)


def test_noise_deterministic_and_seed_sensitive(rng):
    x = rng.random((16, 16))
    np.testing.assert_array_equal(add_gaussian_noise(x, 0.1, 42), add_gaussian_noise(x, 0.1, 42))
    assert not np.array_equal(add_gaussian_noise(x, 0.1, 42), add_gaussian_noise(x, 0.1, 43))


def test_noise_mean_bound():
    sigma = 0.1
    n = gaussian_noise((256, 256), sigma, 42)
    assert abs(n.mean()) <= 3 * sigma / 256
    assert n.std() == pytest.approx(sigma, rel=0.02)


def test_noise_rows_independent_of_width():
    # each row has its own stream, so a wider image extends rows rather than reshuffling them
    a = gaussian_noise((4, 8), 1.0, 5)
    b = gaussian_noise((6, 12), 1.0, 5)
    np.testing.assert_array_equal(a, b[:4, :8])


def test_noise_clamped():
    out = add_gaussian_noise(np.zeros((32, 32)), 0.5, 1)
    assert out.min() >= 0 and out.max() <= 1


@given(small_images)
def test_bicubic_preserves_samples(x):
    np.testing.assert_array_equal(bicubic_up2(x)[::2, ::2], x)
    np.testing.assert_array_equal(downsample2(bicubic_up2(x)), x)


@given(small_images, angles)
def test_directional_preserves_samples(x, theta):
    np.testing.assert_array_equal(directional_up2(x, theta)[::2, ::2], x)


@given(st.floats(-2, 2), angles)
def test_constants_reproduced(c, theta):
    x = np.full((6, 8), c)
    np.testing.assert_allclose(bicubic_up2(x), c, atol=1e-14)
    np.testing.assert_allclose(directional_up2(x, theta), c, atol=1e-14)


def test_keys_midpoint_weights():
    # Keys kernel with a = -0.5 at distances 1.5 and 0.5
    a = -0.5
    far = a * 1.5**3 - 5 * a * 1.5**2 + 8 * a * 1.5 - 4 * a
    near = (a + 2) * 0.5**3 - (a + 3) * 0.5**2 + 1
    np.testing.assert_allclose(resample.KEYS_HALF, [far, near, near, far], atol=1e-15)


def test_bicubic_reproduces_ramp():
    # a periodic grid cannot hold a global ramp, so check away from the wrap
    n = 16
    x = np.tile(np.arange(n, dtype=float)[None, :], (4, 1))
    out = bicubic_up2(x)
    expected = np.arange(2 * n) / 2.0
    np.testing.assert_allclose(out[0, 4 : 2 * n - 6], expected[4 : 2 * n - 6], atol=1e-13)
    ramp2 = np.add.outer(np.arange(12.0), 0.5 * np.arange(12.0))
    out2 = bicubic_up2(ramp2)
    r, c = np.mgrid[0:24, 0:24] / 2.0
    np.testing.assert_allclose(out2[4:17, 4:17], (r + 0.5 * c)[4:17, 4:17], atol=1e-13)


@given(small_images, small_images, st.floats(-2, 2), angles)
def test_linearity(x, y, a, theta):
    if x.shape != y.shape:
        y = np.resize(y, x.shape)
    for op in (bicubic_up2, lambda im: directional_up2(im, theta)):
        np.testing.assert_allclose(op(x + a * y), op(x) + a * op(y), atol=1e-12)


def test_row_constant_image_at_zero_angle(rng):
    x = np.repeat(rng.random((6, 1)), 9, axis=1)
    out = directional_up2(x, 0.0)
    assert np.all(out == out[:, :1])


def test_quarter_turn_symmetry(rng):
    x = rng.random((8, 10))
    np.testing.assert_allclose(directional_up2(x, math.pi / 2), directional_up2(x.T, 0.0).T, atol=1e-15)


def test_snap_directions():
    assert resample.snap_direction(0.0) == (1, 0)
    assert resample.snap_direction(math.pi / 2) == (0, 1)
    assert resample.snap_direction(math.pi / 4) == (1, 1)
    assert resample.snap_direction(3 * math.pi / 4) == (1, -1)
    assert resample.snap_direction(math.atan(2)) == (1, 2)
    assert resample.snap_direction(math.pi - 1e-9) == (1, 0)


def _transition_width(profile, lo=0.05, hi=0.95):
    last_high = max(i for i, v in enumerate(profile) if v >= hi)
    first_low = min(i for i, v in enumerate(profile) if v <= lo and i > last_high)
    return first_low - last_high


def test_diagonal_edge_stays_sharp():
    x = gen_half_plane(64, 1.0)
    out = directional_up2(x, math.pi / 4)
    # the edge runs along the anti-diagonal; its normal is the main diagonal
    prof_in = np.diag(x)[16:48]
    prof_out = np.diag(out)[32:96]
    assert np.all(np.diff(prof_out) <= 1e-12)
    width_in = _transition_width(prof_in)  # in input pixels
    width_out = _transition_width(prof_out) / 2.0
    assert width_out <= width_in


@pytest.mark.parametrize(
    "text,spec",
    [
        ("ds", DegradationSpec()),
        ("ds+blur", DegradationSpec(blur=True)),
        ("ds+noise:42", DegradationSpec(noise=True, seed=42)),
        ("ds+blur+noise:7", DegradationSpec(blur=True, noise=True, seed=7)),
    ],
)
def test_degradation_grammar(text, spec):
    parsed = DegradationSpec.parse(text)
    assert parsed == spec
    assert parsed.name == text


@pytest.mark.parametrize("text", ["", "blur", "ds+noise", "ds+noise:x", "ds+noise:1+blur", "ds ", "DS"])
def test_degradation_grammar_rejects(text):
    if text == "ds ":
        assert DegradationSpec.parse(text).name == "ds"  # surrounding space is tolerated
        return
    with pytest.raises(ValueError):
        DegradationSpec.parse(text)


def test_degradation_order(rng):
    x = rng.random((16, 16))
    expect = add_gaussian_noise(gaussian_blur3(downsample2(x), 0.5), 0.1, 9)
    np.testing.assert_array_equal(degrade(x, "ds+blur+noise:9"), expect)
    np.testing.assert_array_equal(degrade(x, "ds+noise:9"), degrade(x, "ds+noise:9"))
