import numpy as np
import pytest

from glu.baseline import JbuParams, bilinear_upsample, jbu_upsample, nearest_upsample
from glu.core import GridSpec, grid_downsample
from glu.glu import apply_field, optimize_field
from glu.synth import step


def test_defaults_describe_paper_setting():
    assert JbuParams().describe() == "5x5, sigma_d=0.5, sigma_r=0.1"
    with pytest.raises(ValueError):
        JbuParams(sigma_r=0)
    with pytest.raises(ValueError):
        JbuParams(window=4)


def test_jbu_constant_target(astronaut):
    img = astronaut[:64, :80]
    low, grid = grid_downsample(img, 8)
    out = jbu_upsample(img, low, np.full_like(low, 0.3), grid)
    np.testing.assert_allclose(out, 0.3, atol=1e-6)


def test_jbu_reduces_to_gnu_on_two_tone_step():
    img = step(96, 48, 45)
    low, grid = grid_downsample(img, 8)
    stats = {}
    jbu = jbu_upsample(img, low, low, grid, JbuParams(sigma_r=1e-2), stats)
    gnu = apply_field(optimize_field(img, low, grid, mode="gnu"), low)
    assert np.abs(jbu - gnu).max() <= 1e-3
    assert stats["fallback"] == 0


def gaussian_oracle(target, grid, window, sigma):
    h, w = grid.high_h, grid.high_w
    r = window // 2
    out = np.zeros((h, w, 3))
    for y in range(h):
        for x in range(w):
            qx, qy = x // grid.scale, y // grid.scale
            fx, fy = (x + 0.5) / grid.scale - 0.5, (y + 0.5) / grid.scale - 0.5
            acc, tot = np.zeros(3), 0.0
            for cy in range(max(qy - r, 0), min(qy + r, grid.low_h - 1) + 1):
                for cx in range(max(qx - r, 0), min(qx + r, grid.low_w - 1) + 1):
                    wgt = np.exp(-((cx - fx) ** 2) / (2 * sigma ** 2)) * \
                        np.exp(-((cy - fy) ** 2) / (2 * sigma ** 2))
                    acc += wgt * target[cy, cx]
                    tot += wgt
            out[y, x] = acc / tot
    return out


def test_jbu_on_uniform_guide_is_gaussian_upsampling(rng):
    img = np.full((40, 48, 3), 0.5, np.float32)
    low, grid = grid_downsample(img, 4)
    target = rng.random(low.shape).astype(np.float32)
    out = jbu_upsample(img, low, target, grid, JbuParams(sigma_d=1.0))
    np.testing.assert_allclose(out, gaussian_oracle(target, grid, 5, 1.0), atol=1e-6)


def test_jbu_output_within_target_range(astronaut, rng):
    img = astronaut[:96, :96]
    low, grid = grid_downsample(img, 8)
    target = rng.random(low.shape).astype(np.float32)
    out = jbu_upsample(img, low, target, grid)
    for c in range(3):
        assert out[..., c].min() >= target[..., c].min() - 1e-6
        assert out[..., c].max() <= target[..., c].max() + 1e-6


def test_jbu_underflow_falls_back_to_own_cell(rng):
    img = rng.random((32, 32, 3)).astype(np.float32)
    low, grid = grid_downsample(img, 4)
    img[1, 1] = (0.0, 1.0, 0.0)
    low[:] = (1.0, 0.0, 1.0)
    target = rng.random(low.shape).astype(np.float32)
    stats = {}
    out = jbu_upsample(img, low, target, grid, JbuParams(sigma_r=1e-3), stats)
    assert stats["fallback"] > 0
    np.testing.assert_allclose(out[1, 1], target[0, 0])


def test_jbu_dimension_mismatch():
    img = np.zeros((32, 32, 3), np.float32)
    low, grid = grid_downsample(img, 4)
    with pytest.raises(ValueError):
        jbu_upsample(img, low, low[:-1], grid)


def test_nearest_and_bilinear_constant():
    grid = GridSpec(4, 30, 22)
    t = np.full((grid.low_h, grid.low_w, 3), 0.7, np.float32)
    np.testing.assert_allclose(nearest_upsample(t, grid), 0.7)
    np.testing.assert_allclose(bilinear_upsample(t, grid), 0.7, atol=1e-7)


def test_nearest_checker_blocks():
    grid = GridSpec(2, 4, 4)
    t = np.zeros((2, 2, 3), np.float32)
    t[0, 1] = t[1, 0] = 1
    out = nearest_upsample(t, grid)[..., 0]
    expected = np.kron(np.array([[0, 1], [1, 0]]), np.ones((2, 2)))
    np.testing.assert_array_equal(out, expected)


def test_bilinear_midpoint_and_sample_positions():
    grid = GridSpec(2, 4, 4)
    t = np.zeros((2, 2, 3), np.float32)
    t[:, 1] = 1
    out = bilinear_upsample(t, grid)[..., 0]
    # samples sit on x = 1 and x = 3; x = 2 is halfway
    np.testing.assert_allclose(out[:, 2], 0.5)
    np.testing.assert_allclose(out[:, 1], 0.0)
    np.testing.assert_allclose(out[:, 3], 1.0)


def test_bilinear_reproduces_samples(astronaut):
    img = astronaut[:64, :64]
    low, grid = grid_downsample(img, 8)
    out = bilinear_upsample(low, grid)
    np.testing.assert_allclose(out[4::8, 4::8], low, atol=1e-6)


def test_upsampler_dimension_mismatch():
    grid = GridSpec(2, 4, 4)
    with pytest.raises(ValueError):
        nearest_upsample(np.zeros((3, 2, 3), np.float32), grid)
    with pytest.raises(ValueError):
        bilinear_upsample(np.zeros((3, 2, 3), np.float32), grid)
