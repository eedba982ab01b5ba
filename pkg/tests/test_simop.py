import numpy as np
import pytest

from glu.core import grid_downsample
from glu.glu import apply_field, error_map, fit_field
from glu.simop import (
    apply_operator,
    channel_mix,
    gamma_curve,
    grayscale,
    invert,
    parse_operator,
    scalar_gain,
)


def px(*rgb):
    return np.array([[rgb]], np.float32)


def test_examples():
    np.testing.assert_allclose(apply_operator(scalar_gain(0.5), px(0.4, 0.6, 1.0)), px(0.2, 0.3, 0.5))
    np.testing.assert_allclose(apply_operator(invert(), px(0.25, 0.5, 1.0)), px(0.75, 0.5, 0.0))
    np.testing.assert_allclose(apply_operator(gamma_curve(2.0), px(0.5, 0.1, 1.0)),
                               px(0.25, 0.01, 1.0), rtol=1e-6)
    g = apply_operator(grayscale(), px(1.0, 0.0, 0.0))
    np.testing.assert_allclose(g, px(0.299, 0.299, 0.299), rtol=1e-6)
    swap = channel_mix([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    np.testing.assert_array_equal(apply_operator(swap, px(0.1, 0.2, 0.3)), px(0.3, 0.2, 0.1))


def test_clamping():
    out = apply_operator(scalar_gain(3.0), px(0.5, 0.2, 0.0))
    np.testing.assert_allclose(out, px(1.0, 0.6, 0.0), rtol=1e-6)
    raw = apply_operator(scalar_gain(3.0), px(0.5, 0.2, 0.0), clamp=False)
    assert raw[0, 0, 0] == pytest.approx(1.5)


def test_invert_is_involution(rng):
    img = rng.random((20, 20, 3)).astype(np.float32)
    twice = apply_operator(invert(), apply_operator(invert(), img))
    assert np.abs(twice - img).max() <= 1.2e-7


def test_pointwise_operators_commute_with_grid_downsample(astronaut):
    for op in (scalar_gain(0.7), gamma_curve(2.2), invert(), grayscale()):
        a = grid_downsample(apply_operator(op, astronaut), 8)[0]
        b = apply_operator(op, grid_downsample(astronaut, 8)[0])
        np.testing.assert_array_equal(a, b)


def test_scalar_gain_scales_error(astronaut):
    img = astronaut[:128, :128]
    low, grid = grid_downsample(img, 8)
    theta, err = fit_field(img, low, grid)
    c = 0.6
    out = apply_field(theta, apply_operator(scalar_gain(c), low, clamp=False), clamp=False)
    ref = apply_operator(scalar_gain(c), img, clamp=False)
    np.testing.assert_allclose(error_map(ref, out), c * err, atol=1e-5)


def test_parse_operator():
    assert parse_operator("gain:0.5").label == scalar_gain(0.5).label
    assert parse_operator("gray").kind == "gray"
    assert parse_operator("invert").kind == "invert"
    assert parse_operator("gamma:2.2").params[0] == pytest.approx(2.2)
    m = parse_operator("mix:1,0,0,0,1,0,0,0,1").matrix
    np.testing.assert_array_equal(m, np.eye(3))
    for bad in ("gain", "gain:x", "mix:1,2", "blur:3", "gamma:-1"):
        with pytest.raises(ValueError):
            parse_operator(bad)
