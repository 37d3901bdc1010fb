import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wvfi.tensor import ConvSpec, concat_channels, conv2d, leaky_relu, resize_bilinear


def conv_loops(x, spec):
    """Direct quadruple-loop cross-correlation with zero padding."""
    c, h, w = x.shape
    kh, kw = spec.kernel
    p, s = spec.padding, spec.stride
    xp = np.pad(x.astype(np.float64), ((0, 0), (p, p), (p, p)))
    oh, ow = spec.output_size(h, w)
    out = np.zeros((spec.out_channels, oh, ow))
    for o in range(spec.out_channels):
        for i in range(oh):
            for j in range(ow):
                win = xp[:, i * s : i * s + kh, j * s : j * s + kw]
                out[o, i, j] = np.sum(win * spec.weights[o]) + spec.bias[o]
    return out


def make_spec(rng, cin, cout, k=3, stride=1, pad=1):
    return ConvSpec(
        rng.standard_normal((cout, cin, k, k)).astype(np.float32),
        rng.standard_normal(cout).astype(np.float32),
        stride,
        pad,
    )


def test_identity_kernel(rng):
    x = rng.standard_normal((4, 7, 5)).astype(np.float32)
    w = np.zeros((4, 4, 1, 1), np.float32)
    w[range(4), range(4)] = 1
    assert np.array_equal(conv2d(x, ConvSpec(w, np.zeros(4, np.float32))), x)


def test_ones_kernel_window_sums():
    x = np.full((1, 4, 4), 0.5, np.float32)
    spec = ConvSpec(np.ones((1, 1, 3, 3), np.float32), np.zeros(1, np.float32), 1, 1)
    out = conv2d(x, spec)[0]
    assert out[1:3, 1:3] == pytest.approx(np.full((2, 2), 4.5))
    assert [out[0, 0], out[0, 3], out[3, 0], out[3, 3]] == [2.0] * 4
    assert out[0, 1] == 3.0
    np.testing.assert_allclose(out, conv_loops(x, spec)[0])


def test_strided_shape(rng):
    spec = make_spec(rng, 8, 16, 3, 2, 1)
    assert conv2d(rng.standard_normal((8, 32, 32)).astype(np.float32), spec).shape == (16, 16, 16)


@pytest.mark.parametrize("stride,pad,k", [(1, 1, 3), (2, 1, 3), (1, 0, 3), (2, 0, 1), (1, 2, 5)])
def test_matches_loop_oracle(rng, stride, pad, k):
    x = rng.standard_normal((3, 9, 11)).astype(np.float32)
    spec = make_spec(rng, 3, 4, k, stride, pad)
    np.testing.assert_allclose(conv2d(x, spec), conv_loops(x, spec), rtol=1e-5, atol=1e-5)


def test_conv_errors(rng):
    with pytest.raises(ValueError, match="channels"):
        conv2d(np.zeros((2, 5, 5), np.float32), make_spec(rng, 3, 1))
    with pytest.raises(ValueError, match="output"):
        conv2d(np.zeros((3, 2, 2), np.float32), make_spec(rng, 3, 1, k=5, pad=0))


def test_conv_linear(rng):
    spec = make_spec(rng, 3, 5)
    spec = ConvSpec(spec.weights, np.zeros(5, np.float32), 1, 1)
    x = rng.standard_normal((3, 12, 12)).astype(np.float32)
    y = rng.standard_normal((3, 12, 12)).astype(np.float32)
    a, b = np.float32(0.7), np.float32(-1.3)
    lhs = conv2d(a * x + b * y, spec)
    rhs = a * conv2d(x, spec) + b * conv2d(y, spec)
    assert np.max(np.abs(lhs - rhs)) <= 1e-5 * np.max(np.abs(rhs))


def test_conv_deterministic(rng):
    spec = make_spec(rng, 3, 4)
    x = rng.standard_normal((3, 16, 16)).astype(np.float32)
    assert conv2d(x, spec).tobytes() == conv2d(x.copy(), spec).tobytes()


def test_leaky_relu():
    x = np.array([[[1.0, -1.0, 0.0]]], np.float32)
    np.testing.assert_array_equal(leaky_relu(x), np.array([[[1.0, -0.1, 0.0]]], np.float32))
    assert leaky_relu(x, 0.2)[0, 0, 1] == np.float32(-0.2)


def bilinear_oracle(x, scale):
    c, h, w = x.shape
    oh, ow = round(h * scale), round(w * scale)
    out = np.zeros((c, oh, ow))
    for i in range(oh):
        sy = min(max((i + 0.5) / scale - 0.5, 0), h - 1)
        for j in range(ow):
            sx = min(max((j + 0.5) / scale - 0.5, 0), w - 1)
            y0, x0 = int(sy), int(sx)
            y1, x1 = min(y0 + 1, h - 1), min(x0 + 1, w - 1)
            fy, fx = sy - y0, sx - x0
            out[:, i, j] = (
                x[:, y0, x0] * (1 - fy) * (1 - fx)
                + x[:, y0, x1] * (1 - fy) * fx
                + x[:, y1, x0] * fy * (1 - fx)
                + x[:, y1, x1] * fy * fx
            )
    return out


def test_resize_2x2_to_4x4():
    x = np.array([[[1, 2], [3, 4]]], np.float32)
    expected = np.array(
        [
            [1.0, 1.25, 1.75, 2.0],
            [1.5, 1.75, 2.25, 2.5],
            [2.5, 2.75, 3.25, 3.5],
            [3.0, 3.25, 3.75, 4.0],
        ]
    )
    out = resize_bilinear(x, 2.0)
    np.testing.assert_allclose(out[0], expected, atol=1e-7)
    np.testing.assert_allclose(out, bilinear_oracle(x, 2.0), atol=1e-6)


@pytest.mark.parametrize("scale", [0.5, 2.0, 1.5, 0.25])
def test_resize_matches_oracle(rng, scale):
    x = rng.standard_normal((2, 8, 12)).astype(np.float32)
    np.testing.assert_allclose(resize_bilinear(x, scale), bilinear_oracle(x, scale), atol=1e-5)


@settings(max_examples=30, deadline=None)
@given(
    value=st.floats(-10, 10, width=32),
    scale=st.sampled_from([0.25, 0.5, 1.0, 2.0, 3.0]),
)
def test_resize_preserves_constants(value, scale):
    x = np.full((2, 8, 8), value, np.float32)
    out = resize_bilinear(x, scale)
    np.testing.assert_allclose(out, value, rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(resize_bilinear(resize_bilinear(x, 0.5), 2.0), x, rtol=1e-6, atol=1e-6)


def test_resize_identity(rng):
    x = rng.standard_normal((3, 7, 9)).astype(np.float32)
    assert np.array_equal(resize_bilinear(x, 1.0), x)


def test_resize_degenerate():
    with pytest.raises(ValueError):
        resize_bilinear(np.zeros((1, 2, 2), np.float32), 0.1)
    with pytest.raises(ValueError):
        resize_bilinear(np.zeros((1, 2, 2), np.float32), -1.0)


def test_concat(rng):
    a = rng.standard_normal((3, 4, 5)).astype(np.float32)
    b = rng.standard_normal((2, 4, 5)).astype(np.float32)
    out = concat_channels([a, b])
    assert out.shape == (5, 4, 5)
    assert np.array_equal(out[3], b[0]) and np.array_equal(out[1], a[1])
    assert np.array_equal(concat_channels([a]), a)
    with pytest.raises(ValueError, match="spatial"):
        concat_channels([a, np.zeros((1, 4, 6), np.float32)])
