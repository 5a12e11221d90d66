import numpy as np
import pytest

from faultadapt.errors import ConfigurationError
from faultadapt.layers import Conv1D, Dense, Flatten, MaxPool1D, ReLU

from helpers import max_rel_err, numeric_grad


def make_conv(kernel, bias=0.0):
    conv = Conv1D(1, 1, len(kernel), rng=np.random.default_rng(0))
    conv.W = np.array(kernel, dtype=np.float64).reshape(1, 1, -1)
    conv.b = np.array([bias], dtype=np.float64)
    return conv


def test_conv_edge_detector_then_relu():
    conv = make_conv([1.0, 0.0, -1.0])
    x = np.array([[[1.0, 2.0, 3.0, 4.0]]])
    y, _ = conv.forward(x)
    assert np.allclose(y[0, 0], [-2.0, -2.0])
    out, _ = ReLU().forward(y)
    assert np.allclose(out[0, 0], [0.0, 0.0])


def test_conv_identity_kernel():
    conv = make_conv([1.0])
    x = np.abs(np.random.default_rng(1).standard_normal((2, 1, 8)))
    y, _ = conv.forward(x)
    assert np.allclose(y, x)


def test_conv_output_length():
    conv = Conv1D(2, 3, 5, rng=np.random.default_rng(2))
    y, _ = conv.forward(np.zeros((4, 2, 20)))
    assert y.shape == (4, 3, 16)


def test_conv_kernel_longer_than_input_rejected():
    conv = make_conv([1.0, 1.0, 1.0])
    with pytest.raises(ConfigurationError):
        conv.forward(np.zeros((1, 1, 2)))


def test_conv_backward_matches_finite_differences():
    rng = np.random.default_rng(3)
    conv = Conv1D(2, 3, 4, rng=rng)
    x = rng.standard_normal((2, 2, 10))
    dout = rng.standard_normal((2, 3, 7))

    y, cache = conv.forward(x)
    dx, grads = conv.backward(dout, cache)

    def obj_x(xv):
        return float((conv.forward(xv)[0] * dout).sum())

    assert max_rel_err(dx, numeric_grad(obj_x, x)) < 1e-6

    def obj_W(Wv):
        orig = conv.W
        conv.W = Wv
        val = float((conv.forward(x)[0] * dout).sum())
        conv.W = orig
        return val

    assert max_rel_err(grads["W"], numeric_grad(obj_W, conv.W)) < 1e-6


def test_maxpool_disjoint_windows_drop_remainder():
    pool = MaxPool1D(2)
    x = np.array([[[1.0, 3.0, 2.0, 0.0, 9.0]]])  # length 5: last sample dropped
    y, _ = pool.forward(x)
    assert np.allclose(y[0, 0], [3.0, 2.0])


def test_maxpool_backward_routes_to_argmax():
    pool = MaxPool1D(2)
    x = np.array([[[1.0, 3.0, 2.0, 0.0]]])
    y, cache = pool.forward(x)
    dx, _ = pool.backward(np.array([[[10.0, 20.0]]]), cache)
    assert np.allclose(dx[0, 0], [0.0, 10.0, 20.0, 0.0])


def test_dense_identity():
    d = Dense(3, 3, rng=np.random.default_rng(4))
    d.W = np.eye(3)
    d.b = np.zeros(3)
    x = np.random.default_rng(5).standard_normal((4, 3))
    y, _ = d.forward(x)
    assert np.allclose(y, x)


def test_flatten_roundtrip():
    f = Flatten()
    x = np.random.default_rng(6).standard_normal((2, 3, 4))
    y, cache = f.forward(x)
    assert y.shape == (2, 12)
    dx, _ = f.backward(y, cache)
    assert np.allclose(dx, x)
