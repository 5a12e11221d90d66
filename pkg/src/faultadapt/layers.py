"""Layer primitives for the 1-D convolutional network.

All layers are stateless with respect to activations: ``forward`` returns the
output together with a cache object, and ``backward`` consumes that cache to
produce the input gradient plus parameter gradients.  Parameters live on the
layer instances as float64 numpy arrays.
"""

import numpy as np

from .errors import ConfigurationError


class Layer:
    """Base class. Subclasses implement forward/backward; param_names lists
    learnable parameter attributes (may be empty)."""

    param_names = ()

    def forward(self, x):
        raise NotImplementedError

    def backward(self, dout, cache):
        """Return (dx, grads) where grads maps param name -> gradient array."""
        raise NotImplementedError

    def params(self):
        return {name: getattr(self, name) for name in self.param_names}


def relu(x):
    return np.maximum(x, 0.0)


class Conv1D(Layer):
    """Valid 1-D convolution (cross-correlation), one bias per filter.

    Input shape (B, C_in, L), output (B, C_out, L - k + 1).
    """

    param_names = ("W", "b")

    def __init__(self, in_channels, out_channels, kernel_size, rng=None):
        if kernel_size < 1:
            raise ConfigurationError("kernel size must be >= 1")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        fan_in = in_channels * kernel_size
        limit = np.sqrt(6.0 / fan_in)  # uniform with variance 2/fan_in
        rng = rng or np.random.default_rng()
        self.W = rng.uniform(-limit, limit, size=(out_channels, in_channels, kernel_size))
        self.b = np.zeros(out_channels)

    def forward(self, x):
        B, C, L = x.shape
        if C != self.in_channels:
            raise ConfigurationError(
                f"Conv1D expects {self.in_channels} input channels, got {C}")
        k = self.kernel_size
        if k > L:
            raise ConfigurationError(
                f"Conv1D kernel size {k} exceeds input length {L}")
        L_out = L - k + 1
        # cols: (B, C, L_out, k)
        cols = np.stack([x[:, :, i:i + L_out] for i in range(k)], axis=-1)
        y = np.einsum("bclk,ock->bol", cols, self.W, optimize=True)
        y += self.b[None, :, None]
        assert y.shape[2] == L - k + 1
        return y, (x, cols)

    def backward(self, dout, cache):
        x, cols = cache
        k = self.kernel_size
        L_out = dout.shape[2]
        dW = np.einsum("bol,bclk->ock", dout, cols, optimize=True)
        db = dout.sum(axis=(0, 2))
        dx = np.zeros_like(x)
        for i in range(k):
            dx[:, :, i:i + L_out] += np.einsum(
                "bol,ock->bcl", dout, self.W[:, :, i:i + 1], optimize=True)
        return dx, {"W": dW, "b": db}


class ReLU(Layer):
    def forward(self, x):
        return np.maximum(x, 0.0), (x > 0)

    def backward(self, dout, cache):
        return dout * cache, {}


class MaxPool1D(Layer):
    """Max pooling over disjoint windows; trailing remainder is dropped."""

    def __init__(self, pool_size):
        if pool_size < 1:
            raise ConfigurationError("pool size must be >= 1")
        self.pool_size = pool_size

    def forward(self, x):
        B, C, L = x.shape
        p = self.pool_size
        L_out = L // p
        if L_out == 0:
            raise ConfigurationError(
                f"pool size {p} larger than input length {L}")
        xt = x[:, :, :L_out * p].reshape(B, C, L_out, p)
        idx = xt.argmax(axis=3)
        y = np.take_along_axis(xt, idx[..., None], axis=3)[..., 0]
        return y, (x.shape, idx)

    def backward(self, dout, cache):
        in_shape, idx = cache
        B, C, L = in_shape
        p = self.pool_size
        L_out = idx.shape[2]
        dxt = np.zeros((B, C, L_out, p))
        np.put_along_axis(dxt, idx[..., None], dout[..., None], axis=3)
        dx = np.zeros(in_shape)
        dx[:, :, :L_out * p] = dxt.reshape(B, C, L_out * p)
        return dx, {}


class Flatten(Layer):
    def forward(self, x):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, dout, cache):
        return dout.reshape(cache), {}


class Dense(Layer):
    """Fully connected layer: y = x @ W + b."""

    param_names = ("W", "b")

    def __init__(self, in_features, out_features, rng=None):
        self.in_features = in_features
        self.out_features = out_features
        limit = np.sqrt(6.0 / in_features)
        rng = rng or np.random.default_rng()
        self.W = rng.uniform(-limit, limit, size=(in_features, out_features))
        self.b = np.zeros(out_features)

    def forward(self, x):
        if x.shape[1] != self.in_features:
            raise ConfigurationError(
                f"Dense expects width {self.in_features}, got {x.shape[1]}")
        return x @ self.W + self.b, x

    def backward(self, dout, cache):
        x = cache
        return dout @ self.W.T, {"W": x.T @ dout, "b": dout.sum(axis=0)}
