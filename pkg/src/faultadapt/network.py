"""Network container: layer stack, forward/backward passes and SGD.

The backward pass accepts an optional gradient injected at the feature layer
(the last hidden fully connected layer), which is how the domain-adaptation
penalty reaches the lower layers.
"""

import numpy as np

from .errors import ConfigurationError, InputError, TrainingAborted
from .layers import Conv1D, Dense, Flatten, MaxPool1D, ReLU


class Network:
    """Ordered layer stack with a designated feature layer.

    feature_layer_index must address a Dense layer strictly before the final
    (classification) Dense layer; the activations produced at that index are
    the features used by the adaptation penalty.
    """

    def __init__(self, layers, feature_layer_index):
        if not isinstance(layers[feature_layer_index], Dense):
            raise ConfigurationError("feature layer must be a Dense layer")
        if feature_layer_index >= len(layers) - 1:
            raise ConfigurationError(
                "feature layer must come before the classification layer")
        self.layers = layers
        self.feature_layer_index = feature_layer_index

    def forward(self, batch):
        """Run the stack on a (B, L) batch of windows.

        Returns (logits, features, cache) where features are the activations
        at the feature layer and cache holds everything backward() needs.
        """
        x = np.asarray(batch, dtype=np.float64)
        if x.ndim != 2:
            raise InputError(f"expected a 2-D batch, got shape {x.shape}")
        if isinstance(self.layers[0], Conv1D):
            x = x[:, None, :]
        caches = []
        features = None
        for i, layer in enumerate(self.layers):
            try:
                x, cache = layer.forward(x)
            except ConfigurationError as exc:
                raise ConfigurationError(f"layer {i}: {exc}") from exc
            caches.append(cache)
            if i == self.feature_layer_index:
                features = x
        if not np.all(np.isfinite(x)):
            raise TrainingAborted("non-finite activations in forward pass")
        return x, features, caches

    def backward(self, caches, dlogits, dfeatures=None):
        """Backpropagate; dfeatures, when given, is added to the gradient
        flowing into the feature layer's output (the penalty path).

        Returns a gradient set: list of per-layer dicts aligned with layers.
        """
        if len(caches) != len(self.layers):
            raise ConfigurationError("cache does not match the layer stack")
        grads = [None] * len(self.layers)
        dout = np.asarray(dlogits, dtype=np.float64)
        for i in range(len(self.layers) - 1, -1, -1):
            if dfeatures is not None and i == self.feature_layer_index:
                dout = dout + dfeatures
            dout, g = self.layers[i].backward(dout, caches[i])
            grads[i] = g
        return grads

    def parameters(self):
        """Yield (layer_index, name, array) for every learnable parameter."""
        for i, layer in enumerate(self.layers):
            for name in layer.param_names:
                yield i, name, getattr(layer, name)

    def sgd_step(self, grads, lr):
        """In-place update theta <- theta - lr * grad."""
        if lr < 0:
            raise InputError("learning rate must not be negative")
        for i, name, param in self.parameters():
            g = grads[i][name]
            if g.shape != param.shape:
                raise ConfigurationError(
                    f"gradient shape {g.shape} != parameter shape {param.shape} "
                    f"(layer {i}, {name})")
            if not np.all(np.isfinite(g)):
                raise TrainingAborted(
                    f"non-finite gradient at layer {i} ({name})")
            param -= lr * g

    def predict(self, X, batch_size=256):
        """Argmax class per window; ties break to the lowest class index."""
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(len(X), dtype=np.int64)
        for start in range(0, len(X), batch_size):
            logits, _, _ = self.forward(X[start:start + batch_size])
            out[start:start + batch_size] = np.argmax(logits, axis=1)
        return out

    def features(self, X, batch_size=256):
        """Feature-layer activations for every window, row-aligned with X."""
        X = np.asarray(X, dtype=np.float64)
        chunks = []
        for start in range(0, len(X), batch_size):
            _, feats, _ = self.forward(X[start:start + batch_size])
            chunks.append(feats)
        return np.concatenate(chunks, axis=0)

    def copy(self):
        """Deep copy of the network (fresh parameter arrays)."""
        import copy
        return copy.deepcopy(self)

    def flat_parameters(self):
        """All parameters concatenated into one vector (for comparisons)."""
        return np.concatenate([p.ravel() for _, _, p in self.parameters()])


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Mean cross-entropy over the batch and its logit gradient.

    Returns (loss, dlogits) with dlogits = (softmax - onehot) / B.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    B, C = logits.shape
    if labels.shape != (B,):
        raise InputError(f"labels shape {labels.shape} does not match batch {B}")
    if labels.min() < 0 or labels.max() >= C:
        raise InputError(f"labels must lie in [0, {C})")
    p = softmax(logits)
    loss = -np.mean(np.log(p[np.arange(B), labels] + 1e-300))
    dlogits = p.copy()
    dlogits[np.arange(B), labels] -= 1.0
    dlogits /= B
    return loss, dlogits


def save_network(net, path):
    """Serialize architecture and parameters to an .npz file."""
    import json
    arch = []
    arrays = {}
    for i, layer in enumerate(net.layers):
        if isinstance(layer, Conv1D):
            arch.append({"kind": "conv1d", "in": layer.in_channels,
                         "out": layer.out_channels, "k": layer.kernel_size})
        elif isinstance(layer, ReLU):
            arch.append({"kind": "relu"})
        elif isinstance(layer, MaxPool1D):
            arch.append({"kind": "maxpool", "p": layer.pool_size})
        elif isinstance(layer, Flatten):
            arch.append({"kind": "flatten"})
        elif isinstance(layer, Dense):
            arch.append({"kind": "dense", "in": layer.in_features,
                         "out": layer.out_features})
        else:
            raise ConfigurationError(f"cannot serialize layer {type(layer)}")
        for name in layer.param_names:
            arrays[f"l{i}_{name}"] = getattr(layer, name)
    meta = json.dumps({"arch": arch,
                       "feature_layer_index": net.feature_layer_index})
    np.savez(path, meta=np.frombuffer(meta.encode(), dtype=np.uint8), **arrays)


def load_network(path):
    """Inverse of save_network."""
    import json
    with np.load(path) as z:
        meta = json.loads(bytes(z["meta"]).decode())
        layers = []
        for i, spec in enumerate(meta["arch"]):
            kind = spec["kind"]
            if kind == "conv1d":
                layer = Conv1D(spec["in"], spec["out"], spec["k"])
            elif kind == "relu":
                layer = ReLU()
            elif kind == "maxpool":
                layer = MaxPool1D(spec["p"])
            elif kind == "flatten":
                layer = Flatten()
            elif kind == "dense":
                layer = Dense(spec["in"], spec["out"])
            else:
                raise ConfigurationError(f"unknown layer kind {kind!r}")
            for name in layer.param_names:
                setattr(layer, name, z[f"l{i}_{name}"].astype(np.float64))
            layers.append(layer)
    return Network(layers, meta["feature_layer_index"])


def build_network(input_len, n_classes, conv_filters=16, kernel_size=9,
                  pool_size=4, hidden_width=64, seed=0):
    """Default architecture: 2 x [Conv1D -> ReLU -> MaxPool] -> Dense(hidden)
    [feature layer] -> ReLU -> Dense(C)."""
    rng = np.random.default_rng(seed)
    layers = []
    length, channels = input_len, 1
    for _ in range(2):
        layers.append(Conv1D(channels, conv_filters, kernel_size, rng=rng))
        layers.append(ReLU())
        layers.append(MaxPool1D(pool_size))
        length = (length - kernel_size + 1) // pool_size
        channels = conv_filters
        if length < 1:
            raise ConfigurationError(
                f"input length {input_len} too short for the default stack")
    layers.append(Flatten())
    layers.append(Dense(channels * length, hidden_width, rng=rng))
    feature_index = len(layers) - 1
    layers.append(ReLU())
    layers.append(Dense(hidden_width, n_classes, rng=rng))
    return Network(layers, feature_index)
