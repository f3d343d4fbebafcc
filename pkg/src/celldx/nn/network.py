"""Sequential network execution: forward with caches, backward, init.

A network is a list of :class:`Layer` records (name + descriptor + frozen
flag) plus a flat name->array parameter store. Forward/backward are pure
functions of their inputs; nothing here mutates the store, so read-only
weights can be shared across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..errors import ConfigurationError, DimensionError
from . import ops
from .layers import Conv2D, Dense, Dropout, Flatten, LayerKind, MaxPool2D, ReLU, Softmax


@dataclass(frozen=True)
class Layer:
    name: str
    kind: LayerKind
    frozen: bool = False

    def freeze(self) -> "Layer":
        return replace(self, frozen=True)


def param_names(layer: Layer) -> list[str]:
    if isinstance(layer.kind, Conv2D):
        return [f"{layer.name}/kernel", f"{layer.name}/bias"]
    if isinstance(layer.kind, Dense):
        return [f"{layer.name}/weight", f"{layer.name}/bias"]
    return []


def init_weights(spec, seed: int, dtype=np.float32) -> dict[str, np.ndarray]:
    """He-uniform kernels/weights, zero biases; deterministic in layer order."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    weights: dict[str, np.ndarray] = {}
    shape = tuple(spec.input_shape)
    for layer in spec.layers:
        shapes = layer.kind.param_shapes(shape)
        for suffix, pshape in shapes.items():
            name = f"{layer.name}/{suffix}"
            if suffix == "bias":
                weights[name] = np.zeros(pshape, dtype=dtype)
            else:
                fan_in = int(np.prod(pshape[:-1])) if len(pshape) == 2 else int(np.prod(pshape[1:]))
                limit = np.sqrt(6.0 / fan_in)
                weights[name] = rng.uniform(-limit, limit, size=pshape).astype(dtype)
        shape = layer.kind.out_shape(shape)
    return weights


def forward_collect(spec, weights, x: np.ndarray, *, training: bool,
                    rng: np.random.Generator | None = None):
    """Run the network, keeping per-layer caches for a later backward pass.

    Returns (output, caches). ``rng`` is consumed in layer order by dropout
    layers, so a freshly seeded generator reproduces the run exactly.
    """
    if tuple(x.shape[1:]) != tuple(spec.input_shape):
        raise DimensionError(
            f"batch shape {tuple(x.shape[1:])} does not match model input {tuple(spec.input_shape)}"
        )
    caches = []
    for layer in spec.layers:
        kind = layer.kind
        if isinstance(kind, Conv2D):
            k = weights[f"{layer.name}/kernel"]
            b = weights[f"{layer.name}/bias"]
            out, cols = ops.conv2d_forward(x, k, b, kind.stride, kind.padding, return_cache=True)
            caches.append({"x_shape": x.shape, "cols": cols})
        elif isinstance(kind, MaxPool2D):
            out, idx = ops.maxpool2d_forward(x, kind.window, kind.stride)
            caches.append({"x_shape": x.shape, "idx": idx})
        elif isinstance(kind, ReLU):
            out = ops.relu(x)
            caches.append({"x": x})
        elif isinstance(kind, Flatten):
            out = x.reshape(x.shape[0], -1)
            caches.append({"x_shape": x.shape})
        elif isinstance(kind, Dense):
            w = weights[f"{layer.name}/weight"]
            b = weights[f"{layer.name}/bias"]
            out = ops.dense_forward(x, w, b)
            caches.append({"x": x})
        elif isinstance(kind, Dropout):
            if training and kind.rate > 0.0 and rng is None:
                raise ConfigurationError("training-mode dropout requires an rng")
            out, mask = ops.dropout(x, kind.rate, rng, training)
            caches.append({"mask": mask})
        elif isinstance(kind, Softmax):
            out = ops.softmax(x)
            caches.append({"probs": out})
        else:
            raise ConfigurationError(f"unknown layer kind: {kind!r}")
        x = out
    return x, caches


def backward_from(spec, weights, caches, dout: np.ndarray, *, need_dx: bool = False):
    """Backpropagate ``dout`` (gradient w.r.t. the network output).

    Returns (grads, dx). Gradients are produced only for parameters of
    non-frozen layers; the walk stops as soon as no earlier layer needs
    anything, unless ``need_dx`` asks for the input gradient too.
    """
    layers = spec.layers
    trainable = [i for i, l in enumerate(layers) if param_names(l) and not l.frozen]
    first_needed = 0 if need_dx else (min(trainable) if trainable else len(layers))
    grads: dict[str, np.ndarray] = {}
    dx = dout
    for i in range(len(layers) - 1, -1, -1):
        if i < first_needed:
            return grads, None
        layer, kind, cache = layers[i], layers[i].kind, caches[i]
        want_dx = need_dx or i > first_needed
        if isinstance(kind, Conv2D):
            k = weights[f"{layer.name}/kernel"]
            dxi, dk, db = ops.conv2d_backward(
                dx, cache["x_shape"], k, cache["cols"], kind.stride, kind.padding,
                need_dx=want_dx,
            )
            if not layer.frozen:
                grads[f"{layer.name}/kernel"] = dk
                grads[f"{layer.name}/bias"] = db
            dx = dxi
        elif isinstance(kind, MaxPool2D):
            dx = ops.maxpool2d_backward(dx, cache["x_shape"], cache["idx"], kind.window, kind.stride)
        elif isinstance(kind, ReLU):
            dx = ops.relu_backward(dx, cache["x"])
        elif isinstance(kind, Flatten):
            dx = dx.reshape(cache["x_shape"])
        elif isinstance(kind, Dense):
            w = weights[f"{layer.name}/weight"]
            dxi, dw, db = ops.dense_backward(dx, cache["x"], w)
            if not layer.frozen:
                grads[f"{layer.name}/weight"] = dw
                grads[f"{layer.name}/bias"] = db
            dx = dxi
        elif isinstance(kind, Dropout):
            dx = ops.dropout_backward(dx, cache["mask"], kind.rate)
        elif isinstance(kind, Softmax):
            dx = ops.softmax_backward(dx, cache["probs"])
    return grads, dx


def backprop(spec, weights, batch, *, rng: np.random.Generator | None = None,
             training: bool = True):
    """Forward + cross-entropy + backward for a softmax-terminated network.

    ``batch`` is (inputs, labels). Returns (loss, grads) where grads holds one
    entry per trainable parameter; frozen layers get none.
    """
    if not spec.layers or not isinstance(spec.layers[-1].kind, Softmax):
        raise ConfigurationError("backprop requires a softmax-terminated network")
    x, labels = batch
    probs, caches = forward_collect(spec, weights, x, training=training, rng=rng)
    loss = ops.cross_entropy_loss(probs, labels)
    dprobs = ops.cross_entropy_backward(probs, labels)
    grads, _ = backward_from(spec, weights, caches, dprobs)
    return loss, grads
