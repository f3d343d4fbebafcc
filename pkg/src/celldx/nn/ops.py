"""Array-level forward/backward primitives.

All operations are pure functions over numpy arrays. Stored parameters are
float32 throughout the package; every op preserves the dtype it is given, so
the same graph can be evaluated in float64 when a higher-precision reference
is needed (gradient checks).
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError

LOG_CLAMP = 1e-12  # floor for probabilities before taking log


def _im2col(x: np.ndarray, kh: int, kw: int, stride: int, padding: int):
    """Unfold NCHW input into (N*OH*OW, C*kh*kw) patch rows.

    Row layout matches ``kernel.reshape(O, -1)``: channel varies slowest,
    then kernel row, then kernel column.
    """
    n, c, h, w = x.shape
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    hp, wp = x.shape[2], x.shape[3]
    oh = (hp - kh) // stride + 1
    ow = (wp - kw) // stride + 1
    sn, sc, sh, sw = x.strides
    windows = np.lib.stride_tricks.as_strided(
        x,
        shape=(n, c, oh, ow, kh, kw),
        strides=(sn, sc, sh * stride, sw * stride, sh, sw),
        writeable=False,
    )
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * oh * ow, c * kh * kw)
    return np.ascontiguousarray(cols), oh, ow


def _col2im(dcols: np.ndarray, x_shape, kh: int, kw: int, stride: int, padding: int):
    """Scatter-add patch-row gradients back onto the padded input grid."""
    n, c, h, w = x_shape
    hp, wp = h + 2 * padding, w + 2 * padding
    oh = (hp - kh) // stride + 1
    ow = (wp - kw) // stride + 1
    dx = np.zeros((n, c, hp, wp), dtype=dcols.dtype)
    d6 = dcols.reshape(n, oh, ow, c, kh, kw).transpose(0, 3, 4, 5, 1, 2)
    for i in range(kh):
        for j in range(kw):
            dx[:, :, i : i + stride * oh : stride, j : j + stride * ow : stride] += d6[:, :, i, j]
    if padding:
        dx = dx[:, :, padding : hp - padding, padding : wp - padding]
    return dx


def conv2d_forward(
    x: np.ndarray,
    kernel: np.ndarray,
    bias: np.ndarray,
    stride: int = 1,
    padding: int = 0,
    *,
    return_cache: bool = False,
):
    """Cross-correlate NCHW input with an OIKK kernel (no kernel flip).

    Output spatial dims are ``(H + 2p - K) // s + 1``. With
    ``return_cache=True`` also returns the unfolded patch matrix for reuse in
    the backward pass.
    """
    if x.ndim != 4 or kernel.ndim != 4:
        raise DimensionError(
            f"conv2d expects NCHW input and OIKK kernel, got {x.shape} and {kernel.shape}"
        )
    n, c, h, w = x.shape
    o, i, kh, kw = kernel.shape
    if c != i:
        raise DimensionError(f"input has {c} channels but kernel expects {i}")
    if bias.shape != (o,):
        raise DimensionError(f"bias shape {bias.shape} does not match {o} output channels")
    if h + 2 * padding < kh or w + 2 * padding < kw:
        raise DimensionError(
            f"spatial dims {h}x{w} (padding {padding}) smaller than kernel {kh}x{kw}"
        )
    cols, oh, ow = _im2col(x, kh, kw, stride, padding)
    out = cols @ kernel.reshape(o, -1).T + bias
    out = out.reshape(n, oh, ow, o).transpose(0, 3, 1, 2)
    out = np.ascontiguousarray(out)
    if return_cache:
        return out, cols
    return out


def conv2d_backward(dout: np.ndarray, x_shape, kernel: np.ndarray, cols: np.ndarray,
                    stride: int, padding: int, *, need_dx: bool = True):
    """Gradients of conv2d_forward w.r.t. input, kernel, and bias."""
    n, c, h, w = x_shape
    o = kernel.shape[0]
    drows = dout.transpose(0, 2, 3, 1).reshape(-1, o)
    dkernel = (drows.T @ cols).reshape(kernel.shape)
    dbias = drows.sum(axis=0)
    dx = None
    if need_dx:
        dcols = drows @ kernel.reshape(o, -1)
        dx = _col2im(dcols, x_shape, kernel.shape[2], kernel.shape[3], stride, padding)
    return dx, dkernel, dbias


def maxpool2d_forward(x: np.ndarray, window: int, stride: int):
    """Max-pool NCHW input; returns (output, winner-index map).

    The index map stores, per output cell, the flat offset of the maximum
    inside its window. Ties go to the first occurrence in row-major scan
    order, which makes the backward pass deterministic.
    """
    if x.ndim != 4:
        raise DimensionError(f"maxpool expects NCHW input, got shape {x.shape}")
    n, c, h, w = x.shape
    if h < window or w < window:
        raise DimensionError(f"window {window} exceeds spatial dims {h}x{w}")
    oh = (h - window) // stride + 1
    ow = (w - window) // stride + 1
    sn, sc, sh, sw = x.strides
    windows = np.lib.stride_tricks.as_strided(
        x,
        shape=(n, c, oh, ow, window, window),
        strides=(sn, sc, sh * stride, sw * stride, sh, sw),
        writeable=False,
    )
    flat = windows.reshape(n, c, oh, ow, window * window)
    idx = flat.argmax(axis=-1)  # first max in row-major window order
    out = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
    return np.ascontiguousarray(out), idx


def maxpool2d_backward(dout: np.ndarray, x_shape, idx: np.ndarray, window: int, stride: int):
    """Route output gradients back to the winning input positions."""
    n, c, h, w = x_shape
    oh, ow = dout.shape[2], dout.shape[3]
    dx = np.zeros((n, c, h, w), dtype=dout.dtype)
    ii, jj = np.meshgrid(np.arange(oh), np.arange(ow), indexing="ij")
    rows = ii * stride + idx // window  # (oh, ow) broadcast over n,c
    cols = jj * stride + idx % window
    ni = np.arange(n)[:, None, None, None]
    ci = np.arange(c)[None, :, None, None]
    np.add.at(dx, (ni, ci, rows, cols), dout)
    return dx


def dense_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Affine map: (N,F) @ (F,G) + (G,)."""
    if x.ndim != 2 or weights.ndim != 2 or x.shape[1] != weights.shape[0]:
        raise DimensionError(
            f"dense expects (N,F)@(F,G); got input {x.shape}, weights {weights.shape}"
        )
    if bias.shape != (weights.shape[1],):
        raise DimensionError(f"bias shape {bias.shape} does not match width {weights.shape[1]}")
    return x @ weights + bias


def dense_backward(dout: np.ndarray, x: np.ndarray, weights: np.ndarray):
    dweights = x.T @ dout
    dbias = dout.sum(axis=0)
    dx = dout @ weights.T
    return dx, dweights, dbias


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(dout: np.ndarray, x: np.ndarray) -> np.ndarray:
    return dout * (x > 0)


def dropout(x: np.ndarray, rate: float, rng: np.random.Generator | None, training: bool):
    """Inverted dropout: keep mask scaled by 1/keep at train time.

    Returns (output, mask); mask is None when dropout is the identity
    (rate 0 or inference mode).
    """
    if not training or rate == 0.0:
        return x, None
    keep = 1.0 - rate
    mask = (rng.random(x.shape) < keep).astype(x.dtype)
    return x * mask / np.asarray(keep, dtype=x.dtype), mask


def dropout_backward(dout: np.ndarray, mask, rate: float):
    if mask is None:
        return dout
    keep = np.asarray(1.0 - rate, dtype=dout.dtype)
    return dout * mask / keep


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max-subtraction for overflow safety."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_backward(dout: np.ndarray, probs: np.ndarray) -> np.ndarray:
    inner = (dout * probs).sum(axis=-1, keepdims=True)
    return probs * (dout - inner)


def cross_entropy_loss(probs: np.ndarray, labels) -> float:
    """Mean negative log-probability of the true class.

    Probabilities are clamped to ``LOG_CLAMP`` before the log so a confident
    mistake yields a large finite loss instead of -inf.
    """
    labels = np.asarray(labels)
    n, c = probs.shape
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= c:
        raise IndexError(f"labels must lie in [0,{c}), got range "
                         f"[{labels.min()},{labels.max()}]")
    p = probs[np.arange(n), labels]
    return float(-np.log(np.maximum(p, LOG_CLAMP)).mean())


def cross_entropy_backward(probs: np.ndarray, labels) -> np.ndarray:
    """Gradient of the mean clamped cross-entropy w.r.t. the probabilities."""
    labels = np.asarray(labels)
    n = probs.shape[0]
    dprobs = np.zeros_like(probs)
    p = np.maximum(probs[np.arange(n), labels], LOG_CLAMP)
    dprobs[np.arange(n), labels] = -1.0 / (p * n)
    return dprobs
