"""Independent reference implementations used to check the real code.

Everything here is deliberately naive — nested loops and direct formulas —
and shares no code paths with the package.
"""

from __future__ import annotations

import math

import numpy as np


def conv2d_loops(x, kernel, bias, stride, padding):
    n, c, h, w = x.shape
    o, _, kh, kw = kernel.shape
    xp = np.zeros((n, c, h + 2 * padding, w + 2 * padding), dtype=np.float64)
    xp[:, :, padding : padding + h, padding : padding + w] = x
    oh = (h + 2 * padding - kh) // stride + 1
    ow = (w + 2 * padding - kw) // stride + 1
    out = np.zeros((n, o, oh, ow), dtype=np.float64)
    for ni in range(n):
        for oi in range(o):
            for yi in range(oh):
                for xi in range(ow):
                    acc = 0.0
                    for ci in range(c):
                        for ky in range(kh):
                            for kx in range(kw):
                                acc += (
                                    xp[ni, ci, yi * stride + ky, xi * stride + kx]
                                    * kernel[oi, ci, ky, kx]
                                )
                    out[ni, oi, yi, xi] = acc + bias[oi]
    return out


def maxpool2d_loops(x, window, stride):
    n, c, h, w = x.shape
    oh = (h - window) // stride + 1
    ow = (w - window) // stride + 1
    out = np.zeros((n, c, oh, ow), dtype=x.dtype)
    for ni in range(n):
        for ci in range(c):
            for yi in range(oh):
                for xi in range(ow):
                    patch = x[ni, ci, yi * stride : yi * stride + window,
                              xi * stride : xi * stride + window]
                    out[ni, ci, yi, xi] = patch.max()
    return out


def dense_loops(x, w, b):
    n, f = x.shape
    g = w.shape[1]
    out = np.zeros((n, g), dtype=np.float64)
    for ni in range(n):
        for gi in range(g):
            acc = 0.0
            for fi in range(f):
                acc += x[ni, fi] * w[fi, gi]
            out[ni, gi] = acc + b[gi]
    return out


def softmax_f64(logits):
    z = np.asarray(logits, dtype=np.float64)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy_f64(probs, labels):
    total = 0.0
    for row, label in zip(probs, labels):
        total += -math.log(max(float(row[label]), 1e-12))
    return total / len(labels)


def chamfer_loops(a, b):
    """Per-point nearest neighbor by explicit enumeration."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    fwd = np.zeros(len(a))
    for i, p in enumerate(a):
        best = np.inf
        for q in b:
            dx, dy, dz = p[0] - q[0], p[1] - q[1], p[2] - q[2]
            d2 = (dx * dx + dy * dy) + dz * dz
            if d2 < best:
                best = d2
        fwd[i] = np.sqrt(best)
    bwd = np.zeros(len(b))
    for i, q in enumerate(b):
        best = np.inf
        for p in a:
            dx, dy, dz = q[0] - p[0], q[1] - p[1], q[2] - p[2]
            d2 = (dx * dx + dy * dy) + dz * dz
            if d2 < best:
                best = d2
        bwd[i] = np.sqrt(best)
    return float(np.mean(fwd) + np.mean(bwd))


def confusion_loops(actuals, preds, positive=0):
    tp = fp = fn = tn = 0
    for a, p in zip(actuals, preds):
        if a == positive and p == positive:
            tp += 1
        elif a == positive:
            fn += 1
        elif p == positive:
            fp += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def metrics_formulas(tp, fp, fn, tn):
    total = tp + fp + fn + tn
    acc = (tp + tn) / total if total else 0.0
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
    return acc, prec, rec, f1


def finite_difference_grads(loss_fn, weights, names, rng, samples_per_tensor=6, eps=1e-3):
    """Central finite differences on a random subset of positions.

    ``loss_fn(weights)`` must be deterministic. Returns a list of
    (name, flat_index, fd_value) triples.
    """
    out = []
    for name in names:
        flat = weights[name].reshape(-1)
        k = min(samples_per_tensor, flat.size)
        positions = rng.choice(flat.size, size=k, replace=False)
        for i in positions:
            orig = flat[i]
            flat[i] = orig + eps
            lp = loss_fn(weights)
            flat[i] = orig - eps
            lm = loss_fn(weights)
            flat[i] = orig
            out.append((name, int(i), (lp - lm) / (2 * eps)))
    return out
