"""Minimal neural-network engine: layers, forward/backward, loss, Adam."""

from .layers import Conv2D, Dense, Dropout, Flatten, LayerKind, MaxPool2D, ReLU, Softmax
from .network import Layer, backprop, backward_from, forward_collect, init_weights, param_names
from .ops import (
    conv2d_forward,
    cross_entropy_loss,
    dense_forward,
    dropout,
    maxpool2d_forward,
    relu,
    softmax,
)
from .optim import AdamConfig, AdamState, adam_step

__all__ = [
    "Conv2D", "Dense", "Dropout", "Flatten", "LayerKind", "MaxPool2D", "ReLU", "Softmax",
    "Layer", "backprop", "backward_from", "forward_collect", "init_weights", "param_names",
    "conv2d_forward", "cross_entropy_loss", "dense_forward", "dropout",
    "maxpool2d_forward", "relu", "softmax",
    "AdamConfig", "AdamState", "adam_step",
]
