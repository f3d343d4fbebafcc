"""Layer descriptors: the fixed vocabulary networks are assembled from.

A descriptor is pure configuration; parameters live in a separate name->array
store and the executor in :mod:`celldx.nn.network` runs the math. Each
descriptor knows its output shape and the shapes of its parameters so a
network can be validated without allocating anything.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigurationError, DimensionError


@dataclass(frozen=True)
class Conv2D:
    out_channels: int
    kernel: int = 3
    stride: int = 1
    padding: int = 1

    def __post_init__(self):
        if self.kernel < 1 or self.stride < 1 or self.out_channels < 1:
            raise ConfigurationError(f"invalid conv2d config: {self}")
        if self.padding < 0:
            raise ConfigurationError(f"negative padding: {self}")

    def out_shape(self, in_shape):
        if len(in_shape) != 3:
            raise DimensionError(f"conv2d needs CxHxW input, got {in_shape}")
        c, h, w = in_shape
        oh = (h + 2 * self.padding - self.kernel) // self.stride + 1
        ow = (w + 2 * self.padding - self.kernel) // self.stride + 1
        if oh < 1 or ow < 1:
            raise DimensionError(f"conv2d kernel {self.kernel} too large for input {in_shape}")
        return (self.out_channels, oh, ow)

    def param_shapes(self, in_shape):
        c = in_shape[0]
        return {
            "kernel": (self.out_channels, c, self.kernel, self.kernel),
            "bias": (self.out_channels,),
        }


@dataclass(frozen=True)
class MaxPool2D:
    window: int = 2
    stride: int = 2

    def __post_init__(self):
        if self.window < 1 or self.stride < 1:
            raise ConfigurationError(f"invalid maxpool config: {self}")

    def out_shape(self, in_shape):
        if len(in_shape) != 3:
            raise DimensionError(f"maxpool needs CxHxW input, got {in_shape}")
        c, h, w = in_shape
        if h < self.window or w < self.window:
            raise DimensionError(f"pool window {self.window} exceeds input {in_shape}")
        return (c, (h - self.window) // self.stride + 1, (w - self.window) // self.stride + 1)

    def param_shapes(self, in_shape):
        return {}


@dataclass(frozen=True)
class ReLU:
    def out_shape(self, in_shape):
        return in_shape

    def param_shapes(self, in_shape):
        return {}


@dataclass(frozen=True)
class Flatten:
    def out_shape(self, in_shape):
        n = 1
        for d in in_shape:
            n *= d
        return (n,)

    def param_shapes(self, in_shape):
        return {}


@dataclass(frozen=True)
class Dense:
    out_features: int

    def __post_init__(self):
        if self.out_features < 1:
            raise ConfigurationError(f"invalid dense width: {self}")

    def out_shape(self, in_shape):
        if len(in_shape) != 1:
            raise DimensionError(f"dense needs a flat feature input, got {in_shape}")
        return (self.out_features,)

    def param_shapes(self, in_shape):
        return {"weight": (in_shape[0], self.out_features), "bias": (self.out_features,)}


@dataclass(frozen=True)
class Dropout:
    rate: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.rate < 1.0:
            raise ConfigurationError(f"dropout rate must be in [0,1), got {self.rate}")

    def out_shape(self, in_shape):
        return in_shape

    def param_shapes(self, in_shape):
        return {}


@dataclass(frozen=True)
class Softmax:
    def out_shape(self, in_shape):
        if len(in_shape) != 1:
            raise DimensionError(f"softmax needs a flat logit input, got {in_shape}")
        return in_shape

    def param_shapes(self, in_shape):
        return {}


LayerKind = Conv2D | MaxPool2D | ReLU | Flatten | Dense | Dropout | Softmax
