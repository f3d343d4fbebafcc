"""Classifier architecture, inference, and weight-file serialization.

The weight container is a simple binary format ("E2EW") designed to be
parseable from any language:

    magic "E2EW" | u16 version=1 | u16 reserved=0 | u32 tensor count
    per tensor, sorted by name:
        u16 name length | UTF-8 name | u8 dtype (0 = float32) |
        u8 ndims | u32 dims... | raw little-endian element data

All integers are little-endian. Loading a saved store reproduces it
bit-for-bit, with tensors ordered by name.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from . import nn
from .errors import ConfigurationError, DimensionError, WeightFormatError
from .nn.network import Layer

WeightStore = dict[str, np.ndarray]

CLASS_LABELS = ["parasitized", "uninfected"]

_MAGIC = b"E2EW"
_VERSION = 1

# canonical VGG-19 feature stack: conv counts and widths per block
_FULL_BLOCKS = [(2, 64), (2, 128), (4, 256), (4, 512), (4, 512)]
_MINI_BLOCKS = [(1, 16), (1, 32), (2, 64)]


@dataclass
class ModelSpec:
    """Ordered layer list plus input shape, class table, and version tag."""

    layers: list[Layer]
    input_shape: tuple[int, int, int]
    class_labels: list[str] = field(default_factory=lambda: list(CLASS_LABELS))
    version: str = "v1"

    def has_head(self) -> bool:
        return any(isinstance(l.kind, (nn.Dense, nn.Flatten)) for l in self.layers)

    def layer_shapes(self) -> list[tuple[int, ...]]:
        """Shape after each layer; raises if consecutive layers do not compose."""
        shapes = []
        shape = tuple(self.input_shape)
        for layer in self.layers:
            shape = layer.kind.out_shape(shape)
            shapes.append(shape)
        return shapes

    def output_shape(self) -> tuple[int, ...]:
        return self.layer_shapes()[-1]

    def validate(self) -> None:
        """Check a complete classifier: shapes compose, one terminal softmax."""
        if len(self.class_labels) < 2:
            raise ConfigurationError("class table needs at least 2 entries")
        names = [l.name for l in self.layers]
        if len(set(names)) != len(names):
            raise ConfigurationError("layer names must be unique")
        softmaxes = [l for l in self.layers if isinstance(l.kind, nn.Softmax)]
        if len(softmaxes) != 1 or not isinstance(self.layers[-1].kind, nn.Softmax):
            raise ConfigurationError("model must end in exactly one softmax layer")
        out = self.layer_shapes()[-1]
        if out != (len(self.class_labels),):
            raise ConfigurationError(
                f"output shape {out} does not match {len(self.class_labels)} classes"
            )

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes = {}
        shape = tuple(self.input_shape)
        for layer in self.layers:
            for suffix, pshape in layer.kind.param_shapes(shape).items():
                shapes[f"{layer.name}/{suffix}"] = pshape
            shape = layer.kind.out_shape(shape)
        return shapes

    def trainable_param_names(self) -> list[str]:
        names = []
        for layer in self.layers:
            if not layer.frozen:
                names.extend(nn.param_names(layer))
        return names


@dataclass(frozen=True)
class Diagnosis:
    label: str
    confidence: float
    model_version: str

    def to_dict(self) -> dict:
        return {
            "confidence": self.confidence,
            "label": self.label,
            "model_version": self.model_version,
        }


def build_vgg19(input_shape: tuple[int, int, int], scale: str = "full") -> ModelSpec:
    """Construct the convolutional feature stack at full or desk ("mini") scale.

    Full scale is the classic 16-conv arrangement (blocks of 2,2,4,4,4 convs at
    64..512 channels, each block closed by a 2x2 max-pool); mini shrinks it to
    three blocks for CPU-friendly runs. The head is added separately.
    """
    if scale not in ("full", "mini"):
        raise ConfigurationError(f"unknown scale {scale!r}")
    blocks = _FULL_BLOCKS if scale == "full" else _MINI_BLOCKS
    c, h, w = input_shape
    divisor = 2 ** len(blocks)
    if h % divisor or w % divisor:
        raise ConfigurationError(
            f"input spatial dims {h}x{w} must be divisible by {divisor} for scale {scale!r}"
        )
    layers: list[Layer] = []
    for b, (n_convs, channels) in enumerate(blocks, start=1):
        for i in range(1, n_convs + 1):
            layers.append(Layer(f"conv{b}_{i}", nn.Conv2D(channels, kernel=3, stride=1, padding=1)))
            layers.append(Layer(f"relu{b}_{i}", nn.ReLU()))
        layers.append(Layer(f"pool{b}", nn.MaxPool2D(window=2, stride=2)))
    return ModelSpec(layers=layers, input_shape=tuple(input_shape))


def append_transfer_head(
    spec: ModelSpec,
    widths: list[int] | None = None,
    freeze_features: bool = True,
) -> ModelSpec:
    """Append the five-dense-layer classification head.

    Flatten, then five dense layers (ReLU + Dropout 0.5 after each of the
    first four), then softmax. The final width must equal the class count.
    With ``freeze_features`` every pre-existing layer is excluded from
    gradient updates.
    """
    if widths is None:
        widths = [512, 256, 128, 64, len(spec.class_labels)]
    if spec.has_head():
        raise ConfigurationError("model already has a classification head")
    if len(widths) != 5:
        raise ConfigurationError(f"head takes exactly 5 widths, got {len(widths)}")
    if widths[-1] != len(spec.class_labels):
        raise ConfigurationError(
            f"final head width {widths[-1]} must equal class count {len(spec.class_labels)}"
        )
    features = [l.freeze() if freeze_features else l for l in spec.layers]
    head: list[Layer] = [Layer("flatten", nn.Flatten())]
    for i, width in enumerate(widths, start=1):
        head.append(Layer(f"fc{i}", nn.Dense(width)))
        if i < 5:
            head.append(Layer(f"fc{i}_relu", nn.ReLU()))
            head.append(Layer(f"fc{i}_drop", nn.Dropout(0.5)))
    head.append(Layer("softmax", nn.Softmax()))
    out = replace(spec, layers=features + head)
    out.validate()
    return out


def predict(spec: ModelSpec, weights: WeightStore, image: np.ndarray) -> Diagnosis:
    """Inference-mode forward pass over one CxHxW image in [0,1]."""
    if tuple(image.shape) != tuple(spec.input_shape):
        raise DimensionError(
            f"image shape {tuple(image.shape)} does not match model input {tuple(spec.input_shape)}"
        )
    probs, _ = nn.forward_collect(spec, weights, image[None, ...], training=False)
    row = probs[0]
    idx = int(np.argmax(row))  # ties resolve to the lowest class index
    return Diagnosis(
        label=spec.class_labels[idx],
        confidence=float(row[idx]),
        model_version=spec.version,
    )


def predict_batch(spec: ModelSpec, weights: WeightStore, images: np.ndarray) -> np.ndarray:
    """Class probabilities for a batch of images, inference mode."""
    probs, _ = nn.forward_collect(spec, weights, images, training=False)
    return probs


# ---------------------------------------------------------------------------
# weight file format


def save_weights(weights: WeightStore, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_weights(weights))


def serialize_weights(weights: WeightStore) -> bytes:
    chunks = [_MAGIC, struct.pack("<HHI", _VERSION, 0, len(weights))]
    for name in sorted(weights):
        arr = weights[name]
        if arr.dtype != np.float32:
            raise WeightFormatError("bad_dtype", f"tensor {name!r} is not float32")
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<BB", 0, arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        chunks.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    return b"".join(chunks)


def load_weights(path) -> WeightStore:
    with open(path, "rb") as fh:
        return deserialize_weights(fh.read())


def deserialize_weights(blob: bytes) -> WeightStore:
    """Parse an E2EW blob; tensors come back ordered by name.

    Every malformed input is rejected with a distinct error code: bad_magic,
    bad_version, bad_reserved, truncated, bad_dtype, duplicate_name,
    trailing_data.
    """
    if len(blob) < 12:
        raise WeightFormatError("truncated", f"file is {len(blob)} bytes, header needs 12")
    if blob[:4] != _MAGIC:
        raise WeightFormatError("bad_magic", f"bad magic {blob[:4]!r}")
    version, reserved, count = struct.unpack("<HHI", blob[4:12])
    if version != _VERSION:
        raise WeightFormatError("bad_version", f"unsupported version {version}")
    if reserved != 0:
        raise WeightFormatError("bad_reserved", f"reserved field must be 0, got {reserved}")
    pos = 12
    store: WeightStore = {}

    def take(n: int, what: str) -> bytes:
        nonlocal pos
        if pos + n > len(blob):
            raise WeightFormatError("truncated", f"file ends inside {what} at offset {pos}")
        piece = blob[pos : pos + n]
        pos += n
        return piece

    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2, "name length"))
        name = take(name_len, "tensor name").decode("utf-8")
        if name in store:
            raise WeightFormatError("duplicate_name", f"duplicate tensor name {name!r}")
        dtype_code, ndims = struct.unpack("<BB", take(2, "dtype/ndims"))
        if dtype_code != 0:
            raise WeightFormatError("bad_dtype", f"unsupported dtype code {dtype_code}")
        dims = struct.unpack(f"<{ndims}I", take(4 * ndims, "dims"))
        n_elems = 1
        for d in dims:
            n_elems *= d
        raw = take(4 * n_elems, f"data for {name!r}")
        store[name] = np.frombuffer(raw, dtype="<f4").reshape(dims).copy()
    if pos != len(blob):
        raise WeightFormatError("trailing_data", f"{len(blob) - pos} unexpected bytes after tensors")
    return store


# ---------------------------------------------------------------------------
# architecture sidecar (JSON) so weights alone reconstruct a runnable model

_KIND_CODECS = {
    "conv2d": (nn.Conv2D, ("out_channels", "kernel", "stride", "padding")),
    "maxpool2d": (nn.MaxPool2D, ("window", "stride")),
    "relu": (nn.ReLU, ()),
    "flatten": (nn.Flatten, ()),
    "dense": (nn.Dense, ("out_features",)),
    "dropout": (nn.Dropout, ("rate",)),
    "softmax": (nn.Softmax, ()),
}
_KIND_NAMES = {cls: name for name, (cls, _) in _KIND_CODECS.items()}


def spec_to_dict(spec: ModelSpec) -> dict:
    layers = []
    for layer in spec.layers:
        kind_name = _KIND_NAMES[type(layer.kind)]
        _, fields = _KIND_CODECS[kind_name]
        entry = {"name": layer.name, "kind": kind_name, "frozen": layer.frozen}
        entry.update({f: getattr(layer.kind, f) for f in fields})
        layers.append(entry)
    return {
        "class_labels": list(spec.class_labels),
        "input_shape": list(spec.input_shape),
        "layers": layers,
        "version": spec.version,
    }


def spec_from_dict(data: dict) -> ModelSpec:
    layers = []
    for entry in data["layers"]:
        cls, fields = _KIND_CODECS[entry["kind"]]
        kind = cls(**{f: entry[f] for f in fields})
        layers.append(Layer(entry["name"], kind, frozen=bool(entry.get("frozen", False))))
    return ModelSpec(
        layers=layers,
        input_shape=tuple(data["input_shape"]),
        class_labels=list(data["class_labels"]),
        version=data.get("version", "v1"),
    )


def save_spec(spec: ModelSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_spec(path) -> ModelSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return spec_from_dict(json.load(fh))


def check_weights_match(spec: ModelSpec, weights: WeightStore) -> None:
    """Every parameter the spec declares must be present with the right shape."""
    for name, shape in spec.param_shapes().items():
        if name not in weights:
            raise ConfigurationError(f"weight store is missing {name!r}")
        if tuple(weights[name].shape) != tuple(shape):
            raise ConfigurationError(
                f"{name!r} has shape {tuple(weights[name].shape)}, expected {tuple(shape)}"
            )
