"""Single-image 3D reconstruction: encoder + multi-view depth decoder.

The encoder maps one image to a latent vector; the decoder expands the
latent to V x 2 channels of H x W values — per-view depth plus a mask logit.
Thresholded masks and depths are fused into a world-frame point cloud.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .. import nn
from ..errors import ConfigurationError, DataError
from ..model import ModelSpec, WeightStore, spec_from_dict, spec_to_dict
from ..nn.network import Layer
from .camera import ViewPose, make_fixed_poses
from .fuse import DepthMapSet, PointCloud, fuse
from .synth3d import DEFAULT_RADIUS, input_image_from_depth

log = logging.getLogger(__name__)


@dataclass
class GeneratorSpec:
    encoder: ModelSpec
    decoder: ModelSpec
    poses: list[ViewPose]
    views: int
    image_size: int
    radius: float
    mask_threshold: float = 0.5
    version: str = "v1"

    def validate(self) -> None:
        v, s = self.views, self.image_size
        if len(self.poses) != v:
            raise ConfigurationError(f"{len(self.poses)} poses for {v} views")
        if self.decoder.output_shape() != (v * 2 * s * s,):
            raise ConfigurationError(
                f"decoder output {self.decoder.output_shape()} != {(v * 2 * s * s,)}"
            )
        latent = self.encoder.output_shape()
        if latent != tuple(self.decoder.input_shape):
            raise ConfigurationError(
                f"encoder output {latent} does not feed decoder input {self.decoder.input_shape}"
            )

    def to_dict(self) -> dict:
        return {
            "encoder": spec_to_dict(self.encoder),
            "decoder": spec_to_dict(self.decoder),
            "poses": [p.to_dict() for p in self.poses],
            "views": self.views,
            "image_size": self.image_size,
            "radius": self.radius,
            "mask_threshold": self.mask_threshold,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        return cls(
            encoder=spec_from_dict(d["encoder"]),
            decoder=spec_from_dict(d["decoder"]),
            poses=[ViewPose.from_dict(p) for p in d["poses"]],
            views=int(d["views"]),
            image_size=int(d["image_size"]),
            radius=float(d["radius"]),
            mask_threshold=float(d.get("mask_threshold", 0.5)),
            version=d.get("version", "v1"),
        )


def save_generator_spec(gen: GeneratorSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(gen.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_generator_spec(path) -> GeneratorSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return GeneratorSpec.from_dict(json.load(fh))


def build_generator(
    views: int = 8,
    image_size: int = 32,
    latent_dim: int = 128,
    radius: float = DEFAULT_RADIUS,
    seed: int = 42,
) -> tuple[GeneratorSpec, WeightStore]:
    """Construct the desk-scale generator and its He-uniform initial weights.

    The decoder's final layer starts with small weights and its bias at the
    camera radius on depth channels, so untrained predictions already sit
    near the viewing sphere's focus (positive depths from step one).
    """
    s = image_size
    encoder = ModelSpec(
        layers=[
            Layer("enc_conv1", nn.Conv2D(8, kernel=3, stride=1, padding=1)),
            Layer("enc_relu1", nn.ReLU()),
            Layer("enc_pool1", nn.MaxPool2D(2, 2)),
            Layer("enc_conv2", nn.Conv2D(16, kernel=3, stride=1, padding=1)),
            Layer("enc_relu2", nn.ReLU()),
            Layer("enc_pool2", nn.MaxPool2D(2, 2)),
            Layer("enc_flatten", nn.Flatten()),
            Layer("enc_fc", nn.Dense(latent_dim)),
        ],
        input_shape=(3, s, s),
    )
    decoder = ModelSpec(
        layers=[
            Layer("dec_fc1", nn.Dense(512)),
            Layer("dec_relu1", nn.ReLU()),
            Layer("dec_fc2", nn.Dense(views * 2 * s * s)),
        ],
        input_shape=(latent_dim,),
    )
    poses = make_fixed_poses(views, radius, (s, s))
    gen = GeneratorSpec(encoder=encoder, decoder=decoder, poses=poses,
                        views=views, image_size=s, radius=radius)
    gen.validate()
    weights = nn.init_weights(encoder, seed)
    weights.update(nn.init_weights(decoder, seed + 1))
    weights["dec_fc2/weight"] = weights["dec_fc2/weight"] * np.float32(0.05)
    bias = weights["dec_fc2/bias"].reshape(views, 2, s, s)
    bias[:, 0, :, :] = radius
    return gen, weights


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def generator_loss(pred: np.ndarray, gt: np.ndarray) -> tuple[float, np.ndarray]:
    """Masked L1 depth error plus mask BCE, equally weighted.

    ``pred`` and ``gt`` are (N, V, 2, H, W); gt channel 1 holds 0/1 masks,
    pred channel 1 holds logits. Returns (loss, gradient w.r.t. pred).
    """
    if pred.shape != gt.shape:
        raise DataError(f"prediction shape {pred.shape} != ground truth {gt.shape}")
    depth_pred, logit = pred[:, :, 0], pred[:, :, 1]
    depth_gt, mask = gt[:, :, 0], gt[:, :, 1]
    m = mask.sum()
    diff = depth_pred - depth_gt
    l1 = float((np.abs(diff) * mask).sum() / max(m, 1.0))

    p = logit.size
    sig = _sigmoid(logit)
    bce_terms = np.maximum(logit, 0.0) - logit * mask + np.log1p(np.exp(-np.abs(logit)))
    bce = float(bce_terms.sum() / p)

    dpred = np.zeros_like(pred)
    dpred[:, :, 0] = np.sign(diff) * mask / max(m, 1.0)
    dpred[:, :, 1] = (sig - mask) / p
    return l1 + bce, dpred


@dataclass
class GenTrainConfig:
    epochs: int = 60
    batch_size: int = 16
    seed: int = 42
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    val_fraction: float = 0.1

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigurationError(f"invalid generator training config: {self}")


@dataclass
class GenEpochRecord:
    epoch: int
    train_loss: float
    val_loss: float | None

    def to_dict(self) -> dict:
        return {"epoch": self.epoch, "loss": self.train_loss, "val_loss": self.val_loss}


def training_inputs(gt: np.ndarray) -> np.ndarray:
    """Derive the 2D input image for each sample from its first view."""
    return np.stack([
        input_image_from_depth(gt[i, 0, 0], gt[i, 0, 1] > 0.5) for i in range(gt.shape[0])
    ])


def _forward(gen: GeneratorSpec, weights: WeightStore, images: np.ndarray):
    latent, enc_caches = nn.forward_collect(gen.encoder, weights, images, training=False)
    flat, dec_caches = nn.forward_collect(gen.decoder, weights, latent, training=False)
    n = images.shape[0]
    pred = flat.reshape(n, gen.views, 2, gen.image_size, gen.image_size)
    return pred, enc_caches, dec_caches


def train_generator(
    gen: GeneratorSpec,
    weights: WeightStore,
    dataset: np.ndarray,
    cfg: GenTrainConfig,
) -> tuple[WeightStore, list[GenEpochRecord]]:
    """Fit the generator to (samples, V, 2, H, W) ground truth.

    Inputs are derived from each sample's first view; a held-back fraction
    tracks validation loss and the best-val epoch's weights are returned
    (final epoch when the set is too small to split).
    """
    gen.validate()
    expected = (gen.views, 2, gen.image_size, gen.image_size)
    if dataset.ndim != 5 or dataset.shape[1:] != expected:
        raise DataError(f"dataset shape {dataset.shape} does not end in {expected}")
    n = dataset.shape[0]
    images = training_inputs(dataset)

    rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(6,)))
    order = rng.permutation(n)
    n_val = int(cfg.val_fraction * n)
    val_idx, train_idx = order[:n_val], order[n_val:]
    if len(train_idx) == 0:
        raise DataError("generator training set is empty")

    trainable = gen.encoder.trainable_param_names() + gen.decoder.trainable_param_names()
    state = nn.AdamState.for_params({k: weights[k] for k in trainable})
    best = dict(weights)
    best_val = np.inf
    history: list[GenEpochRecord] = []
    for epoch in range(1, cfg.epochs + 1):
        perm = np.random.default_rng(
            np.random.SeedSequence(entropy=cfg.seed, spawn_key=(7, epoch))
        ).permutation(train_idx)
        losses = []
        for start in range(0, len(perm), cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            pred, enc_caches, dec_caches = _forward(gen, weights, images[idx])
            loss, dpred = generator_loss(pred, dataset[idx])
            if not np.isfinite(loss):
                raise DataError(f"generator loss diverged at epoch {epoch}")
            dflat = dpred.reshape(len(idx), -1).astype(np.float32)
            dec_grads, dlatent = nn.backward_from(
                gen.decoder, weights, dec_caches, dflat, need_dx=True
            )
            enc_grads, _ = nn.backward_from(gen.encoder, weights, enc_caches, dlatent)
            grads = {**enc_grads, **dec_grads}
            weights, state = nn.adam_step(
                weights, grads, state, lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps
            )
            losses.append(loss)
        train_loss = float(np.mean(losses))
        val_loss = None
        if len(val_idx):
            pred, _, _ = _forward(gen, weights, images[val_idx])
            val_loss, _ = generator_loss(pred, dataset[val_idx])
            if val_loss < best_val:
                best_val = val_loss
                best = dict(weights)
        history.append(GenEpochRecord(epoch, train_loss, val_loss))
        log.info("generator epoch %d: loss=%.4f val=%s", epoch, train_loss,
                 f"{val_loss:.4f}" if val_loss is not None else "n/a")
    if not len(val_idx):
        best = weights
    return best, history


def predict_depth_maps(gen: GeneratorSpec, weights: WeightStore, image: np.ndarray) -> DepthMapSet:
    """Decode one image to a DepthMapSet (sigmoid-thresholded masks)."""
    if tuple(image.shape) != tuple(gen.encoder.input_shape):
        raise DataError(
            f"image shape {tuple(image.shape)} != generator input {tuple(gen.encoder.input_shape)}"
        )
    pred, _, _ = _forward(gen, weights, image[None])
    depth = pred[0, :, 0]
    mask = _sigmoid(pred[0, :, 1]) > gen.mask_threshold
    return DepthMapSet(depth, mask, gen.poses)


def generate(gen: GeneratorSpec, weights: WeightStore, image: np.ndarray) -> PointCloud:
    """Image -> depth maps -> fused world-frame point cloud."""
    return fuse(predict_depth_maps(gen, weights, image))
