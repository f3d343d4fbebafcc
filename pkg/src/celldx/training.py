"""Training loop, evaluation metrics, magnitude pruning, and fine-tuning."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import model as model_mod
from . import nn
from .data.augmentation import IDENTITY_AUGMENT, AugmentConfig, augment, sample_rng
from .data.dataset import DatasetSplit, LabeledImage
from .errors import ConfigurationError, DataError, TrainingDivergedError
from .model import ModelSpec, WeightStore

log = logging.getLogger(__name__)

POSITIVE_CLASS = 0  # parasitized


@dataclass
class TrainConfig:
    epochs: int = 25
    batch_size: int = 32
    seed: int = 42
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    augment: bool = True
    augment_config: AugmentConfig = field(default_factory=AugmentConfig)

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch size must be >= 1, got {self.batch_size}")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_accuracy: float | None
    val_f1: float | None

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "loss": self.train_loss,
            "val_accuracy": self.val_accuracy,
            "val_f1": self.val_f1,
        }


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def confusion(self) -> list[list[int]]:
        """2x2 counts, rows = actual class, cols = predicted class."""
        return [[self.tp, self.fn], [self.fp, self.tn]]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "confusion": {"fn": self.fn, "fp": self.fp, "tn": self.tn, "tp": self.tp},
            "f1": self.f1,
            "precision": self.precision,
            "recall": self.recall,
        }


@dataclass(frozen=True)
class PruneConfig:
    sparsity: float = 0.5
    scope: str = "global"  # or "per-tensor"

    def __post_init__(self):
        if not 0.0 <= self.sparsity <= 1.0:
            raise ConfigurationError(f"sparsity must be in [0,1], got {self.sparsity}")
        if self.scope not in ("global", "per-tensor"):
            raise ConfigurationError(f"unknown prune scope {self.scope!r}")


@dataclass
class PruneReport:
    sparsity_target: float
    sparsity_achieved: float
    pruned_elements: int
    scope_elements: int
    dense_bytes: int
    sparse_bytes: int

    def to_dict(self) -> dict:
        return {
            "bytes_saved": self.dense_bytes - self.sparse_bytes,
            "dense_bytes": self.dense_bytes,
            "pruned_elements": self.pruned_elements,
            "scope_elements": self.scope_elements,
            "sparse_bytes": self.sparse_bytes,
            "sparsity_achieved": self.sparsity_achieved,
            "sparsity_target": self.sparsity_target,
        }


def metrics_from_counts(tp: int, fp: int, fn: int, tn: int) -> Metrics:
    """Binary metrics with zero-denominator conventions: P, R, and F1 fall
    back to 0 rather than dividing by zero."""
    total = tp + fp + fn + tn
    accuracy = (tp + tn) / total if total else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Metrics(accuracy, precision, recall, f1, tp, fp, fn, tn)


def evaluate(spec: ModelSpec, weights: WeightStore, samples: list[LabeledImage],
             batch_size: int = 64) -> Metrics:
    """Inference-mode metrics; the parasitized class (index 0) is positive."""
    if not samples:
        raise DataError("evaluate needs a non-empty sample set")
    tp = fp = fn = tn = 0
    for start in range(0, len(samples), batch_size):
        chunk = samples[start : start + batch_size]
        x = np.stack([s.pixels for s in chunk])
        probs = model_mod.predict_batch(spec, weights, x)
        preds = probs.argmax(axis=1)
        for s, pred in zip(chunk, preds):
            actual_pos = s.label == POSITIVE_CLASS
            pred_pos = int(pred) == POSITIVE_CLASS
            if actual_pos and pred_pos:
                tp += 1
            elif actual_pos:
                fn += 1
            elif pred_pos:
                fp += 1
            else:
                tn += 1
    return metrics_from_counts(tp, fp, fn, tn)


def _epoch_rng(seed: int, epoch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(3, epoch)))


def train(
    spec: ModelSpec,
    weights: WeightStore,
    split: DatasetSplit,
    cfg: TrainConfig,
    grad_mask: dict[str, np.ndarray] | None = None,
) -> tuple[WeightStore, list[EpochRecord]]:
    """Mini-batch training; returns the best-val-accuracy epoch's weights.

    Each epoch shuffles the train indices, augments per sample (streams keyed
    by (seed, epoch, sample index)), runs backprop, and applies one Adam step
    per batch. Ties in val accuracy keep the earlier epoch; with an empty val
    split the final epoch wins. ``grad_mask`` (0/1 per tensor) zeroes
    gradients at masked positions before each step — used by fine-tuning to
    keep pruned weights pruned.
    """
    spec.validate()
    model_mod.check_weights_match(spec, weights)
    if not split.train:
        raise DataError("training split is empty")
    trainable = spec.trainable_param_names()
    state = nn.AdamState.for_params({n: weights[n] for n in trainable})
    aug_cfg = cfg.augment_config if cfg.augment else IDENTITY_AUGMENT

    history: list[EpochRecord] = []
    best_weights = dict(weights)
    best_acc = -1.0
    val_samples = split.subset("val")
    for epoch in range(1, cfg.epochs + 1):
        order = np.array(split.train)
        _epoch_rng(cfg.seed, epoch).shuffle(order)
        losses = []
        for bstart in range(0, len(order), cfg.batch_size):
            batch_idx = order[bstart : bstart + cfg.batch_size]
            imgs = []
            for i in batch_idx:
                sample = split.samples[i]
                rng = sample_rng(cfg.seed, epoch, int(i))
                if aug_cfg.is_identity():
                    imgs.append(sample.pixels)
                else:
                    imgs.append(augment(sample.pixels, aug_cfg, rng))
            x = np.stack(imgs)
            labels = np.array([split.samples[i].label for i in batch_idx])
            drop_rng = np.random.default_rng(
                np.random.SeedSequence(entropy=cfg.seed, spawn_key=(4, epoch, bstart))
            )
            loss, grads = nn.backprop(spec, weights, (x, labels), rng=drop_rng)
            if not np.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {bstart // cfg.batch_size}"
                )
            if grad_mask is not None:
                for name, mask in grad_mask.items():
                    if name in grads:
                        grads[name] = grads[name] * mask
            weights, state = nn.adam_step(
                weights, grads, state, lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps
            )
            losses.append(loss)
        mean_loss = float(np.mean(losses))
        val_acc = val_f1 = None
        if val_samples:
            val_metrics = evaluate(spec, weights, val_samples)
            val_acc, val_f1 = val_metrics.accuracy, val_metrics.f1
            if val_acc > best_acc:
                best_acc = val_acc
                best_weights = dict(weights)
        history.append(EpochRecord(epoch, mean_loss, val_acc, val_f1))
        log.info("epoch %d: loss=%.4f val_acc=%s", epoch, mean_loss,
                 f"{val_acc:.4f}" if val_acc is not None else "n/a")
    if not val_samples:
        best_weights = weights
    return best_weights, history


PRUNABLE_SUFFIXES = ("/kernel", "/weight")


def prunable_names(weights: WeightStore) -> list[str]:
    return sorted(n for n in weights if n.endswith(PRUNABLE_SUFFIXES))


def prune_magnitude(weights: WeightStore, cfg: PruneConfig) -> tuple[WeightStore, PruneReport]:
    """Zero the floor(s*n) smallest-magnitude kernel/weight elements.

    Scope is either the concatenation of all prunable tensors ("global") or
    each tensor separately ("per-tensor"). Magnitude ties break by
    (tensor name, flat index), so pruning is deterministic, idempotent, and
    monotone in s. Biases are never touched.
    """
    names = prunable_names(weights)
    pruned = {k: v.copy() for k, v in weights.items()}
    if cfg.scope == "per-tensor":
        for name in names:
            flat = pruned[name].reshape(-1)
            k = int(cfg.sparsity * flat.size)
            if k:
                order = np.argsort(np.abs(flat), kind="stable")
                flat[order[:k]] = 0.0
    else:
        sizes = [weights[n].size for n in names]
        absw = np.concatenate([np.abs(weights[n].reshape(-1)) for n in names])
        k = int(cfg.sparsity * absw.size)
        if k:
            name_rank = np.repeat(np.arange(len(names)), sizes)
            flat_idx = np.concatenate([np.arange(s) for s in sizes])
            order = np.lexsort((flat_idx, name_rank, absw))
            chosen = order[:k]
            offsets = np.cumsum([0] + sizes)
            for i, name in enumerate(names):
                in_tensor = chosen[(chosen >= offsets[i]) & (chosen < offsets[i + 1])] - offsets[i]
                flat = pruned[name].reshape(-1)
                flat[in_tensor] = 0.0
    scope_elements = sum(weights[n].size for n in names)
    zeros = sum(int((pruned[n] == 0).sum()) for n in names)
    report = PruneReport(
        sparsity_target=cfg.sparsity,
        sparsity_achieved=zeros / scope_elements if scope_elements else 0.0,
        pruned_elements=zeros,
        scope_elements=scope_elements,
        dense_bytes=dense_encoded_bytes(weights),
        sparse_bytes=sparse_encoded_bytes(pruned),
    )
    return pruned, report


def dense_encoded_bytes(weights: WeightStore) -> int:
    """Payload size with every element stored as 4 raw bytes."""
    return sum(4 * w.size for w in weights.values())


def sparse_encoded_bytes(weights: WeightStore) -> int:
    """Payload size with prunable tensors stored as presence bitmap + nonzero
    values; exempt tensors (biases) stay dense."""
    total = 0
    prunable = set(prunable_names(weights))
    for name, w in weights.items():
        if name in prunable:
            nnz = int((w != 0).sum())
            total += (w.size + 7) // 8 + 4 * nnz
        else:
            total += 4 * w.size
    return total


def zero_mask(weights: WeightStore) -> dict[str, np.ndarray]:
    """0/1 mask over prunable tensors marking surviving (nonzero) positions."""
    return {n: (weights[n] != 0).astype(weights[n].dtype) for n in prunable_names(weights)}


def fine_tune(
    spec: ModelSpec,
    pruned_weights: WeightStore,
    split: DatasetSplit,
    epochs: int,
    cfg: TrainConfig | None = None,
) -> tuple[WeightStore, list[EpochRecord]]:
    """Recover accuracy after pruning without resurrecting pruned weights.

    Gradients at zeroed positions are discarded every step, so the sparsity
    pattern of the input is preserved exactly. Zero epochs returns the input
    unchanged.
    """
    if epochs == 0:
        return dict(pruned_weights), []
    base = cfg or TrainConfig()
    run_cfg = replace(base, epochs=epochs)
    mask = zero_mask(pruned_weights)
    tuned, history = train(spec, pruned_weights, split, run_cfg, grad_mask=mask)
    for name, m in mask.items():
        tuned[name] = tuned[name] * m  # belt and braces: exact pattern out
    return tuned, history
