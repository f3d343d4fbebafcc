import os

import numpy as np
import pytest

from celldx import model as model_mod
from celldx import nn
from celldx.data import dataset as dataset_mod
from celldx.data import synthetic

NIH_ENV = "CELLDX_NIH_DIR"


def cell_corpus(n: int, seed: int = 42, size: int = 64):
    """Real NIH samples when a corpus directory is configured, otherwise the
    synthetic stand-in corpus. Both flow through the same pipeline."""
    root = os.environ.get(NIH_ENV)
    if root:
        samples, _ = dataset_mod.load_dataset(root, image_size=size)
        return dataset_mod.stratified_subset(samples, n, seed=seed)
    return synthetic.make_cell_dataset(n, seed=seed, size=size)


@pytest.fixture(scope="session")
def mini_spec():
    spec = model_mod.build_vgg19((3, 64, 64), "mini")
    return model_mod.append_transfer_head(spec, freeze_features=False)


@pytest.fixture(scope="session")
def mini_weights(mini_spec):
    return nn.init_weights(mini_spec, seed=42)


@pytest.fixture(scope="session")
def tiny_corpus():
    return cell_corpus(16, seed=7)


def to_f64(weights):
    return {k: v.astype(np.float64) for k, v in weights.items()}
