"""Augmentation determinism, identity behavior, and geometric sanity."""

import numpy as np
import pytest

import celldx.data.augmentation as aug
from celldx.errors import ConfigurationError


def _disk_image(size=64, radius=20):
    """Centered radial gradient disk; rotation-invariant about the center."""
    ys, xs = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    c = (size - 1) / 2
    r = np.sqrt((ys - c) ** 2 + (xs - c) ** 2)
    img = np.clip(1.0 - r / radius, 0.0, 1.0).astype(np.float32)
    return np.stack([img, img * 0.5, img * 0.25])


def test_zero_config_is_pixel_identical():
    rng = np.random.default_rng(0)
    img = rng.random((3, 32, 32)).astype(np.float32)
    out = aug.augment(img, aug.IDENTITY_AUGMENT, np.random.default_rng(1))
    assert np.array_equal(out, img)


def test_flip_of_symmetric_image_is_identity():
    img = _disk_image()
    cfg = aug.AugmentConfig(0.0, 0.0, 0.0, flip_probability=1.0)
    out = aug.augment(img, cfg, np.random.default_rng(2))
    assert np.array_equal(out, img)


def test_flip_reverses_columns_exactly():
    rng = np.random.default_rng(3)
    img = rng.random((1, 8, 8)).astype(np.float32)
    out = aug.apply_affine(img, flip=True)
    assert np.array_equal(out, img[:, :, ::-1])


def test_fixed_seed_reproduces_bit_identically():
    img = np.random.default_rng(4).random((3, 48, 48)).astype(np.float32)
    cfg = aug.AugmentConfig()
    a = aug.augment(img, cfg, aug.sample_rng(42, 3, 17))
    b = aug.augment(img, cfg, aug.sample_rng(42, 3, 17))
    assert np.array_equal(a, b)
    c = aug.augment(img, cfg, aug.sample_rng(42, 3, 18))
    assert not np.array_equal(a, c)


def test_rotation_inverse_recovers_interior():
    img = _disk_image()
    fwd = aug.apply_affine(img, angle_degrees=23.0)
    back = aug.apply_affine(fwd, angle_degrees=-23.0)
    interior = (slice(None), slice(16, 48), slice(16, 48))
    assert np.abs(back[interior] - img[interior]).max() < 0.1


def test_translation_moves_content():
    img = np.zeros((1, 16, 16), np.float32)
    img[0, 8, 8] = 1.0
    out = aug.apply_affine(img, shift_x=3.0, shift_y=-2.0)
    assert out[0, 6, 11] == pytest.approx(1.0, abs=1e-6)


def test_zoom_about_center_keeps_center_pixel():
    img = _disk_image(size=33)
    out = aug.apply_affine(img, zoom=1.2)
    assert out[0, 16, 16] == pytest.approx(img[0, 16, 16], abs=1e-5)


def test_output_stays_in_unit_range_and_label_semantics_hold():
    rng = np.random.default_rng(7)
    cfg = aug.AugmentConfig(rotation_degrees=40, shift=0.2, zoom=0.3, flip_probability=0.5)
    for i in range(25):
        img = rng.random((3, 24, 24)).astype(np.float32)
        out = aug.augment(img, cfg, aug.sample_rng(1, 0, i))
        assert out.shape == img.shape
        assert out.min() >= 0.0 and out.max() <= 1.0


def test_consumed_draws_do_not_depend_on_config_zeros():
    """A zeroed field must not shift the random stream of later fields."""
    img = np.random.default_rng(8).random((3, 16, 16)).astype(np.float32)
    full = aug.AugmentConfig(10.0, 0.1, 0.1, 0.0)
    rng1 = aug.sample_rng(0, 0, 0)
    rng2 = aug.sample_rng(0, 0, 0)
    aug.augment(img, full, rng1)
    aug.augment(img, aug.AugmentConfig(0.0, 0.1, 0.1, 0.0), rng2)
    # both consumed the same number of draws
    assert rng1.random() == rng2.random()


def test_negative_parameters_rejected():
    with pytest.raises(ConfigurationError):
        aug.AugmentConfig(rotation_degrees=-1)
    with pytest.raises(ConfigurationError):
        aug.AugmentConfig(flip_probability=1.5)
