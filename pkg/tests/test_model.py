"""Architecture construction, validation, and prediction behavior."""

import numpy as np
import pytest

from celldx import model, nn
from celldx.errors import ConfigurationError, DimensionError


class TestBuildVgg19:
    def test_full_has_sixteen_conv_layers(self):
        spec = model.build_vgg19((3, 224, 224), "full")
        convs = [l for l in spec.layers if isinstance(l.kind, nn.Conv2D)]
        assert len(convs) == 16

    def test_full_feature_shape_is_512_7_7(self):
        spec = model.build_vgg19((3, 224, 224), "full")
        assert spec.output_shape() == (512, 7, 7)

    def test_mini_feature_shape_is_64_8_8(self):
        spec = model.build_vgg19((3, 64, 64), "mini")
        assert spec.output_shape() == (64, 8, 8)

    def test_block_channel_progression(self):
        spec = model.build_vgg19((3, 224, 224), "full")
        widths = [l.kind.out_channels for l in spec.layers if isinstance(l.kind, nn.Conv2D)]
        assert widths == [64, 64, 128, 128] + [256] * 4 + [512] * 8

    def test_indivisible_input_rejected(self):
        with pytest.raises(ConfigurationError, match="divisible"):
            model.build_vgg19((3, 100, 100), "full")
        with pytest.raises(ConfigurationError, match="divisible"):
            model.build_vgg19((3, 60, 60), "mini")

    def test_unknown_scale_rejected(self):
        with pytest.raises(ConfigurationError):
            model.build_vgg19((3, 64, 64), "medium")


class TestTransferHead:
    def test_head_adds_five_dense_and_one_softmax(self):
        spec = model.append_transfer_head(model.build_vgg19((3, 64, 64), "mini"))
        dense = [l for l in spec.layers if isinstance(l.kind, nn.Dense)]
        softmax = [l for l in spec.layers if isinstance(l.kind, nn.Softmax)]
        assert len(dense) == 5
        assert len(softmax) == 1
        assert isinstance(spec.layers[-1].kind, nn.Softmax)

    def test_default_widths_taper_to_class_count(self):
        spec = model.append_transfer_head(model.build_vgg19((3, 64, 64), "mini"))
        widths = [l.kind.out_features for l in spec.layers if isinstance(l.kind, nn.Dense)]
        assert widths == [512, 256, 128, 64, 2]

    def test_freeze_features_flags_every_feature_layer(self):
        spec = model.append_transfer_head(
            model.build_vgg19((3, 64, 64), "mini"), freeze_features=True
        )
        for layer in spec.layers:
            if layer.name.startswith(("conv", "pool", "relu")):
                assert layer.frozen, layer.name
            if layer.name.startswith("fc") or layer.name == "softmax":
                assert not layer.frozen, layer.name

    def test_frozen_features_excluded_from_backprop(self):
        spec = model.append_transfer_head(
            model.build_vgg19((3, 64, 64), "mini"), freeze_features=True
        )
        weights = nn.init_weights(spec, 0)
        x = np.random.default_rng(0).random((2, 3, 64, 64)).astype(np.float32)
        _, grads = nn.backprop(spec, weights, (x, np.array([0, 1])),
                               rng=np.random.default_rng(1))
        assert grads
        assert all(name.startswith("fc") for name in grads)

    def test_frozen_stack_head_gradients_independent_of_conv_weights(self):
        """Construction where conv weights provably cannot reach the head:
        zero images + zero conv biases make any kernels produce identical
        (zero) features, so head gradients must match exactly."""
        spec = model.append_transfer_head(
            model.build_vgg19((3, 64, 64), "mini"), freeze_features=True
        )
        x = np.zeros((2, 3, 64, 64), np.float32)
        labels = np.array([0, 1])
        grad_sets = []
        for seed in (1, 2):
            weights = nn.init_weights(spec, seed)  # conv kernels differ per seed
            for name in list(weights):
                if name.startswith("fc"):
                    weights[name] = nn.init_weights(spec, 99)[name]  # shared head
            _, grads = nn.backprop(spec, weights, (x, labels),
                                   rng=np.random.default_rng(0))
            grad_sets.append(grads)
        assert sorted(grad_sets[0]) == sorted(grad_sets[1])
        for name in grad_sets[0]:
            assert np.array_equal(grad_sets[0][name], grad_sets[1][name]), name

    def test_appending_twice_rejected(self):
        spec = model.append_transfer_head(model.build_vgg19((3, 64, 64), "mini"))
        with pytest.raises(ConfigurationError, match="head"):
            model.append_transfer_head(spec)

    def test_wrong_width_count_rejected(self):
        base = model.build_vgg19((3, 64, 64), "mini")
        with pytest.raises(ConfigurationError):
            model.append_transfer_head(base, widths=[128, 2])

    def test_final_width_must_match_classes(self):
        base = model.build_vgg19((3, 64, 64), "mini")
        with pytest.raises(ConfigurationError):
            model.append_transfer_head(base, widths=[512, 256, 128, 64, 3])


class TestValidate:
    def test_accepts_both_scales_with_heads(self):
        for scale, size in (("mini", 64), ("full", 224)):
            spec = model.append_transfer_head(model.build_vgg19((3, size, size), scale))
            spec.validate()

    def test_rejects_non_composing_shapes(self):
        from celldx.nn.network import Layer

        spec = model.ModelSpec(
            layers=[
                Layer("f", nn.Flatten()),
                Layer("d", nn.Dense(2)),
                Layer("d2", nn.Dense(2)),
                Layer("p", nn.MaxPool2D(2, 2)),  # pool after flat vector
                Layer("s", nn.Softmax()),
            ],
            input_shape=(3, 8, 8),
        )
        with pytest.raises(DimensionError):
            spec.validate()

    def test_rejects_single_class_table(self):
        spec = model.append_transfer_head(model.build_vgg19((3, 64, 64), "mini"))
        spec.class_labels = ["only"]
        with pytest.raises(ConfigurationError):
            spec.validate()


class TestPredict:
    def test_zero_head_weights_give_uniform_tie_broken_to_class_zero(self, mini_spec):
        weights = nn.init_weights(mini_spec, 0)
        for name in weights:
            if name.startswith("fc5"):
                weights[name] = np.zeros_like(weights[name])
        diagnosis = model.predict(mini_spec, weights,
                                  np.random.default_rng(0).random((3, 64, 64)).astype(np.float32))
        assert diagnosis.label == "parasitized"
        assert diagnosis.confidence == pytest.approx(0.5)

    def test_confidence_at_least_one_over_classes(self, mini_spec, mini_weights):
        rng = np.random.default_rng(5)
        for _ in range(5):
            img = rng.random((3, 64, 64)).astype(np.float32)
            d = model.predict(mini_spec, mini_weights, img)
            assert 0.5 <= d.confidence <= 1.0
            assert d.label in ("parasitized", "uninfected")

    def test_wrong_shape_rejected(self, mini_spec, mini_weights):
        with pytest.raises(DimensionError):
            model.predict(mini_spec, mini_weights, np.zeros((3, 32, 32), np.float32))

    def test_label_invariant_under_positive_logit_rescaling(self, mini_spec, mini_weights):
        img = np.random.default_rng(8).random((3, 64, 64)).astype(np.float32)
        base = model.predict(mini_spec, mini_weights, img)
        scaled = dict(mini_weights)
        scaled["fc5/weight"] = mini_weights["fc5/weight"] * 3.0
        scaled["fc5/bias"] = mini_weights["fc5/bias"] * 3.0
        assert model.predict(mini_spec, scaled, img).label == base.label

    def test_inference_is_threadsafe_on_shared_weights(self, mini_spec, mini_weights):
        import concurrent.futures

        img = np.random.default_rng(3).random((3, 64, 64)).astype(np.float32)
        expected = model.predict(mini_spec, mini_weights, img)
        with concurrent.futures.ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(
                lambda _: model.predict(mini_spec, mini_weights, img), range(16)
            ))
        assert all(r == expected for r in results)


class TestSpecSidecar:
    def test_roundtrip_preserves_architecture(self, tmp_path, mini_spec):
        path = tmp_path / "m.spec.json"
        model.save_spec(mini_spec, path)
        loaded = model.load_spec(path)
        assert loaded.input_shape == mini_spec.input_shape
        assert loaded.class_labels == mini_spec.class_labels
        assert [l.name for l in loaded.layers] == [l.name for l in mini_spec.layers]
        assert [l.kind for l in loaded.layers] == [l.kind for l in mini_spec.layers]
        assert [l.frozen for l in loaded.layers] == [l.frozen for l in mini_spec.layers]
        loaded.validate()
