"""Unit tests for the micro-ViT: layout, accounting, patches and forward/backward."""

import numpy as np
import pytest

from src.python.gqkva.attention.accounting import attention_flops
from src.python.gqkva.bench.reference import PUBLISHED_ROWS
from src.python.gqkva.core.gradcheck import finite_diff_grad, max_relative_error
from src.python.gqkva.core.tensor import Tensor
from src.python.gqkva.errors import ConfigurationError, DimensionError
from src.python.gqkva.model.config import ViTConfig, preset_config
from src.python.gqkva.model.vit import (
    count_params,
    init_weights,
    model_flops,
    patchify,
    unpatchify,
    vit_forward,
    weight_layout,
    weights_from_arrays,
)
from src.python.gqkva.training.loss import cross_entropy
from src.python.gqkva.training.trainer import loss_and_grads

# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------


class TestConfig:
    """Tests for ViTConfig and presets."""

    def test_vit_small_preset(self):
        """The vit-small preset has the published shape."""
        cfg = preset_config("vit-small")
        assert (cfg.d, cfg.depth, cfg.h, cfg.seq_len) == (384, 12, 6, 197)
        assert cfg.grouping.canonical == "mha"

    def test_patch_must_divide_image(self):
        """The patch size must divide the image size."""
        with pytest.raises(ConfigurationError):
            ViTConfig(image_size=10, patch_size=4)

    def test_heads_must_divide_width(self):
        """h must divide d."""
        with pytest.raises(ConfigurationError):
            ViTConfig(d=50, h=6)

    def test_dropout_rejected(self):
        """Only a zero dropout rate is supported."""
        with pytest.raises(ConfigurationError):
            ViTConfig(drop_rate=0.1)

    def test_unknown_preset(self):
        """Unknown preset names are rejected."""
        with pytest.raises(ConfigurationError):
            preset_config("vit-huge")

    def test_scheme_must_match_dims(self, tiny_cfg):
        """A scheme built for other dimensions is refused."""
        other = preset_config("vit-small", "gqa-2").grouping
        with pytest.raises(ConfigurationError):
            tiny_cfg.with_scheme(other)

    def test_dict_form_uses_canonical_scheme(self, tiny_cfg):
        """The dict form stores the canonical scheme name and round-trips."""
        cfg = tiny_cfg.with_scheme("GQKVA-3.2")
        data = cfg.to_dict()
        assert data["scheme"] == "gqkva-3.2"
        assert ViTConfig.from_dict(data) == cfg

    def test_dict_form_rejects_unknown_fields(self, tiny_cfg):
        """Unknown fields in the dict form are rejected."""
        data = tiny_cfg.to_dict()
        data["dropout"] = 0.0
        with pytest.raises(ConfigurationError):
            ViTConfig.from_dict(data)


# ---------------------------------------------------------------------------
# Parameter accounting
# ---------------------------------------------------------------------------


class TestCountParams:
    """Tests for count_params."""

    def test_vit_small_mha_total(self):
        """ViT-small with MHA has 22,050,664 parameters."""
        assert count_params(preset_config("vit-small")).total == 22_050_664

    @pytest.mark.parametrize("row", PUBLISHED_ROWS, ids=lambda r: r.scheme)
    def test_published_columns(self, row):
        """Millions and MiB match the published columns."""
        report = count_params(preset_config("vit-small", row.scheme))
        assert report.millions == pytest.approx(row.params_m, abs=0.02)
        assert report.total_size_mib == pytest.approx(row.size_mb, abs=0.05)

    @pytest.mark.parametrize("scheme", ["mha", "mqa", "gkva-2", "gqkva-2.3"])
    def test_matches_initialised_elements(self, tiny_cfg, scheme):
        """The count equals the number of initialised elements."""
        cfg = tiny_cfg.with_scheme(scheme)
        assert init_weights(cfg, 0).element_count == count_params(cfg).total

    def test_components_sum_to_total(self, tiny_cfg):
        """Component counts add up to the total."""
        report = count_params(tiny_cfg)
        assert sum(report.components().values()) == report.total

    def test_only_attention_varies_with_scheme(self, tiny_cfg):
        """Only the attention component depends on the scheme."""
        a = count_params(tiny_cfg).components()
        b = count_params(tiny_cfg.with_scheme("mqa")).components()
        assert {k for k in a if a[k] != b[k]} == {"attention"}
        assert b["attention"] < a["attention"]


class TestModelFlops:
    """Tests for model_flops."""

    def test_scales_with_batch(self, tiny_cfg):
        """FLOPs scale linearly with batch size."""
        assert model_flops(tiny_cfg, 4) == 4 * model_flops(tiny_cfg)

    def test_fewer_flops_for_shared_projections(self, tiny_cfg):
        """Sharing projections lowers FLOPs."""
        assert model_flops(tiny_cfg.with_scheme("mqa")) < model_flops(tiny_cfg)

    def test_batch_must_be_positive(self, tiny_cfg):
        """A zero batch is rejected."""
        with pytest.raises(ConfigurationError):
            model_flops(tiny_cfg, 0)

    def test_attention_share_counts_every_block(self, tiny_cfg):
        """The attention share is one layer's count times the depth."""
        mqa = tiny_cfg.with_scheme("mqa")
        n = tiny_cfg.seq_len
        per_layer = (
            attention_flops(n, tiny_cfg.grouping).total - attention_flops(n, mqa.grouping).total
        )
        assert model_flops(tiny_cfg) - model_flops(mqa) == tiny_cfg.depth * per_layer


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------


class TestWeights:
    """Tests for init_weights and ViTWeights."""

    def test_same_seed_is_byte_identical(self, tiny_cfg):
        """The same seed gives byte-identical weights."""
        a, b = init_weights(tiny_cfg, 5), init_weights(tiny_cfg, 5)
        assert all(a[n].to_bytes() == b[n].to_bytes() for n in a)

    def test_different_seed_differs(self, tiny_cfg):
        """A different seed changes the weights."""
        a, b = init_weights(tiny_cfg, 5), init_weights(tiny_cfg, 6)
        assert a["head.w"].to_bytes() != b["head.w"].to_bytes()

    def test_truncated_normal_bounds(self, tiny_cfg):
        """Matrices stay within two standard deviations."""
        w = init_weights(tiny_cfg, 0)["blocks.0.mlp.w1"].numpy()
        assert np.abs(w).max() <= 0.04 + 1e-7

    def test_names_follow_layout(self, tiny_cfg):
        """Weight names follow the layout order."""
        w = init_weights(tiny_cfg, 0)
        assert list(w) == [spec.name for spec in weight_layout(tiny_cfg)]
        w.check(tiny_cfg)

    def test_check_rejects_other_scheme(self, tiny_cfg):
        """Weights for another scheme fail the check."""
        with pytest.raises(DimensionError):
            init_weights(tiny_cfg.with_scheme("mqa"), 0).check(tiny_cfg)

    def test_updated_rejects_shape_change(self, tiny_cfg):
        """Replacing a weight with a different shape is refused."""
        w = init_weights(tiny_cfg, 0)
        with pytest.raises(DimensionError):
            w.updated({"head.b": Tensor(np.zeros(3))})

    def test_decay_excludes_vectors_and_embeddings(self, tiny_cfg):
        """Biases, norms and embeddings are not decayed."""
        decayed = {spec.name for spec in weight_layout(tiny_cfg) if spec.decay}
        assert "cls_token" not in decayed and "pos_embed" not in decayed
        assert all(not n.endswith((".b", "gamma", "beta")) for n in decayed)
        assert "blocks.1.attn.w_q" in decayed


# ---------------------------------------------------------------------------
# Patches
# ---------------------------------------------------------------------------


class TestPatchify:
    """Tests for patchify and unpatchify."""

    def test_shape(self, rng):
        """Patches are (batch, patches, channels x patch area)."""
        x = Tensor(rng.standard_normal((2, 3, 8, 8)))
        assert patchify(x, 4).shape == (2, 4, 48)

    def test_first_patch_is_channel_major(self):
        """Each patch is flattened channel-major then row-major."""
        img = np.arange(2 * 4 * 4, dtype=np.float64).reshape(1, 2, 4, 4)
        patches = patchify(Tensor(img), 2).numpy()
        expected = np.concatenate([img[0, c, :2, :2].reshape(-1) for c in range(2)])
        np.testing.assert_array_equal(patches[0, 0], expected)

    def test_inverse(self, rng):
        """unpatchify undoes patchify exactly."""
        x = Tensor(rng.standard_normal((2, 3, 8, 8)))
        back = unpatchify(patchify(x, 2), 2, 3, 8, 8)
        np.testing.assert_array_equal(back.numpy(), x.numpy())

    def test_indivisible_image_rejected(self, rng):
        """An image the patch does not divide is rejected."""
        with pytest.raises(DimensionError):
            patchify(Tensor(rng.standard_normal((1, 1, 6, 6))), 4)


# ---------------------------------------------------------------------------
# Forward and gradients
# ---------------------------------------------------------------------------


class TestForward:
    """Tests for vit_forward."""

    def test_logit_shape(self, tiny_cfg, rng):
        """Logits are (batch, classes) and keep the input element type."""
        w = init_weights(tiny_cfg, 0)
        images = Tensor(rng.standard_normal((3, 3, 16, 16)), dtype="f32")
        logits = vit_forward(tiny_cfg, w, images)
        assert logits.shape == (3, tiny_cfg.num_classes)
        assert logits.dtype.value == "f32"

    def test_wrong_image_shape_rejected(self, tiny_cfg, rng):
        """Images of the wrong size are rejected."""
        w = init_weights(tiny_cfg, 0)
        with pytest.raises(DimensionError):
            vit_forward(tiny_cfg, w, Tensor(rng.standard_normal((1, 3, 8, 8))))

    @pytest.mark.parametrize("scheme", ["mha", "gqa-2", "gkva-3", "gqkva-3.2"])
    def test_every_scheme_runs(self, tiny_cfg, rng, scheme):
        """Every scheme produces finite logits."""
        cfg = tiny_cfg.with_scheme(scheme)
        logits = vit_forward(cfg, init_weights(cfg, 1), Tensor(rng.standard_normal((2, 3, 16, 16))))
        assert np.all(np.isfinite(logits.numpy()))

    def test_batch_rows_are_independent(self, tiny_cfg, rng):
        """Each image's logits do not depend on the rest of the batch."""
        w = init_weights(tiny_cfg, 0, "f64")
        images = rng.standard_normal((4, 3, 16, 16))
        full = vit_forward(tiny_cfg, w, Tensor(images)).numpy()
        single = vit_forward(tiny_cfg, w, Tensor(images[2:3])).numpy()
        np.testing.assert_allclose(full[2:3], single, atol=1e-12)


class TestGradients:
    """Tests for whole-model gradients."""

    @pytest.mark.parametrize("scheme", ["mha", "gqkva-2.3"])
    @pytest.mark.parametrize("seed", range(5))
    def test_loss_gradient_matches_finite_differences(self, micro_cfg, scheme, seed):
        """Loss gradients for every weight agree with central differences."""
        cfg = micro_cfg.with_scheme(scheme)
        rng = np.random.default_rng([11, seed])
        arrays = [
            rng.normal(0.0, 0.3, spec.shape) + (1.0 if spec.init == "ones" else 0.0)
            for spec in weight_layout(cfg)
        ]
        weights = weights_from_arrays(cfg, arrays, "f64")
        images = Tensor(rng.standard_normal((2, 1, 4, 4)))
        labels = np.array([0, 2])
        _, grads = loss_and_grads(cfg, weights, images, labels)

        for name in weights:
            if name.endswith("attn.b_k"):
                # Softmax is shift invariant along the key axis.
                assert np.abs(grads[name].numpy()).max() < 1e-10
                continue

            def loss(x, name=name):
                logits = vit_forward(cfg, weights.updated({name: x}), images)
                return cross_entropy(logits, labels)[0]

            numeric = finite_diff_grad(loss, weights[name])
            assert max_relative_error(grads[name], numeric, floor=1e-6) < 1e-5, name
