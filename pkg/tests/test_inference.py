import numpy as np
import pytest
import torch

from duotoon import colorcue, colorspace as cs, inference
from duotoon.colorcue import HsvAugParams
from duotoon.colorspace import ColorSpace, Image
from duotoon.inference import (
    ColorEdit,
    ControlRequest,
    InferenceModel,
    ModeUnavailableError,
    RegionLevels,
    apply_color_edits,
    cartoonize,
    reference_color_pipeline,
    render,
    spatial_alpha_map,
)
from duotoon.network import LevelRangeError, TextureLevels, build_model

from synthdata import make_photo


@pytest.fixture(scope="module")
def model():
    return InferenceModel(build_model("desk", seed=0), {"version": "desk-test-1"})


@pytest.fixture(scope="module")
def photo():
    return make_photo(3, 64)


def half_mask(size=64, boundary=None):
    m = np.zeros((size, size))
    m[:, (boundary if boundary is not None else size // 2) :] = 1.0
    return m


class TestCartoonize:
    def test_matches_raw_network_path(self, model, photo):
        req = ControlRequest(photo=photo, levels=TextureLevels(2.0, 3.0))
        result = render(req, model)

        cue = colorcue.superpixel_colormap(photo, model.cfg.cue_segments)
        photo_t = torch.from_numpy(cs.rgb_image_to_net_lab(photo).transpose(2, 0, 1)[None]).float()
        cue_t = torch.from_numpy(
            cs.lab_to_net(cs.rgb_to_lab(cue).data).transpose(2, 0, 1)[None]
        ).float()
        with torch.no_grad():
            f = model.generator.encode(photo_t)
            l_map = model.generator.decode_texture(f, TextureLevels(2.0, 3.0))
            ab_map = model.generator.decode_color(f, cue_t)
        assert np.array_equal(result.l_map, l_map[0, 0].numpy())
        assert np.array_equal(result.ab_map, ab_map[0].numpy().transpose(1, 2, 0))

    def test_deterministic(self, model, photo):
        req = ControlRequest(photo=photo, levels=TextureLevels(2.5, 3.5))
        a = cartoonize(req, model)
        b = cartoonize(req, model)
        assert np.array_equal(a.data, b.data)

    def test_zero_mask_edit_is_noop(self, model, photo):
        base = cartoonize(ControlRequest(photo=photo), model)
        edited = cartoonize(
            ControlRequest(
                photo=photo,
                color_edits=[ColorEdit(mask=np.zeros((64, 64)), target_rgb=(1.0, 0.0, 0.0))],
            ),
            model,
        )
        assert np.array_equal(base.data, edited.data)

    def test_output_range_and_shape(self, model, photo):
        out = cartoonize(ControlRequest(photo=photo), model)
        assert out.data.shape == photo.data.shape
        assert out.data.min() >= 0.0 and out.data.max() <= 1.0

    def test_non_multiple_of_four_photo(self, model):
        odd = make_photo(9, 70)
        odd = Image(odd.data[:66, :70], ColorSpace.RGB)
        out = cartoonize(ControlRequest(photo=odd), model)
        assert out.data.shape == (66, 70, 3)

    def test_non_multiple_of_four_with_regions_and_edits(self, model):
        odd = Image(make_photo(10, 70).data[:66, :70], ColorSpace.RGB)
        mask = np.zeros((66, 70))
        mask[:, 35:] = 1.0
        out = cartoonize(
            ControlRequest(
                photo=odd,
                regions=[RegionLevels(mask, TextureLevels(4.0, 2.0))],
                color_edits=[ColorEdit(mask=mask, target_rgb=(0.6, 0.4, 0.3))],
            ),
            model,
        )
        assert out.data.shape == (66, 70, 3)

    def test_mode_dispatch(self, model, photo):
        models = {"preserve": model}
        cartoonize(ControlRequest(photo=photo, mode="preserve"), models)
        with pytest.raises(ModeUnavailableError):
            cartoonize(ControlRequest(photo=photo, mode="target"), models)

    def test_level_validation(self, model, photo):
        with pytest.raises(LevelRangeError):
            cartoonize(ControlRequest(photo=photo, levels=TextureLevels(0.2, 2.0)), model)
        cartoonize(
            ControlRequest(photo=photo, levels=TextureLevels(0.2, 2.0)),
            model,
            allow_extrapolation=True,
        )

    def test_mask_shape_validated(self, photo):
        with pytest.raises(ValueError):
            ControlRequest(photo=photo, regions=[RegionLevels(np.ones((4, 4)), TextureLevels(1, 1))])


class TestSpatialAlpha:
    def test_single_full_region_constant(self):
        maps = spatial_alpha_map(
            [RegionLevels(np.ones((64, 64)), TextureLevels(4.0, 2.0))],
            TextureLevels(1.0, 1.0),
            (16, 16),
            (64, 64),
        )
        assert torch.all(maps[0] == 4.0)
        assert torch.all(maps[1] == 2.0)

    def test_weights_partition_of_unity(self):
        from duotoon.network import level_weights

        alpha_s, _ = spatial_alpha_map(
            [RegionLevels(half_mask(), TextureLevels(4.3, 2.0))],
            TextureLevels(1.7, 1.0),
            (16, 16),
            (64, 64),
        )
        w = level_weights(alpha_s, 5)
        assert torch.allclose(w.sum(dim=0), torch.ones(16, 16, dtype=w.dtype), atol=1e-12)

    def test_hard_edge_transition_width(self):
        # boundary at column 30: only the feature column containing it may mix
        alpha_s, _ = spatial_alpha_map(
            [RegionLevels(half_mask(boundary=30), TextureLevels(5.0, 1.0))],
            TextureLevels(1.0, 1.0),
            (16, 16),
            (64, 64),
        )
        mixed = ((alpha_s > 1.0) & (alpha_s < 5.0)).sum(dim=1)
        assert int(mixed.max()) <= 4  # downsampling footprint bound
        assert torch.all(alpha_s[:, :7] == 1.0)
        assert torch.all(alpha_s[:, 8:] == 5.0)

    def test_later_region_overrides(self):
        full = RegionLevels(np.ones((64, 64)), TextureLevels(2.0, 2.0))
        right = RegionLevels(half_mask(), TextureLevels(4.0, 4.0))
        alpha_s, _ = spatial_alpha_map([full, right], TextureLevels(1.0, 1.0), (16, 16), (64, 64))
        assert torch.all(alpha_s[:, :8] == 2.0)
        assert torch.all(alpha_s[:, 8:] == 4.0)

    def test_global_region_equals_scalar_path(self, model, photo):
        scalar = render(ControlRequest(photo=photo, levels=TextureLevels(2.3, 3.1)), model)
        spatial = render(
            ControlRequest(
                photo=photo,
                levels=TextureLevels(2.3, 3.1),
                regions=[RegionLevels(np.ones((64, 64)), TextureLevels(2.3, 3.1))],
            ),
            model,
        )
        assert np.array_equal(scalar.l_map, spatial.l_map)
        assert np.array_equal(scalar.image.data, spatial.image.data)


class TestApplyColorEdits:
    def test_empty_list_noop(self, photo):
        cue = colorcue.superpixel_colormap(photo, 16)
        assert np.array_equal(apply_color_edits(cue, []).data, cue.data)

    def test_full_mask_rgb_edit_hits_target_mean(self, photo):
        cue = colorcue.superpixel_colormap(photo, 16)
        target = (0.5, 0.45, 0.55)
        out = apply_color_edits(cue, [ColorEdit(mask=np.ones((64, 64)), target_rgb=target)])
        assert np.allclose(out.data.mean(axis=(0, 1)), target, atol=1e-6)

    def test_order_matches_manual_fold(self, photo):
        cue = colorcue.superpixel_colormap(photo, 16)
        e1 = ColorEdit(mask=np.ones((64, 64)), target_rgb=(0.6, 0.4, 0.4))
        e2 = ColorEdit(mask=half_mask(), hsv=HsvAugParams(0.25, 1.1, 1.0))
        folded = apply_color_edits(cue, [e1, e2])
        manual = apply_color_edits(apply_color_edits(cue, [e1]), [e2])
        assert np.array_equal(folded.data, manual.data)

    def test_hsv_edit_preserves_luminance(self, photo):
        cue = colorcue.superpixel_colormap(photo, 16)
        out = apply_color_edits(cue, [ColorEdit(hsv=HsvAugParams(0.3, 1.0, 1.0))])
        l_in = cs.rgb_to_lab(cue).data[..., 0]
        l_out = cs.rgb_to_lab(out).data[..., 0]
        assert np.max(np.abs(l_in - l_out)) <= 1e-3 + 1e-6

    def test_zero_mask_rejected(self, photo):
        cue = colorcue.superpixel_colormap(photo, 16)
        with pytest.raises(ValueError):
            apply_color_edits(cue, [ColorEdit(mask=np.zeros((64, 64)), target_rgb=(1, 0, 0))])

    def test_edit_needs_exactly_one_kind(self):
        with pytest.raises(ValueError):
            ColorEdit(mask=None)
        with pytest.raises(ValueError):
            ColorEdit(mask=None, target_rgb=(1, 0, 0), hsv=HsvAugParams(0, 1, 1))


class TestDecoderSeparation:
    def test_alpha_change_keeps_ab_bitwise(self, model, photo):
        a = render(ControlRequest(photo=photo, levels=TextureLevels(1.0, 1.0)), model)
        b = render(ControlRequest(photo=photo, levels=TextureLevels(5.0, 4.2)), model)
        assert np.array_equal(a.ab_map, b.ab_map)
        assert not np.array_equal(a.l_map, b.l_map)

    def test_color_edit_keeps_l_bitwise(self, model, photo):
        base = render(ControlRequest(photo=photo, levels=TextureLevels(2.0, 2.0)), model)
        edited = render(
            ControlRequest(
                photo=photo,
                levels=TextureLevels(2.0, 2.0),
                color_edits=[ColorEdit(mask=None, target_rgb=(0.8, 0.3, 0.3))],
            ),
            model,
        )
        assert np.array_equal(base.l_map, edited.l_map)
        assert not np.array_equal(base.ab_map, edited.ab_map)


class TestReferenceColorPipeline:
    def test_zero_shift_matches_unedited(self, model):
        flat = Image(np.full((64, 64, 3), 0.4), ColorSpace.RGB)
        base = cartoonize(ControlRequest(photo=flat), model)
        out, palette = reference_color_pipeline(
            photo=flat,
            reference=flat,
            ref_mask=None,
            target_mask=np.ones((64, 64)),
            models=model,
        )
        # palette of a constant image is that color; transfer shift is zero
        assert np.allclose(palette.colors[0], 0.4, atol=1e-7)
        assert np.max(np.abs(out.data - base.data)) < 1e-6

    def test_palette_has_eight_entries_by_default(self, model, photo):
        _, palette = reference_color_pipeline(
            photo=photo,
            reference=make_photo(11, 64),
            ref_mask=None,
            target_mask=np.ones((64, 64)),
            models=model,
        )
        assert len(palette.colors) == 8

    def test_constant_reference_region_padded(self, model, photo):
        ref = Image(np.full((64, 64, 3), 0.25), ColorSpace.RGB)
        _, palette = reference_color_pipeline(
            photo=photo,
            reference=ref,
            ref_mask=np.ones((64, 64)),
            target_mask=np.ones((64, 64)),
            models=model,
        )
        assert palette.padded
        assert np.allclose(palette.colors, 0.25)

    def test_degenerate_reference_mask_rejected(self, model, photo):
        with pytest.raises(ValueError):
            reference_color_pipeline(
                photo=photo,
                reference=photo,
                ref_mask=np.zeros((64, 64)),
                target_mask=np.ones((64, 64)),
                models=model,
            )
