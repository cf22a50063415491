"""Interactive application of a trained model: continuous texture levels,
mask-based spatial control, color-cue edits and the two color modes.

Texture edits can never change the ab output and color edits can never
change the L output: the decoders only share the (unchanged) encoder
feature, so the separation is architectural.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from . import colorcue, colorspace as cs
from .colorcue import HsvAugParams, palette_from_pixels
from .colorspace import ColorSpace, Image
from .network import DOWNSAMPLE_FACTOR, CartoonModel, TextureLevels
from .network.model import load_checkpoint

MODES = ("preserve", "target")


class ModeUnavailableError(KeyError):
    """No checkpoint loaded for the requested color mode."""


@dataclass
class ColorEdit:
    """Either a target-color transfer or an HSV nudge, over a soft mask.

    A None mask means the full image.
    """

    mask: np.ndarray | None = None
    target_rgb: tuple[float, float, float] | None = None
    hsv: HsvAugParams | None = None

    def __post_init__(self):
        if (self.target_rgb is None) == (self.hsv is None):
            raise ValueError("exactly one of target_rgb or hsv must be set")


@dataclass
class RegionLevels:
    mask: np.ndarray
    levels: TextureLevels


@dataclass
class ControlRequest:
    photo: Image
    levels: TextureLevels = field(default_factory=lambda: TextureLevels(1.0, 1.0))
    regions: list[RegionLevels] | None = None
    color_edits: list[ColorEdit] = field(default_factory=list)
    mode: str = "preserve"

    def __post_init__(self):
        self.photo.require(ColorSpace.RGB)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        shape = self.photo.data.shape[:2]
        for region in self.regions or []:
            if region.mask.shape != shape:
                raise ValueError("region mask shape must match photo")
        for edit in self.color_edits:
            if edit.mask is not None and edit.mask.shape != shape:
                raise ValueError("edit mask shape must match photo")


class InferenceModel:
    """One loaded generator (a style in one color mode), immutable after load."""

    def __init__(self, model: CartoonModel, manifest: dict | None = None):
        model.eval()
        for p in model.generator.parameters():
            p.requires_grad_(False)
        self.generator = model.generator
        self.cfg = model.cfg
        self.manifest = manifest or {}

    @classmethod
    def from_checkpoint(cls, path) -> "InferenceModel":
        manifest, model = load_checkpoint(path)
        return cls(model, manifest)

    @property
    def version(self) -> str:
        return str(self.manifest.get("version", "untracked"))

    @property
    def n_levels(self) -> int:
        return self.cfg.n_levels


def _resolve_mode(models, mode: str) -> InferenceModel:
    if isinstance(models, InferenceModel):
        return models
    try:
        return models[mode]
    except KeyError:
        raise ModeUnavailableError(f"no checkpoint loaded for mode {mode!r}") from None


def _pad_to_multiple(arr: np.ndarray, multiple: int) -> tuple[np.ndarray, tuple[int, int]]:
    h, w = arr.shape[:2]
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph == 0 and pw == 0:
        return arr, (h, w)
    pad = [(0, ph), (0, pw)] + [(0, 0)] * (arr.ndim - 2)
    return np.pad(arr, pad, mode="edge"), (h, w)


def spatial_alpha_map(
    regions: list[RegionLevels],
    default: TextureLevels,
    feature_shape: tuple[int, int],
    image_shape: tuple[int, int],
) -> tuple[torch.Tensor, torch.Tensor]:
    """Per-feature-pixel (alpha_s, alpha_a) maps.

    Region levels alpha-composite over the default (later regions override
    earlier ones where masks overlap), then area-average down to the feature
    grid.  Weights derived from the maps stay a partition of unity pointwise.
    """
    h, w = image_shape
    alpha_s = np.full((h, w), default.alpha_s, dtype=np.float64)
    alpha_a = np.full((h, w), default.alpha_a, dtype=np.float64)
    for region in regions:
        m = np.clip(np.asarray(region.mask, dtype=np.float64), 0.0, 1.0)
        alpha_s = m * region.levels.alpha_s + (1.0 - m) * alpha_s
        alpha_a = m * region.levels.alpha_a + (1.0 - m) * alpha_a

    maps = torch.from_numpy(np.stack([alpha_s, alpha_a])[None])
    pooled = torch.nn.functional.adaptive_avg_pool2d(maps, feature_shape)[0]
    return pooled[0], pooled[1]


def apply_color_edits(cue: Image, edits: list[ColorEdit]) -> Image:
    """Fold the edits over the cue in list order."""
    cue.require(ColorSpace.RGB)
    for edit in edits:
        mask = edit.mask
        if mask is None:
            mask = np.ones(cue.data.shape[:2])
        mask = np.clip(np.asarray(mask, dtype=np.float64), 0.0, 1.0)
        if mask.sum() == 0:
            raise ValueError("color edit mask selects no pixels")
        if edit.target_rgb is not None:
            cue = colorcue.palette_transfer(cue, mask, np.asarray(edit.target_rgb))
        else:
            shifted = colorcue.hsv_shift_image(cue, edit.hsv)
            blended = mask[..., None] * shifted.data + (1.0 - mask[..., None]) * cue.data
            cue = Image(blended, ColorSpace.RGB)
    return cue


@dataclass
class RenderResult:
    image: Image
    l_map: np.ndarray  # (H, W) normalized texture output
    ab_map: np.ndarray  # (H, W, 2) normalized color output
    cue: Image  # the edited cue actually fed to the color decoder


def render(req: ControlRequest, models, allow_extrapolation: bool = False) -> RenderResult:
    """Run the full pipeline and keep the decoder outputs inspectable."""
    model = _resolve_mode(models, req.mode)
    n = model.n_levels
    req.levels.validate(n, allow_extrapolation)
    for region in req.regions or []:
        region.levels.validate(n, allow_extrapolation)

    cue = colorcue.superpixel_colormap(req.photo, model.cfg.cue_segments)
    # an all-zero mask is a request-level no-op; apply_color_edits proper
    # rejects it (no region to average over)
    effective = [e for e in req.color_edits if e.mask is None or np.asarray(e.mask).sum() > 0]
    cue = apply_color_edits(cue, effective)

    photo_net, orig = _pad_to_multiple(cs.rgb_image_to_net_lab(req.photo), DOWNSAMPLE_FACTOR)
    cue_net, _ = _pad_to_multiple(cs.lab_to_net(cs.rgb_to_lab(cue).data), DOWNSAMPLE_FACTOR)

    photo_t = torch.from_numpy(photo_net.transpose(2, 0, 1)[None]).float()
    cue_t = torch.from_numpy(cue_net.transpose(2, 0, 1)[None]).float()

    with torch.no_grad():
        f = model.generator.encode(photo_t)
        if req.regions:
            regions = [
                RegionLevels(_pad_to_multiple(r.mask, DOWNSAMPLE_FACTOR)[0], r.levels)
                for r in req.regions
            ]
            alpha_s, alpha_a = spatial_alpha_map(
                regions, req.levels, tuple(f.shape[-2:]), photo_net.shape[:2]
            )
            l_map = model.generator.decode_texture(f, (alpha_s, alpha_a))
        else:
            l_map = model.generator.decode_texture(f, req.levels)
        ab_map = model.generator.decode_color(f, cue_t)

    h, w = orig
    l_np = l_map[0, 0].numpy()[:h, :w]
    ab_np = ab_map[0].numpy().transpose(1, 2, 0)[:h, :w]
    merged = np.concatenate([l_np[..., None], ab_np], axis=2).astype(np.float64)
    image = cs.net_lab_to_rgb_image(merged)
    return RenderResult(image=image, l_map=l_np, ab_map=ab_np, cue=cue)


def cartoonize(req: ControlRequest, models, allow_extrapolation: bool = False) -> Image:
    """Photo -> cartoonized RGB image under the requested controls."""
    return render(req, models, allow_extrapolation).image


def reference_color_pipeline(
    photo: Image,
    reference: Image,
    ref_mask: np.ndarray | None,
    target_mask: np.ndarray,
    models,
    palette_index: int = 0,
    levels: TextureLevels | None = None,
    mode: str = "preserve",
    palette_size: int = colorcue.DEFAULT_PALETTE_SIZE,
    seed: int = 0,
) -> tuple[Image, colorcue.Palette]:
    """Steer a region's color using a palette drawn from a reference image.

    The palette comes from the reference (restricted to ref_mask when given);
    the chosen palette entry is transferred onto target_mask, then the photo
    is cartoonized with that edit.
    """
    reference.require(ColorSpace.RGB)
    pixels = reference.data.reshape(-1, 3)
    if ref_mask is not None:
        keep = np.asarray(ref_mask, dtype=np.float64).reshape(-1) > 0.5
        pixels = pixels[keep]
        if pixels.size == 0:
            raise ValueError("reference mask selects no pixels")
    palette = palette_from_pixels(pixels, k=palette_size, seed=seed)
    if not 0 <= palette_index < len(palette.colors):
        raise ValueError(f"palette index {palette_index} outside 0..{len(palette.colors) - 1}")

    edit = ColorEdit(mask=target_mask, target_rgb=tuple(palette.colors[palette_index]))
    req = ControlRequest(
        photo=photo,
        levels=levels or TextureLevels(1.0, 1.0),
        color_edits=[edit],
        mode=mode,
    )
    return cartoonize(req, models), palette
